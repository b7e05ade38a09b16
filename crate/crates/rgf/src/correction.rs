//! Fully-corrective weight optimization: damped Newton coordinate descent
//! over every leaf weight of the forest, including the penalty terms.
//!
//! Each coordinate step moves one leaf weight by
//! `eta * (-(G + R') / (H + R''))`, where `G` and `H` sum the averaged
//! loss derivatives over the leaf's instances and `R'`, `R''` are the
//! penalty derivatives in that weight on fixed structure. Coordinates are
//! visited in creation order (trees oldest first, nodes in creation
//! order); derivative buffers and regularizer state are kept exact after
//! every step, so later coordinates always see the current residuals.

use crate::error::{Error, Result};
use crate::reg;
use crate::trainer::{Engine, CURVATURE_EPS};

#[derive(Clone, Copy, Debug)]
pub struct CorrectionConfig {
    /// Damping factor applied to every Newton coordinate step.
    pub eta: f64,
    /// Maximum number of full passes over all leaves per correction.
    pub passes: u32,
    /// Stop early when a pass changes `Q` by less than this, relative to
    /// the objective's magnitude.
    pub tol: f64,
}

impl Default for CorrectionConfig {
    fn default() -> Self {
        CorrectionConfig {
            eta: 0.5,
            passes: 10,
            tol: 1e-6,
        }
    }
}

impl CorrectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "correction eta must be in (0, 1] (got {})",
                self.eta
            )));
        }
        if self.passes == 0 {
            return Err(Error::InvalidConfig(
                "correction passes must be positive".into(),
            ));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidConfig(
                "correction tolerance must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// A full correction is due every `interval` newly created leaves.
pub fn should_correct(new_leaves_since_last: usize, interval: usize) -> bool {
    new_leaves_since_last >= interval
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CorrectionSummary {
    pub sweeps: u32,
    pub q_initial: f64,
    pub q_final: f64,
}

/// Run one fully-corrective optimization of all leaf weights. When
/// `trace` is given, the exact `Q` after each sweep is appended to it.
pub(crate) fn correct_weights(
    engine: &mut Engine,
    lambda: f64,
    cfg: &CorrectionConfig,
    mut trace: Option<&mut Vec<f64>>,
) -> CorrectionSummary {
    engine.ensure_sensitivities();
    let q_initial = engine.q(lambda);
    let mut q_prev = q_initial;
    let mut sweeps = 0;

    for _ in 0..cfg.passes {
        for tree_idx in 0..engine.trees.len() {
            let node_count = engine.trees[tree_idx].len() as u32;
            for leaf in 0..node_count {
                if !engine.trees[tree_idx].node(leaf).is_leaf() {
                    continue;
                }
                let mut g = 0.0;
                let mut h = 0.0;
                for &r in &engine.leaf_rows[tree_idx][leaf as usize] {
                    g += engine.buffers.grad[r as usize];
                    h += engine.buffers.hess[r as usize];
                }
                let (pen_first, pen_second) = reg::derivatives_at_leaf(
                    &engine.trees[tree_idx],
                    &engine.reg_cfg,
                    &engine.states[tree_idx],
                    leaf,
                    lambda,
                );
                let denom = h + pen_second;
                if !(denom > CURVATURE_EPS) {
                    continue;
                }
                let delta = cfg.eta * (-(g + pen_first)) / denom;
                if delta == 0.0 {
                    continue;
                }
                engine.apply_leaf_delta(tree_idx, leaf, delta);
            }
        }
        sweeps += 1;
        let q_now = engine.q(lambda);
        if let Some(t) = trace.as_deref_mut() {
            t.push(q_now);
        }
        let converged = (q_prev - q_now).abs() <= cfg.tol * q_prev.abs().max(1e-12);
        q_prev = q_now;
        if converged {
            break;
        }
    }

    CorrectionSummary {
        sweeps,
        q_initial,
        q_final: q_prev,
    }
}
