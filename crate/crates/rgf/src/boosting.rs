//! Gradient-boosting baselines sharing the forest representation and the
//! split machinery of the greedy trainer.
//!
//! Every variant starts from the constant model `h0` minimizing the loss,
//! then per round fits a best-first least-squares regression tree to the
//! negative gradients and turns it into an additive component:
//!
//! * [`BoostVariant::Generic`] — one global coefficient per round found by
//!   a Newton line search along the fitted tree, scaled by the shrinkage;
//! * [`BoostVariant::Gbdt`] — a separate Newton step per leaf, scaled by
//!   the shrinkage;
//! * [`BoostVariant::FullyCorrective`] — per-leaf Newton steps without
//!   shrinkage, followed by a fully-corrective re-optimization of every
//!   leaf weight in the forest (undamped, unpenalized coordinate descent).
//!
//! The base learner uses the same threshold midpoints, `<=` orientation
//! and tie-breaking as the greedy trainer, so structural comparisons
//! between the methods are apples-to-apples. Training stops early when a
//! round cannot produce any split.

use std::time::Instant;

use crate::correction::{correct_weights, CorrectionConfig};
use crate::dataset::{build_sorted_index, Dataset, SortedFeatureIndex};
use crate::error::{Error, Result};
use crate::growth::{best_split_of_leaf, newton_delta, partition_rows, CandidateSplit};
use crate::loss::LossKind;
use crate::model::{Forest, Tree};
use crate::reg::{self, RegConfig};
use crate::trainer::{evaluate, Engine, Metric};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoostVariant {
    Generic,
    Gbdt,
    FullyCorrective,
}

impl BoostVariant {
    pub fn parse(s: &str) -> Result<BoostVariant> {
        match s {
            "generic" => Ok(BoostVariant::Generic),
            "gbdt" => Ok(BoostVariant::Gbdt),
            "fc" => Ok(BoostVariant::FullyCorrective),
            other => Err(Error::InvalidConfig(format!(
                "unknown boosting variant {other:?} (expected generic, gbdt or fc)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BoostVariant::Generic => "generic",
            BoostVariant::Gbdt => "gbdt",
            BoostVariant::FullyCorrective => "fc",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BoostConfig {
    pub loss: LossKind,
    pub variant: BoostVariant,
    /// Leaves per tree (J).
    pub tree_leaves: usize,
    /// Boosting rounds (K).
    pub num_trees: usize,
    /// Shrinkage (s); ignored by the fully-corrective variant.
    pub shrinkage: f64,
    pub min_node: usize,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            loss: LossKind::Square,
            variant: BoostVariant::Gbdt,
            tree_leaves: 10,
            num_trees: 100,
            shrinkage: 0.1,
            min_node: 1,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tree_leaves < 2 {
            return Err(Error::InvalidConfig("tree_leaves must be at least 2".into()));
        }
        if self.num_trees == 0 {
            return Err(Error::InvalidConfig("num_trees must be positive".into()));
        }
        if !(self.shrinkage >= 0.0) {
            return Err(Error::InvalidConfig("shrinkage must be non-negative".into()));
        }
        if self.min_node == 0 {
            return Err(Error::InvalidConfig("min_node must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct BoostRound {
    pub round: usize,
    pub train_loss: f64,
    pub monitor: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct BoostReport {
    pub rounds: Vec<BoostRound>,
    pub final_train_loss: f64,
    pub train_seconds: f64,
}

/// The sweep cap and tolerance of the fully-corrective variant's
/// re-optimization.
fn fc_correction() -> CorrectionConfig {
    CorrectionConfig {
        eta: 1.0,
        passes: 100,
        tol: 1e-10,
    }
}

/// Train a boosted forest. The returned forest contains the intercept as
/// a single-leaf tree (when nonzero) followed by one tree per round.
pub fn train_boosted(
    data: &Dataset,
    config: &BoostConfig,
    monitor: Option<&Dataset>,
) -> Result<(Forest, BoostReport)> {
    config.validate()?;
    let monitor_metric = match config.loss {
        LossKind::Logistic | LossKind::Exponential => Metric::Accuracy,
        _ => Metric::Rmse,
    };
    if let Some(m) = monitor {
        if m.values().is_none() {
            return Err(Error::InvalidConfig(
                "monitor dataset must carry value targets".into(),
            ));
        }
    }

    let started = Instant::now();
    let index = build_sorted_index(data);
    // Leaf-L2 regularizer with lambda 0 everywhere: boosting is
    // unpenalized; the engine is used for its buffers and bookkeeping.
    let mut engine = Engine::new(data, config.loss, RegConfig::default())?;
    let mut report = BoostReport::default();

    let h0 = constant_minimizer(&mut engine);
    if h0 != 0.0 {
        let tree = Tree::leaf(h0);
        let rows: Vec<u32> = (0..data.n() as u32).collect();
        push_tree(&mut engine, tree, vec![rows]);
        engine.buffers.set_constant_output(data, h0);
    }

    for round in 1..=config.num_trees {
        let pseudo: Vec<f64> = engine.buffers.grad.iter().map(|g| -g).collect();
        let (mut tree, rows) =
            fit_ls_tree(data, &index, &pseudo, config.tree_leaves, config.min_node);
        if tree.len() == 1 {
            break; // no admissible split; later rounds would repeat this
        }

        match config.variant {
            BoostVariant::Generic => {
                let mut num = 0.0;
                let mut den = 0.0;
                for leaf in tree.leaves() {
                    let g = tree.node(leaf).weight();
                    for &r in &rows[leaf as usize] {
                        num -= engine.buffers.grad[r as usize] * g;
                        den += engine.buffers.hess[r as usize] * g * g;
                    }
                }
                let beta = if den > crate::trainer::CURVATURE_EPS {
                    num / den
                } else {
                    0.0
                };
                let scale = config.shrinkage * beta;
                let leaves: Vec<u32> = tree.leaves().collect();
                for leaf in leaves {
                    let w = tree.node(leaf).weight();
                    tree.set_leaf_weight(leaf, scale * w);
                }
            }
            BoostVariant::Gbdt | BoostVariant::FullyCorrective => {
                let scale = if config.variant == BoostVariant::Gbdt {
                    config.shrinkage
                } else {
                    1.0
                };
                let leaves: Vec<u32> = tree.leaves().collect();
                for leaf in leaves {
                    let mut g = 0.0;
                    let mut h = 0.0;
                    for &r in &rows[leaf as usize] {
                        g += engine.buffers.grad[r as usize];
                        h += engine.buffers.hess[r as usize];
                    }
                    let step = newton_delta(g, h, 0.0, 0.0).unwrap_or(0.0);
                    tree.set_leaf_weight(leaf, scale * step);
                }
            }
        }

        // Fold the new tree into the shared state.
        for leaf in tree.leaves() {
            let w = tree.node(leaf).weight();
            if w != 0.0 {
                engine
                    .buffers
                    .apply_delta(data, &rows[leaf as usize], w);
            }
        }
        push_tree(&mut engine, tree, rows);

        if config.variant == BoostVariant::FullyCorrective {
            correct_weights(&mut engine, 0.0, &fc_correction(), None);
        }

        let monitor_value = monitor.map(|m| {
            let forest = Forest {
                trees: engine.trees.clone(),
            };
            evaluate(&forest, m, monitor_metric).expect("monitor validated at start")
        });
        report.rounds.push(BoostRound {
            round,
            train_loss: engine.buffers.average_loss(data),
            monitor: monitor_value,
        });
    }

    report.final_train_loss = engine.buffers.average_loss(data);
    report.train_seconds = started.elapsed().as_secs_f64();
    let (forest, _) = engine.finish();
    Ok((forest, report))
}

fn push_tree(engine: &mut Engine, tree: Tree, mut rows: Vec<Vec<u32>>) {
    rows.resize(tree.len(), Vec::new());
    let leaves = tree.num_leaves();
    let (state, stats) = reg::build_state(&tree, &engine.reg_cfg);
    engine.stats.absorb(stats);
    engine.trees.push(tree);
    engine.leaf_rows.push(rows);
    engine.states.push(state);
    engine.note_leaf_change(leaves);
}

/// The constant output minimizing the averaged loss, by 1-D Newton from 0
/// (exact in one step for square loss; the zero-curvature fallback keeps
/// the constant at the last iterate).
fn constant_minimizer(engine: &mut Engine) -> f64 {
    let data = engine.data;
    let mut h = 0.0f64;
    for _ in 0..100 {
        let g: f64 = engine.buffers.grad.iter().sum();
        let hh: f64 = engine.buffers.hess.iter().sum();
        if !(hh > crate::trainer::CURVATURE_EPS) {
            break;
        }
        let step = -g / hh;
        if step.abs() <= 1e-12 * h.abs().max(1.0) {
            break;
        }
        h += step;
        engine.buffers.set_constant_output(data, h);
    }
    // Leave the buffers back at the all-zero output; the caller applies
    // the intercept through the regular tree path.
    engine.buffers.set_constant_output(data, 0.0);
    h
}

/// Fit a best-first least-squares regression tree on `targets`: leaves
/// hold the mean target of their instances, and the leaf whose best split
/// reduces the squared error most is expanded until `max_leaves` is
/// reached or no split with positive reduction and `min_node` coverage
/// exists. Returns the tree and the per-node instance rows.
///
/// Candidate scoring reuses [`best_split_of_leaf`] with synthetic square
/// loss derivatives at the leaf means, making gains comparable across
/// leaves (they equal the SSE reduction divided by `2n`) while keeping
/// identical threshold and tie semantics.
pub(crate) fn fit_ls_tree(
    data: &Dataset,
    index: &SortedFeatureIndex,
    targets: &[f64],
    max_leaves: usize,
    min_node: usize,
) -> (Tree, Vec<Vec<u32>>) {
    let n = data.n();
    let nf = n as f64;
    let ctx = reg::new_tree_context(&RegConfig::default(), 0.0);
    let mean0 = targets.iter().sum::<f64>() / nf;

    let mut tree = Tree::leaf(mean0);
    let mut rows: Vec<Vec<u32>> = vec![(0..n as u32).collect()];
    let mut lists: Vec<Option<Vec<Vec<u32>>>> = vec![Some(index.columns().to_vec())];
    let mut grad: Vec<f64> = targets.iter().map(|&t| (mean0 - t) / nf).collect();
    let hess: Vec<f64> = vec![1.0 / nf; n];
    let mut cands: Vec<Option<CandidateSplit>> = Vec::new();

    let candidate = |lists: &Option<Vec<Vec<u32>>>, grad: &[f64]| -> Option<CandidateSplit> {
        let l = lists.as_ref()?;
        if l.first().map_or(0, Vec::len) < 2 * min_node {
            return None;
        }
        best_split_of_leaf(data, grad, &hess, l, &ctx, min_node)
            .filter(|c| c.reduction > 0.0)
    };
    cands.push(candidate(&lists[0], &grad));

    while tree.num_leaves() < max_leaves {
        // Best-first: the splittable leaf with the largest gain, earliest
        // created on exact ties.
        let mut pick: Option<u32> = None;
        for (v, cand) in cands.iter().enumerate() {
            let Some(c) = cand else { continue };
            let better = match pick {
                None => true,
                Some(p) => c.reduction > cands[p as usize].as_ref().unwrap().reduction,
            };
            if better {
                pick = Some(v as u32);
            }
        }
        let Some(v) = pick else { break };
        let c = cands[v as usize].take().unwrap();
        let mu = tree.node(v).weight();
        let (left_id, right_id) =
            tree.split_leaf(v, c.feature, c.threshold, mu + c.deltas.0, mu + c.deltas.1);

        let own_rows = std::mem::take(&mut rows[v as usize]);
        let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = own_rows
            .into_iter()
            .partition(|&r| data.value(r as usize, c.feature) <= c.threshold);
        for (ids, node) in [(&left_rows, left_id), (&right_rows, right_id)] {
            let mu_child = tree.node(node).weight();
            for &r in ids.iter() {
                grad[r as usize] = (mu_child - targets[r as usize]) / nf;
            }
        }

        let own_lists = lists[v as usize].take().unwrap();
        let mut left_lists = Vec::with_capacity(own_lists.len());
        let mut right_lists = Vec::with_capacity(own_lists.len());
        for ids in &own_lists {
            let (l, r) = partition_rows(data, ids, c.feature, c.threshold);
            left_lists.push(l);
            right_lists.push(r);
        }

        rows.push(left_rows);
        rows.push(right_rows);
        lists.push(Some(left_lists));
        lists.push(Some(right_lists));
        cands.push(candidate(&lists[left_id as usize], &grad));
        cands.push(candidate(&lists[right_id as usize], &grad));
    }

    (tree, rows)
}
