//! Training losses and the averaged derivative buffers.
//!
//! The training objective everywhere in this crate is
//! `Q(h) = L(h) / norm + penalty`, where `L` is the sum of per-instance
//! (or per-pair) losses and `norm` is the number of instances (or pairs).
//! [`DerivativeBuffers`] maintains the per-instance first and second
//! partial derivatives of that *averaged* loss at the current predictions,
//! which is exactly what both the split search and the fully-corrective
//! weight optimizer consume.
//!
//! Margin losses (`Logistic`, `Exponential`) require labels in `{-1, +1}`;
//! [`validate_targets`] checks this once up front so the per-instance
//! functions can stay branch-free. The pairwise squared hinge is defined
//! over preference pairs `(i, j)` (`i` should outrank `j`):
//! `sum over pairs of max(0, 1 - (h_i - h_j))^2`, with the kink at margin
//! 1 treated as inactive (zero curvature).

use crate::dataset::{Dataset, Targets};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    /// `(h - y)^2 / 2`
    Square,
    /// `ln(1 + exp(-h y))`, labels in `{-1, +1}`
    Logistic,
    /// `exp(-h y)`, labels in `{-1, +1}`
    Exponential,
    /// Smoothed absolute error `sqrt(1 + (h - y)^2) - 1`
    L1L2,
    /// Pairwise squared hinge over preference pairs
    PairSqHinge,
}

impl LossKind {
    pub fn is_pairwise(self) -> bool {
        self == LossKind::PairSqHinge
    }

    /// Margin losses interpret targets as binary labels.
    pub fn is_margin(self) -> bool {
        matches!(self, LossKind::Logistic | LossKind::Exponential)
    }

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Square => "square",
            LossKind::Logistic => "logistic",
            LossKind::Exponential => "exponential",
            LossKind::L1L2 => "l1-l2",
            LossKind::PairSqHinge => "pairwise squared hinge",
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Per-instance loss for the decomposable kinds. Callers must have
/// validated targets; `PairSqHinge` has no per-instance form and panics.
pub fn loss_value(kind: LossKind, h: f64, y: f64) -> f64 {
    match kind {
        LossKind::Square => {
            let r = h - y;
            0.5 * r * r
        }
        LossKind::Logistic => {
            // ln(1 + e^{-m}) computed on the stable side of the exponent.
            let m = h * y;
            if m > 0.0 {
                (-m).exp().ln_1p()
            } else {
                -m + m.exp().ln_1p()
            }
        }
        LossKind::Exponential => (-h * y).exp(),
        LossKind::L1L2 => {
            let r = h - y;
            (1.0 + r * r).sqrt() - 1.0
        }
        LossKind::PairSqHinge => panic!("pairwise loss has no per-instance value"),
    }
}

/// First and second derivative of the per-instance loss in `h`.
pub fn loss_derivatives(kind: LossKind, h: f64, y: f64) -> (f64, f64) {
    match kind {
        LossKind::Square => (h - y, 1.0),
        LossKind::Logistic => {
            let m = h * y;
            let p = sigmoid(-m); // 1 - sigma(m)
            (-y * p, p * (1.0 - p))
        }
        LossKind::Exponential => {
            let e = (-h * y).exp();
            (-y * e, e)
        }
        LossKind::L1L2 => {
            let r = h - y;
            let s = (1.0 + r * r).sqrt();
            (r / s, 1.0 / (s * s * s))
        }
        LossKind::PairSqHinge => panic!("pairwise loss has no per-instance derivatives"),
    }
}

/// Total pairwise squared-hinge loss and its per-instance derivative
/// accumulations (unaveraged). `grad`/`hess` must be zeroed by the caller.
pub fn pairwise_loss_terms(
    pairs: &[(u32, u32)],
    outputs: &[f64],
    grad: &mut [f64],
    hess: &mut [f64],
) -> f64 {
    let mut total = 0.0;
    for &(i, j) in pairs {
        let margin = outputs[i as usize] - outputs[j as usize];
        if margin < 1.0 {
            let gap = 1.0 - margin;
            total += gap * gap;
            grad[i as usize] -= 2.0 * gap;
            grad[j as usize] += 2.0 * gap;
            hess[i as usize] += 2.0;
            hess[j as usize] += 2.0;
        }
    }
    total
}

/// Check the dataset's targets against the loss once, before training.
pub fn validate_targets(kind: LossKind, data: &Dataset) -> Result<()> {
    match (kind.is_pairwise(), data.targets()) {
        (true, Targets::Pairs(pairs)) => {
            if pairs.is_empty() {
                return Err(Error::InvalidConfig(
                    "pairwise loss requires at least one preference pair".into(),
                ));
            }
            Ok(())
        }
        (true, Targets::Values(_)) => Err(Error::InvalidConfig(
            "pairwise loss requires preference-pair targets".into(),
        )),
        (false, Targets::Pairs(_)) => Err(Error::InvalidConfig(format!(
            "{} loss requires per-row value targets",
            kind.name()
        ))),
        (false, Targets::Values(values)) => {
            if kind.is_margin() {
                for (row, &v) in values.iter().enumerate() {
                    if v != 1.0 && v != -1.0 {
                        return Err(Error::LabelNotBinary {
                            row,
                            value: v,
                            loss: kind.name(),
                        });
                    }
                }
            }
            Ok(())
        }
    }
}

/// Current model outputs plus first/second derivatives of the *averaged*
/// loss with respect to each output. Kept incrementally in sync as leaf
/// weights change.
#[derive(Clone, Debug)]
pub struct DerivativeBuffers {
    pub loss: LossKind,
    /// `n` for decomposable losses, number of pairs for the pairwise loss.
    pub norm: f64,
    pub outputs: Vec<f64>,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl DerivativeBuffers {
    /// Buffers at the all-zero prediction. Targets must already be
    /// validated against `loss`.
    pub fn new(data: &Dataset, loss: LossKind) -> DerivativeBuffers {
        let n = data.n();
        let norm = if loss.is_pairwise() {
            data.pairs().expect("validated").len() as f64
        } else {
            n as f64
        };
        let mut b = DerivativeBuffers {
            loss,
            norm,
            outputs: vec![0.0; n],
            grad: vec![0.0; n],
            hess: vec![0.0; n],
        };
        b.refresh_all(data);
        b
    }

    /// Recompute grad/hess everywhere from the current outputs.
    pub fn refresh_all(&mut self, data: &Dataset) {
        if self.loss.is_pairwise() {
            self.grad.fill(0.0);
            self.hess.fill(0.0);
            pairwise_loss_terms(
                data.pairs().expect("validated"),
                &self.outputs,
                &mut self.grad,
                &mut self.hess,
            );
            let inv = 1.0 / self.norm;
            for g in &mut self.grad {
                *g *= inv;
            }
            for h in &mut self.hess {
                *h *= inv;
            }
        } else {
            let y = data.values().expect("validated");
            let inv = 1.0 / self.norm;
            for i in 0..self.outputs.len() {
                let (g, h) = loss_derivatives(self.loss, self.outputs[i], y[i]);
                self.grad[i] = g * inv;
                self.hess[i] = h * inv;
            }
        }
    }

    /// Add `delta` to the outputs of `rows` and restore the derivative
    /// invariant. Decomposable losses refresh only the touched rows; the
    /// pairwise loss recomputes from the pair list (a changed output can
    /// affect any pair it appears in).
    pub fn apply_delta(&mut self, data: &Dataset, rows: &[u32], delta: f64) {
        for &r in rows {
            self.outputs[r as usize] += delta;
        }
        if self.loss.is_pairwise() {
            self.refresh_all(data);
        } else {
            let y = data.values().expect("validated");
            let inv = 1.0 / self.norm;
            for &r in rows {
                let i = r as usize;
                let (g, h) = loss_derivatives(self.loss, self.outputs[i], y[i]);
                self.grad[i] = g * inv;
                self.hess[i] = h * inv;
            }
        }
    }

    /// Overwrite every output with `value` (boosting starts from the
    /// constant-model optimum rather than zero).
    pub fn set_constant_output(&mut self, data: &Dataset, value: f64) {
        self.outputs.fill(value);
        self.refresh_all(data);
    }

    /// Averaged loss at the current outputs.
    pub fn average_loss(&self, data: &Dataset) -> f64 {
        if self.loss.is_pairwise() {
            let pairs = data.pairs().expect("validated");
            let mut total = 0.0;
            for &(i, j) in pairs {
                let gap = 1.0 - (self.outputs[i as usize] - self.outputs[j as usize]);
                if gap > 0.0 {
                    total += gap * gap;
                }
            }
            total / self.norm
        } else {
            let y = data.values().expect("validated");
            self.outputs
                .iter()
                .zip(y)
                .map(|(&h, &y)| loss_value(self.loss, h, y))
                .sum::<f64>()
                / self.norm
        }
    }
}
