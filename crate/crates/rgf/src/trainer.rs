//! The greedy forest trainer, evaluation, and cross-validation.
//!
//! Training alternates two phases on the regularized objective
//! `Q = averaged loss + sum of per-tree penalties`:
//!
//! 1. **structure growth** — [`crate::growth::best_operation`] scores every
//!    admissible structure change (split a leaf of one of the `recent_trees`
//!    newest trees, or start a new tree) by the exact `Q` reduction of its
//!    Newton-optimal child weights, and the best one is applied;
//! 2. **fully-corrective weight optimization** — every `opt_interval` newly
//!    created leaves, [`crate::correction::correct_weights`] runs damped
//!    coordinate descent over *all* leaf weights of the forest.
//!
//! Growth stops when the leaf budget is exhausted or no operation reduces
//! `Q`; one final full correction follows. Two lambdas are supported: the
//! growth phase uses `lambda_g` (defaults to `lambda`), correction always
//! uses `lambda`.
//!
//! Training is completely deterministic: candidate enumeration order is
//! fixed, ties are broken by (lower feature index, smaller threshold) and
//! first-seen elsewhere, and no randomness is consumed anywhere.

use std::time::Instant;

use crate::correction::{correct_weights, should_correct, CorrectionConfig};
use crate::dataset::{build_sorted_index, Dataset};
use crate::error::{Error, Result};
use crate::growth::{apply_operation, best_operation, GrowthScratch};
use crate::loss::{validate_targets, DerivativeBuffers, LossKind};
use crate::model::{Forest, Tree};
use crate::reg::{self, RegConfig, RegTreeState, SolveStats};
use crate::rng::Rng;

/// Denominators at or below this are treated as vanishing curvature: the
/// split candidate is rejected / the correction coordinate is skipped.
pub(crate) const CURVATURE_EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct TrainerConfig {
    pub loss: LossKind,
    pub reg: RegConfig,
    /// Regularization strength used by weight correction (and growth,
    /// unless `lambda_g` overrides it).
    pub lambda: f64,
    /// Optional separate strength for the growth phase.
    pub lambda_g: Option<f64>,
    /// Leaf budget: growth stops once the forest has this many leaves.
    pub max_leaf: usize,
    /// Structure ops may split leaves of this many most recent trees.
    pub recent_trees: usize,
    /// Minimum instances each child of a split must receive.
    pub min_node: usize,
    /// Run a full correction every this many newly created leaves.
    pub opt_interval: usize,
    pub correction: CorrectionConfig,
    /// Emit a progress record every this many leaves (0 = none).
    pub report_every: usize,
    /// Record the exact `Q` after every operation and correction sweep
    /// (diagnostic; adds an O(n) evaluation per step).
    pub record_trace: bool,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            loss: LossKind::Square,
            reg: RegConfig::default(),
            lambda: 1.0,
            lambda_g: None,
            max_leaf: 2000,
            recent_trees: 1,
            min_node: 1,
            opt_interval: 100,
            correction: CorrectionConfig::default(),
            report_every: 0,
            record_trace: false,
        }
    }
}

impl TrainerConfig {
    pub fn growth_lambda(&self) -> f64 {
        self.lambda_g.unwrap_or(self.lambda)
    }

    pub fn validate(&self) -> Result<()> {
        self.reg.validate()?;
        if !(self.lambda >= 0.0) || !(self.growth_lambda() >= 0.0) {
            return Err(Error::InvalidConfig("lambda must be non-negative".into()));
        }
        if self.max_leaf < 2 {
            return Err(Error::InvalidConfig("max_leaf must be at least 2".into()));
        }
        if self.recent_trees == 0 {
            return Err(Error::InvalidConfig("recent_trees must be positive".into()));
        }
        if self.min_node == 0 {
            return Err(Error::InvalidConfig("min_node must be positive".into()));
        }
        if self.opt_interval == 0 {
            return Err(Error::InvalidConfig("opt_interval must be positive".into()));
        }
        self.correction.validate()
    }
}

/// One progress record (every `report_every` leaves and at the end).
#[derive(Clone, Debug)]
pub struct ProgressRecord {
    pub leaves: usize,
    pub q: f64,
    pub train_loss: f64,
    /// Monitor metric (RMSE for regression losses, accuracy for margin
    /// losses) when a monitor dataset was supplied.
    pub monitor: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct TrainReport {
    pub records: Vec<ProgressRecord>,
    /// Chronological exact `Q` values — initial, after each structure op,
    /// after each correction sweep. Only filled with `record_trace`.
    pub q_trace: Vec<f64>,
    pub final_leaves: usize,
    pub final_q: f64,
    pub train_loss: f64,
    /// Fixed-point solves that hit the sweep cap (0 in healthy runs).
    pub fixed_point_failures: u32,
    pub train_seconds: f64,
}

/// Mutable training state shared by the growth and correction phases:
/// the forest under construction, per-leaf instance lists, loss derivative
/// buffers, and per-tree regularizer state.
///
/// Invariant: after every public mutation the buffers match the forest's
/// predictions exactly and each tree's `RegTreeState` is fresh for its
/// current weights (checked against a recomputation in debug builds).
pub(crate) struct Engine<'a> {
    pub data: &'a Dataset,
    pub reg_cfg: RegConfig,
    pub buffers: DerivativeBuffers,
    pub trees: Vec<Tree>,
    /// Per tree, per node id: instance rows at that node (leaves only;
    /// internal nodes keep empty vectors).
    pub leaf_rows: Vec<Vec<Vec<u32>>>,
    pub states: Vec<RegTreeState>,
    pub stats: SolveStats,
    num_leaves: usize,
}

impl<'a> Engine<'a> {
    pub fn new(data: &'a Dataset, loss: LossKind, reg_cfg: RegConfig) -> Result<Engine<'a>> {
        validate_targets(loss, data)?;
        Ok(Engine {
            data,
            reg_cfg,
            buffers: DerivativeBuffers::new(data, loss),
            trees: Vec::new(),
            leaf_rows: Vec::new(),
            states: Vec::new(),
            stats: SolveStats::default(),
            num_leaves: 0,
        })
    }

    pub fn num_leaves(&self) -> usize {
        self.num_leaves
    }

    pub(crate) fn note_leaf_change(&mut self, added: usize) {
        self.num_leaves += added;
    }

    /// The exact training objective at the current weights.
    pub fn q(&self, lambda: f64) -> f64 {
        let mut q = self.buffers.average_loss(self.data);
        for (tree, state) in self.trees.iter().zip(&self.states) {
            q += reg::penalty_from_state(tree, &self.reg_cfg, state, lambda);
        }
        q
    }

    /// Shift one leaf's weight and restore all invariants incrementally.
    pub fn apply_leaf_delta(&mut self, tree_idx: usize, leaf: u32, delta: f64) {
        let tree = &mut self.trees[tree_idx];
        let w = tree.node(leaf).weight();
        tree.set_leaf_weight(leaf, w + delta);
        let rows = &self.leaf_rows[tree_idx][leaf as usize];
        self.buffers.apply_delta(self.data, rows, delta);
        reg::apply_leaf_delta(
            &self.trees[tree_idx],
            &self.reg_cfg,
            &mut self.states[tree_idx],
            leaf,
            delta,
        );
    }

    /// Build any missing min-penalty sensitivity rows (correction needs
    /// them for its derivative formulas and incremental updates).
    pub fn ensure_sensitivities(&mut self) {
        for (tree, state) in self.trees.iter().zip(self.states.iter_mut()) {
            let s = reg::ensure_sensitivities(tree, &self.reg_cfg, state);
            self.stats.absorb(s);
        }
    }

    /// Debug-build invariant check: incrementally maintained outputs and
    /// regularizer state must equal a from-scratch recomputation.
    #[cfg(debug_assertions)]
    pub fn debug_validate(&self) {
        for i in 0..self.data.n() {
            let direct: f64 = self.trees.iter().map(|t| t.predict(self.data.row(i))).sum();
            assert!(
                (self.buffers.outputs[i] - direct).abs() < 1e-8,
                "output drift at row {i}: incremental {} vs direct {direct}",
                self.buffers.outputs[i]
            );
        }
        for (tree, state) in self.trees.iter().zip(&self.states) {
            let (fresh, _) = reg::build_state(tree, &self.reg_cfg);
            for v in 0..fresh.beta.len() {
                assert!(
                    (state.beta[v] - fresh.beta[v]).abs() < 1e-6,
                    "regularizer state drift at node {v}"
                );
            }
        }
    }

    pub fn finish(self) -> (Forest, SolveStats) {
        (Forest { trees: self.trees }, self.stats)
    }
}

/// Train a regularized greedy forest. `monitor`, when given, is evaluated
/// at every reporting interval with the loss-appropriate metric.
pub fn train_rgf(
    data: &Dataset,
    config: &TrainerConfig,
    monitor: Option<&Dataset>,
) -> Result<(Forest, TrainReport)> {
    config.validate()?;
    validate_targets(config.loss, data)?;
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
    let mut engine = Engine::new(data, config.loss, config.reg)?;
    let mut scratch = GrowthScratch::new(config.recent_trees);
    let mut report = TrainReport::default();
    let lambda_g = config.growth_lambda();

    if config.record_trace {
        report.q_trace.push(engine.q(config.lambda));
    }

    let mut leaves_since_correction = 0usize;
    let mut next_report = if config.report_every > 0 {
        config.report_every
    } else {
        usize::MAX
    };
    let mut ops_applied = 0usize;

    while engine.num_leaves() < config.max_leaf {
        let op = match best_operation(&mut engine, &scratch, &index, lambda_g, config.min_node) {
            Some(op) => op,
            None => break,
        };
        let created = apply_operation(&mut engine, &mut scratch, &index, &op);
        leaves_since_correction += created;
        ops_applied += 1;
        if config.record_trace {
            report.q_trace.push(engine.q(config.lambda));
        }

        #[cfg(debug_assertions)]
        if ops_applied % 256 == 0 {
            engine.debug_validate();
        }

        if should_correct(leaves_since_correction, config.opt_interval) {
            let trace = config.record_trace.then_some(&mut report.q_trace);
            correct_weights(&mut engine, config.lambda, &config.correction, trace);
            leaves_since_correction = 0;
        }

        while engine.num_leaves() >= next_report {
            record_progress(&mut report, &engine, config, monitor, monitor_metric);
            next_report += config.report_every;
        }
    }
    let _ = ops_applied;

    // Final full correction regardless of the interval phase.
    let trace = config.record_trace.then_some(&mut report.q_trace);
    correct_weights(&mut engine, config.lambda, &config.correction, trace);

    record_progress(&mut report, &engine, config, monitor, monitor_metric);
    report.final_leaves = engine.num_leaves();
    report.final_q = engine.q(config.lambda);
    report.train_loss = engine.buffers.average_loss(data);
    report.fixed_point_failures = engine.stats.failures;
    report.train_seconds = started.elapsed().as_secs_f64();

    let (forest, _) = engine.finish();
    Ok((forest, report))
}

fn record_progress(
    report: &mut TrainReport,
    engine: &Engine,
    config: &TrainerConfig,
    monitor: Option<&Dataset>,
    metric: Metric,
) {
    let monitor_value = monitor.map(|m| {
        let forest = Forest {
            trees: engine.trees.clone(),
        };
        evaluate(&forest, m, metric).expect("monitor validated at start")
    });
    report.records.push(ProgressRecord {
        leaves: engine.num_leaves(),
        q: engine.q(config.lambda),
        train_loss: engine.buffers.average_loss(engine.data),
        monitor: monitor_value,
    });
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Rmse,
    Accuracy,
}

impl Metric {
    pub fn higher_is_better(self) -> bool {
        matches!(self, Metric::Accuracy)
    }

    pub fn parse(s: &str) -> Result<Metric> {
        match s {
            "rmse" => Ok(Metric::Rmse),
            "accuracy" => Ok(Metric::Accuracy),
            other => Err(Error::InvalidConfig(format!(
                "unknown metric {other:?} (expected rmse or accuracy)"
            ))),
        }
    }
}

/// Metric between prediction and target vectors. Accuracy thresholds the
/// prediction sign at 0 (`h >= 0` counts as +1) and requires `{-1, +1}`
/// targets.
pub fn metric_value(predictions: &[f64], targets: &[f64], metric: Metric) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(Error::TargetCountMismatch {
            targets: targets.len(),
            rows: predictions.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::InvalidConfig("cannot evaluate an empty dataset".into()));
    }
    match metric {
        Metric::Rmse => {
            let mse = predictions
                .iter()
                .zip(targets)
                .map(|(&p, &y)| (p - y) * (p - y))
                .sum::<f64>()
                / predictions.len() as f64;
            Ok(mse.sqrt())
        }
        Metric::Accuracy => {
            let mut hits = 0usize;
            for (i, (&p, &y)) in predictions.iter().zip(targets).enumerate() {
                if y != 1.0 && y != -1.0 {
                    return Err(Error::LabelNotBinary {
                        row: i,
                        value: y,
                        loss: "accuracy metric",
                    });
                }
                let sign = if p >= 0.0 { 1.0 } else { -1.0 };
                hits += (sign == y) as usize;
            }
            Ok(hits as f64 / predictions.len() as f64)
        }
    }
}

/// Evaluate a forest on a dataset with value targets.
pub fn evaluate(forest: &Forest, data: &Dataset, metric: Metric) -> Result<f64> {
    let targets = data
        .values()
        .ok_or_else(|| Error::InvalidConfig("evaluation requires value targets".into()))?;
    let predictions: Vec<f64> = (0..data.n()).map(|i| forest.predict(data.row(i))).collect();
    metric_value(&predictions, targets, metric)
}

/// Outcome of a cross-validation run over a config grid.
#[derive(Clone, Debug)]
pub struct CvOutcome {
    /// Mean validation score per grid entry, in grid order.
    pub scores: Vec<f64>,
    /// Index of the winning entry (ties: first).
    pub best: usize,
}

/// `folds`-fold cross-validation over an arbitrary config grid.
///
/// Rows are shuffled once with the seeded generator and dealt into
/// `folds` contiguous blocks; every row is validated against exactly once.
/// `score` receives `(config, train_fold, validation_fold)` and returns
/// the validation metric; `higher_is_better` selects the direction.
pub fn cross_validate<C>(
    data: &Dataset,
    grid: &[C],
    folds: usize,
    seed: u64,
    higher_is_better: bool,
    mut score: impl FnMut(&C, &Dataset, &Dataset) -> Result<f64>,
) -> Result<CvOutcome> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty config grid".into()));
    }
    if folds < 2 || folds > data.n() {
        return Err(Error::InvalidConfig(format!(
            "folds must be in [2, n] (got {folds}, n = {})",
            data.n()
        )));
    }
    let mut order: Vec<u32> = (0..data.n() as u32).collect();
    Rng::new(seed).shuffle(&mut order);

    // Fold f owns order[f * n / folds .. (f + 1) * n / folds].
    let bounds: Vec<usize> = (0..=folds).map(|f| f * data.n() / folds).collect();

    let mut scores = Vec::with_capacity(grid.len());
    for config in grid {
        let mut total = 0.0;
        for f in 0..folds {
            let (lo, hi) = (bounds[f], bounds[f + 1]);
            let valid_rows = &order[lo..hi];
            let train_rows: Vec<u32> = order[..lo]
                .iter()
                .chain(&order[hi..])
                .copied()
                .collect();
            let train = data.subset(&train_rows)?;
            let valid = data.subset(valid_rows)?;
            total += score(config, &train, &valid)?;
        }
        scores.push(total / folds as f64);
    }

    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        let better = if higher_is_better {
            s > scores[best]
        } else {
            s < scores[best]
        };
        if better {
            best = i;
        }
    }
    Ok(CvOutcome { scores, best })
}

/// Apply one grid line of `key=value` overrides (comma-separated) to a
/// base trainer configuration. Grid files carry one such line per config.
pub fn apply_overrides(base: &TrainerConfig, line: &str) -> Result<TrainerConfig> {
    let mut cfg = base.clone();
    for item in line.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("grid item {item:?} is not key=value")))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |what: &str| Error::InvalidConfig(format!("invalid {what} value {value:?}"));
        match key {
            "lambda" => cfg.lambda = value.parse().map_err(|_| bad("lambda"))?,
            "lambda_g" => cfg.lambda_g = Some(value.parse().map_err(|_| bad("lambda_g"))?),
            "gamma" => cfg.reg.gamma = value.parse().map_err(|_| bad("gamma"))?,
            "reg" => cfg.reg.kind = parse_reg_kind(value)?,
            "loss" => cfg.loss = parse_loss_kind(value)?,
            "max_leaf" => cfg.max_leaf = value.parse().map_err(|_| bad("max_leaf"))?,
            "recent_trees" => cfg.recent_trees = value.parse().map_err(|_| bad("recent_trees"))?,
            "min_node" => cfg.min_node = value.parse().map_err(|_| bad("min_node"))?,
            "eta" => cfg.correction.eta = value.parse().map_err(|_| bad("eta"))?,
            "opt_interval" => cfg.opt_interval = value.parse().map_err(|_| bad("opt_interval"))?,
            "opt_passes" => cfg.correction.passes = value.parse().map_err(|_| bad("opt_passes"))?,
            "reg_tol" => cfg.reg.tol = value.parse().map_err(|_| bad("reg_tol"))?,
            "reg_max_iter" => cfg.reg.max_iter = value.parse().map_err(|_| bad("reg_max_iter"))?,
            other => {
                return Err(Error::InvalidConfig(format!("unknown grid key {other:?}")));
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_reg_kind(s: &str) -> Result<crate::reg::RegKind> {
    use crate::reg::RegKind;
    match s {
        "L2" => Ok(RegKind::LeafL2),
        "MinPen" => Ok(RegKind::MinPenalty),
        "MinPenSib" => Ok(RegKind::MinPenaltySib),
        other => Err(Error::InvalidConfig(format!(
            "unknown regularizer {other:?} (expected L2, MinPen or MinPenSib)"
        ))),
    }
}

pub fn parse_loss_kind(s: &str) -> Result<LossKind> {
    match s {
        "LS" => Ok(LossKind::Square),
        "Log" => Ok(LossKind::Logistic),
        "Expo" => Ok(LossKind::Exponential),
        "L1L2" => Ok(LossKind::L1L2),
        "PairSqHinge" => Ok(LossKind::PairSqHinge),
        other => Err(Error::InvalidConfig(format!(
            "unknown loss {other:?} (expected LS, Log, Expo, L1L2 or PairSqHinge)"
        ))),
    }
}
