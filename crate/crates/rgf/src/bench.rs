//! Synthetic regression benchmark: random-forest targets, per-method
//! hyperparameter selection by cross-validation, test RMSE reporting.
//!
//! For every `(q, run)` cell a fresh dataset triple is synthesized (the
//! target is a sum of 100 random `q`-leaf trees; see
//! [`crate::dataset::synthesize`]). Each method — RGF with each of the
//! three regularizers, and GBDT — selects its parameters by k-fold
//! cross-validation on the training set only, retrains on the full
//! training set with the winning parameters, and is scored on the held-out
//! test set. All randomness derives from the spec's master seed, so
//! result columns are bit-reproducible across reruns (wall-clock timing
//! is reported but naturally varies).

use crate::boosting::{train_boosted, BoostConfig, BoostVariant};
use crate::dataset::{synthesize, Dataset, SynthConfig};
use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::reg::{RegConfig, RegKind};
use crate::rng::derive_seed;
use crate::trainer::{cross_validate, evaluate, train_rgf, Metric, TrainerConfig};

#[derive(Clone, Debug)]
pub struct BenchmarkSpec {
    pub q_values: Vec<u32>,
    pub runs: u32,
    pub n_train: usize,
    pub n_test: usize,
    pub dim: usize,
    /// Number of random trees summed into the synthetic target.
    pub target_trees: usize,
    /// RGF regularization grid (applies to every regularizer).
    pub rgf_lambdas: Vec<f64>,
    /// Depth-decay grid searched for the min-penalty regularizers
    /// (`LeafL2` has no depth decay and skips it).
    pub rgf_gammas: Vec<f64>,
    pub rgf_max_leaf: usize,
    /// GBDT grid: leaves per tree cross shrinkage.
    pub gbdt_leaves: Vec<usize>,
    pub gbdt_shrinkages: Vec<f64>,
    pub gbdt_trees: usize,
    pub folds: usize,
    pub seed: u64,
    /// Emit per-cell progress lines on stderr.
    pub progress: bool,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        BenchmarkSpec {
            q_values: vec![5, 10, 20],
            runs: 3,
            n_train: 2000,
            n_test: 20_000,
            dim: 10,
            target_trees: 100,
            rgf_lambdas: vec![1.0, 0.1, 0.01],
            rgf_gammas: vec![1.0, 2.0],
            rgf_max_leaf: 2000,
            gbdt_leaves: vec![5, 10, 15, 20, 25],
            gbdt_shrinkages: vec![0.5, 0.1, 0.05, 0.01, 0.005, 0.001],
            gbdt_trees: 500,
            folds: 2,
            seed: 1,
            progress: false,
        }
    }
}

impl BenchmarkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.q_values.is_empty()
            || self.rgf_lambdas.is_empty()
            || self.rgf_gammas.is_empty()
            || self.gbdt_leaves.is_empty()
            || self.gbdt_shrinkages.is_empty()
        {
            return Err(Error::InvalidConfig("benchmark grids must be non-empty".into()));
        }
        if self.rgf_gammas.iter().any(|&g| !(g >= 1.0)) {
            return Err(Error::InvalidConfig("gamma grid entries must be >= 1".into()));
        }
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be positive".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidConfig("folds must be at least 2".into()));
        }
        Ok(())
    }
}

/// One benchmark measurement: a method evaluated on one `(q, run)` cell.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub method: &'static str,
    pub reg: &'static str,
    pub q: u32,
    pub run: u32,
    pub selected_params: String,
    pub test_rmse: f64,
    pub leaves: usize,
    pub train_seconds: f64,
}

#[derive(Clone, Debug, Default)]
pub struct BenchResults {
    pub rows: Vec<BenchRow>,
}

impl BenchResults {
    /// Machine-readable form; schema documented in the README.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "method,reg,q,run,selected_params,test_rmse,leaves,train_seconds\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},\"{}\",{:.6},{},{:.3}\n",
                r.method,
                r.reg,
                r.q,
                r.run,
                r.selected_params,
                r.test_rmse,
                r.leaves,
                r.train_seconds
            ));
        }
        out
    }

    /// Mean test RMSE of a method over a cell's runs.
    pub fn mean_rmse(&self, method: &str, reg: &str, q: u32) -> Option<f64> {
        let scores: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.method == method && r.reg == reg && r.q == q)
            .map(|r| r.test_rmse)
            .collect();
        if scores.is_empty() {
            None
        } else {
            Some(scores.iter().sum::<f64>() / scores.len() as f64)
        }
    }

    /// Human-readable summary: run-averaged test RMSE per method and q.
    pub fn to_table(&self) -> String {
        let mut qs: Vec<u32> = self.rows.iter().map(|r| r.q).collect();
        qs.sort_unstable();
        qs.dedup();
        let mut methods: Vec<(&str, &str)> = Vec::new();
        for r in &self.rows {
            if !methods.contains(&(r.method, r.reg)) {
                methods.push((r.method, r.reg));
            }
        }
        let mut out = format!("{:<8} {:<10}", "method", "reg");
        for q in &qs {
            out.push_str(&format!(" {:>10}", format!("q={q}")));
        }
        out.push('\n');
        for (method, reg) in methods {
            out.push_str(&format!("{:<8} {:<10}", method, reg));
            for &q in &qs {
                match self.mean_rmse(method, reg, q) {
                    Some(v) => out.push_str(&format!(" {:>10.4}", v)),
                    None => out.push_str(&format!(" {:>10}", "-")),
                }
            }
            out.push('\n');
        }
        out
    }
}

const REG_KINDS: [RegKind; 3] = [RegKind::LeafL2, RegKind::MinPenalty, RegKind::MinPenaltySib];

/// Deterministic seed stream per benchmark cell and purpose.
fn cell_seed(master: u64, q: u32, run: u32, purpose: u64) -> u64 {
    derive_seed(master, ((q as u64) << 32) | ((run as u64) << 8) | purpose)
}

/// Execute the full protocol. Rows come out in a fixed order: cells by
/// `(q, run)`, within a cell the three RGF regularizers then GBDT.
pub fn run_benchmark(spec: &BenchmarkSpec) -> Result<BenchResults> {
    spec.validate()?;
    let mut results = BenchResults::default();

    for &q in &spec.q_values {
        for run in 0..spec.runs {
            let synth_cfg = SynthConfig {
                q: q as usize,
                trees: spec.target_trees,
                dim: spec.dim,
                n_train: spec.n_train,
                n_test: spec.n_test,
                seed: cell_seed(spec.seed, q, run, 0),
            };
            let (train, test, _) = synthesize(&synth_cfg);

            for (ri, kind) in REG_KINDS.iter().enumerate() {
                let row = rgf_cell(spec, &train, &test, q, run, *kind, ri as u64)?;
                if spec.progress {
                    eprintln!(
                        "bench: q={q} run={run} {}-{}: rmse {:.4} ({}; {:.1}s)",
                        row.method, row.reg, row.test_rmse, row.selected_params,
                        row.train_seconds
                    );
                }
                results.rows.push(row);
            }

            let row = gbdt_cell(spec, &train, &test, q, run)?;
            if spec.progress {
                eprintln!(
                    "bench: q={q} run={run} {}: rmse {:.4} ({}; {:.1}s)",
                    row.method, row.test_rmse, row.selected_params, row.train_seconds
                );
            }
            results.rows.push(row);
        }
    }
    Ok(results)
}

fn rgf_cell(
    spec: &BenchmarkSpec,
    train: &Dataset,
    test: &Dataset,
    q: u32,
    run: u32,
    kind: RegKind,
    reg_index: u64,
) -> Result<BenchRow> {
    let gammas: &[f64] = if kind == RegKind::LeafL2 {
        &[1.0]
    } else {
        &spec.rgf_gammas
    };
    let mut grid = Vec::new();
    for &gamma in gammas {
        for &lambda in &spec.rgf_lambdas {
            grid.push(TrainerConfig {
                loss: LossKind::Square,
                reg: RegConfig {
                    kind,
                    gamma,
                    ..RegConfig::default()
                },
                lambda,
                max_leaf: spec.rgf_max_leaf,
                ..TrainerConfig::default()
            });
        }
    }
    let cv_seed = cell_seed(spec.seed, q, run, 1 + reg_index);
    let outcome = cross_validate(train, &grid, spec.folds, cv_seed, false, |cfg, tr, va| {
        let (forest, _) = train_rgf(tr, cfg, None)?;
        evaluate(&forest, va, Metric::Rmse)
    })?;
    let best = &grid[outcome.best];
    let (forest, report) = train_rgf(train, best, None)?;
    Ok(BenchRow {
        method: "RGF",
        reg: kind.name(),
        q,
        run,
        selected_params: if kind == RegKind::LeafL2 {
            format!("lambda={}", best.lambda)
        } else {
            format!("lambda={},gamma={}", best.lambda, best.reg.gamma)
        },
        test_rmse: evaluate(&forest, test, Metric::Rmse)?,
        leaves: forest.num_leaves(),
        train_seconds: report.train_seconds,
    })
}

fn gbdt_cell(
    spec: &BenchmarkSpec,
    train: &Dataset,
    test: &Dataset,
    q: u32,
    run: u32,
) -> Result<BenchRow> {
    let mut grid = Vec::new();
    for &leaves in &spec.gbdt_leaves {
        for &s in &spec.gbdt_shrinkages {
            grid.push(BoostConfig {
                loss: LossKind::Square,
                variant: BoostVariant::Gbdt,
                tree_leaves: leaves,
                num_trees: spec.gbdt_trees,
                shrinkage: s,
                min_node: 1,
            });
        }
    }
    let cv_seed = cell_seed(spec.seed, q, run, 4);
    let outcome = cross_validate(train, &grid, spec.folds, cv_seed, false, |cfg, tr, va| {
        let (forest, _) = train_boosted(tr, cfg, None)?;
        evaluate(&forest, va, Metric::Rmse)
    })?;
    let best = &grid[outcome.best];
    let (forest, report) = train_boosted(train, best, None)?;
    Ok(BenchRow {
        method: "GBDT",
        reg: "-",
        q,
        run,
        selected_params: format!("J={},s={}", best.tree_leaves, best.shrinkage),
        test_rmse: evaluate(&forest, test, Metric::Rmse)?,
        leaves: forest.num_leaves(),
        train_seconds: report.train_seconds,
    })
}
