//! Command-line interface: training, prediction, evaluation,
//! cross-validation, synthetic data generation, gradient-boosting
//! baselines, and the synthetic benchmark.
//!
//! Every command is deterministic given its flags; randomness enters only
//! through explicit `--seed` values. Exit code 0 on success; failures
//! print a one-line diagnostic to stderr and exit 1 (flag and usage
//! errors exit 2 via the parser).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rgf::bench::{run_benchmark, BenchmarkSpec};
use rgf::boosting::{train_boosted, BoostConfig, BoostVariant};
use rgf::correction::CorrectionConfig;
use rgf::dataset::{
    load_dataset, load_dense_features, load_sparse_features, load_values, save_dense_features,
    save_values, DataFormat, Dataset, SynthConfig, Targets,
};
use rgf::loss::LossKind;
use rgf::model::Forest;
use rgf::reg::RegConfig;
use rgf::trainer::{
    apply_overrides, cross_validate, evaluate, metric_value, parse_loss_kind, parse_reg_kind,
    train_rgf, Metric, TrainerConfig,
};
use rgf::{Error, Result};

#[derive(Parser)]
#[command(
    name = "rgf",
    version,
    about = "Regularized greedy forest trainer with gradient-boosting baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a regularized greedy forest and save the model
    Train(TrainArgs),
    /// Apply a saved model to a feature file
    Predict(PredictArgs),
    /// Score a prediction file against a target file
    Eval(EvalArgs),
    /// Select trainer parameters by k-fold cross-validation over a grid
    Cv(CvArgs),
    /// Generate a synthetic dataset from random decision trees
    Synth(SynthArgs),
    /// Train a gradient-boosting baseline and save the model
    Gbdt(GbdtArgs),
    /// Run the synthetic benchmark protocol and emit tables
    Bench(BenchArgs),
}

/// Flags shared by every command that reads a labeled dataset.
#[derive(Args)]
struct DataArgs {
    /// Feature file: one row per line, whitespace-separated values
    /// (or `index:value` entries with --format sparse)
    #[arg(long)]
    data: PathBuf,
    /// Target file: one value per line; for loss PairSqHinge, one
    /// preference pair `i j` per line (row i should score higher)
    #[arg(long)]
    targets: PathBuf,
    /// Feature file format: dense or sparse
    #[arg(long, default_value = "dense")]
    format: String,
}

impl DataArgs {
    fn load(&self, loss: LossKind) -> Result<Dataset> {
        let sparse = match self.format.as_str() {
            "dense" => false,
            "sparse" => true,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown format {other:?} (expected dense or sparse)"
                )))
            }
        };
        let format = match (loss.is_pairwise(), sparse) {
            (true, false) => DataFormat::Pairs,
            (true, true) => {
                return Err(Error::InvalidConfig(
                    "sparse features are not supported with pairwise targets".into(),
                ))
            }
            (false, true) => DataFormat::Sparse,
            (false, false) => DataFormat::Dense,
        };
        load_dataset(&self.data, &self.targets, format)
    }
}

/// Optional held-out monitor set (always value targets).
#[derive(Args)]
struct MonitorArgs {
    /// Monitor feature file (same format as --data)
    #[arg(long)]
    monitor_data: Option<PathBuf>,
    /// Monitor target file (one value per line)
    #[arg(long)]
    monitor_targets: Option<PathBuf>,
}

impl MonitorArgs {
    fn load(&self, format: &str) -> Result<Option<Dataset>> {
        match (&self.monitor_data, &self.monitor_targets) {
            (None, None) => Ok(None),
            (Some(f), Some(t)) => {
                let fmt = match format {
                    "sparse" => DataFormat::Sparse,
                    _ => DataFormat::Dense,
                };
                Ok(Some(load_dataset(f, t, fmt)?))
            }
            _ => Err(Error::InvalidConfig(
                "--monitor-data and --monitor-targets must be given together".into(),
            )),
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Loss: LS, Log, Expo, L1L2 or PairSqHinge
    #[arg(long, default_value = "LS")]
    loss: String,
    /// Regularizer: L2, MinPen or MinPenSib
    #[arg(long, default_value = "L2")]
    reg: String,
    /// Regularization strength for weight correction (and growth unless
    /// --lambda-g is given)
    #[arg(long)]
    lambda: f64,
    /// Separate regularization strength for the growth phase
    #[arg(long)]
    lambda_g: Option<f64>,
    /// Depth-weighting base of the min-penalty regularizers (>= 1)
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Max-norm convergence tolerance of the fixed-point solver
    #[arg(long, default_value_t = 1e-8)]
    reg_tol: f64,
    /// Sweep cap of the fixed-point solver
    #[arg(long, default_value_t = 1000)]
    reg_max_iter: u32,
    /// Stop growing once the forest reaches this many leaves
    #[arg(long, default_value_t = 2000)]
    max_leaf: usize,
    /// Number of most recent trees whose leaves may be split
    #[arg(long, default_value_t = 1)]
    recent_trees: usize,
    /// Minimum instances per child of any split
    #[arg(long, default_value_t = 1)]
    min_node: usize,
    /// Damping factor of correction steps
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
    /// Run a full weight correction every this many new leaves
    #[arg(long, default_value_t = 100)]
    opt_interval: usize,
    /// Maximum sweeps per correction
    #[arg(long, default_value_t = 10)]
    opt_passes: u32,
    /// Relative Q-change tolerance ending a correction early
    #[arg(long, default_value_t = 1e-6)]
    opt_tol: f64,
    /// Where to write the trained model
    #[arg(long)]
    model_out: PathBuf,
    #[command(flatten)]
    monitor: MonitorArgs,
    /// Print a progress record every this many leaves (0 = none)
    #[arg(long, default_value_t = 0)]
    report_every: usize,
}

#[derive(Args)]
struct PredictArgs {
    /// Model file written by train or gbdt
    #[arg(long)]
    model: PathBuf,
    /// Feature file to score
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "dense")]
    format: String,
    /// Output file: one prediction per line (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Prediction file: one value per line
    #[arg(long)]
    predictions: PathBuf,
    /// Target file: one value per line
    #[arg(long)]
    targets: PathBuf,
    /// Metric: rmse or accuracy
    #[arg(long, default_value = "rmse")]
    metric: String,
}

#[derive(Args)]
struct CvArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "LS")]
    loss: String,
    /// Grid file: one configuration per line as comma-separated
    /// `key=value` overrides of the base configuration
    #[arg(long)]
    grid: PathBuf,
    #[arg(long, default_value_t = 2)]
    folds: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Metric: rmse or accuracy (default follows the loss)
    #[arg(long)]
    metric: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    /// Leaves per random target tree
    #[arg(long, default_value_t = 10)]
    q: usize,
    /// Number of random trees in the target
    #[arg(long, default_value_t = 100)]
    trees: usize,
    #[arg(long, default_value_t = 10)]
    dim: usize,
    #[arg(long, default_value_t = 2000)]
    n_train: usize,
    #[arg(long, default_value_t = 20000)]
    n_test: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Directory for train.features/train.targets/test.features/
    /// test.targets/target.model
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct GbdtArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "LS")]
    loss: String,
    /// Variant: generic, gbdt or fc
    #[arg(long, default_value = "gbdt")]
    variant: String,
    /// Leaves per tree (J)
    #[arg(long, default_value_t = 10)]
    tree_leaves: usize,
    /// Boosting rounds (K)
    #[arg(long, default_value_t = 100)]
    num_trees: usize,
    /// Shrinkage (s); ignored by the fc variant
    #[arg(long, default_value_t = 0.1)]
    shrink: f64,
    #[arg(long, default_value_t = 1)]
    min_node: usize,
    #[arg(long)]
    model_out: PathBuf,
    #[command(flatten)]
    monitor: MonitorArgs,
    /// Print a round record every this many rounds (0 = final only)
    #[arg(long, default_value_t = 0)]
    report_every: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated leaf counts of the synthetic targets
    #[arg(long, default_value = "5,10,20")]
    q: String,
    #[arg(long, default_value_t = 3)]
    runs: u32,
    #[arg(long, default_value_t = 2000)]
    n_train: usize,
    #[arg(long, default_value_t = 20000)]
    n_test: usize,
    #[arg(long, default_value_t = 10)]
    dim: usize,
    #[arg(long, default_value_t = 100)]
    target_trees: usize,
    /// Comma-separated RGF lambda grid
    #[arg(long, default_value = "1,0.1,0.01")]
    rgf_lambdas: String,
    /// Comma-separated gamma grid for the min-penalty regularizers
    #[arg(long, default_value = "1,2")]
    rgf_gammas: String,
    #[arg(long, default_value_t = 2000)]
    max_leaf: usize,
    /// Comma-separated GBDT leaves-per-tree grid
    #[arg(long, default_value = "5,10,15,20,25")]
    gbdt_leaves: String,
    /// Comma-separated GBDT shrinkage grid
    #[arg(long, default_value = "0.5,0.1,0.05,0.01,0.005,0.001")]
    gbdt_shrinkages: String,
    #[arg(long, default_value_t = 500)]
    gbdt_trees: u32,
    #[arg(long, default_value_t = 2)]
    folds: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the CSV here instead of printing it
    #[arg(long)]
    csv_out: Option<PathBuf>,
    /// Suppress per-cell progress lines on stderr
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Cv(args) => cmd_cv(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Gbdt(args) => cmd_gbdt(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let loss = parse_loss_kind(&args.loss)?;
    let config = TrainerConfig {
        loss,
        reg: RegConfig {
            kind: parse_reg_kind(&args.reg)?,
            gamma: args.gamma,
            tol: args.reg_tol,
            max_iter: args.reg_max_iter,
        },
        lambda: args.lambda,
        lambda_g: args.lambda_g,
        max_leaf: args.max_leaf,
        recent_trees: args.recent_trees,
        min_node: args.min_node,
        opt_interval: args.opt_interval,
        correction: CorrectionConfig {
            eta: args.eta,
            passes: args.opt_passes,
            tol: args.opt_tol,
        },
        report_every: args.report_every,
        record_trace: false,
    };
    let data = args.data.load(loss)?;
    let monitor = args.monitor.load(&args.data.format)?;

    let (forest, report) = train_rgf(&data, &config, monitor.as_ref())?;
    for rec in &report.records {
        match rec.monitor {
            Some(m) => println!(
                "leaves {:>6}  Q {:.6}  train_loss {:.6}  monitor {:.6}",
                rec.leaves, rec.q, rec.train_loss, m
            ),
            None => println!(
                "leaves {:>6}  Q {:.6}  train_loss {:.6}",
                rec.leaves, rec.q, rec.train_loss
            ),
        }
    }
    if report.fixed_point_failures > 0 {
        eprintln!(
            "warning: {} regularizer solve(s) hit the sweep cap",
            report.fixed_point_failures
        );
    }
    forest.save(&args.model_out)?;
    println!(
        "trained {} trees / {} leaves  train_loss {:.6}  Q {:.6}  in {:.2}s",
        forest.trees.len(),
        report.final_leaves,
        report.train_loss,
        report.final_q,
        report.train_seconds
    );
    println!("model written to {}", args.model_out.display());
    Ok(())
}

fn load_feature_matrix(path: &Path, format: &str) -> Result<(Vec<f64>, usize)> {
    match format {
        "dense" => load_dense_features(path),
        "sparse" => load_sparse_features(path),
        other => Err(Error::InvalidConfig(format!(
            "unknown format {other:?} (expected dense or sparse)"
        ))),
    }
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let forest = Forest::load(&args.model)?;
    let (x, dim) = load_feature_matrix(&args.data, &args.format)?;
    if let Some(max_feature) = forest.max_feature() {
        if max_feature >= dim {
            return Err(Error::InvalidConfig(format!(
                "model uses feature {max_feature} but input has only {dim} columns"
            )));
        }
    }
    let n = x.len() / dim;
    let mut out = String::new();
    for i in 0..n {
        let p = forest.predict(&x[i * dim..(i + 1) * dim]);
        out.push_str(&p.to_string());
        out.push('\n');
    }
    match &args.out {
        Some(path) => std::fs::write(path, out).map_err(|e| Error::io(path, e))?,
        None => print!("{out}"),
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let predictions = load_values(&args.predictions)?;
    let targets = load_values(&args.targets)?;
    let metric = Metric::parse(&args.metric)?;
    let value = metric_value(&predictions, &targets, metric)?;
    println!("{} {:.6}", args.metric, value);
    Ok(())
}

fn cmd_cv(args: CvArgs) -> Result<()> {
    let loss = parse_loss_kind(&args.loss)?;
    if loss.is_pairwise() {
        return Err(Error::InvalidConfig(
            "cross-validation requires value targets (pairwise loss unsupported)".into(),
        ));
    }
    let data = args.data.load(loss)?;
    let metric = match &args.metric {
        Some(m) => Metric::parse(m)?,
        None => match loss {
            LossKind::Logistic | LossKind::Exponential => Metric::Accuracy,
            _ => Metric::Rmse,
        },
    };

    let grid_text =
        std::fs::read_to_string(&args.grid).map_err(|e| Error::io(&args.grid, e))?;
    let base = TrainerConfig {
        loss,
        ..TrainerConfig::default()
    };
    let mut lines = Vec::new();
    let mut configs = Vec::new();
    for line in grid_text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        configs.push(apply_overrides(&base, line)?);
        lines.push(line.to_string());
    }
    if configs.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "grid file {} contains no configurations",
            args.grid.display()
        )));
    }

    let outcome = cross_validate(
        &data,
        &configs,
        args.folds,
        args.seed,
        metric.higher_is_better(),
        |cfg, train, valid| {
            let (forest, _) = train_rgf(train, cfg, None)?;
            evaluate(&forest, valid, metric)
        },
    )?;
    for (i, (line, score)) in lines.iter().zip(&outcome.scores).enumerate() {
        println!("config {i}: {line} -> {} {:.6}", args.metric_name(), score);
    }
    println!(
        "best config {}: {} ({} {:.6})",
        outcome.best,
        lines[outcome.best],
        args.metric_name(),
        outcome.scores[outcome.best]
    );
    Ok(())
}

impl CvArgs {
    fn metric_name(&self) -> &str {
        match &self.metric {
            Some(m) => m,
            None => match self.loss.as_str() {
                "Log" | "Expo" => "accuracy",
                _ => "rmse",
            },
        }
    }
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        q: args.q,
        trees: args.trees,
        dim: args.dim,
        n_train: args.n_train,
        n_test: args.n_test,
        seed: args.seed,
    };
    let (train, test, target) = rgf::dataset::synthesize(&cfg);
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    let file = |name: &str| args.out_dir.join(name);
    save_dense_features(&train, &file("train.features"))?;
    save_values(values_of(&train), &file("train.targets"))?;
    save_dense_features(&test, &file("test.features"))?;
    save_values(values_of(&test), &file("test.targets"))?;
    target.save(&file("target.model"))?;
    println!(
        "wrote {} train and {} test rows (dim {}, target: {} trees x {} leaves) to {}",
        train.n(),
        test.n(),
        args.dim,
        args.trees,
        args.q,
        args.out_dir.display()
    );
    Ok(())
}

fn values_of(data: &Dataset) -> &[f64] {
    match data.targets() {
        Targets::Values(v) => v,
        Targets::Pairs(_) => unreachable!("synthetic data carries value targets"),
    }
}

fn cmd_gbdt(args: GbdtArgs) -> Result<()> {
    let loss = parse_loss_kind(&args.loss)?;
    let config = BoostConfig {
        loss,
        variant: BoostVariant::parse(&args.variant)?,
        tree_leaves: args.tree_leaves,
        num_trees: args.num_trees,
        shrinkage: args.shrink,
        min_node: args.min_node,
    };
    let data = args.data.load(loss)?;
    let monitor = args.monitor.load(&args.data.format)?;

    let (forest, report) = train_boosted(&data, &config, monitor.as_ref())?;
    if args.report_every > 0 {
        for rec in &report.rounds {
            if rec.round % args.report_every == 0 {
                match rec.monitor {
                    Some(m) => println!(
                        "round {:>5}  train_loss {:.6}  monitor {:.6}",
                        rec.round, rec.train_loss, m
                    ),
                    None => {
                        println!("round {:>5}  train_loss {:.6}", rec.round, rec.train_loss)
                    }
                }
            }
        }
    }
    forest.save(&args.model_out)?;
    println!(
        "boosted {} trees / {} leaves ({})  train_loss {:.6}  in {:.2}s",
        forest.trees.len(),
        forest.num_leaves(),
        config.variant.name(),
        report.final_train_loss,
        report.train_seconds
    );
    println!("model written to {}", args.model_out.display());
    Ok(())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<T>()
                .map_err(|_| Error::InvalidConfig(format!("invalid {what} entry {tok:?}")))
        })
        .collect()
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let spec = BenchmarkSpec {
        q_values: parse_list(&args.q, "q")?,
        runs: args.runs,
        n_train: args.n_train,
        n_test: args.n_test,
        dim: args.dim,
        target_trees: args.target_trees,
        rgf_lambdas: parse_list(&args.rgf_lambdas, "lambda")?,
        rgf_gammas: parse_list(&args.rgf_gammas, "gamma")?,
        rgf_max_leaf: args.max_leaf,
        gbdt_leaves: parse_list(&args.gbdt_leaves, "gbdt leaves")?,
        gbdt_shrinkages: parse_list(&args.gbdt_shrinkages, "gbdt shrinkage")?,
        gbdt_trees: args.gbdt_trees as usize,
        folds: args.folds,
        seed: args.seed,
        progress: !args.quiet,
    };
    let results = run_benchmark(&spec)?;
    print!("{}", results.to_table());
    match &args.csv_out {
        Some(path) => {
            std::fs::write(path, results.to_csv()).map_err(|e| Error::io(path, e))?;
            println!("csv written to {}", path.display());
        }
        None => {
            println!();
            print!("{}", results.to_csv());
        }
    }
    Ok(())
}
