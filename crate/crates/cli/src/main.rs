//! `mlca`: train binary-relevance models, produce partial multilabel
//! predictions that minimize expected generalized loss, sweep abstention
//! costs under cross-validation, and verify the minimizers against
//! brute-force oracles.

mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use mlca_core::data;
use mlca_core::fmeasure::maximize_f_abstain;
use mlca_core::hamming::minimize_hamming;
use mlca_core::oracle;
use mlca_core::rank::minimize_rank;
use mlca_core::sweep::{self, CostGrid, PenaltyFamily, SweepConfig};
use mlca_core::trainer::{train, BRModel, TrainConfig};
use mlca_core::{LossKind, MarginalVector, PenaltySpec};

#[derive(Parser)]
#[command(name = "mlca", version, about = "Multilabel classification with partial abstention")]
struct Cli {
    /// Bound the number of worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one logistic-regression model per label on a dataset CSV.
    Train(TrainArgs),
    /// Emit a loss-minimizing partial prediction per instance.
    Predict(PredictArgs),
    /// Cross-validated sweep over a grid of abstention costs.
    Sweep(SweepArgs),
    /// Randomized check of a minimizer against its brute-force oracle.
    OracleCheck(OracleCheckArgs),
    /// Generate a synthetic dataset with known true marginals.
    Synth(SynthArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset CSV (header f0..,l0..).
    #[arg(long)]
    input: PathBuf,
    /// Where to write the model file.
    #[arg(long)]
    out: PathBuf,
    /// Regularization strength c_reg (penalty weight is 1/c_reg).
    #[arg(long, default_value_t = 1.0)]
    reg: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Convergence tolerance on the per-row gradient norm.
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PredictArgs {
    /// Trained model file; requires --input.
    #[arg(long, conflicts_with = "marginals", requires = "input")]
    model: Option<PathBuf>,
    /// Dataset CSV whose features are fed to the model (labels ignored).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Marginal-probability CSV (header p0..); bypasses the model.
    #[arg(long)]
    marginals: Option<PathBuf>,
    /// hamming | rank | f1
    #[arg(long)]
    loss: LossKind,
    /// sep | par
    #[arg(long)]
    penalty: PenaltyFamily,
    /// Abstention cost constant.
    #[arg(long)]
    cost: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Dataset CSV: cross-validated, trained per fold, realized losses.
    #[arg(long, conflicts_with = "marginals")]
    input: Option<PathBuf>,
    /// Marginals CSV: no training, exact expected losses (fold column 0).
    #[arg(long)]
    marginals: Option<PathBuf>,
    #[arg(long)]
    loss: LossKind,
    #[arg(long)]
    penalty: PenaltyFamily,
    /// Cost grid start:stop:step, inclusive.
    #[arg(long)]
    grid: CostGrid,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Results CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Optional SVG plot path.
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    reg: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
}

#[derive(Args)]
struct OracleCheckArgs {
    #[arg(long)]
    loss: LossKind,
    /// Label count per trial (bounded by the brute-force capacity).
    #[arg(long)]
    m: usize,
    #[arg(long)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value = "sep")]
    penalty: PenaltyFamily,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dataset CSV path; the true marginals go to a companion file.
    #[arg(long)]
    out: PathBuf,
    /// Companion marginals path (default: <out stem>_marginals.csv).
    #[arg(long)]
    marginals_out: Option<PathBuf>,
}

/// Exit codes: 0 success, 1 failed check or runtime error, 2 usage error.
enum CliError {
    Usage(String),
    Check(String),
    Run(String),
}

impl From<mlca_core::Error> for CliError {
    fn from(e: mlca_core::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        // Ignore failure: the global pool may already exist in tests.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let result = match cli.command {
        Command::Train(args) => run_train(args),
        Command::Predict(args) => run_predict(args),
        Command::Sweep(args) => run_sweep(args),
        Command::OracleCheck(args) => run_oracle_check(args),
        Command::Synth(args) => run_synth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn train_config(reg: f64, max_iter: usize, tol: f64, seed: u64) -> Result<TrainConfig, CliError> {
    if reg <= 0.0 || !reg.is_finite() {
        return Err(usage(format!("--reg must be positive, got {reg}")));
    }
    if tol <= 0.0 || !tol.is_finite() {
        return Err(usage(format!("--tol must be positive, got {tol}")));
    }
    Ok(TrainConfig { c_reg: reg, max_iter, tol, seed })
}

fn run_train(args: TrainArgs) -> CliResult {
    let config = train_config(args.reg, args.max_iter, args.tol, args.seed)?;
    let ds = data::load_csv(&args.input)?;
    let model = train(&ds, &config)?;
    if model.degenerate_features() {
        eprintln!("warning: all feature columns have zero variance; model is constant");
    }
    for (label, fit) in model.fits().iter().enumerate() {
        println!(
            "label {label}: {} iterations, grad {:.3e}, {}",
            fit.iterations,
            fit.grad_norm,
            if fit.converged { "converged" } else { "max iterations reached" }
        );
    }
    model.save(&args.out)?;
    println!(
        "wrote model ({} labels, {} features) to {}",
        model.label_count(),
        model.feature_dim(),
        args.out.display()
    );
    Ok(())
}

fn load_marginal_rows(args: &PredictArgs) -> Result<Vec<MarginalVector>, CliError> {
    match (&args.model, &args.marginals) {
        (Some(model_path), None) => {
            let input = args.input.as_ref().expect("clap enforces --input with --model");
            let model = BRModel::load(model_path)?;
            let ds = data::load_csv(input)?;
            Ok(model.predict_dataset(&ds)?)
        }
        (None, Some(marginals)) => Ok(data::load_marginals_csv(marginals)?),
        _ => Err(usage("provide either --model with --input, or --marginals")),
    }
}

fn build_penalty(family: PenaltyFamily, m: usize, cost: f64) -> Result<PenaltySpec, CliError> {
    family.build(m, cost).map_err(|e| usage(e.to_string()))
}

fn run_predict(args: PredictArgs) -> CliResult {
    let rows = load_marginal_rows(&args)?;
    let m = rows.first().map(MarginalVector::len).ok_or_else(|| usage("no input rows"))?;
    let f = build_penalty(args.penalty, m, args.cost)?;

    let mut out = String::new();
    match args.loss {
        LossKind::Hamming | LossKind::FMeasure => {
            let value_col =
                if args.loss == LossKind::Hamming { "expected_loss" } else { "expected_f" };
            let header: Vec<String> = (0..m).map(|j| format!("l{j}")).collect();
            out.push_str(&format!("{},{value_col}\n", header.join(",")));
        }
        LossKind::Rank => out.push_str("ranking,expected_loss\n"),
    }
    for p in &rows {
        if p.len() != m {
            return Err(usage("marginal rows must all have the same width"));
        }
        match args.loss {
            LossKind::Hamming => {
                let r = minimize_hamming(p, &f)?;
                out.push_str(&format!("{},{}\n", r.prediction, r.expected_loss));
            }
            LossKind::Rank => {
                let r = minimize_rank(p, &f)?;
                out.push_str(&format!("{},{}\n", r.ranking, r.expected_loss));
            }
            LossKind::FMeasure => {
                let r = maximize_f_abstain(p, &f)?;
                out.push_str(&format!("{},{}\n", r.prediction, r.expected_value));
            }
        }
    }
    std::fs::write(&args.out, out).map_err(|e| CliError::Run(e.to_string()))?;
    println!("wrote {} predictions to {}", rows.len(), args.out.display());
    Ok(())
}

fn run_sweep(args: SweepArgs) -> CliResult {
    let config = SweepConfig {
        loss: args.loss,
        penalty: args.penalty,
        grid: args.grid,
        folds: args.folds,
        seed: args.seed,
        train: train_config(args.reg, args.max_iter, args.tol, args.seed)?,
    };
    let rows = match (&args.input, &args.marginals) {
        (Some(input), None) => {
            let ds = data::load_csv(input)?;
            if config.folds < 2 || config.folds > ds.len() {
                return Err(usage(format!(
                    "--folds must be in 2..={} for this dataset, got {}",
                    ds.len(),
                    config.folds
                )));
            }
            sweep::run_sweep_dataset(&ds, &config)?
        }
        (None, Some(marginals)) => {
            let rows = data::load_marginals_csv(marginals)?;
            sweep::run_sweep_marginals(&rows, &config)?
        }
        _ => return Err(usage("provide exactly one of --input or --marginals")),
    };
    std::fs::write(&args.out, sweep::rows_to_csv(&rows))
        .map_err(|e| CliError::Run(e.to_string()))?;
    println!("wrote {} result rows to {}", rows.len(), args.out.display());
    if let Some(plot) = &args.plot {
        std::fs::write(plot, svg::render_sweep(&rows)).map_err(|e| CliError::Run(e.to_string()))?;
        println!("wrote plot to {}", plot.display());
    }
    Ok(())
}

/// Cost ranges used by the randomized oracle checks, per loss and penalty
/// family; these mirror the sweep grids.
fn cost_range(loss: LossKind, penalty: PenaltyFamily) -> (f64, f64) {
    match (loss, penalty) {
        (LossKind::Hamming, PenaltyFamily::Sep) => (0.05, 0.5),
        (LossKind::Hamming, PenaltyFamily::Par) => (0.1, 1.0),
        (LossKind::Rank, PenaltyFamily::Sep) => (0.1, 1.0),
        (LossKind::Rank, PenaltyFamily::Par) => (0.2, 2.0),
        (LossKind::FMeasure, PenaltyFamily::Sep) => (0.05, 0.5),
        (LossKind::FMeasure, PenaltyFamily::Par) => (0.1, 1.0),
    }
}

fn run_oracle_check(args: OracleCheckArgs) -> CliResult {
    let capacity = match args.loss {
        LossKind::Hamming => oracle::MAX_HAMMING_BRUTE,
        LossKind::Rank => oracle::MAX_RANK_BRUTE,
        LossKind::FMeasure => oracle::MAX_F_BRUTE,
    };
    if args.m == 0 || args.m > capacity {
        return Err(usage(format!(
            "--m must be in 1..={capacity} for {} brute force, got {}",
            args.loss, args.m
        )));
    }
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let (lo, hi) = cost_range(args.loss, args.penalty);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(args.seed);
    let mut max_dev: f64 = 0.0;
    for trial in 0..args.trials {
        let probs: Vec<f64> = (0..args.m).map(|_| rng.gen()).collect();
        let c = rng.gen_range(lo..hi);
        let p = MarginalVector::new(probs.clone()).expect("uniform draws are in range");
        let f = build_penalty(args.penalty, args.m, c)?;
        let (fast_desc, fast_value, brute_desc, brute_value) = match args.loss {
            LossKind::Hamming => {
                let fast = minimize_hamming(&p, &f)?;
                let (pred, value) = oracle::brute_minimize_hamming(&p, &f)?;
                (fast.prediction.to_string(), fast.expected_loss, pred.to_string(), value)
            }
            LossKind::Rank => {
                let fast = minimize_rank(&p, &f)?;
                let (pred, value) = oracle::brute_minimize_rank(&p, &f)?;
                (fast.ranking.to_string(), fast.expected_loss, pred.to_string(), value)
            }
            LossKind::FMeasure => {
                let fast = maximize_f_abstain(&p, &f)?;
                let (pred, value) = oracle::brute_maximize_f(&p, &f)?;
                (fast.prediction.to_string(), fast.expected_value, pred.to_string(), value)
            }
        };
        let dev = (fast_value - brute_value).abs();
        max_dev = max_dev.max(dev);
        if dev > args.tol {
            return Err(CliError::Check(format!(
                "trial {trial}: objectives differ by {dev:e} (tol {:e})\n  p = {probs:?}\n  c = {c}\n  minimizer: {fast_desc} -> {fast_value}\n  brute force: {brute_desc} -> {brute_value}",
                args.tol
            )));
        }
    }
    println!(
        "oracle check passed: loss={} penalty={} m={} trials={} max deviation={max_dev:.3e}",
        args.loss, args.penalty, args.m, args.trials
    );
    Ok(())
}

fn default_marginals_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("data");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}_marginals.{ext}"))
}

fn run_synth(args: SynthArgs) -> CliResult {
    let ds = data::synth(args.m, args.n, args.d, args.seed).map_err(|e| usage(e.to_string()))?;
    ds.write_csv(&args.out)?;
    let marginals_path =
        args.marginals_out.clone().unwrap_or_else(|| default_marginals_path(&args.out));
    std::fs::write(&marginals_path, ds.true_marginals_csv().expect("synth stores marginals"))
        .map_err(|e| CliError::Run(e.to_string()))?;
    println!(
        "wrote {} rows ({} features, {} labels) to {} and true marginals to {}",
        ds.len(),
        ds.feature_dim(),
        ds.label_count(),
        args.out.display(),
        marginals_path.display()
    );
    Ok(())
}
