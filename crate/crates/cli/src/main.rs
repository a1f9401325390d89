//! `qmlp`: generate data, train and evaluate the hybrid regressors, compare
//! architectures and check circuit gradients.
//!
//! Exit codes: 0 success, 1 gradient check failed, 2 usage or config
//! error, 3 runtime or numeric error, 4 I/O error.

mod gradcheck;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use qmlp_core::data::{generate_synthetic, load_csv, save_csv, Dataset, GENERATOR_VERSION};
use qmlp_core::train::{
    compare_architectures, evaluate, format_sig, load_checkpoint, save_checkpoint, train_detailed, MetricUnits,
    TrainConfig, TrainStatus,
};
use qmlp_core::{Architecture, GradientMethod, ProjectionMode};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "qmlp", version, about = "Hybrid quantum-classical regression experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset as CSV plus a `.meta.json` sidecar.
    GenData(GenDataArgs),
    /// Train one architecture; writes model.ckpt, report.txt and report.json.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a dataset.
    Eval(EvalArgs),
    /// Train all three architectures and print the comparison table.
    Compare(CompareArgs),
    /// Check parameter-shift gradients and the simulator against references.
    Gradcheck(gradcheck::GradcheckArgs),
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long)]
    seed: u64,
    /// Number of samples.
    #[arg(long)]
    n: usize,
    /// Target width M.
    #[arg(long)]
    outputs: usize,
    /// Input width d.
    #[arg(long, default_value_t = 7)]
    inputs: usize,
    #[arg(long, default_value = "data.csv")]
    out: PathBuf,
}

/// Training options shared by `train` and `compare`. Anything left unset
/// falls back to the config file, then to built-in defaults.
#[derive(Args)]
struct TrainOptions {
    /// TOML file with training options; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Qubit count, also the SPD projection size.
    #[arg(long)]
    qubits: Option<usize>,
    /// Regulariser added to the SPD matrix diagonal.
    #[arg(long)]
    epsilon: Option<f64>,
    /// SPD projection mode: batch or per-sample.
    #[arg(long, value_parser = parse_with::<ProjectionMode>)]
    mode: Option<ProjectionMode>,
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Circuit gradient during training: adjoint or parameter-shift.
    #[arg(long, value_parser = parse_with::<GradientMethod>)]
    gradient: Option<GradientMethod>,
    /// Report metrics in the dataset's units instead of standardised ones.
    #[arg(long)]
    original_units: bool,
}

#[derive(Args)]
struct TrainArgs {
    /// classical-quantum, quantum-classical or spd-enhanced.
    #[arg(long, value_parser = parse_with::<Architecture>)]
    arch: Architecture,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[command(flatten)]
    options: TrainOptions,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    original_units: bool,
    /// Where to write the metrics; defaults to metrics.txt beside the
    /// checkpoint.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Dataset CSV. Without it a synthetic set is generated from
    /// --data-seed, --n and --outputs.
    #[arg(long, conflicts_with_all = ["data_seed", "n", "outputs"])]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    data_seed: u64,
    #[arg(long, default_value_t = 512)]
    n: usize,
    #[arg(long, default_value_t = 32)]
    outputs: usize,
    /// Also write the table and the three reports here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    options: TrainOptions,
}

fn parse_with<T: std::str::FromStr<Err = qmlp_core::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: qmlp_core::Error| e.to_string())
}

/// A failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        Failure {
            code: classify(&error),
            error,
        }
    }
}

fn fail(code: u8, error: anyhow::Error) -> Failure {
    Failure { code, error }
}

fn classify(error: &anyhow::Error) -> u8 {
    for cause in error.chain() {
        if cause.is::<std::io::Error>() {
            return 4;
        }
        if cause.is::<toml::de::Error>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<qmlp_core::Error>() {
            return match e {
                qmlp_core::Error::Io(_) => 4,
                qmlp_core::Error::InvalidParameter(_) => 2,
                _ => 3,
            };
        }
    }
    3
}

fn load_options(opts: &TrainOptions) -> Result<TrainConfig, Failure> {
    let mut config = match &opts.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            toml::from_str::<TrainConfig>(&text).map_err(|e| {
                fail(
                    2,
                    anyhow::Error::new(e).context(format!("parsing config {}", path.display())),
                )
            })?
        }
        None => TrainConfig::default(),
    };
    if let Some(v) = opts.epochs {
        config.epochs = v;
    }
    if let Some(v) = opts.seed {
        config.seed = v;
    }
    if let Some(v) = opts.lr {
        config.learning_rate = v;
    }
    if let Some(v) = opts.batch_size {
        config.batch_size = v;
    }
    if let Some(v) = opts.qubits {
        config.qubits = v;
    }
    if let Some(v) = opts.epsilon {
        config.spd_epsilon = v;
    }
    if let Some(v) = opts.mode {
        config.projection_mode = v;
    }
    if let Some(v) = opts.train_fraction {
        config.train_fraction = v;
    }
    if let Some(v) = opts.gradient {
        config.gradient = v;
    }
    if opts.original_units {
        config.metric_units = MetricUnits::Original;
    }
    config.validate().map_err(|e| fail(2, e.into()))?;
    Ok(config)
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    load_csv(path).with_context(|| format!("loading dataset {}", path.display()))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct Sidecar<'a> {
    generator: &'a str,
    seed: u64,
    n: usize,
    inputs: usize,
    outputs: usize,
}

fn gen_data(args: GenDataArgs) -> Result<(), Failure> {
    if args.n == 0 || args.inputs == 0 || args.outputs == 0 {
        return Err(fail(2, anyhow::anyhow!("--n, --inputs and --outputs must be positive")));
    }
    let ds = generate_synthetic(args.seed, args.n, args.inputs, args.outputs)?;
    save_csv(&ds, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    let mut meta_path = args.out.clone().into_os_string();
    meta_path.push(".meta.json");
    let sidecar = Sidecar {
        generator: GENERATOR_VERSION,
        seed: args.seed,
        n: args.n,
        inputs: args.inputs,
        outputs: args.outputs,
    };
    write_file(Path::new(&meta_path), serde_json::to_string_pretty(&sidecar)? + "\n")?;
    println!(
        "wrote {} samples ({} inputs, {} outputs, seed {}) to {}",
        args.n,
        args.inputs,
        args.outputs,
        args.seed,
        args.out.display()
    );
    Ok(())
}

fn train_cmd(args: TrainArgs) -> Result<(), Failure> {
    let mut config = load_options(&args.options)?;
    config.architecture = args.arch;
    config
        .data_source
        .get_or_insert_with(|| args.data.display().to_string());
    let ds = load_dataset(&args.data)?;
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let outcome = train_detailed(&config, &ds)?;
    let scaler = &outcome.scaler;
    if scaler.has_degenerate_columns() {
        eprintln!(
            "warning: constant columns in the training split passed through unscaled (inputs {:?}, targets {:?})",
            scaler.degenerate_inputs, scaler.degenerate_targets
        );
    }
    let report = &outcome.report;
    write_file(&args.out_dir.join("report.txt"), report.to_text())?;
    write_file(&args.out_dir.join("report.json"), report.to_json()? + "\n")?;
    if let TrainStatus::Diverged { epoch } = report.status {
        return Err(fail(
            3,
            anyhow::anyhow!(
                "training diverged at epoch {epoch} (non-finite train MSE); report written, no checkpoint saved"
            ),
        ));
    }
    let ckpt = args.out_dir.join("model.ckpt");
    save_checkpoint(&outcome.model, &outcome.scaler, &ckpt).with_context(|| format!("writing {}", ckpt.display()))?;
    println!(
        "{}: final train MSE {}, test MSE {}, test R2 {} ({} units)",
        config.architecture,
        report.final_train_mse().map_or("n/a".into(), |v| format_sig(v, 5)),
        report.test_mse.map_or("n/a".into(), |v| format_sig(v, 5)),
        report.test_r2.map_or("n/a".into(), |v| format_sig(v, 5)),
        config.metric_units.name()
    );
    println!("checkpoint and reports in {}", args.out_dir.display());
    Ok(())
}

fn eval_cmd(args: EvalArgs) -> Result<(), Failure> {
    let ckpt = load_checkpoint(&args.checkpoint)
        .with_context(|| format!("loading checkpoint {}", args.checkpoint.display()))?;
    let ds = load_dataset(&args.data)?;
    let units = if args.original_units {
        MetricUnits::Original
    } else {
        MetricUnits::Standardized
    };
    let metrics = evaluate(&ckpt.model, &ds, Some(&ckpt.scaler), units).with_context(|| {
        format!(
            "checkpoint {} does not fit dataset {}",
            args.checkpoint.display(),
            args.data.display()
        )
    })?;
    let line = format!(
        "MSE={} R2={}",
        format_sig(metrics.mse, 5),
        metrics.r2.map_or("undefined".into(), |v| format_sig(v, 5))
    );
    println!("{line}");
    let out = args
        .out
        .unwrap_or_else(|| args.checkpoint.parent().unwrap_or(Path::new(".")).join("metrics.txt"));
    write_file(&out, format!("{line}\nunits={}\n", units.name()))?;
    Ok(())
}

fn compare_cmd(args: CompareArgs) -> Result<(), Failure> {
    let mut config = load_options(&args.options)?;
    let ds = match &args.data {
        Some(path) => {
            config.data_source.get_or_insert_with(|| path.display().to_string());
            load_dataset(path)?
        }
        None => {
            config.data_source.get_or_insert_with(|| {
                format!(
                    "synthetic {GENERATOR_VERSION} seed={} n={} outputs={}",
                    args.data_seed, args.n, args.outputs
                )
            });
            generate_synthetic(args.data_seed, args.n, 7, args.outputs)?
        }
    };
    let comparison = compare_architectures(&config, &ds)?;
    let table = comparison.table();
    print!("{table}");
    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_file(&dir.join("comparison.txt"), &table)?;
        for r in &comparison.reports {
            write_file(&dir.join(format!("report-{}.txt", r.architecture.name())), r.to_text())?;
            write_file(
                &dir.join(format!("report-{}.json", r.architecture.name())),
                r.to_json()? + "\n",
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Train(a) => train_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Compare(a) => compare_cmd(a),
        Command::Gradcheck(a) => gradcheck::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
