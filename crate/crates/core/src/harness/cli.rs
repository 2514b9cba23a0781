use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use super::bench::{bench, bench_csv, BenchKind, MIN_REPS};
use super::data::{load_mnist_dir, synth_dataset, Dataset, SynthKind};
use super::model::{load_model, load_model_file, save_model};
use super::train::{metrics_csv, score, train, TrainConfig};
use crate::compressor::{
    compress, restructure_shallow_network, toeplitz_layer_to_conv, CompressMode, CompressOptions, ShallowMode,
};
use crate::decompose::FitOptions;
use crate::error::{Error, Result};
use crate::identity_approx::{Activation, SampleDomain};
use crate::network::LossKind;
use crate::structmat::{MatrixKind, StructuredMatrix};

#[derive(Debug, Parser)]
#[command(name = "structnet", version, about = "Structured-weight neural networks: train, compress, evaluate, benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a network with mini-batch SGD.
    Train(TrainArgs),
    /// Rewrite a dense model with Toeplitz, Hankel or triangular weights.
    Compress(CompressArgs),
    /// Report accuracy (or MSE) and parameter counts of a model.
    Eval(EvalArgs),
    /// Time structured and dense matrix-vector products; CSV on stdout.
    Bench(BenchArgs),
    /// Exactly restructure a one-hidden-layer scalar model.
    ConvertShallow(ConvertArgs),
    /// Print the convolution kernels of a model's Toeplitz layers as JSON.
    ExportConv(ExportArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// mnist, regression or two_spirals.
    #[arg(long, default_value = "mnist")]
    dataset: String,
    /// Directory with the IDX files (mnist only).
    #[arg(long, default_value = "data/mnist-subset")]
    data_dir: PathBuf,
    /// Number of synthetic points before the train/test split.
    #[arg(long, default_value_t = 2000)]
    points: usize,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Layer widths, input first.
    #[arg(long, value_delimiter = ',', default_value = "784,128,128,10")]
    widths: Vec<usize>,
    /// One kind per layer (dense, toeplitz, hankel, lower, upper), or a single
    /// kind for all layers, or `lu` for upper/lower alternating.
    #[arg(long, value_delimiter = ',', default_value = "dense")]
    kinds: Vec<String>,
    #[arg(long, default_value = "relu")]
    activation: String,
    /// cross_entropy or mse; defaults to the dataset's natural loss.
    #[arg(long)]
    loss: Option<String>,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 20)]
    batch_size: usize,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Multiply the rate by 0.2 every 10 epochs.
    #[arg(long)]
    lr_decay: bool,
    /// Use the naive product instead of FFT for Toeplitz/Hankel layers.
    #[arg(long)]
    naive: bool,
    /// Worker threads for batch gradients (results do not depend on this).
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch metrics CSV.
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompressArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// toeplitz, hankel or lu.
    #[arg(long, default_value = "lu")]
    mode: String,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Tuning sample size, drawn uniformly from the box [lo, hi]^n.
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    lo: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    hi: f64,
    /// Maximum number of square factors per weight (default 2s + 5).
    #[arg(long)]
    factor_budget: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "512,1024,2048,4096")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "dense,toeplitz-fft")]
    kinds: Vec<String>,
    #[arg(long, default_value_t = MIN_REPS)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// toeplitz, hankel or lower.
    #[arg(long, default_value = "toeplitz")]
    mode: String,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    /// Only this layer (0-based).
    #[arg(long)]
    layer: Option<usize>,
}

/// Runs the CLI and returns the process exit code: 0 on success, 1 on a
/// usage error, 2 on a runtime failure.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let shown = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{shown}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{shown}");
                    1
                }
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if matches!(e, Error::Config(_)) {
                1
            } else {
                2
            }
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Train(a) => cmd_train(a, out),
        Command::Compress(a) => cmd_compress(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Bench(a) => cmd_bench(a, out),
        Command::ConvertShallow(a) => cmd_convert(a, out),
        Command::ExportConv(a) => cmd_export(a, out),
    }
}

fn load_dataset(args: &DataArgs, seed: u64) -> Result<Dataset> {
    match args.dataset.as_str() {
        "mnist" => load_mnist_dir(&args.data_dir),
        other => {
            let kind = SynthKind::parse(other).ok_or_else(|| Error::Config(format!("unknown dataset {other:?}")))?;
            synth_dataset(kind, args.points, seed)
        }
    }
}

fn parse_kinds(names: &[String], layers: usize) -> Result<Vec<MatrixKind>> {
    if let [single] = names {
        if single == "lu" {
            return Ok((0..layers).map(|i| if i % 2 == 0 { MatrixKind::Upper } else { MatrixKind::Lower }).collect());
        }
        let kind = MatrixKind::parse(single).ok_or_else(|| Error::Config(format!("unknown kind {single:?}")))?;
        return Ok(vec![kind; layers]);
    }
    names
        .iter()
        .map(|n| MatrixKind::parse(n).ok_or_else(|| Error::Config(format!("unknown kind {n:?}"))))
        .collect()
}

fn write_output(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn cmd_train(a: TrainArgs, out: &mut dyn Write) -> Result<()> {
    let data = load_dataset(&a.data, a.seed)?;
    let layers = a.widths.len().saturating_sub(1);
    let loss = match &a.loss {
        Some(name) => LossKind::parse(name).ok_or_else(|| Error::Config(format!("unknown loss {name:?}")))?,
        None if data.classes.is_some() => LossKind::CrossEntropy,
        None => LossKind::Mse,
    };
    let config = TrainConfig {
        dims: a.widths.clone(),
        kinds: parse_kinds(&a.kinds, layers)?,
        activation: Activation::parse(&a.activation)
            .ok_or_else(|| Error::Config(format!("unknown activation {:?}", a.activation)))?,
        loss,
        lr: a.lr,
        batch_size: a.batch_size,
        epochs: a.epochs,
        seed: a.seed,
        lr_decay: a.lr_decay.then_some((0.2, 10)),
        fast: !a.naive,
        parallel: a.workers > 1,
    };
    config.validate()?;
    let (net, log) = if a.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(a.workers)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| train(&config, &data))?
    } else {
        train(&config, &data)?
    };
    save_model(&net, None, &a.out)?;
    let csv = metrics_csv(&log);
    if let Some(path) = &a.metrics {
        fs::write(path, &csv)?;
    }
    write_output(out, &csv)
}

fn cmd_compress(a: CompressArgs, out: &mut dyn Write) -> Result<()> {
    let mode = CompressMode::parse(&a.mode).ok_or_else(|| Error::Config(format!("unknown mode {:?}", a.mode)))?;
    if a.samples == 0 || !(a.hi > a.lo) {
        return Err(Error::Config("need a positive sample count and lo < hi".into()));
    }
    let net = load_model(&a.model)?;
    let domain = SampleDomain::uniform(net.input_dim(), a.samples, a.lo, a.hi, a.seed)?;
    let opts = CompressOptions {
        factor_budget: a.factor_budget,
        fit: FitOptions { seed: a.seed, target_rel_error: 1e-6, ..FitOptions::default() },
        seed: a.seed,
        ..CompressOptions::default()
    };
    let report = compress(&net, &domain, a.eps, mode, &opts)?;
    save_model(&report.network, Some(&report), &a.out)?;
    write_output(
        out,
        &format!(
            "mode {mode}\neps {}\nachieved {:e}\ntuning {:e}\nfactorization {:e}\nfactor_counts {:?}\ninsertions {}\nparams {} -> {}\n",
            report.eps,
            report.achieved_error,
            report.tuning_error,
            report.factorization_error,
            report.factor_counts,
            report.h_values.len(),
            net.param_count(),
            report.network.param_count()
        ),
    )
}

fn cmd_eval(a: EvalArgs, out: &mut dyn Write) -> Result<()> {
    let net = load_model(&a.model)?;
    let file = load_model_file(&a.model)?;
    let mut text = String::new();
    for (i, layer) in net.layers().iter().enumerate() {
        let (m, n) = layer.weight().shape();
        text += &format!(
            "layer {i}: {} {m}x{n} weight_params {} bias {} total {}\n",
            layer.weight().kind(),
            layer.weight_param_count(),
            layer.bias().len(),
            layer.param_count()
        );
    }
    text += &format!("total_params {}\n", net.param_count());
    let data = load_dataset(&a.data, a.seed)?;
    if data.test.input_dim() != net.input_dim() {
        return Err(Error::Config(format!("dataset has {} inputs, model expects {}", data.test.input_dim(), net.input_dim())));
    }
    let metric = if data.classes.is_some() { "accuracy" } else { "mse" };
    text += &format!("test_{metric} {}\n", score(&net, &data.test, true)?);
    if let Some(r) = file.report {
        text += &format!("compressed mode {} eps {} achieved {:e}\n", r.mode, r.eps, r.achieved_error);
    }
    write_output(out, &text)
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write) -> Result<()> {
    let kinds = a
        .kinds
        .iter()
        .map(|k| BenchKind::parse(k).ok_or_else(|| Error::Config(format!("unknown bench kind {k:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let records = bench(&a.sizes, &kinds, a.reps, a.seed)?;
    let csv = bench_csv(&records);
    if let Some(path) = &a.out {
        fs::write(path, &csv)?;
    }
    write_output(out, &csv)
}

fn cmd_convert(a: ConvertArgs, out: &mut dyn Write) -> Result<()> {
    let mode = ShallowMode::parse(&a.mode).ok_or_else(|| Error::Config(format!("unknown mode {:?}", a.mode)))?;
    let net = load_model(&a.model)?;
    let converted = restructure_shallow_network(&net, mode)?;
    save_model(&converted, None, &a.out)?;
    write_output(out, &format!("hidden width {} -> {}\n", net.layers()[0].output_dim(), converted.layers()[0].output_dim()))
}

fn cmd_export(a: ExportArgs, out: &mut dyn Write) -> Result<()> {
    let net = load_model(&a.model)?;
    let mut entries = Vec::new();
    for (i, layer) in net.layers().iter().enumerate() {
        if a.layer.is_some_and(|l| l != i) {
            continue;
        }
        match layer.weight() {
            StructuredMatrix::Toeplitz(t) => {
                let spec = toeplitz_layer_to_conv(t);
                entries.push(serde_json::json!({
                    "layer": i,
                    "input_len": spec.input_len,
                    "output_len": spec.output_len,
                    "stride": spec.stride,
                    "padding": spec.padding(),
                    "kernel": spec.kernel,
                }));
            }
            other if a.layer.is_some() => {
                return Err(Error::Parameter(format!("layer {i} is {}, not Toeplitz", other.kind())));
            }
            _ => {}
        }
    }
    if entries.is_empty() {
        return Err(Error::Parameter("model has no Toeplitz layers".into()));
    }
    let json = serde_json::to_string_pretty(&entries).map_err(|e| Error::Format(e.to_string()))?;
    write_output(out, &(json + "\n"))
}

/// Entry point used by the binary.
pub fn main_with_args(argv: impl IntoIterator<Item = OsString>) -> i32 {
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    run(argv, &mut stdout, &mut stderr)
}
