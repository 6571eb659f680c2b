use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use moaoff_core::config::Config;
use moaoff_core::perception::{text_features, Calibration, ImageWeights};
use moaoff_core::sim::{self, Request, Strategy};
use moaoff_core::workload;
use moaoff_core::Error;

/// Modality-aware edge/cloud offloading: complexity scoring, calibration and
/// simulation.
#[derive(Parser, Debug)]
#[command(name = "moaoff", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score a PGM/PPM image and print its component breakdown.
    ScoreImage(ScoreImageArgs),
    /// Score a text and print its component breakdown.
    ScoreText(ScoreTextArgs),
    /// Fit calibration percentiles over every PGM/PPM file in a directory.
    Calibrate(CalibrateArgs),
    /// Compare strategies across bandwidths and write the report CSV.
    Simulate(SimulateArgs),
    /// Compare full routing against the modality-blind and scheduling-off variants.
    Ablate(AblateArgs),
    /// Write a synthetic workload as a pre-scored trace file.
    Synthesize(SynthesizeArgs),
    /// Print the built-in configuration document.
    DefaultConfig(DefaultConfigArgs),
}

#[derive(Args, Debug)]
struct ConfigArg {
    /// TOML configuration file; flags override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScoreImageArgs {
    /// Image to score (.pgm or .ppm).
    path: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
    /// Component weights res,edge,ent,lap; normalized to sum to 1.
    #[arg(long, value_name = "W,W,W,W", value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Calibration file written by `calibrate`.
    #[arg(long, value_name = "FILE")]
    calibration: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScoreTextArgs {
    /// Text to score. Reads standard input when neither TEXT nor --file is given.
    #[arg(conflicts_with = "file")]
    text: Option<String>,
    /// Read the text from a UTF-8 file.
    #[arg(long, value_name = "FILE")]
    file: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args, Debug)]
struct CalibrateArgs {
    /// Directory of calibration images.
    dir: PathBuf,
    /// Output calibration file.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct WorkloadArgs {
    /// Workload trace (one JSON record per line).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["synthetic", "requests"])]
    workload: Option<PathBuf>,
    /// Use the synthetic generator from the config (the default without --workload).
    #[arg(long)]
    synthetic: bool,
    /// Number of synthetic requests.
    #[arg(long, value_name = "N")]
    requests: Option<usize>,
    /// Seed for the synthetic generator and the accuracy draws.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Complexity threshold for both modalities.
    #[arg(long, value_name = "TAU")]
    tau: Option<f64>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    input: WorkloadArgs,
    /// Link bandwidths in Mbps.
    #[arg(long, value_name = "MBPS,..", value_delimiter = ',')]
    bandwidths: Option<Vec<f64>>,
    /// Strategies: moa-off, edge-only, cloud-only, uniform-offload.
    #[arg(long, value_name = "NAME,..", value_delimiter = ',')]
    strategies: Option<Vec<String>>,
    /// Mean-complexity threshold of uniform-offload.
    #[arg(long, value_name = "T")]
    uniform_threshold: Option<f64>,
    /// Output CSV file.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct AblateArgs {
    #[command(flatten)]
    input: WorkloadArgs,
    /// Link bandwidth in Mbps.
    #[arg(long, value_name = "MBPS")]
    bandwidth: Option<f64>,
    /// Also write the report to this file.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthesizeArgs {
    /// Number of requests.
    #[arg(long, value_name = "N")]
    requests: Option<usize>,
    /// Generator seed.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    #[command(flatten)]
    config: ConfigArg,
    /// Output trace file.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DefaultConfigArgs {
    /// Write to this file instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_io_or_parse() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn domain(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn load_config(arg: &ConfigArg) -> CliResult<Config> {
    match &arg.config {
        Some(path) => Ok(Config::load(path)?),
        None => Ok(Config::default()),
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    std::fs::write(path, contents).map_err(|e| io_failure(path, e))
}

fn score_image(args: ScoreImageArgs) -> CliResult<String> {
    let mut cfg = load_config(&args.config)?.perception;
    if let Some(w) = args.weights {
        if w.len() != 4 {
            return Err(domain(format!("--weights needs 4 values, got {}", w.len())));
        }
        cfg.weights = ImageWeights::new(w[0], w[1], w[2], w[3])?;
    }
    if let Some(path) = &args.calibration {
        cfg.calibration = Calibration::load(path)?;
    }
    let img = workload::load_gray(&args.path)?;
    let s = cfg.score_image(&img);
    let mut out = String::new();
    for (k, v) in [
        ("c_res", s.c_res),
        ("c_edge", s.c_edge),
        ("c_ent", s.c_ent),
        ("c_lap", s.c_lap),
        ("total", s.total),
    ] {
        let _ = writeln!(out, "{k} = {v:.6}");
    }
    Ok(out)
}

fn score_text(args: ScoreTextArgs) -> CliResult<String> {
    let cfg = load_config(&args.config)?.perception;
    let text = match (args.text, &args.file) {
        (Some(t), _) => t,
        (None, Some(path)) => std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?,
        (None, None) => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| io_failure(Path::new("<stdin>"), e))?;
            buf
        }
    };
    let f = text_features(&text);
    let s = cfg.score_text(&text);
    let mut out = String::new();
    let _ = writeln!(out, "tokens = {}", f.token_count);
    let _ = writeln!(out, "entities = {}", f.entity_count);
    let _ = writeln!(out, "sentences = {}", f.sentence_count);
    for (k, v) in [("c_l", s.c_l), ("c_ner", s.c_ner), ("total", s.total)] {
        let _ = writeln!(out, "{k} = {v:.6}");
    }
    Ok(out)
}

fn calibrate(args: CalibrateArgs) -> CliResult<String> {
    let paths = workload::image_files_in(&args.dir)?;
    let fit = workload::collect_calibration(&paths)?;
    for (path, reason) in &fit.skipped {
        eprintln!("warning: skipped {}: {reason}", path.display());
    }
    write_file(&args.out, &fit.calibration.to_document())?;
    Ok(format!(
        "fitted {} images ({} skipped) -> {}\n",
        fit.images_used,
        fit.skipped.len(),
        args.out.display()
    ))
}

/// Applies workload flags to the config and returns the requests and seed.
fn prepare(input: &WorkloadArgs) -> CliResult<(Config, Vec<Request>, u64)> {
    let mut cfg = load_config(&input.config)?;
    if let Some(tau) = input.tau {
        if !(0.0..=1.0).contains(&tau) {
            return Err(domain(format!("--tau must be in [0, 1], got {tau}")));
        }
        cfg.policy.tau_text = tau;
        cfg.policy.tau_image = tau;
    }
    let seed = input.seed.unwrap_or(cfg.simulation.seed);
    let requests = match &input.workload {
        Some(path) => workload::load_workload(path, &cfg.perception)?,
        None => {
            if let Some(n) = input.requests {
                cfg.synthetic.request_count = n;
            }
            if let Some(s) = input.seed {
                cfg.synthetic.seed = s;
            }
            workload::synthesize_workload(&cfg.synthetic)?
        }
    };
    Ok((cfg, requests, seed))
}

fn simulate(args: SimulateArgs) -> CliResult<String> {
    let (mut cfg, requests, seed) = prepare(&args.input)?;
    if let Some(t) = args.uniform_threshold {
        if !(0.0..=1.0).contains(&t) {
            return Err(domain(format!(
                "--uniform-threshold must be in [0, 1], got {t}"
            )));
        }
        cfg.simulation.uniform_threshold = t;
        for s in &mut cfg.simulation.strategies {
            if let Strategy::UniformOffload { threshold } = s {
                *threshold = t;
            }
        }
    }
    if let Some(names) = &args.strategies {
        cfg.simulation.strategies = names
            .iter()
            .map(|n| Strategy::parse(n.trim(), cfg.simulation.uniform_threshold))
            .collect::<Result<_, _>>()?;
    }
    if let Some(bws) = args.bandwidths {
        cfg.simulation.bandwidths_mbps = bws;
    }
    let reports = sim::run_comparison(
        &requests,
        &cfg.policy,
        &cfg.cost_model,
        &cfg.simulation.bandwidths_mbps,
        &cfg.simulation.strategies,
        seed,
    )?;
    write_file(&args.out, &sim::to_csv(&reports))?;
    Ok(sim::summary_table(&reports))
}

fn ablate(args: AblateArgs) -> CliResult<String> {
    let (cfg, requests, seed) = prepare(&args.input)?;
    let bw = args
        .bandwidth
        .unwrap_or(cfg.simulation.ablation_bandwidth_mbps);
    let report = sim::ablation(&requests, &cfg.policy, &cfg.cost_model, bw, seed)?;
    let text = report.to_text();
    if let Some(path) = &args.out {
        write_file(path, &text)?;
    }
    Ok(text)
}

fn synthesize(args: SynthesizeArgs) -> CliResult<String> {
    let mut spec = load_config(&args.config)?.synthetic;
    if let Some(n) = args.requests {
        spec.request_count = n;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    let requests = workload::synthesize_workload(&spec)?;
    write_file(&args.out, &workload::workload_to_jsonl(&requests))?;
    Ok(format!(
        "wrote {} requests -> {}\n",
        requests.len(),
        args.out.display()
    ))
}

fn default_config(args: DefaultConfigArgs) -> CliResult<String> {
    let text = Config::default().to_toml_string();
    match &args.out {
        Some(path) => {
            write_file(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ScoreImage(a) => score_image(a),
        Command::ScoreText(a) => score_text(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Simulate(a) => simulate(a),
        Command::Ablate(a) => ablate(a),
        Command::Synthesize(a) => synthesize(a),
        Command::DefaultConfig(a) => default_config(a),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
