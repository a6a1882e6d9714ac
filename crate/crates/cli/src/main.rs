use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use specres::harness::{BlassoOverrides, DecoderChoice, QuantizerChoice};
use specres::io::{self, StreamFile, StreamMethod};
use specres::{
    beta_quantize, esprit_decode_quantized, fourier_coefficients, generate_measure,
    msq_floor_experiment, msq_quantize, sweep, tvmin_decode_quantized, BlassoConfig,
    QuantizerConfig, TrialSpec,
};

/// Quantized spectral super-resolution.
#[derive(Parser, Debug)]
#[command(name = "specres", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a Monte-Carlo rate-distortion sweep and write a CSV table.
    Experiment(ExperimentArgs),
    /// Quantize a vector of Fourier samples.
    Quantize(QuantizeArgs),
    /// Decode a quantized stream into an atomic measure.
    Decode(DecodeArgs),
    /// Draw a random separated measure.
    Generate(GenerateArgs),
    /// Write the first M Fourier coefficients of a measure.
    Fourier(FourierArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct BlassoArgs {
    /// Penalty weight (default eps_V / 2).
    #[arg(long)]
    tau: Option<f64>,
    /// Grid size (default 16 m).
    #[arg(long)]
    grid_size: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Off-grid refinement of the grid solution.
    #[arg(long)]
    refine: Option<bool>,
    /// Grid amplitudes at or below this are dropped (default tau / 10).
    #[arg(long)]
    prune: Option<f64>,
}

impl BlassoArgs {
    fn overrides(&self) -> BlassoOverrides {
        BlassoOverrides {
            tau: self.tau,
            grid_size: self.grid_size,
            max_iter: self.max_iter,
            prune: self.prune,
            refine: self.refine,
        }
    }
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long, default_value_t = 0.15)]
    delta: f64,
    /// Condensed sample count (default ceil(4 / delta)).
    #[arg(long)]
    m: Option<usize>,
    /// Alphabet sizes, e.g. `2,3,4` or `2..8`.
    #[arg(long, default_value = "2..8", value_parser = parse_list)]
    k: List,
    #[arg(long, default_value = "1..6", value_parser = parse_list)]
    lambda: List,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// tvmin, esprit or both.
    #[arg(long, default_value = "both")]
    decoder: DecoderChoice,
    /// beta, msq or both.
    #[arg(long, default_value = "both")]
    quantizer: QuantizerChoice,
    /// Feed all M MSQ samples to the decoder instead of the first m.
    #[arg(long)]
    msq_all_samples: bool,
    /// Run the oracle-support MSQ floor experiment instead of the sweep.
    #[arg(long)]
    msq_floor: bool,
    #[command(flatten)]
    blasso: BlassoArgs,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    Beta,
    Msq,
}

#[derive(Args, Debug)]
struct QuantizeArgs {
    /// Samples, one `re im` pair per line.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "K")]
    k: usize,
    #[arg(long)]
    lambda: usize,
    /// Bound on the sample moduli.
    #[arg(long = "A", default_value_t = 1.0)]
    a: f64,
    #[arg(long, value_enum, default_value = "beta")]
    method: Method,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum DecoderArg {
    Esprit,
    Tvmin,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    /// Quantized stream written by `quantize`.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    decoder: DecoderArg,
    /// Number of atoms (ESPRIT only).
    #[arg(long = "S")]
    s: Option<usize>,
    /// Use all samples of an MSQ stream instead of the first m.
    #[arg(long)]
    all_samples: bool,
    #[command(flatten)]
    blasso: BlassoArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, default_value_t = 0.15)]
    delta: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FourierArgs {
    /// Measure file.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "M")]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
struct List(Vec<usize>);

/// Parses `2,3,4`, `1..6` (inclusive) or a mix such as `1..3,8`.
fn parse_list(s: &str) -> Result<List, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            let lo: usize = lo.trim().parse().map_err(|e| format!("'{part}': {e}"))?;
            let hi: usize = hi.trim().parse().map_err(|e| format!("'{part}': {e}"))?;
            if lo > hi {
                return Err(format!("empty range '{part}'"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|e| format!("'{part}': {e}"))?);
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(List(out))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            info!("wrote {}", path.display());
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let mut spec = TrialSpec {
        delta: args.delta,
        lambda_list: args.lambda.0,
        k_list: args.k.0,
        trials: args.trials,
        seed: args.seed,
        decoder: args.decoder,
        quantizer: args.quantizer,
        msq_all_samples: args.msq_all_samples,
        blasso: args.blasso.overrides(),
        ..TrialSpec::default()
    };
    spec.m = args.m.unwrap_or_else(|| specres::harness::default_m(args.delta));
    let table = if args.msq_floor {
        msq_floor_experiment(&spec)?
    } else {
        sweep(&spec)?
    };
    emit(args.out.as_deref(), &table.to_csv())
}

fn quantize(args: QuantizeArgs) -> Result<()> {
    let y = io::read_samples(&read(&args.input)?)?;
    let config = QuantizerConfig::for_sample_count(y.len(), args.lambda, args.k, args.a)?;
    let used = config.total_samples();
    if used < y.len() {
        log::warn!("discarding the last {} samples", y.len() - used);
    }
    let y = &y[..used];
    let (method, q) = match args.method {
        Method::Beta => (StreamMethod::Beta, beta_quantize(y, &config)?.q),
        Method::Msq => (StreamMethod::Msq, msq_quantize(y, &config.alphabet())),
    };
    let stream = StreamFile { config, method, q };
    emit(args.out.as_deref(), &io::write_stream(&stream))
}

fn decode(args: DecodeArgs) -> Result<()> {
    let stream = io::read_stream(&read(&args.input)?)?;
    let (q, cfg) = match stream.method {
        StreamMethod::Beta => (&stream.q[..], stream.config),
        StreamMethod::Msq => {
            let used = if args.all_samples {
                stream.q.len()
            } else {
                stream.config.m
            };
            (&stream.q[..used], stream.config.single_block(used))
        }
    };
    let mu = match args.decoder {
        DecoderArg::Esprit => {
            let Some(s) = args.s else {
                bail!("ESPRIT needs the atom count --S");
            };
            if cfg.m < 8 * s {
                log::warn!("m = {} < 8S = {}: outside the guaranteed regime", cfg.m, 8 * s);
            }
            esprit_decode_quantized(q, &cfg, s)?
        }
        DecoderArg::Tvmin => {
            let bcfg = args.blasso.overrides().apply(BlassoConfig::for_quantizer(&cfg)?)?;
            tvmin_decode_quantized(q, &cfg, &bcfg)?.measure
        }
    };
    info!("decoded {} atoms", mu.len());
    emit(args.out.as_deref(), &io::write_measure(&mu))
}

fn generate(args: GenerateArgs) -> Result<()> {
    if !(args.delta > 0.0 && args.delta < 1.0 / 3.0) {
        bail!("delta = {} must lie in (0, 1/3)", args.delta);
    }
    let mu = generate_measure(args.delta, &mut ChaCha8Rng::seed_from_u64(args.seed));
    emit(args.out.as_deref(), &io::write_measure(&mu))
}

fn fourier(args: FourierArgs) -> Result<()> {
    let mu = io::read_measure(&read(&args.input)?)?;
    let y = fourier_coefficients(&mu, args.samples);
    emit(args.out.as_deref(), &io::write_samples(&y))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Experiment(a) => experiment(a),
        Command::Quantize(a) => quantize(a),
        Command::Decode(a) => decode(a),
        Command::Generate(a) => generate(a),
        Command::Fourier(a) => fourier(a),
    }
}
