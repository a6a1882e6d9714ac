//! Rate-distortion experiments: random well-separated measures, end-to-end
//! encode/decode trials, and max-over-trials aggregation into CSV tables.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::blasso::{tvmin_decode_quantized, BlassoConfig};
use crate::error::{param, Error, Result};
use crate::esprit::Esprit;
use crate::pipeline::decode_quantized_detailed;
use crate::linalg::lstsq_vec;
use crate::measure::{fourier_coefficients, vandermonde, AtomicMeasure};
use crate::metrics::{csv_float, ErrorReport};
use crate::noise_shaping::{beta_quantize, msq_quantize, QuantizerConfig};

/// TV bound of every generated measure.
pub const TV_BOUND: f64 = 1.0;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "SPECRES_THREADS";

pub const CSV_HEADER: &str =
    "K,lambda,decoder,quantizer,trials,failures,max_e1,max_e2,max_e3,max_elip_upper,max_einf2,guide";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Decoder {
    Tvmin,
    Esprit,
    /// Least squares on the true support (MSQ floor experiment only).
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantizer {
    Beta,
    Msq,
}

impl Decoder {
    pub fn name(self) -> &'static str {
        match self {
            Decoder::Tvmin => "tvmin",
            Decoder::Esprit => "esprit",
            Decoder::Oracle => "oracle",
        }
    }

    /// Visual guide curve for this decoder.
    pub fn guide(self, k: usize, lambda: usize) -> f64 {
        let (kf, lf) = (k as f64, lambda as f64);
        match self {
            Decoder::Tvmin => 0.75 * lf.powf(1.5) * kf.powi(-(lambda as i32)),
            Decoder::Esprit => 1.6 * lf * kf.powi(-(lambda as i32)),
            Decoder::Oracle => f64::NAN,
        }
    }
}

impl Quantizer {
    pub fn name(self) -> &'static str {
        match self {
            Quantizer::Beta => "beta",
            Quantizer::Msq => "msq",
        }
    }
}

impl fmt::Display for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Quantizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Decoder selection for a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderChoice {
    Tvmin,
    Esprit,
    Both,
}

impl DecoderChoice {
    pub fn decoders(self) -> Vec<Decoder> {
        match self {
            DecoderChoice::Tvmin => vec![Decoder::Tvmin],
            DecoderChoice::Esprit => vec![Decoder::Esprit],
            DecoderChoice::Both => vec![Decoder::Tvmin, Decoder::Esprit],
        }
    }
}

impl FromStr for DecoderChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tvmin" => Ok(Self::Tvmin),
            "esprit" => Ok(Self::Esprit),
            "both" => Ok(Self::Both),
            _ => param(format!("unknown decoder '{s}' (tvmin|esprit|both)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantizerChoice {
    Beta,
    Msq,
    Both,
}

impl QuantizerChoice {
    pub fn quantizers(self) -> Vec<Quantizer> {
        match self {
            QuantizerChoice::Beta => vec![Quantizer::Beta],
            QuantizerChoice::Msq => vec![Quantizer::Msq],
            QuantizerChoice::Both => vec![Quantizer::Beta, Quantizer::Msq],
        }
    }
}

impl FromStr for QuantizerChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beta" => Ok(Self::Beta),
            "msq" => Ok(Self::Msq),
            "both" => Ok(Self::Both),
            _ => param(format!("unknown quantizer '{s}' (beta|msq|both)")),
        }
    }
}

/// Optional overrides of the BLASSO defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlassoOverrides {
    pub tau: Option<f64>,
    pub grid_size: Option<usize>,
    pub max_iter: Option<usize>,
    pub prune: Option<f64>,
    pub refine: Option<bool>,
}

impl BlassoOverrides {
    pub fn apply(&self, mut cfg: BlassoConfig) -> Result<BlassoConfig> {
        if let Some(tau) = self.tau {
            cfg.tau = tau;
            cfg.prune_threshold = tau / 10.0;
        }
        if let Some(g) = self.grid_size {
            cfg.grid_size = g;
        }
        if let Some(it) = self.max_iter {
            cfg.max_iter = it;
        }
        if let Some(p) = self.prune {
            cfg.prune_threshold = p;
        }
        if let Some(r) = self.refine {
            cfg.refine = r;
        }
        cfg.validated()
    }
}

/// Parameters of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSpec {
    /// Minimum separation of the generated measures.
    pub delta: f64,
    /// Condensed sample count; ESPRIT rounds it up to the next even number.
    pub m: usize,
    pub lambda_list: Vec<usize>,
    pub k_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub decoder: DecoderChoice,
    pub quantizer: QuantizerChoice,
    /// Feed all `M` MSQ samples to the decoder instead of the first `m`.
    pub msq_all_samples: bool,
    pub blasso: BlassoOverrides,
}

impl Default for TrialSpec {
    fn default() -> Self {
        let delta = 0.15;
        Self {
            delta,
            m: default_m(delta),
            lambda_list: (1..=6).collect(),
            k_list: (2..=8).collect(),
            trials: 100,
            seed: 42,
            decoder: DecoderChoice::Both,
            quantizer: QuantizerChoice::Both,
            msq_all_samples: false,
            blasso: BlassoOverrides::default(),
        }
    }
}

/// `ceil(4 / delta)`.
pub fn default_m(delta: f64) -> usize {
    // guard against 4/0.15 = 26.666...7 style rounding
    let x = 4.0 / delta;
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.ceil() as usize
    }
}

impl TrialSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0 / 3.0) {
            return param(format!("delta = {} must lie in (0, 1/3)", self.delta));
        }
        if self.trials == 0 {
            return param("need at least one trial");
        }
        if self.m < 2 {
            return param("m must be at least 2");
        }
        if self.lambda_list.is_empty() || self.lambda_list.contains(&0) {
            return param("every lambda must be >= 1");
        }
        if self.k_list.is_empty() || self.k_list.iter().any(|&k| k < 2) {
            return param("every K must be >= 2");
        }
        Ok(())
    }

    /// Problem size used with `decoder`: odd `m` is bumped to even for ESPRIT.
    pub fn m_for(&self, decoder: Decoder) -> usize {
        match decoder {
            Decoder::Esprit | Decoder::Oracle => self.m + self.m % 2,
            Decoder::Tvmin => self.m,
        }
    }
}

/// Random measure: `t_1 = 0`, `t_2 = delta`, then steps of `delta + |eta|`
/// with `eta ~ N(0, delta^2)` until the next point would pass `1 - delta`.
/// Amplitudes are `e^{i theta} / S` with uniform phases.
///
/// Gaussians are drawn with the ziggurat sampler of `rand_distr`.
pub fn generate_measure(delta: f64, rng: &mut impl Rng) -> AtomicMeasure {
    assert!(delta > 0.0 && delta < 1.0 / 3.0, "delta must lie in (0, 1/3)");
    let mut locations = vec![0.0, delta];
    loop {
        let eta: f64 = rng.sample::<f64, _>(StandardNormal) * delta;
        let next = locations[locations.len() - 1] + delta + eta.abs();
        if next > 1.0 - delta {
            break;
        }
        locations.push(next);
    }
    let s = locations.len() as f64;
    let amplitudes: Vec<Complex64> = locations
        .iter()
        .map(|_| Complex64::from_polar(1.0 / s, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    AtomicMeasure::from_parts(&locations, &amplitudes).expect("locations strictly increase")
}

/// Rng for trial `trial` of the `(K, lambda)` cell.
pub fn trial_rng(seed: u64, k: usize, lambda: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((k as u64) << 44) ^ ((lambda as u64) << 24) ^ trial as u64);
    rng
}

/// One end-to-end configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialCase {
    pub k: usize,
    pub lambda: usize,
    pub m: usize,
    pub decoder: Decoder,
    pub quantizer: Quantizer,
    pub msq_all_samples: bool,
    pub blasso: BlassoOverrides,
}

impl TrialCase {
    pub fn new(k: usize, lambda: usize, m: usize, decoder: Decoder, quantizer: Quantizer) -> Self {
        Self {
            k,
            lambda,
            m,
            decoder,
            quantizer,
            msq_all_samples: false,
            blasso: BlassoOverrides::default(),
        }
    }

    pub fn quantizer_config(&self) -> Result<QuantizerConfig> {
        QuantizerConfig::new(self.m, self.lambda, self.k, TV_BOUND)
    }
}

/// Decoded output of a trial, before scoring.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub estimate: AtomicMeasure,
    /// Solution of the super-resolution step before re-weighting.
    pub pre_reweight: AtomicMeasure,
    /// Configuration the decoder actually ran with.
    pub decoder_config: QuantizerConfig,
}

/// Encodes `F_M mu` and decodes it; errors are returned, not scored.
pub fn decode_trial(case: &TrialCase, mu: &AtomicMeasure) -> Result<TrialOutcome> {
    decode_samples(case, mu, true)
}

/// Runs the decoding side of `case` on `F_M mu`, quantized or exact.
fn decode_samples(case: &TrialCase, mu: &AtomicMeasure, quantize: bool) -> Result<TrialOutcome> {
    let cfg = case.quantizer_config()?;
    let y = fourier_coefficients(mu, cfg.total_samples());
    let (q, dcfg) = match case.quantizer {
        Quantizer::Beta => {
            let q = if quantize { beta_quantize(&y, &cfg)?.q } else { y.into_inner() };
            (q, cfg)
        }
        Quantizer::Msq => {
            let q = if quantize {
                msq_quantize(&y, &cfg.alphabet())
            } else {
                y.into_inner()
            };
            let used = if case.msq_all_samples {
                cfg.total_samples()
            } else {
                cfg.m
            };
            (q[..used].to_vec(), cfg.single_block(used))
        }
    };
    let s = mu.len();
    match case.decoder {
        Decoder::Esprit => {
            let d = decode_quantized_detailed(&q, &dcfg, &Esprit { s })?;
            Ok(TrialOutcome {
                estimate: d.measure,
                pre_reweight: d.pre_reweight,
                decoder_config: dcfg,
            })
        }
        Decoder::Tvmin => {
            let bcfg = case.blasso.apply(BlassoConfig::for_quantizer(&dcfg)?)?;
            let d = tvmin_decode_quantized(&q, &dcfg, &bcfg)?;
            Ok(TrialOutcome {
                estimate: d.measure,
                pre_reweight: d.pre_reweight,
                decoder_config: dcfg,
            })
        }
        Decoder::Oracle => {
            let amps = oracle_amplitudes(mu, &q)?;
            let estimate = AtomicMeasure::from_parts(&mu.locations(), &amps)?;
            Ok(TrialOutcome {
                pre_reweight: estimate.clone(),
                estimate,
                decoder_config: dcfg,
            })
        }
    }
}

/// Least-squares amplitudes on the true support from samples `0..q.len()`.
pub fn oracle_amplitudes(mu: &AtomicMeasure, q: &[Complex64]) -> Result<Vec<Complex64>> {
    lstsq_vec(&vandermonde(&mu.locations(), q.len()), q)
}

/// Runs one trial and scores it at resolution `case.m`. Decoder failures
/// become the `+inf` sentinel.
pub fn run_trial(case: &TrialCase, mu: &AtomicMeasure) -> ErrorReport {
    match decode_trial(case, mu) {
        Ok(out) => ErrorReport::compute(mu, &out.estimate, case.m),
        Err(e) => {
            log::debug!("trial failed ({} / {}): {e}", case.decoder, case.quantizer);
            ErrorReport::failed()
        }
    }
}

/// Noiseless reference: the same decoder and settings as `run_trial`, fed
/// the exact samples instead of quantized ones.
pub fn noiseless_report(case: &TrialCase, mu: &AtomicMeasure) -> ErrorReport {
    match decode_samples(case, mu, false) {
        Ok(out) => ErrorReport::compute(mu, &out.estimate, case.m),
        Err(_) => ErrorReport::failed(),
    }
}

/// One aggregated row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k: usize,
    pub lambda: usize,
    pub decoder: Decoder,
    pub quantizer: Quantizer,
    pub trials: usize,
    pub failures: usize,
    pub max_e1: f64,
    pub max_e2: f64,
    pub max_e3: f64,
    pub max_elip_upper: f64,
    /// NaN when no trial produced a matching atom count.
    pub max_einf2: f64,
    /// Largest unnormalized `l2` amplitude error (NaN when undefined).
    pub max_amp_l2: f64,
    pub guide: f64,
}

impl SweepRow {
    /// Max-aggregates a set of trial reports. A single failed trial makes
    /// every column `+inf`.
    pub fn aggregate(
        k: usize,
        lambda: usize,
        decoder: Decoder,
        quantizer: Quantizer,
        reports: &[ErrorReport],
    ) -> Self {
        let max_of = |f: &dyn Fn(&ErrorReport) -> f64| reports.iter().map(f).fold(0.0, f64::max);
        let max_opt = |f: &dyn Fn(&ErrorReport) -> Option<f64>| {
            reports
                .iter()
                .filter_map(f)
                .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))))
                .unwrap_or(f64::NAN)
        };
        Self {
            k,
            lambda,
            decoder,
            quantizer,
            trials: reports.len(),
            failures: reports.iter().filter(|r| r.is_failure()).count(),
            max_e1: max_of(&|r| r.e1),
            max_e2: max_of(&|r| r.e2),
            max_e3: max_of(&|r| r.e3),
            max_elip_upper: max_of(&|r| r.e_lip_upper),
            max_einf2: max_opt(&|r| r.e_inf2),
            max_amp_l2: max_opt(&|r| r.amplitude_l2),
            guide: decoder.guide(k, lambda),
        }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.k,
            self.lambda,
            self.decoder,
            self.quantizer,
            self.trials,
            self.failures,
            csv_float(self.max_e1),
            csv_float(self.max_e2),
            csv_float(self.max_e3),
            csv_float(self.max_elip_upper),
            csv_float(self.max_einf2),
            csv_float(self.guide)
        )
    }
}

/// Rows in `(K, lambda, decoder, quantizer)` order plus run metadata.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    /// `key=value` pairs written as `#` comment lines above the header.
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn row(&self, k: usize, lambda: usize, decoder: Decoder, quantizer: Quantizer) -> Option<&SweepRow> {
        self.rows.iter().find(|r| {
            r.k == k && r.lambda == lambda && r.decoder == decoder && r.quantizer == quantizer
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.to_csv());
            out.push('\n');
        }
        out
    }
}

/// Runs `f` on a pool sized by `SPECRES_THREADS` (default: all cores).
pub fn with_thread_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

fn spec_metadata(spec: &TrialSpec) -> Vec<(String, String)> {
    vec![
        ("delta".into(), spec.delta.to_string()),
        ("m_tvmin".into(), spec.m_for(Decoder::Tvmin).to_string()),
        ("m_esprit".into(), spec.m_for(Decoder::Esprit).to_string()),
        ("trials".into(), spec.trials.to_string()),
        ("seed".into(), spec.seed.to_string()),
        (
            "msq_samples".into(),
            if spec.msq_all_samples { "all" } else { "first-m" }.into(),
        ),
    ]
}

/// Full `(K, lambda) x decoder x quantizer` sweep. Within a `(K, lambda)` cell
/// every combination sees the same measures and the same alphabet.
pub fn sweep(spec: &TrialSpec) -> Result<SweepTable> {
    spec.validate()?;
    let decoders = spec.decoder.decoders();
    let quantizers = spec.quantizer.quantizers();
    let mut table = SweepTable {
        metadata: spec_metadata(spec),
        rows: Vec::new(),
    };
    for &k in &spec.k_list {
        for &lambda in &spec.lambda_list {
            let measures: Vec<AtomicMeasure> = (0..spec.trials)
                .map(|t| generate_measure(spec.delta, &mut trial_rng(spec.seed, k, lambda, t)))
                .collect();
            for &decoder in &decoders {
                for &quantizer in &quantizers {
                    let case = TrialCase {
                        k,
                        lambda,
                        m: spec.m_for(decoder),
                        decoder,
                        quantizer,
                        msq_all_samples: spec.msq_all_samples,
                        blasso: spec.blasso,
                    };
                    let reports: Vec<ErrorReport> = with_thread_pool(|| {
                        measures.par_iter().map(|mu| run_trial(&case, mu)).collect()
                    });
                    table
                        .rows
                        .push(SweepRow::aggregate(k, lambda, decoder, quantizer, &reports));
                }
            }
        }
    }
    Ok(table)
}

/// Oracle-support least squares on all `M` MSQ samples next to the beta +
/// ESPRIT pipeline, on shared measures. Rows are `(oracle, msq)` and
/// `(esprit, beta)` per `(K, lambda)`.
pub fn msq_floor_experiment(spec: &TrialSpec) -> Result<SweepTable> {
    spec.validate()?;
    let m = spec.m_for(Decoder::Oracle);
    let mut table = SweepTable {
        metadata: spec_metadata(spec),
        rows: Vec::new(),
    };
    for &k in &spec.k_list {
        for &lambda in &spec.lambda_list {
            let measures: Vec<AtomicMeasure> = (0..spec.trials)
                .map(|t| generate_measure(spec.delta, &mut trial_rng(spec.seed, k, lambda, t)))
                .collect();
            let mut oracle = TrialCase::new(k, lambda, m, Decoder::Oracle, Quantizer::Msq);
            oracle.msq_all_samples = true;
            let beta = TrialCase::new(k, lambda, m, Decoder::Esprit, Quantizer::Beta);
            for case in [oracle, beta] {
                let reports: Vec<ErrorReport> = with_thread_pool(|| {
                    measures.par_iter().map(|mu| run_trial(&case, mu)).collect()
                });
                table.rows.push(SweepRow::aggregate(
                    k,
                    lambda,
                    case.decoder,
                    case.quantizer,
                    &reports,
                ));
            }
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_m_is_27() {
        assert_eq!(default_m(0.15), 27);
        assert_eq!(default_m(0.1), 40);
        let spec = TrialSpec::default();
        assert_eq!(spec.m_for(Decoder::Tvmin), 27);
        assert_eq!(spec.m_for(Decoder::Esprit), 28);
    }

    #[test]
    fn generated_measures_follow_the_recipe() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let mu = generate_measure(0.15, &mut rng);
            let t = mu.locations();
            assert_eq!(t[0], 0.0);
            assert_eq!(t[1], 0.15);
            assert!(mu.min_separation() >= 0.15 - 1e-15);
            assert!(*t.last().unwrap() <= 0.85);
            let s = mu.len() as f64;
            for a in mu.amplitudes() {
                assert!((a.norm() - 1.0 / s).abs() < 1e-15);
            }
            assert!((mu.total_variation() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let a = generate_measure(0.15, &mut trial_rng(9, 3, 2, 17));
        let b = generate_measure(0.15, &mut trial_rng(9, 3, 2, 17));
        assert_eq!(a, b);
        let c = generate_measure(0.15, &mut trial_rng(9, 3, 2, 18));
        assert_ne!(a, c);
    }

    #[test]
    fn guide_values() {
        assert!((Decoder::Esprit.guide(2, 4) - 0.4).abs() < 1e-15);
        assert!((Decoder::Tvmin.guide(3, 2) - 0.235_702_260_395_515_8).abs() < 1e-12);
    }

    #[test]
    fn aggregation_is_max_and_failures_dominate() {
        let mut a = ErrorReport::failed();
        a.e1 = 0.1;
        a.e2 = 0.0;
        a.e3 = 0.0;
        a.e_lip_upper = 0.1;
        a.e_inf2 = None;
        a.amplitude_l2 = None;
        let mut b = a.clone();
        b.e1 = 0.3;
        let row = SweepRow::aggregate(2, 1, Decoder::Tvmin, Quantizer::Beta, &[a.clone(), b.clone()]);
        assert_eq!(row.max_e1, 0.3);
        assert!(row.max_einf2.is_nan());
        assert_eq!(row.failures, 0);
        let row = SweepRow::aggregate(2, 1, Decoder::Tvmin, Quantizer::Beta, &[a, b, ErrorReport::failed()]);
        assert_eq!(row.failures, 1);
        assert_eq!(row.max_e1, f64::INFINITY);
        assert!(row.to_csv().starts_with("2,1,tvmin,beta,3,1,inf,"));
    }

    #[test]
    fn choices_parse() {
        assert_eq!("both".parse::<DecoderChoice>().unwrap().decoders().len(), 2);
        assert_eq!("msq".parse::<QuantizerChoice>().unwrap(), QuantizerChoice::Msq);
        assert!("music".parse::<DecoderChoice>().is_err());
    }

    #[test]
    fn spec_validation() {
        let mut spec = TrialSpec::default();
        assert!(spec.validate().is_ok());
        spec.k_list = vec![1];
        assert!(spec.validate().is_err());
        let spec = TrialSpec {
            delta: 0.4,
            ..TrialSpec::default()
        };
        assert!(spec.validate().is_err());
    }
}
