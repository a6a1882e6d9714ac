//! Distributed noise-shaping beta quantization of Fourier samples.
//!
//! The `M = lambda * m` samples are split into `lambda` consecutive blocks of
//! length `m`. Each sample is quantized after adding `beta` times the state
//! left by the sample one block earlier, so the quantization error satisfies
//! `y - q = H u` with `H` block bidiagonal (`I_m` on the diagonal, `-beta I_m`
//! below it) and a bounded state `u`.
//!
//! The decoder condenses the samples with `V = [I_m, beta^-1 I_m, ...,
//! beta^(1-lambda) I_m]`. Since `V H = [0 ... 0 beta^(1-lambda) I_m]`, the
//! condensed error `V(y - q)` is of size `sqrt(2m) beta^(1-lambda) delta`,
//! while `V F_M mu = F_m(w_m mu)` are the first `m` Fourier coefficients of
//! a re-weighted copy of `mu` with the same support. Any robust
//! super-resolution method applied to `Vq` therefore recovers `w_m mu`, and
//! dividing its amplitudes by `w_m` undoes the weighting.
//!
//! Neither `V` nor `H` is ever materialized; both are applied by index
//! arithmetic.

use std::f64::consts::{E, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::measure::{sup_norm, AtomicMeasure};

/// Relative slack on the `max |y_k| <= A` admission check.
const RANGE_SLACK: f64 = 1e-12;

/// The free quantizer parameters `(beta, delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    pub beta: f64,
    pub delta: f64,
}

impl Parameters {
    /// `C_beta = (1 + 1/beta) / (1 - 1/beta)`, the bound `1/C <= |w_m| <= C`.
    pub fn c_beta(&self) -> f64 {
        c_beta(self.beta)
    }

    /// Upper bound `4 pi lambda beta / (beta - 1)^2` on the Lipschitz constant of `w`.
    pub fn lipschitz_bound(&self, lambda: usize) -> f64 {
        lipschitz_bound(self.beta, lambda)
    }

    /// `eps_V = sqrt(2m) beta^(1-lambda) delta`.
    pub fn eps_v(&self, m: usize, lambda: usize) -> f64 {
        eps_v(m, lambda, self.beta, self.delta)
    }
}

pub fn c_beta(beta: f64) -> f64 {
    (1.0 + 1.0 / beta) / (1.0 - 1.0 / beta)
}

pub fn lipschitz_bound(beta: f64, lambda: usize) -> f64 {
    4.0 * PI * lambda as f64 * beta / ((beta - 1.0) * (beta - 1.0))
}

pub fn eps_v(m: usize, lambda: usize, beta: f64, delta: f64) -> f64 {
    (2.0 * m as f64).sqrt() * beta.powi(1 - lambda as i32) * delta
}

/// Closed-form parameter choice `beta = K(lambda+1)/(lambda+2)`,
/// `delta = (lambda+2)A/K`, which saturates `beta + A/delta = K`.
pub fn choose_parameters(k: usize, lambda: usize, a: f64) -> Result<Parameters> {
    if k < 2 {
        return param(format!("K = {k}: need at least 2 levels"));
    }
    if lambda < 1 {
        return param("oversampling ratio lambda must be >= 1");
    }
    if !(a > 0.0 && a.is_finite()) {
        return param(format!("A = {a} must be positive and finite"));
    }
    let (kf, lf) = (k as f64, lambda as f64);
    Ok(Parameters {
        beta: kf * (lf + 1.0) / (lf + 2.0),
        delta: (lf + 2.0) * a / kf,
    })
}

/// The per-axis levels `delta * {-K+1, -K+3, ..., K-1}`.
///
/// The complex alphabet is the Cartesian square of these levels.
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet {
    k: usize,
    delta: f64,
    levels: Vec<f64>,
}

impl Alphabet {
    pub fn new(k: usize, delta: f64) -> Result<Self> {
        if k < 2 {
            return param(format!("K = {k}: need at least 2 levels"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return param(format!("delta = {delta} must be positive and finite"));
        }
        let levels = (0..k).map(|i| Self::level_value(k, delta, i)).collect();
        Ok(Self { k, delta, levels })
    }

    fn level_value(k: usize, delta: f64, i: usize) -> f64 {
        delta * (2.0 * i as f64 - (k as f64 - 1.0))
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn max_level(&self) -> f64 {
        self.delta * (self.k as f64 - 1.0)
    }

    /// Nearest level, clipping out-of-range values to the extreme levels.
    /// Exact ties go to the smaller level.
    pub fn round_real(&self, x: f64) -> f64 {
        let s = (x / self.delta + (self.k as f64 - 1.0)) / 2.0;
        let i = (s - 0.5).ceil().clamp(0.0, (self.k - 1) as f64);
        self.levels[i as usize]
    }

    /// Rounds real and imaginary parts independently.
    pub fn round(&self, c: Complex64) -> Complex64 {
        Complex64::new(self.round_real(c.re), self.round_real(c.im))
    }

    pub fn contains(&self, c: Complex64) -> bool {
        self.levels.contains(&c.re) && self.levels.contains(&c.im)
    }
}

pub fn round_to_alphabet(c: Complex64, alphabet: &Alphabet) -> Complex64 {
    alphabet.round(c)
}

/// All system parameters of the beta quantizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerConfig {
    /// Condensed sample count.
    pub m: usize,
    /// Oversampling ratio (number of blocks).
    pub lambda: usize,
    /// Levels per real axis.
    pub k: usize,
    /// Bound on the total variation of admissible measures.
    pub a: f64,
    pub beta: f64,
    pub delta: f64,
}

impl QuantizerConfig {
    /// Configuration with `beta` and `delta` from [`choose_parameters`].
    pub fn new(m: usize, lambda: usize, k: usize, a: f64) -> Result<Self> {
        let p = choose_parameters(k, lambda, a)?;
        Self::with_parameters(m, lambda, k, a, p.beta, p.delta)
    }

    /// Configuration with explicit `beta`, `delta`; checks `1 < beta < K` and
    /// `beta + A/delta <= K`.
    pub fn with_parameters(
        m: usize,
        lambda: usize,
        k: usize,
        a: f64,
        beta: f64,
        delta: f64,
    ) -> Result<Self> {
        if m == 0 {
            return param("m must be positive");
        }
        if lambda < 1 {
            return param("oversampling ratio lambda must be >= 1");
        }
        if k < 2 {
            return param(format!("K = {k}: need at least 2 levels"));
        }
        if !(a > 0.0 && a.is_finite() && delta > 0.0 && delta.is_finite()) {
            return param(format!("A = {a} and delta = {delta} must be positive"));
        }
        if !(beta > 1.0 && beta < k as f64) {
            return param(format!("beta = {beta} must lie in (1, K = {k})"));
        }
        if beta + a / delta > k as f64 * (1.0 + 1e-12) {
            return param(format!(
                "beta + A/delta = {} exceeds K = {k}",
                beta + a / delta
            ));
        }
        Ok(Self {
            m,
            lambda,
            k,
            a,
            beta,
            delta,
        })
    }

    /// Largest usable configuration for `total` available samples: the
    /// trailing `total mod lambda` samples are discarded.
    pub fn for_sample_count(total: usize, lambda: usize, k: usize, a: f64) -> Result<Self> {
        if lambda == 0 || total < lambda {
            return param(format!(
                "{total} samples cannot be split into lambda = {lambda} blocks"
            ));
        }
        Self::new(total / lambda, lambda, k, a)
    }

    /// Total sample count `M = lambda * m`.
    pub fn total_samples(&self) -> usize {
        self.lambda * self.m
    }

    pub fn parameters(&self) -> Parameters {
        Parameters {
            beta: self.beta,
            delta: self.delta,
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.k, self.delta).expect("validated at construction")
    }

    pub fn eps_v(&self) -> f64 {
        eps_v(self.m, self.lambda, self.beta, self.delta)
    }

    pub fn c_beta(&self) -> f64 {
        c_beta(self.beta)
    }

    /// Bound on the Lipschitz constant of `w_m`, i.e. `m * L_{beta,lambda}`.
    pub fn weight_lipschitz_bound(&self) -> f64 {
        self.m as f64 * lipschitz_bound(self.beta, self.lambda)
    }

    /// The same alphabet with single-block semantics on `m` samples: no
    /// condensation and no re-weighting. This is how memoryless-quantized
    /// data is handed to a decoder.
    pub fn single_block(&self, m: usize) -> Self {
        Self {
            m,
            lambda: 1,
            ..*self
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        let expected = self.total_samples();
        if len != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: len,
            });
        }
        Ok(())
    }
}

/// Alphabet-valued output `q` and the state `u` certifying `y - q = H u`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedStream {
    pub q: Vec<Complex64>,
    pub u: Vec<Complex64>,
}

/// Runs the beta-encoder recursion.
///
/// For the first block `q_k = round(y_k)`, `u_k = y_k - q_k`; afterwards
/// `q_k = round(y_k + beta u_{k-m})` and `u_k = y_k - q_k + beta u_{k-m}`.
/// Inputs with `max |y_k| > A` are rejected since the state bound
/// `|u_k| <= sqrt(2) delta` is only guaranteed below it.
pub fn beta_quantize(y: &[Complex64], cfg: &QuantizerConfig) -> Result<QuantizedStream> {
    cfg.check_len(y.len())?;
    let norm = sup_norm(y);
    if norm > cfg.a * (1.0 + RANGE_SLACK) {
        return Err(Error::InputOutOfRange {
            norm,
            bound: cfg.a,
        });
    }
    let alphabet = cfg.alphabet();
    let m = cfg.m;
    let mut q = Vec::with_capacity(y.len());
    let mut u: Vec<Complex64> = Vec::with_capacity(y.len());
    for (k, &yk) in y.iter().enumerate() {
        let carry = if k < m { yk } else { yk + u[k - m] * cfg.beta };
        let qk = alphabet.round(carry);
        q.push(qk);
        u.push(carry - qk);
    }
    Ok(QuantizedStream { q, u })
}

/// Memoryless scalar quantization: every entry rounded independently.
pub fn msq_quantize(y: &[Complex64], alphabet: &Alphabet) -> Vec<Complex64> {
    y.iter().map(|&c| alphabet.round(c)).collect()
}

/// Condensation `(Vx)_l = sum_{k < lambda} beta^-k x_{mk + l}`.
pub fn condense(x: &[Complex64], cfg: &QuantizerConfig) -> Result<Vec<Complex64>> {
    cfg.check_len(x.len())?;
    let mut out = vec![Complex64::new(0.0, 0.0); cfg.m];
    let mut scale = 1.0;
    for block in x.chunks_exact(cfg.m) {
        for (o, &v) in out.iter_mut().zip(block) {
            *o += v * scale;
        }
        scale /= cfg.beta;
    }
    Ok(out)
}

/// Noise-transfer operator: `(Hu)_k = u_k - beta u_{k-m}` (no feedback in the
/// first block).
pub fn noise_transfer_apply(u: &[Complex64], cfg: &QuantizerConfig) -> Result<Vec<Complex64>> {
    cfg.check_len(u.len())?;
    let m = cfg.m;
    Ok((0..u.len())
        .map(|k| {
            if k < m {
                u[k]
            } else {
                u[k] - u[k - m] * cfg.beta
            }
        })
        .collect())
}

/// `w_m(t) = w(mt)` with `w(t) = (1 - beta^-lambda e^{-2 pi i lambda t}) /
/// (1 - beta^-1 e^{-2 pi i t})`.
pub fn weight(t: f64, cfg: &QuantizerConfig) -> Complex64 {
    if cfg.lambda == 1 {
        return Complex64::new(1.0, 0.0);
    }
    let s = (cfg.m as f64 * t).rem_euclid(1.0);
    let lam = cfg.lambda as f64;
    let num = Complex64::new(1.0, 0.0)
        - Complex64::cis(-TAU * (lam * s).rem_euclid(1.0)) * cfg.beta.powi(-(cfg.lambda as i32));
    let den = Complex64::new(1.0, 0.0) - Complex64::cis(-TAU * s) / cfg.beta;
    num / den
}

/// `w_m mu`: the measure whose first `m` Fourier coefficients are the
/// condensed samples `V F_M mu`.
pub fn weighted_measure(mu: &AtomicMeasure, cfg: &QuantizerConfig) -> AtomicMeasure {
    mu.map_amplitudes(|t, a| a * weight(t, cfg))
}

/// Divides each amplitude by `w_m` at its location.
pub fn reweight_decode(nu: &AtomicMeasure, cfg: &QuantizerConfig) -> AtomicMeasure {
    nu.map_amplitudes(|t, a| a / weight(t, cfg))
}

/// Bound `e A sqrt(2m) (lambda+1) K^-lambda` on `eps_V` under the default
/// parameter rule.
pub fn eps_v_default_bound(m: usize, lambda: usize, k: usize, a: f64) -> f64 {
    E * a * (2.0 * m as f64).sqrt() * (lambda as f64 + 1.0) * (k as f64).powi(-(lambda as i32))
}

/// Config file with keys `M`, `lambda`, `K`, `A`; `beta` and `delta` are
/// always derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    #[serde(rename = "M")]
    pub total_samples: usize,
    pub lambda: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "A")]
    pub a: f64,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map_or(0, |s| text[..s.start].lines().count()),
            msg: e.message().to_string(),
        })
    }

    pub fn to_config(&self) -> Result<QuantizerConfig> {
        QuantizerConfig::for_sample_count(self.total_samples, self.lambda, self.k, self.a)
    }
}
