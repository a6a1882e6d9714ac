//! ESPRIT recovery of a known number of atoms from their first `m` Fourier
//! coefficients.
//!
//! The signal subspace of the `n x (m - n + 1)` Hankel matrix is spanned by
//! `Phi_n(T)`, which is shift invariant: dropping its last row and dropping
//! its first row differ by the diagonal `diag(e^{-2 pi i t_j})`. The
//! eigenvalues of `U0^+ U1` therefore sit at `e^{-2 pi i t_j}`, and the
//! amplitudes follow by least squares against `Phi_m(T)`.

use std::f64::consts::TAU;

use log::debug;
use num_complex::Complex64;

use crate::error::{param, Error, Result};
use crate::linalg::{eigenvalues, left_singular, lstsq, lstsq_vec, CMatrix, RANK_TOL};
use crate::measure::{hankel, torus_distance, vandermonde, wrap_location, AtomicMeasure};
use crate::noise_shaping::QuantizerConfig;
use crate::pipeline::{decode_quantized, SuperResolution};

/// Recovered locations closer than this are pushed apart after the
/// amplitude least-squares.
const DUPLICATE_GAP: f64 = 1e-12;

/// Problem size for [`esprit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EspritConfig {
    /// Number of Fourier samples.
    pub m: usize,
    /// Hankel height, `m/2 + 1`.
    pub n: usize,
    /// Known atom count.
    pub s: usize,
}

impl EspritConfig {
    /// Requires an even `m` and `S <= n - 1 <= m - S`.
    ///
    /// The error guarantee additionally asks for `m >= 8S`; a smaller `m` is
    /// accepted (logged at debug level), since the subspace step is well defined as
    /// long as the Hankel matrix can carry `S` singular values.
    pub fn new(m: usize, s: usize) -> Result<Self> {
        if m == 0 || m % 2 != 0 {
            return param(format!("ESPRIT needs an even sample count, got m = {m}"));
        }
        if s == 0 {
            return param("ESPRIT needs at least one atom");
        }
        let n = m / 2 + 1;
        if !(s < n && n - 1 <= m - s) {
            return param(format!(
                "S = {s} violates S <= n - 1 <= m - S for m = {m}, n = {n}"
            ));
        }
        if m < 8 * s {
            debug!("ESPRIT with m = {m} < 8S = {}: outside the guaranteed regime", 8 * s);
        }
        Ok(Self { m, n, s })
    }
}

/// Raw subspace output, exposed for diagnostics.
#[derive(Debug, Clone)]
pub struct EspritEstimate {
    pub measure: AtomicMeasure,
    /// Eigenvalues of `U0^+ U1`, one per atom.
    pub eigenvalues: Vec<Complex64>,
    /// Singular values of the Hankel matrix, descending.
    pub singular_values: Vec<f64>,
}

/// ESPRIT decoder returning a measure with exactly `cfg.s` atoms.
pub fn esprit(yv: &[Complex64], cfg: &EspritConfig) -> Result<AtomicMeasure> {
    esprit_detailed(yv, cfg).map(|e| e.measure)
}

pub fn esprit_detailed(yv: &[Complex64], cfg: &EspritConfig) -> Result<EspritEstimate> {
    if yv.len() != cfg.m {
        return Err(Error::LengthMismatch {
            expected: cfg.m,
            found: yv.len(),
        });
    }
    let h = hankel(yv, cfg.n)?;
    let (sigma, u) = left_singular(&h)?;
    let s = cfg.s;
    if sigma.len() < s || !(sigma[s - 1] > RANK_TOL * sigma[0]) {
        return Err(Error::Degenerate(format!(
            "Hankel matrix has fewer than S = {s} significant singular values"
        )));
    }

    let signal = u.columns(0, s);
    let rows = cfg.n - 1;
    let u0: CMatrix = signal.rows(0, rows).into_owned();
    let u1: CMatrix = signal.rows(1, rows).into_owned();
    let u0_sigma = crate::linalg::singular_values(&u0);
    if !(u0_sigma[s - 1] > RANK_TOL * u0_sigma[0]) {
        return Err(Error::Numerical("truncated signal subspace is rank deficient".into()));
    }
    let psi = lstsq(&u0, &u1)?;
    let eig = eigenvalues(&psi)?;

    let mut locations: Vec<f64> = eig
        .iter()
        .map(|z| wrap_location(-z.arg() / TAU))
        .collect();
    locations.sort_by(f64::total_cmp);

    // Fit before separating: coincident columns are then rank deficient and
    // the minimum-norm solution splits their mass instead of blowing up.
    let phi = vandermonde(&locations, cfg.m);
    let amplitudes = lstsq_vec(&phi, yv)?;
    separate_duplicates(&mut locations);
    let measure = AtomicMeasure::from_parts(&locations, &amplitudes)?;
    Ok(EspritEstimate {
        measure,
        eigenvalues: eig,
        singular_values: sigma,
    })
}

/// Sorts locations and nudges any pair closer than `DUPLICATE_GAP` apart.
fn separate_duplicates(locations: &mut [f64]) {
    locations.sort_by(f64::total_cmp);
    let len = locations.len();
    for i in 1..len {
        if torus_distance(locations[i], locations[i - 1]) < DUPLICATE_GAP {
            debug!("ESPRIT recovered coincident locations near {}", locations[i]);
            locations[i] = locations[i - 1] + DUPLICATE_GAP;
        }
    }
    if len > 1 && torus_distance(locations[0], locations[len - 1]) < DUPLICATE_GAP {
        debug!("ESPRIT recovered coincident locations near 0");
        locations[len - 1] = locations[0] - DUPLICATE_GAP;
    }
    for t in locations.iter_mut() {
        *t = wrap_location(*t);
    }
}

/// ESPRIT as a plug-in super-resolution method with a fixed atom count.
#[derive(Debug, Clone, Copy)]
pub struct Esprit {
    pub s: usize,
}

impl SuperResolution for Esprit {
    fn recover(&self, samples: &[Complex64]) -> Result<AtomicMeasure> {
        esprit(samples, &EspritConfig::new(samples.len(), self.s)?)
    }
}

/// Condition under which the ESPRIT guarantee for quantized data applies:
/// `(lambda+1) K^-lambda <= B / (3200 e A S^2 m^{3/2})`.
pub fn noise_condition_holds(cfg: &QuantizerConfig, s: usize, b: f64) -> bool {
    let lhs = (cfg.lambda as f64 + 1.0) * (cfg.k as f64).powi(-(cfg.lambda as i32));
    let rhs = b
        / (3200.0 * std::f64::consts::E * cfg.a * (s * s) as f64 * (cfg.m as f64).powf(1.5));
    lhs <= rhs
}

/// Decodes beta-quantized samples: condense, run ESPRIT with `n = m/2 + 1`,
/// then undo the weighting.
pub fn esprit_decode_quantized(
    q: &[Complex64],
    cfg: &QuantizerConfig,
    s: usize,
) -> Result<AtomicMeasure> {
    if !noise_condition_holds(cfg, s, cfg.a / s as f64) {
        log::debug!(
            "K = {}, lambda = {} is outside the ESPRIT noise condition",
            cfg.k,
            cfg.lambda
        );
    }
    decode_quantized(q, cfg, &Esprit { s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::fourier_coefficients;
    use crate::metrics::error_inf2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn config_checks() {
        assert!(EspritConfig::new(7, 1).is_err());
        assert!(EspritConfig::new(8, 0).is_err());
        assert!(EspritConfig::new(8, 5).is_err());
        let cfg = EspritConfig::new(28, 4).unwrap();
        assert_eq!(cfg.n, 15);
    }

    #[test]
    fn single_atom_noiseless() {
        let mu = AtomicMeasure::from_parts(&[0.25], &[c(1.0, 0.0)]).unwrap();
        let y = fourier_coefficients(&mu, 8);
        let cfg = EspritConfig::new(8, 1).unwrap();
        assert_eq!(cfg.n, 5);
        let est = esprit(&y, &cfg).unwrap();
        assert_eq!(est.len(), 1);
        assert!((est.atoms()[0].location - 0.25).abs() < 1e-8);
        assert!((est.atoms()[0].amplitude - c(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn two_atoms_noiseless() {
        let mu = AtomicMeasure::from_parts(&[0.2, 0.7], &[c(1.0, 0.0), c(0.0, 0.5)]).unwrap();
        let y = fourier_coefficients(&mu, 16);
        let est = esprit(&y, &EspritConfig::new(16, 2).unwrap()).unwrap();
        let (err, _) = error_inf2(&mu, &est).unwrap();
        assert!(err < 1e-8, "E_inf2 = {err}");
    }

    #[test]
    fn location_sign_convention() {
        // An atom at 0.1 must not come back at 0.9.
        let mu = AtomicMeasure::from_parts(&[0.1], &[c(1.0, 0.0)]).unwrap();
        let y = fourier_coefficients(&mu, 8);
        let est = esprit_detailed(&y, &EspritConfig::new(8, 1).unwrap()).unwrap();
        assert!((est.measure.atoms()[0].location - 0.1).abs() < 1e-10);
        assert!((est.eigenvalues[0] - Complex64::cis(-TAU * 0.1)).norm() < 1e-10);
    }

    #[test]
    fn degenerate_input() {
        let y = vec![c(0.0, 0.0); 8];
        let err = esprit(&y, &EspritConfig::new(8, 1).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));

        let mu = AtomicMeasure::from_parts(&[0.3], &[c(1.0, 0.0)]).unwrap();
        let y = fourier_coefficients(&mu, 12);
        let err = esprit(&y, &EspritConfig::new(12, 2).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }

    #[test]
    fn duplicates_are_separated() {
        let mut t = vec![0.5, 0.5, 0.2];
        separate_duplicates(&mut t);
        assert!(t[2] > t[1] && t[1] > t[0]);
        let mut t = vec![0.0, 1.0 - 1e-14];
        separate_duplicates(&mut t);
        assert!(torus_distance(t[0], t[1]) >= 0.5 * DUPLICATE_GAP);
    }

    #[test]
    fn quantized_path_without_noise_is_exact() {
        let mu = AtomicMeasure::from_parts(&[0.05, 0.4, 0.71], &[c(0.3, 0.1), c(-0.2, 0.25), c(0.0, -0.3)])
            .unwrap();
        let cfg = QuantizerConfig::new(28, 3, 4, 1.0).unwrap();
        let y = fourier_coefficients(&mu, cfg.total_samples());
        let est = esprit_decode_quantized(&y, &cfg, 3).unwrap();
        let (err, _) = error_inf2(&mu, &est).unwrap();
        assert!(err < 1e-8, "E_inf2 = {err}");
    }
}
