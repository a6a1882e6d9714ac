//! Atomic measures on the torus `[0, 1)` and the structured matrices built
//! from their Fourier data.
//!
//! Frequencies are indexed `0..M`, so `F_M mu` is the vector
//! `(mu_hat(0), ..., mu_hat(M - 1))` with `mu_hat(k) = sum_j a_j e^{-2 pi i k t_j}`.

use std::f64::consts::TAU;
use std::ops::Deref;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{param, Error, Result};

/// Distance on the torus `R / Z`, always in `[0, 1/2]`.
pub fn torus_distance(s: f64, t: f64) -> f64 {
    let d = (s - t).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Signed representative of `s - t` in `[-1/2, 1/2)`.
pub(crate) fn torus_offset(s: f64, t: f64) -> f64 {
    let d = (s - t).rem_euclid(1.0);
    if d >= 0.5 {
        d - 1.0
    } else {
        d
    }
}

/// Reduces a location into `[0, 1)`.
pub fn wrap_location(t: f64) -> f64 {
    let w = t.rem_euclid(1.0);
    // rem_euclid can return exactly 1.0 for tiny negative inputs
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Minimum pairwise torus distance of a point set.
///
/// Returns `f64::INFINITY` for sets with fewer than two points.
pub fn min_separation(locations: &[f64]) -> f64 {
    if locations.len() < 2 {
        return f64::INFINITY;
    }
    let mut sorted: Vec<f64> = locations.iter().copied().map(wrap_location).collect();
    sorted.sort_by(f64::total_cmp);
    let wrap_gap = sorted[0] + 1.0 - sorted[sorted.len() - 1];
    sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(wrap_gap, f64::min)
        .min(0.5)
}

/// `e^{-2 pi i k t}` with the phase reduced mod 1 before scaling by `2 pi`.
#[inline]
pub(crate) fn fourier_atom(k: usize, t: f64) -> Complex64 {
    let phase = (k as f64 * t).rem_euclid(1.0);
    Complex64::cis(-TAU * phase)
}

/// A single Dirac mass `amplitude * delta_location`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub amplitude: Complex64,
}

impl Atom {
    pub fn new(location: f64, amplitude: Complex64) -> Self {
        Self {
            location,
            amplitude,
        }
    }
}

/// A finite complex combination of Dirac masses on the torus.
///
/// Locations are kept in `[0, 1)`, sorted and pairwise distinct.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    /// Builds a measure, reducing locations mod 1 and sorting them.
    ///
    /// Two atoms at the same location are rejected rather than merged, since
    /// merging would silently change the atom count.
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> Result<Self> {
        let mut atoms: Vec<Atom> = atoms
            .into_iter()
            .map(|a| {
                if a.location.is_finite() {
                    Ok(Atom::new(wrap_location(a.location), a.amplitude))
                } else {
                    Err(Error::InvalidLocation(a.location))
                }
            })
            .collect::<Result<_>>()?;
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        if let Some(w) = atoms.windows(2).find(|w| w[0].location == w[1].location) {
            return Err(Error::DuplicateLocation(w[0].location));
        }
        Ok(Self { atoms })
    }

    pub fn from_parts(locations: &[f64], amplitudes: &[Complex64]) -> Result<Self> {
        if locations.len() != amplitudes.len() {
            return Err(Error::LengthMismatch {
                expected: locations.len(),
                found: amplitudes.len(),
            });
        }
        Self::new(
            locations
                .iter()
                .zip(amplitudes)
                .map(|(&t, &a)| Atom::new(t, a)),
        )
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Number of atoms `S`.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn locations(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.location).collect()
    }

    pub fn amplitudes(&self) -> Vec<Complex64> {
        self.atoms.iter().map(|a| a.amplitude).collect()
    }

    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.amplitude.norm()).sum()
    }

    pub fn min_separation(&self) -> f64 {
        min_separation(&self.locations())
    }

    /// Multiplies every amplitude by `f(location)`; the support is unchanged.
    pub fn map_amplitudes(&self, mut f: impl FnMut(f64, Complex64) -> Complex64) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom::new(a.location, f(a.location, a.amplitude)))
                .collect(),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.map_amplitudes(|_, a| a * c)
    }

    /// Removes atoms whose amplitude modulus is below `threshold`.
    pub fn pruned(&self, threshold: f64) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .copied()
                .filter(|a| a.amplitude.norm() >= threshold)
                .collect(),
        }
    }
}

/// The first `M` Fourier coefficients of a measure.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierVector(Vec<Complex64>);

impl FourierVector {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self(values)
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    /// Largest entry modulus.
    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.0)
    }
}

impl Deref for FourierVector {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl From<Vec<Complex64>> for FourierVector {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

pub(crate) fn sup_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `F_M mu`: entry `k` is `sum_j a_j e^{-2 pi i k t_j}` for `k = 0..M`.
pub fn fourier_coefficients(mu: &AtomicMeasure, m: usize) -> FourierVector {
    let values = (0..m)
        .map(|k| {
            mu.atoms
                .iter()
                .map(|a| a.amplitude * fourier_atom(k, a.location))
                .sum()
        })
        .collect();
    FourierVector(values)
}

/// The `M x S` Fourier matrix `Phi_M(T)` with entries `e^{-2 pi i j t_k}`.
pub fn vandermonde(locations: &[f64], m: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(m, locations.len(), |j, k| fourier_atom(j, locations[k]))
}

/// The `N x (M - N + 1)` Hankel matrix with entries `u_{j+k}`.
pub fn hankel(u: &[Complex64], n: usize) -> Result<DMatrix<Complex64>> {
    let m = u.len();
    if n == 0 || n > m {
        return param(format!("Hankel height {n} must lie in 1..={m}"));
    }
    Ok(DMatrix::from_fn(n, m - n + 1, |j, k| u[j + k]))
}
