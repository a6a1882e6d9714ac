//! Distortion measures between a reference measure `rho` and an estimate `nu`.
//!
//! `E1`, `E2`, `E3` are defined through neighbourhoods of radius
//! `0.3298 / (M - 1)` around each reference atom: amplitude error of the
//! local mass, mass-weighted squared localization error, and the total
//! variation of estimate atoms that fall outside every neighbourhood. None of
//! them is symmetric.
//!
//! `E_{inf,2}` applies to measures with equal atom counts: the largest
//! location error under the best matching plus the relative `l2` amplitude
//! error under that matching.

use std::fmt;

use log::warn;
use num_complex::Complex64;
use rand::Rng;

use crate::measure::{torus_distance, AtomicMeasure};

/// Neighbourhood radius constant.
pub const NEIGHBORHOOD_CONSTANT: f64 = 0.3298;

/// Largest atom count handled by exhaustive permutation search.
pub const BRUTE_FORCE_LIMIT: usize = 10;

pub fn neighborhood_radius(m: usize) -> f64 {
    NEIGHBORHOOD_CONSTANT / (m as f64 - 1.0)
}

/// Index sets of estimate atoms near each reference atom, plus the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// `near[j]` holds the indices of `nu`'s atoms close to `rho`'s atom `j`.
    pub near: Vec<Vec<usize>>,
    /// Atoms of `nu` close to no atom of `rho`.
    pub residual: Vec<usize>,
}

pub fn neighborhood_partition(rho: &AtomicMeasure, nu: &AtomicMeasure, m: usize) -> Partition {
    assert!(m >= 2, "neighbourhoods need M >= 2");
    if rho.min_separation() < 1.0 / m as f64 {
        warn!("reference separation is below 1/M; neighbourhoods may overlap");
    }
    let radius = neighborhood_radius(m);
    let near: Vec<Vec<usize>> = rho
        .atoms()
        .iter()
        .map(|r| {
            nu.atoms()
                .iter()
                .enumerate()
                .filter(|(_, s)| torus_distance(r.location, s.location) <= radius)
                .map(|(k, _)| k)
                .collect()
        })
        .collect();
    let mut covered = vec![false; nu.len()];
    for &k in near.iter().flatten() {
        covered[k] = true;
    }
    let residual = (0..nu.len()).filter(|&k| !covered[k]).collect();
    Partition { near, residual }
}

/// `(E1, E2, E3)` of `nu` relative to `rho` at resolution `m`.
pub fn errors_e123(rho: &AtomicMeasure, nu: &AtomicMeasure, m: usize) -> (f64, f64, f64) {
    let part = neighborhood_partition(rho, nu, m);
    let v = nu.atoms();
    let mut e1 = 0.0f64;
    let mut e2 = 0.0;
    for (r, idx) in rho.atoms().iter().zip(&part.near) {
        let local: Complex64 = idx.iter().map(|&k| v[k].amplitude).sum();
        e1 = e1.max((r.amplitude - local).norm());
        e2 += idx
            .iter()
            .map(|&k| v[k].amplitude.norm() * torus_distance(r.location, v[k].location).powi(2))
            .sum::<f64>();
    }
    let e3 = part.residual.iter().map(|&k| v[k].amplitude.norm()).fold(0.0, |acc, x| acc + x);
    (e1, e2, e3)
}

/// Upper bound `R E1 + ||nu||_TV^{1/2} E2^{1/2} + E3` on the Lipschitz-dual
/// distance, valid when `Delta(rho) M >= 1`.
pub fn e_lip_upper(rho: &AtomicMeasure, nu: &AtomicMeasure, m: usize) -> f64 {
    let (e1, e2, e3) = errors_e123(rho, nu, m);
    e_lip_from_parts(rho.len(), nu.total_variation(), e1, e2, e3)
}

fn e_lip_from_parts(r: usize, nu_tv: f64, e1: f64, e2: f64, e3: f64) -> f64 {
    r as f64 * e1 + nu_tv.sqrt() * e2.sqrt() + e3
}

/// A 1-Lipschitz test function bounded by 1: a phase times the clamped upper
/// envelope of tents `h_i - |t - c_i|`.
#[derive(Debug, Clone)]
pub struct TentEnvelope {
    pub centres: Vec<f64>,
    pub heights: Vec<f64>,
    pub phase: Complex64,
}

impl TentEnvelope {
    pub fn random(rng: &mut impl Rng) -> Self {
        let n = rng.random_range(1..=4);
        Self {
            centres: (0..n).map(|_| rng.random::<f64>()).collect(),
            heights: (0..n).map(|_| rng.random_range(-1.0..1.5)).collect(),
            phase: Complex64::cis(rng.random_range(0.0..std::f64::consts::TAU)),
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let env = self
            .centres
            .iter()
            .zip(&self.heights)
            .map(|(&c, &h)| h - torus_distance(t, c))
            .fold(f64::NEG_INFINITY, f64::max)
            .clamp(-1.0, 1.0);
        self.phase * env
    }

    /// `|int phi d(rho - nu)|`.
    pub fn pairing(&self, rho: &AtomicMeasure, nu: &AtomicMeasure) -> f64 {
        let a: Complex64 = rho.atoms().iter().map(|x| x.amplitude * self.eval(x.location)).sum();
        let b: Complex64 = nu.atoms().iter().map(|x| x.amplitude * self.eval(x.location)).sum();
        (a - b).norm()
    }
}

/// Monte-Carlo lower bound on the Lipschitz-dual distance: the largest
/// pairing over `samples` random 1-Lipschitz functions with sup norm <= 1.
pub fn e_lip_lower(rho: &AtomicMeasure, nu: &AtomicMeasure, samples: usize, rng: &mut impl Rng) -> f64 {
    (0..samples)
        .map(|_| TentEnvelope::random(rng).pairing(rho, nu))
        .fold(0.0, f64::max)
}

/// How to search for the optimal atom matching in [`error_inf2_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Matching {
    /// Exhaustive search up to [`BRUTE_FORCE_LIMIT`] atoms, circular shifts of
    /// the sorted supports above it.
    #[default]
    Auto,
    BruteForce,
    CircularShift,
}

/// Matched errors between two measures with equal atom counts.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedError {
    /// `max_j |r_j - s_pi(j)|_T + ||u - v_pi||_2 / ||u||_2`.
    pub e_inf2: f64,
    pub support: f64,
    /// Unnormalized `||u - v_pi||_2`.
    pub amplitude_l2: f64,
    /// `permutation[j]` is the index of `nu`'s atom matched to `rho`'s atom `j`.
    pub permutation: Vec<usize>,
}

/// `E_{inf,2}` and the optimal permutation; `None` when atom counts differ.
pub fn error_inf2(rho: &AtomicMeasure, nu: &AtomicMeasure) -> Option<(f64, Vec<usize>)> {
    matched_error(rho, nu, Matching::Auto).map(|e| (e.e_inf2, e.permutation))
}

pub fn error_inf2_with(rho: &AtomicMeasure, nu: &AtomicMeasure, how: Matching) -> Option<MatchedError> {
    matched_error(rho, nu, how)
}

fn score(rho: &AtomicMeasure, nu: &AtomicMeasure, perm: &[usize]) -> (f64, f64) {
    let (r, v) = (rho.atoms(), nu.atoms());
    let mut support = 0.0f64;
    let mut amp = 0.0;
    for (j, &k) in perm.iter().enumerate() {
        support = support.max(torus_distance(r[j].location, v[k].location));
        amp += (r[j].amplitude - v[k].amplitude).norm_sqr();
    }
    (support, amp.sqrt())
}

/// Orders candidates by support distance, then amplitude error; earlier
/// (lexicographically smaller) permutations win exact ties.
fn better(cand: (f64, f64), best: (f64, f64)) -> bool {
    cand.0 < best.0 || (cand.0 == best.0 && cand.1 < best.1)
}

fn matched_error(rho: &AtomicMeasure, nu: &AtomicMeasure, how: Matching) -> Option<MatchedError> {
    let s = rho.len();
    if nu.len() != s {
        return None;
    }
    let brute = match how {
        Matching::Auto => s <= BRUTE_FORCE_LIMIT,
        Matching::BruteForce => true,
        Matching::CircularShift => false,
    };
    let mut best_perm: Vec<usize> = (0..s).collect();
    let mut best = score(rho, nu, &best_perm);
    if brute {
        let mut perm: Vec<usize> = (0..s).collect();
        while next_permutation(&mut perm) {
            let sc = score(rho, nu, &perm);
            if better(sc, best) {
                best = sc;
                best_perm.copy_from_slice(&perm);
            }
        }
    } else {
        // atoms are stored sorted, so circular shifts preserve torus order
        for shift in 1..s {
            let perm: Vec<usize> = (0..s).map(|j| (j + shift) % s).collect();
            let sc = score(rho, nu, &perm);
            if better(sc, best) {
                best = sc;
                best_perm = perm;
            }
        }
    }
    let u_norm = rho.amplitudes().iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let relative = if s == 0 {
        0.0
    } else if u_norm > 0.0 {
        best.1 / u_norm
    } else if best.1 == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Some(MatchedError {
        e_inf2: best.0 + relative,
        support: best.0,
        amplitude_l2: best.1,
        permutation: best_perm,
    })
}

/// Advances to the next permutation in lexicographic order.
fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Every distortion of an estimate against the ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e_lip_upper: f64,
    pub e_inf2: Option<f64>,
    /// Unnormalized `l2` amplitude error under the optimal matching.
    pub amplitude_l2: Option<f64>,
    pub matched_permutation: Option<Vec<usize>>,
}

impl ErrorReport {
    pub fn compute(truth: &AtomicMeasure, estimate: &AtomicMeasure, m: usize) -> Self {
        let (e1, e2, e3) = errors_e123(truth, estimate, m);
        let e_lip_upper = e_lip_from_parts(truth.len(), estimate.total_variation(), e1, e2, e3);
        let matched = matched_error(truth, estimate, Matching::Auto);
        Self {
            e1,
            e2,
            e3,
            e_lip_upper,
            e_inf2: matched.as_ref().map(|x| x.e_inf2),
            amplitude_l2: matched.as_ref().map(|x| x.amplitude_l2),
            matched_permutation: matched.map(|x| x.permutation),
        }
    }

    /// Sentinel for a decoder failure: every error is `+inf`.
    pub fn failed() -> Self {
        Self {
            e1: f64::INFINITY,
            e2: f64::INFINITY,
            e3: f64::INFINITY,
            e_lip_upper: f64::INFINITY,
            e_inf2: Some(f64::INFINITY),
            amplitude_l2: Some(f64::INFINITY),
            matched_permutation: None,
        }
    }

    pub fn is_failure(&self) -> bool {
        self.e1.is_infinite()
    }

    pub const CSV_HEADER: &'static str = "e1,e2,e3,elip_upper,einf2";
}

/// Formats a float for CSV output, spelling NaN as `nan` and infinities as `inf`.
pub fn csv_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{:e}", x + 0.0)
    }
}

impl fmt::Display for ErrorReport {
    /// CSV fragment `e1,e2,e3,elip_upper,einf2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{}",
            csv_float(self.e1),
            csv_float(self.e2),
            csv_float(self.e3),
            csv_float(self.e_lip_upper),
            csv_float(self.e_inf2.unwrap_or(f64::NAN))
        )
    }
}
