//! Grid-discretized BLASSO:
//!
//! ```text
//! argmin_nu  tau ||nu||_TV + 1/2 ||y - F_m nu||_2^2
//! ```
//!
//! over measures supported on the grid `{g / G}`. On the grid `F_m` is the
//! first `m` rows of a length-`G` DFT, so both `F_m x` and its adjoint are
//! FFTs, and `F_m F_m^* = G I_m` whenever `G >= m`. The gradient step is
//! therefore exactly `1/G`.
//!
//! Surviving grid atoms are grouped into clusters of adjacent grid points,
//! each cluster is replaced by one atom, and the atom locations are polished
//! off the grid with amplitudes re-fitted by least squares.

use std::sync::Arc;

use log::debug;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{param, Error, Result};
use crate::linalg::lstsq_vec;
use crate::measure::{l2_norm, torus_offset, vandermonde, wrap_location, Atom, AtomicMeasure};
use crate::noise_shaping::QuantizerConfig;
use crate::pipeline::{decode_quantized_detailed, Decoded, SuperResolution};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Solver settings for [`blasso_grid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlassoConfig {
    pub m: usize,
    pub grid_size: usize,
    pub tau: f64,
    pub max_iter: usize,
    /// Stop once the relative objective decrease of an accepted step falls below this.
    pub tol: f64,
    pub prune_threshold: f64,
    pub refine: bool,
}

impl BlassoConfig {
    /// Defaults: `G = 16m`, prune at `tau/10`, `tol = 1e-10`, `5e4` iterations,
    /// refinement on.
    pub fn new(m: usize, tau: f64) -> Result<Self> {
        Self {
            m,
            grid_size: 16 * m,
            tau,
            max_iter: 50_000,
            tol: 1e-10,
            prune_threshold: tau / 10.0,
            refine: true,
        }
        .validated()
    }

    /// Defaults for decoding condensed samples of `cfg`, with `tau = eps_V / 2`.
    pub fn for_quantizer(cfg: &QuantizerConfig) -> Result<Self> {
        Self::new(cfg.m, cfg.eps_v() / 2.0)
    }

    pub fn validated(self) -> Result<Self> {
        if self.m == 0 {
            return param("m must be positive");
        }
        if self.grid_size < 8 * self.m {
            return param(format!(
                "grid size {} must be at least 8m = {}",
                self.grid_size,
                8 * self.m
            ));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return param(format!("tau = {} must be positive", self.tau));
        }
        if !(self.prune_threshold >= 0.0 && self.prune_threshold < self.tau) {
            return param(format!(
                "prune threshold {} must lie in [0, tau = {})",
                self.prune_threshold, self.tau
            ));
        }
        if self.max_iter == 0 || !(self.tol >= 0.0) {
            return param("max_iter must be positive and tol non-negative");
        }
        Ok(self)
    }
}

/// Result of a BLASSO solve.
#[derive(Debug, Clone)]
pub struct BlassoOutput {
    pub measure: AtomicMeasure,
    /// The pruned grid solution before clustering and refinement.
    pub grid_measure: AtomicMeasure,
    pub converged: bool,
    pub iterations: usize,
    /// Objective of the (unpruned) grid iterate.
    pub objective: f64,
}

/// BLASSO objective `tau ||nu||_TV + 1/2 ||y - F_m nu||^2` of an arbitrary
/// atomic measure.
pub fn objective(yv: &[Complex64], nu: &AtomicMeasure, tau: f64) -> f64 {
    tau * nu.total_variation() + 0.5 * data_misfit(yv, nu).powi(2)
}

/// `||y - F_m nu||_2`.
pub fn data_misfit(yv: &[Complex64], nu: &AtomicMeasure) -> f64 {
    let fit = crate::measure::fourier_coefficients(nu, yv.len());
    let r: Vec<Complex64> = yv.iter().zip(fit.iter()).map(|(a, b)| a - b).collect();
    l2_norm(&r)
}

/// The partial Fourier operator on a uniform grid.
struct GridOperator {
    m: usize,
    g: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl GridOperator {
    fn new(m: usize, g: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(g);
        let inverse = planner.plan_fft_inverse(g);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            m,
            g,
            forward,
            inverse,
            buf: vec![Complex64::default(); g],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    /// `out = F_m x`.
    fn apply(&mut self, x: &[Complex64], out: &mut [Complex64]) {
        self.buf.copy_from_slice(x);
        self.forward
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        out.copy_from_slice(&self.buf[..self.m]);
    }

    /// `out = F_m^* r`.
    fn adjoint(&mut self, r: &[Complex64], out: &mut [Complex64]) {
        self.buf[..self.m].copy_from_slice(r);
        self.buf[self.m..].fill(Complex64::default());
        self.inverse
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        out.copy_from_slice(&self.buf);
    }

    fn location(&self, g: usize) -> f64 {
        g as f64 / self.g as f64
    }
}

/// Complex soft-thresholding: shrinks the modulus by `t`, keeps the phase.
fn soft_threshold(z: Complex64, t: f64) -> Complex64 {
    let r = z.norm();
    if r <= t {
        Complex64::default()
    } else {
        z * ((r - t) / r)
    }
}

fn half_sq_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>()
}

fn l1(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm()).sum()
}

/// Solves the grid BLASSO by monotone accelerated proximal gradient and
/// post-processes the solution.
pub fn blasso_grid(yv: &[Complex64], cfg: &BlassoConfig) -> Result<BlassoOutput> {
    let cfg = cfg.validated()?;
    if yv.len() != cfg.m {
        return Err(Error::LengthMismatch {
            expected: cfg.m,
            found: yv.len(),
        });
    }
    let (m, g) = (cfg.m, cfg.grid_size);
    let mut op = GridOperator::new(m, g);
    let step = 1.0 / g as f64;
    let thresh = cfg.tau * step;
    let zero = Complex64::default();

    // x: accepted iterate, z: prox point, p: extrapolated point; f* = F_m *
    let mut x = vec![zero; g];
    let mut fx = vec![zero; m];
    let mut p = vec![zero; g];
    let mut fp = vec![zero; m];
    let mut z = vec![zero; g];
    let mut fz = vec![zero; m];
    let mut grad = vec![zero; g];
    let mut resid = vec![zero; m];

    let mut obj_x = half_sq_dist(yv, &fx);
    let mut t = 1.0f64;
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=cfg.max_iter {
        iterations = it;
        for (r, (a, b)) in resid.iter_mut().zip(fp.iter().zip(yv)) {
            *r = a - b;
        }
        op.adjoint(&resid, &mut grad);
        for ((zi, pi), gi) in z.iter_mut().zip(&p).zip(&grad) {
            *zi = soft_threshold(pi - gi * step, thresh);
        }
        op.apply(&z, &mut fz);
        let obj_z = cfg.tau * l1(&z) + half_sq_dist(yv, &fz);

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let accepted = obj_z <= obj_x;
        let prev_obj = obj_x;
        // p <- x_new + (t / t_next)(z - x_new) + ((t - 1) / t_next)(x_new - x_old)
        if accepted {
            let c_old = -(t - 1.0) / t_next;
            let c_new = 1.0 + (t - 1.0) / t_next;
            for i in 0..g {
                p[i] = z[i] * c_new + x[i] * c_old;
            }
            for i in 0..m {
                fp[i] = fz[i] * c_new + fx[i] * c_old;
            }
            x.copy_from_slice(&z);
            fx.copy_from_slice(&fz);
            obj_x = obj_z;
        } else {
            let c = t / t_next;
            for i in 0..g {
                p[i] = x[i] + (z[i] - x[i]) * c;
            }
            for i in 0..m {
                fp[i] = fx[i] + (fz[i] - fx[i]) * c;
            }
        }
        debug_assert!(obj_x <= prev_obj);
        t = t_next;

        if accepted && prev_obj - obj_x <= cfg.tol * obj_x.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    if !converged {
        debug!("BLASSO stopped after {iterations} iterations without meeting tol");
    }

    let grid_atoms: Vec<(usize, Complex64)> = x
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() >= cfg.prune_threshold && a.norm() > 0.0)
        .map(|(i, &a)| (i, a))
        .collect();
    let grid_measure =
        AtomicMeasure::new(grid_atoms.iter().map(|&(i, a)| Atom::new(op.location(i), a)))?;

    let measure = if cfg.refine && !grid_atoms.is_empty() {
        let refined = refine(yv, &grid_atoms, g)?;
        if data_misfit(yv, &refined) <= data_misfit(yv, &grid_measure) {
            refined
        } else {
            debug!("refinement increased the residual; keeping the grid solution");
            grid_measure.clone()
        }
    } else {
        grid_measure.clone()
    };

    Ok(BlassoOutput {
        measure,
        grid_measure,
        converged,
        iterations,
        objective: obj_x,
    })
}

/// Groups circularly adjacent grid indices.
fn clusters(atoms: &[(usize, Complex64)], g: usize) -> Vec<Vec<(usize, Complex64)>> {
    let mut out: Vec<Vec<(usize, Complex64)>> = Vec::new();
    for &a in atoms {
        match out.last_mut() {
            Some(last) if a.0 == last.last().unwrap().0 + 1 => last.push(a),
            _ => out.push(vec![a]),
        }
    }
    if out.len() > 1 {
        let first_idx = out[0][0].0;
        let last_idx = out.last().unwrap().last().unwrap().0;
        if first_idx == 0 && last_idx == g - 1 {
            let mut tail = out.pop().unwrap();
            tail.extend(out[0].drain(..));
            out[0] = tail;
        }
    }
    out
}

/// Least-squares residual and amplitudes for a fixed support.
fn fit(yv: &[Complex64], locations: &[f64]) -> Result<(f64, Vec<Complex64>)> {
    let phi = vandermonde(locations, yv.len());
    let amps = lstsq_vec(&phi, yv)?;
    let mut r = 0.0;
    for (j, &y) in yv.iter().enumerate() {
        let model: Complex64 = (0..locations.len()).map(|k| phi[(j, k)] * amps[k]).sum();
        r += (y - model).norm_sqr();
    }
    Ok((r, amps))
}

/// Cluster merge followed by two passes of per-atom golden-section search over
/// `+-1/G`, amplitudes re-fitted by least squares.
fn refine(yv: &[Complex64], atoms: &[(usize, Complex64)], g: usize) -> Result<AtomicMeasure> {
    let h = 1.0 / g as f64;
    let mut locations: Vec<f64> = clusters(atoms, g)
        .iter()
        .map(|cl| {
            let anchor = cl[0].0 as f64 * h;
            let (mut wsum, mut osum) = (0.0, 0.0);
            for &(i, a) in cl {
                let w = a.norm();
                wsum += w;
                osum += w * torus_offset(i as f64 * h, anchor);
            }
            wrap_location(anchor + osum / wsum)
        })
        .collect();

    let (mut best, _) = fit(yv, &locations)?;
    for _pass in 0..2 {
        for i in 0..locations.len() {
            let centre = locations[i];
            let eval = |t: f64| -> Result<f64> {
                let mut trial = locations.clone();
                trial[i] = wrap_location(t);
                Ok(fit(yv, &trial)?.0)
            };
            let (mut lo, mut hi) = (centre - h, centre + h);
            let mut a = hi - INV_PHI * (hi - lo);
            let mut b = lo + INV_PHI * (hi - lo);
            let mut fa = eval(a)?;
            let mut fb = eval(b)?;
            while hi - lo > 1e-13 {
                if fa <= fb {
                    hi = b;
                    b = a;
                    fb = fa;
                    a = hi - INV_PHI * (hi - lo);
                    fa = eval(a)?;
                } else {
                    lo = a;
                    a = b;
                    fa = fb;
                    b = lo + INV_PHI * (hi - lo);
                    fb = eval(b)?;
                }
            }
            let (t, f) = if fa <= fb { (a, fa) } else { (b, fb) };
            if f < best {
                best = f;
                locations[i] = wrap_location(t);
            }
        }
    }
    let (_, amps) = fit(yv, &locations)?;
    AtomicMeasure::from_parts(&locations, &amps).or_else(|_| {
        // two clusters slid onto the same point; fall back to the merged centres
        let merged = clusters(atoms, g)
            .iter()
            .map(|cl| {
                let sum: Complex64 = cl.iter().map(|&(_, a)| a).sum();
                Atom::new(cl[0].0 as f64 * h, sum)
            })
            .collect::<Vec<_>>();
        AtomicMeasure::new(merged)
    })
}

/// Grid BLASSO as a plug-in super-resolution method.
#[derive(Debug, Clone, Copy)]
pub struct Blasso {
    pub cfg: BlassoConfig,
}

impl SuperResolution for Blasso {
    fn recover(&self, samples: &[Complex64]) -> Result<AtomicMeasure> {
        blasso_grid(samples, &self.cfg).map(|o| o.measure)
    }
}

/// `reweight_decode(blasso_grid(condense(q)))`; the returned value also
/// carries the pre-reweighting solution.
pub fn tvmin_decode_quantized(
    q: &[Complex64],
    qcfg: &QuantizerConfig,
    cfg: &BlassoConfig,
) -> Result<Decoded> {
    if cfg.m != qcfg.m {
        return param(format!(
            "BLASSO size m = {} does not match the quantizer's m = {}",
            cfg.m, qcfg.m
        ));
    }
    decode_quantized_detailed(q, qcfg, &Blasso { cfg: *cfg })
}
