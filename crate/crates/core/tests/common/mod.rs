#![allow(dead_code)]

use proptest::prelude::*;
use specres::{AtomicMeasure, Complex64};

/// Measures with 1..=max_s atoms, separation at least 0.6/S, moduli in [0.2, 1].
pub fn measure(max_s: usize) -> impl Strategy<Value = AtomicMeasure> {
    (1..=max_s).prop_flat_map(|s| {
        (
            0.0..1.0f64,
            prop::collection::vec((0.0..0.4f64, 0.2..1.0f64, 0.0..std::f64::consts::TAU), s),
        )
            .prop_map(move |(offset, parts)| {
                let atoms: Vec<(f64, Complex64)> = parts
                    .iter()
                    .enumerate()
                    .map(|(j, &(jit, r, ph))| {
                        ((offset + (j as f64 + jit) / s as f64).rem_euclid(1.0), Complex64::from_polar(r, ph))
                    })
                    .collect();
                let (t, a): (Vec<f64>, Vec<Complex64>) = atoms.into_iter().unzip();
                AtomicMeasure::from_parts(&t, &a).unwrap()
            })
    })
}

/// Same, rescaled to total variation 1.
pub fn unit_measure(max_s: usize) -> impl Strategy<Value = AtomicMeasure> {
    measure(max_s).prop_map(|mu| {
        let tv = mu.total_variation();
        mu.scaled(Complex64::new(1.0 / tv, 0.0))
    })
}

pub fn complex_disk(radius: f64) -> impl Strategy<Value = Complex64> {
    (0.0..1.0f64, 0.0..std::f64::consts::TAU)
        .prop_map(move |(r, ph)| Complex64::from_polar(radius * r.sqrt(), ph))
}

pub fn sup_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
