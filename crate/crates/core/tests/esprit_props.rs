mod common;

use common::{complex_disk, measure, unit_measure};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specres::esprit::esprit_detailed;
use specres::{
    error_inf2, esprit, esprit_decode_quantized, fourier_coefficients, generate_measure,
    torus_distance, Complex64, EspritConfig, QuantizerConfig,
};

fn assert_close(a: &specres::AtomicMeasure, b: &specres::AtomicMeasure, tol: f64) {
    let (e, _) = error_inf2(a, b).expect("same atom count");
    assert!(e <= tol, "E_inf2 = {e:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noiseless_exactness(mu in measure(4), half in 8usize..20) {
        let m = 2 * half;
        let cfg = EspritConfig::new(m, mu.len()).unwrap();
        let y = fourier_coefficients(&mu, m);
        let est = esprit_detailed(&y, &cfg).unwrap();
        prop_assert_eq!(est.measure.len(), mu.len());
        assert_close(&mu, &est.measure, 1e-8);
        for z in &est.eigenvalues {
            prop_assert!((z.norm() - 1.0).abs() <= 1e-10, "|z| = {}", z.norm());
        }
    }

    #[test]
    fn support_ignores_a_global_phase(mu in measure(4), phase in 0.0..std::f64::consts::TAU) {
        let cfg = EspritConfig::new(28, mu.len()).unwrap();
        let a = esprit(&fourier_coefficients(&mu, 28), &cfg).unwrap();
        let rotated = mu.scaled(Complex64::cis(phase));
        let b = esprit(&fourier_coefficients(&rotated, 28), &cfg).unwrap();
        for (s, t) in a.locations().iter().zip(b.locations()) {
            prop_assert!(torus_distance(*s, t) <= 1e-10);
        }
    }

    #[test]
    fn always_exactly_s_atoms(
        y in prop::collection::vec(complex_disk(1.0), 16),
        s in 1usize..=2,
    ) {
        let cfg = EspritConfig::new(16, s).unwrap();
        if let Ok(mu) = esprit(&y, &cfg) {
            prop_assert_eq!(mu.len(), s);
        }
    }

    #[test]
    fn exact_samples_through_the_quantized_path(
        mu in unit_measure(3),
        lambda in 1usize..5,
        k in 2usize..9,
    ) {
        let cfg = QuantizerConfig::new(28, lambda, k, 1.0).unwrap();
        let y = fourier_coefficients(&mu, cfg.total_samples());
        let est = esprit_decode_quantized(&y, &cfg, mu.len()).unwrap();
        assert_close(&mu, &est, 1e-8);
    }
}

#[test]
fn locations_follow_the_fourier_sign() {
    let mu = specres::AtomicMeasure::from_parts(&[0.1], &[Complex64::new(1.0, 0.0)]).unwrap();
    let est = esprit(&fourier_coefficients(&mu, 8), &EspritConfig::new(8, 1).unwrap()).unwrap();
    assert!((est.locations()[0] - 0.1).abs() < 1e-10);
}

#[test]
fn invalid_problem_sizes() {
    assert!(EspritConfig::new(15, 1).is_err());
    assert!(EspritConfig::new(16, 0).is_err());
    assert!(EspritConfig::new(8, 5).is_err());
    assert!(EspritConfig::new(8, 2).is_ok());
    let cfg = EspritConfig::new(8, 1).unwrap();
    assert!(esprit(&[Complex64::new(0.0, 0.0); 8], &cfg).is_err());
    assert!(esprit(&[Complex64::new(1.0, 0.0); 6], &cfg).is_err());
}

/// Noise at the admissible level: the error stays under the stability bound.
#[test]
fn noisy_error_within_stability_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (m, delta) = (40, 0.15);
    let mut worst_ratio: f64 = 0.0;
    let mut used = 0;
    for _ in 0..200 {
        let mu = generate_measure(delta, &mut rng);
        let s = mu.len();
        if m < 8 * s {
            continue;
        }
        let b = mu.amplitudes().iter().map(|a| a.norm()).fold(f64::INFINITY, f64::min);
        let sf = s as f64;
        let radius = delta * b * m as f64 / (1280.0 * sf * sf);
        let mut z: Vec<Complex64> = (0..m)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let zn = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let scale = radius * rng.random::<f64>() / zn;
        z.iter_mut().for_each(|c| *c *= scale);
        let znorm = zn * scale;
        let y: Vec<Complex64> = fourier_coefficients(&mu, m).iter().zip(&z).map(|(a, b)| a + b).collect();
        let est = esprit(&y, &EspritConfig::new(m, s).unwrap()).unwrap();
        assert_eq!(est.len(), s);
        let (e, _) = error_inf2(&mu, &est).unwrap();
        let bound = 320.0 * sf * sf * znorm / (b * m as f64) + 3400.0 * sf.powf(2.5) * znorm / b;
        assert!(e <= bound, "E_inf2 = {e:e} > {bound:e}");
        worst_ratio = worst_ratio.max(e / bound);
        used += 1;
    }
    assert!(used >= 50, "only {used} admissible draws");
    assert!(worst_ratio > 0.0);
}
