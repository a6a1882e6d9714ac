mod common;

use common::unit_measure;
use proptest::prelude::*;
use specres::blasso::{data_misfit, objective};
use specres::harness::{decode_trial, trial_rng, TrialCase};
use specres::{
    blasso_grid, errors_e123, fourier_coefficients, generate_measure, tvmin_decode_quantized,
    AtomicMeasure, BlassoConfig, Complex64, Decoder, Quantizer, QuantizerConfig,
};

/// Unit-mass measure moved onto the `1/G` grid.
fn on_grid(mu: &AtomicMeasure, g: usize) -> Option<AtomicMeasure> {
    let t: Vec<f64> = mu
        .locations()
        .iter()
        .map(|&t| ((t * g as f64).round() as usize % g) as f64 / g as f64)
        .collect();
    AtomicMeasure::from_parts(&t, &mu.amplitudes()).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn solution_beats_zero_and_truth(mu in unit_measure(4), tau in 0.005..0.2f64) {
        let cfg = BlassoConfig::new(16, tau).unwrap();
        let truth = on_grid(&mu, cfg.grid_size);
        prop_assume!(truth.is_some());
        let truth = truth.unwrap();
        let y = fourier_coefficients(&truth, 16);
        let out = blasso_grid(&y, &cfg).unwrap();
        let zero = objective(&y, &AtomicMeasure::zero(), tau);
        let slack = 1.0 + 1e-9;
        prop_assert!(out.objective <= zero * slack);
        prop_assert!(out.objective <= objective(&y, &truth, tau) * slack);
    }

    #[test]
    fn refinement_never_increases_the_residual(mu in unit_measure(4), tau in 0.005..0.1f64) {
        let cfg = BlassoConfig::new(16, tau).unwrap();
        let y = fourier_coefficients(&mu, 16);
        let out = blasso_grid(&y, &cfg).unwrap();
        prop_assert!(data_misfit(&y, &out.measure) <= data_misfit(&y, &out.grid_measure) * (1.0 + 1e-12));
    }

    #[test]
    fn large_penalty_kills_everything(mu in unit_measure(4), extra in 1.0..3.0f64) {
        let y = fourier_coefficients(&mu, 16);
        // |sum_k y_k e^{2 pi i k t}| <= sum_k |y_k| for every t
        let bound: f64 = y.iter().map(|c| c.norm()).sum();
        let out = blasso_grid(&y, &BlassoConfig::new(16, bound * extra).unwrap()).unwrap();
        prop_assert!(out.measure.is_empty());
    }
}

#[test]
fn zero_data_gives_zero_measure() {
    let out = blasso_grid(&[Complex64::new(0.0, 0.0); 12], &BlassoConfig::new(12, 0.01).unwrap()).unwrap();
    assert!(out.measure.is_empty());
    assert!(out.converged);
    assert_eq!(out.objective, 0.0);
}

#[test]
fn single_on_grid_atom() {
    let m = 16;
    let cfg = BlassoConfig::new(m, 1e-3).unwrap();
    let g = cfg.grid_size;
    for j in [0, 37, 100, g - 1] {
        let t = j as f64 / g as f64;
        let mu = AtomicMeasure::from_parts(&[t], &[Complex64::new(1.0, 0.0)]).unwrap();
        let out = blasso_grid(&fourier_coefficients(&mu, m), &cfg).unwrap();
        assert_eq!(out.grid_measure.len(), 1, "{:?}", out.grid_measure);
        let atom = out.grid_measure.atoms()[0];
        assert!((atom.location - t).abs() < 1e-15);
        assert!((atom.amplitude - 1.0).norm() <= cfg.tau);
    }
}

#[test]
fn noiseless_on_grid_decode_is_tight() {
    let qcfg = QuantizerConfig::new(27, 2, 4, 1.0).unwrap();
    let mut bcfg = BlassoConfig::new(27, 1e-4).unwrap();
    bcfg.prune_threshold = 1e-5;
    let mu = AtomicMeasure::from_parts(
        &[40.0 / 432.0, 200.0 / 432.0, 333.0 / 432.0],
        &[Complex64::new(0.4, 0.0), Complex64::new(0.0, -0.3), Complex64::from_polar(0.3, 2.0)],
    )
    .unwrap();
    let y = fourier_coefficients(&mu, qcfg.total_samples());
    let out = tvmin_decode_quantized(&y, &qcfg, &bcfg).unwrap();
    let (e1, _, _) = errors_e123(&mu, &out.measure, 27);
    assert!(e1 <= 2.0 * bcfg.tau, "E1 = {e1:e}");
}

#[test]
fn decoder_mismatch_is_rejected() {
    let qcfg = QuantizerConfig::new(27, 2, 4, 1.0).unwrap();
    let bcfg = BlassoConfig::new(26, 0.01).unwrap();
    assert!(tvmin_decode_quantized(&[Complex64::new(0.0, 0.0); 54], &qcfg, &bcfg).is_err());
    assert!(BlassoConfig::new(10, -1.0).is_err());
}

/// Total-variation bracket on the solution before and after re-weighting.
#[test]
fn total_variation_bracket_on_every_trial() {
    for quantizer in [Quantizer::Beta, Quantizer::Msq] {
        for k in [2, 4, 8] {
            for lambda in [1, 2, 4, 6] {
                let case = TrialCase::new(k, lambda, 27, Decoder::Tvmin, quantizer);
                for trial in 0..3 {
                    let mu = generate_measure(0.15, &mut trial_rng(3, k, lambda, trial));
                    let out = decode_trial(&case, &mu).unwrap();
                    let cfg = out.decoder_config;
                    let nu = out.pre_reweight.total_variation();
                    let upper = cfg.c_beta() * cfg.a + cfg.eps_v();
                    assert!(nu <= upper * (1.0 + 1e-9), "{quantizer:?} K={k} lambda={lambda}: {nu} > {upper}");
                    let mu_tv = out.estimate.total_variation();
                    assert!(mu_tv / cfg.c_beta() <= nu * (1.0 + 1e-12));
                }
            }
        }
    }
}
