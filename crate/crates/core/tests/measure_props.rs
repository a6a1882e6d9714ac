mod common;

use common::{measure, sup_dist};
use proptest::prelude::*;
use specres::linalg::singular_values;
use specres::{fourier_coefficients, hankel, vandermonde, AtomicMeasure, Complex64};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fourier_is_linear(mu in measure(4), nu in measure(4), re in -2.0..2.0f64, im in -2.0..2.0f64, m in 1usize..40) {
        let alpha = Complex64::new(re, im);
        let scaled = mu.scaled(alpha);
        let sum = AtomicMeasure::new(scaled.atoms().iter().chain(nu.atoms()).copied());
        prop_assume!(sum.is_ok());
        let lhs = fourier_coefficients(&sum.unwrap(), m);
        let (fm, fn_) = (fourier_coefficients(&mu, m), fourier_coefficients(&nu, m));
        let rhs: Vec<Complex64> = fm.iter().zip(fn_.iter()).map(|(a, b)| alpha * a + b).collect();
        prop_assert!(sup_dist(&lhs, &rhs) <= 1e-12);
    }

    #[test]
    fn sup_norm_below_total_variation(mu in measure(6), m in 1usize..64) {
        let y = fourier_coefficients(&mu, m);
        prop_assert_eq!(y.len(), m);
        prop_assert!(y.sup_norm() <= mu.total_variation() * (1.0 + 1e-14));
    }

    #[test]
    fn vandermonde_applies_amplitudes(mu in measure(6), m in 1usize..40) {
        let phi = vandermonde(&mu.locations(), m);
        let a = mu.amplitudes();
        let y = fourier_coefficients(&mu, m);
        for j in 0..m {
            let v: Complex64 = (0..a.len()).map(|k| phi[(j, k)] * a[k]).sum();
            prop_assert!((v - y[j]).norm() <= 1e-12);
        }
    }

    #[test]
    fn hankel_is_constant_on_antidiagonals(
        u in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..30),
        frac in 0.0..1.0f64,
    ) {
        let u: Vec<Complex64> = u.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        let n = 1 + ((u.len() - 1) as f64 * frac) as usize;
        let h = hankel(&u, n).unwrap();
        prop_assert_eq!(h.shape(), (n, u.len() - n + 1));
        for j in 0..h.nrows() {
            for k in 0..h.ncols() {
                prop_assert_eq!(h[(j, k)], u[j + k]);
            }
        }
    }

    #[test]
    fn hankel_rank_equals_atom_count(mu in measure(4), m in 16usize..=32) {
        let s = mu.len();
        let n = m / 2 + 1;
        prop_assume!(s < n && n - 1 <= m - s);
        let h = hankel(&fourier_coefficients(&mu, m), n).unwrap();
        let sigma = singular_values(&h);
        let rank = sigma.iter().filter(|&&x| x > 1e-8 * sigma[0]).count();
        prop_assert_eq!(rank, s);
    }

    #[test]
    fn hankel_factorizes(mu in measure(4), m in 8usize..=32, frac in 0.0..1.0f64) {
        let n = 1 + ((m - 1) as f64 * frac) as usize;
        let y = fourier_coefficients(&mu, m);
        let h = hankel(&y, n).unwrap();
        let t = mu.locations();
        let left = vandermonde(&t, n);
        let right = vandermonde(&t, m - n + 1);
        let d = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(mu.amplitudes()));
        let recon = left * d * right.transpose();
        prop_assert!((&h - recon).norm() <= 1e-12 * h.norm().max(1e-300));
    }
}

#[test]
fn hankel_height_out_of_range() {
    let u = [Complex64::new(1.0, 0.0); 4];
    assert!(hankel(&u, 0).is_err());
    assert!(hankel(&u, 5).is_err());
}
