//! Quantized spectral super-resolution.
//!
//! Fourier samples `y = F_M mu` of an atomic measure `mu` on the torus are
//! encoded with a distributed noise-shaping beta quantizer and decoded by
//! condensing them to `m = M / lambda` samples of a re-weighted measure,
//! running a super-resolution method on those, and undoing the weighting.
//! Two methods are provided: ESPRIT and a grid BLASSO (TV-min) solver. The
//! memoryless scalar quantizer over the same alphabet serves as a baseline.
//!
//! ```
//! use num_complex::Complex64;
//! use specres::{beta_quantize, esprit_decode_quantized, fourier_coefficients};
//! use specres::{AtomicMeasure, QuantizerConfig};
//!
//! let mu = AtomicMeasure::from_parts(
//!     &[0.1, 0.45],
//!     &[Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5)],
//! ).unwrap();
//! let cfg = QuantizerConfig::new(28, 4, 8, 1.0).unwrap();
//! let y = fourier_coefficients(&mu, cfg.total_samples());
//! let stream = beta_quantize(&y, &cfg).unwrap();
//! let estimate = esprit_decode_quantized(&stream.q, &cfg, 2).unwrap();
//! assert_eq!(estimate.len(), 2);
//! ```

pub mod blasso;
pub mod error;
pub mod esprit;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod measure;
pub mod metrics;
pub mod noise_shaping;
pub mod pipeline;

pub use blasso::{blasso_grid, tvmin_decode_quantized, Blasso, BlassoConfig, BlassoOutput};
pub use error::{Error, Result};
pub use esprit::{esprit, esprit_decode_quantized, Esprit, EspritConfig};
pub use harness::{
    generate_measure, msq_floor_experiment, run_trial, sweep, Decoder, Quantizer, SweepRow,
    SweepTable, TrialCase, TrialSpec,
};
pub use measure::{
    fourier_coefficients, hankel, min_separation, torus_distance, vandermonde, Atom,
    AtomicMeasure, FourierVector,
};
pub use metrics::{e_lip_upper, error_inf2, errors_e123, neighborhood_partition, ErrorReport};
pub use noise_shaping::{
    beta_quantize, choose_parameters, condense, msq_quantize, noise_transfer_apply,
    reweight_decode, round_to_alphabet, weight, Alphabet, Parameters, QuantizedStream,
    QuantizerConfig,
};
pub use pipeline::{decode_quantized, SuperResolution};

pub use num_complex::Complex64;
