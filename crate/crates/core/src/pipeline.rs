//! Composition of the quantizer with an arbitrary super-resolution method.
//!
//! A method plugs in as long as it maps `m` noisy Fourier samples to an
//! atomic measure and its error is controlled by the noise energy. The
//! decoder feeds it the condensed samples `Vq` and divides the recovered
//! amplitudes by `w_m`.

use num_complex::Complex64;

use crate::error::Result;
use crate::measure::AtomicMeasure;
use crate::noise_shaping::{condense, reweight_decode, QuantizerConfig};

/// A super-resolution method acting on the first `m` Fourier samples.
pub trait SuperResolution {
    fn recover(&self, samples: &[Complex64]) -> Result<AtomicMeasure>;
}

impl<F> SuperResolution for F
where
    F: Fn(&[Complex64]) -> Result<AtomicMeasure>,
{
    fn recover(&self, samples: &[Complex64]) -> Result<AtomicMeasure> {
        self(samples)
    }
}

/// Decoded measure together with the method's output before re-weighting.
#[derive(Debug, Clone)]
pub struct Decoded {
    pub measure: AtomicMeasure,
    pub pre_reweight: AtomicMeasure,
}

/// `w_m^{-1} Psi(Vq)`.
pub fn decode_quantized(
    q: &[Complex64],
    cfg: &QuantizerConfig,
    method: &impl SuperResolution,
) -> Result<AtomicMeasure> {
    decode_quantized_detailed(q, cfg, method).map(|d| d.measure)
}

pub fn decode_quantized_detailed(
    q: &[Complex64],
    cfg: &QuantizerConfig,
    method: &impl SuperResolution,
) -> Result<Decoded> {
    let condensed = condense(q, cfg)?;
    let nu = method.recover(&condensed)?;
    Ok(Decoded {
        measure: reweight_decode(&nu, cfg),
        pre_reweight: nu,
    })
}
