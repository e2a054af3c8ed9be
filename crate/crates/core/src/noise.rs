//! Additive white Gaussian noise scaled to each output's average power.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Noise standard deviation relative to the RMS of each output.
    pub sigma: f64,
}

impl NoiseSpec {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidParams(format!("noise level {sigma} must be finite and non-negative")));
        }
        Ok(Self { sigma })
    }
}

/// Returns `y + γ ε` with `γ = σ ‖y‖₂ / √N` and `ε` standard normal.
/// `σ = 0` returns the inputs unchanged without drawing from `rng`.
pub fn corrupt<R: Rng + ?Sized>(outputs: &[DVector<f64>], spec: NoiseSpec, rng: &mut R) -> Result<Vec<DVector<f64>>> {
    NoiseSpec::new(spec.sigma)?;
    if spec.sigma == 0.0 {
        return Ok(outputs.to_vec());
    }
    outputs
        .iter()
        .map(|y| {
            let rms = y.norm() / (y.len() as f64).sqrt();
            if rms == 0.0 {
                return Err(Error::ZeroSignalWithNoise);
            }
            let gamma = spec.sigma * rms;
            Ok(DVector::from_fn(y.len(), |i, _| y[i] + gamma * rng.sample::<f64, _>(StandardNormal)))
        })
        .collect()
}
