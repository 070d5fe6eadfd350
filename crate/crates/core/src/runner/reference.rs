use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{IlcError, Result};
use crate::lifted::Signal;

/// Desired-trajectory generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceSpec {
    /// Zero before `start_sample`, `amplitude` from then on.
    Step { amplitude: f64, start_sample: usize },
    /// Pulse supported on `start_sample..=start_sample + width_samples` with
    /// raised-cosine ramps of `smoothing_samples` at both edges.
    SmoothedPulse {
        amplitude: f64,
        start_sample: usize,
        width_samples: usize,
        smoothing_samples: usize,
    },
    CustomSamples { samples: Vec<f64> },
}

impl ReferenceSpec {
    /// Raised-cosine bump of unit amplitude, 20% of the horizon wide,
    /// centered at 30% of the horizon.
    pub fn default_pulse(horizon_samples: usize) -> Self {
        let width = ((0.2 * horizon_samples as f64).round() as usize).max(2);
        let center = (0.3 * horizon_samples as f64).round() as usize;
        ReferenceSpec::SmoothedPulse {
            amplitude: 1.0,
            start_sample: center.saturating_sub(width / 2),
            width_samples: width,
            smoothing_samples: width / 2,
        }
    }
}

pub fn generate_reference(
    spec: &ReferenceSpec,
    horizon_samples: usize,
    sample_time: f64,
) -> Result<Signal> {
    let values = match spec {
        ReferenceSpec::Step {
            amplitude,
            start_sample,
        } => {
            if *start_sample >= horizon_samples {
                return Err(IlcError::InvalidReference(format!(
                    "step start {start_sample} is beyond the last sample {}",
                    horizon_samples.saturating_sub(1)
                )));
            }
            (0..horizon_samples)
                .map(|t| if t >= *start_sample { *amplitude } else { 0.0 })
                .collect()
        }
        ReferenceSpec::SmoothedPulse {
            amplitude,
            start_sample,
            width_samples,
            smoothing_samples,
        } => {
            let (start, width, ramp) = (*start_sample, *width_samples, *smoothing_samples);
            if start + width >= horizon_samples {
                return Err(IlcError::InvalidReference(format!(
                    "pulse end {} is beyond the last sample {}",
                    start + width,
                    horizon_samples.saturating_sub(1)
                )));
            }
            if 2 * ramp > width {
                return Err(IlcError::InvalidReference(format!(
                    "smoothing {ramp} exceeds half the pulse width {width}"
                )));
            }
            (0..horizon_samples)
                .map(|t| {
                    if t < start || t > start + width {
                        return 0.0;
                    }
                    let tau = t - start;
                    let edge = tau.min(width - tau);
                    if edge < ramp {
                        amplitude * 0.5 * (1.0 - (PI * edge as f64 / ramp as f64).cos())
                    } else {
                        *amplitude
                    }
                })
                .collect()
        }
        ReferenceSpec::CustomSamples { samples } => {
            if samples.len() != horizon_samples {
                return Err(IlcError::InvalidReference(format!(
                    "custom reference has {} samples, horizon has {horizon_samples}",
                    samples.len()
                )));
            }
            samples.clone()
        }
    };
    Ok(Signal::new(values, sample_time))
}
