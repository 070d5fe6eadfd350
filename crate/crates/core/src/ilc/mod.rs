//! Two-player learning laws: cost, gain synthesis, trial updates and their
//! convergence and trackability analysis.

mod analysis;
mod cost;
mod gains;
mod trackability;
mod update;

use serde::{Deserialize, Serialize};

use crate::error::{IlcError, Result};

pub use analysis::{
    asymptotic_error, closed_form_input, convergence_margin, steady_state, theorem1_margin,
    ConvergenceMargin, SteadyState, Theorem1Margin, THEOREM1_SLACK,
};
pub use cost::{cost, CostBreakdown};
pub use gains::{synthesize, GainSet};
pub use trackability::{default_trackability_tolerance, trackability, TrackabilityReport};
pub use update::{
    stationarity_residuals, update_end_to_end, update_noilc, update_serial_only,
    StationarityResiduals,
};

/// Scalar weights of the quadratic trial cost; each is lifted to `scalar·I`.
///
/// `q` penalizes the process error `r − y`, `r` the trial-to-trial input
/// change, `s` the input itself, `w` the distance between the learned
/// trajectory and the desired one, and `wr` the trajectory magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Weights {
    pub q: f64,
    pub r: f64,
    pub s: f64,
    pub w: f64,
    pub wr: f64,
}

impl Default for Weights {
    /// Printer case-study weights.
    fn default() -> Self {
        Self {
            q: 1e3,
            r: 1e-2,
            s: 1e-3,
            w: 1e3,
            wr: 1e3,
        }
    }
}

impl Weights {
    pub fn new(q: f64, r: f64, s: f64, w: f64, wr: f64) -> Self {
        Self { q, r, s, w, wr }
    }

    /// Only checks signs; see [`Weights::validate`] for synthesis premises.
    pub fn check_nonnegative(&self) -> Result<()> {
        for (name, v) in [
            ("q", self.q),
            ("r", self.r),
            ("s", self.s),
            ("w", self.w),
            ("wr", self.wr),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(IlcError::NegativeWeight { name });
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check_nonnegative()?;
        if self.q <= 0.0 {
            return Err(IlcError::WeightPremise("q must be positive".into()));
        }
        if self.w <= 0.0 {
            return Err(IlcError::WeightPremise("w must be positive".into()));
        }
        if self.r + self.s <= 0.0 {
            return Err(IlcError::WeightPremise("r + s must be positive".into()));
        }
        Ok(())
    }
}
