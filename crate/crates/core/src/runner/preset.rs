use crate::game::Coalition;
use crate::ilc::Weights;
use crate::lti::ContinuousTransferFunction;

use super::{Discretization, ExperimentConfig, ReferenceSpec, Tolerances};

/// Desk-scale horizon.
pub const CASE_STUDY_SAMPLES: usize = 501;
/// Horizon of the original printer experiment (4.5 s at 1 kHz).
pub const CASE_STUDY_FULL_SAMPLES: usize = 4501;

/// Identified desktop-printer carriage model.
pub fn printer_plant() -> ContinuousTransferFunction {
    ContinuousTransferFunction::new(vec![0.12, 235.0], vec![9e-5, 1.092e-2, 21.385, 0.0, 0.0])
        .expect("printer plant is proper")
}

/// Stabilizing feedback controller of the printer loop.
pub fn printer_controller() -> ContinuousTransferFunction {
    ContinuousTransferFunction::new(vec![2.527e5, 1.011e7], vec![1.0, 351.9, 6.317e4])
        .expect("printer controller is proper")
}

/// Printer case study on `horizon_samples` samples with the default pulse.
pub fn case_study_config(horizon_samples: usize) -> ExperimentConfig {
    ExperimentConfig {
        plant: printer_plant(),
        controller: printer_controller(),
        sample_time: 1e-3,
        horizon_samples,
        trials: 30,
        weights: Weights::default(),
        reference: ReferenceSpec::default_pulse(horizon_samples),
        policies: Coalition::ALL.to_vec(),
        discretization: Discretization::default(),
        u0: None,
        tolerances: Tolerances::default(),
    }
}
