//! Command-line plumbing: configuration, orchestration and file output.

mod config;
mod output;

use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

use crate::error::IlcError;
use crate::ilc::{ConvergenceMargin, Theorem1Margin, TrackabilityReport, Weights};
use crate::lifted::LiftedOperator;
use crate::runner::{build_model, run_experiment, run_lifted, synthesize_only, ExperimentResults, LiftedModel};

pub use config::{
    apply_override, parse_config, parse_config_str, resolve_document, ConfigFile,
    DiscretizationSpec, Experiment, MarkovSpec, TolerancesSpec, TransferFunctionSpec,
};
pub use output::{
    format_float, prepare_output_dir, signal_trials, write_analysis, write_game_csv,
    write_json, write_reference_csv, write_results, write_signals_csv, write_trials_csv,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Ilc(#[from] IlcError),

    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("output directory {0} is not empty; pass --force to overwrite")]
    OutputExists(PathBuf),
}

impl CliError {
    /// 2 for configuration and invocation problems, 3 for numerical
    /// failures, 4 for a divergence abort.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Io { .. } | CliError::OutputExists(_) => 2,
            CliError::Ilc(e) => match e {
                IlcError::Divergence { .. } => 4,
                IlcError::NotProper { .. }
                | IlcError::ZeroLeadingCoefficient
                | IlcError::EmptyPolynomial
                | IlcError::InvalidSampleTime(_)
                | IlcError::SampleTimeMismatch { .. }
                | IlcError::NegativeWeight { .. }
                | IlcError::WeightPremise(_)
                | IlcError::InvalidReference(_)
                | IlcError::Config(_)
                | IlcError::EmptyMarkov
                | IlcError::DimensionMismatch { .. } => 2,
                _ => 3,
            },
        }
    }
}

/// Content of `analysis.json` for the `synthesize` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisReport {
    pub horizon_samples: usize,
    pub weights: Weights,
    pub closed_loop_spectral_radius: Option<f64>,
    pub convergence_norm: f64,
    pub theorem1_margin: f64,
    pub trackability_residual: f64,
    pub convergence: ConvergenceMargin,
    pub theorem1: Theorem1Margin,
    pub trackability_desired: TrackabilityReport,
    pub g_markov: Vec<f64>,
    pub g_r_markov: Vec<f64>,
}

impl Experiment {
    pub fn run(&self) -> Result<ExperimentResults, IlcError> {
        match self {
            Experiment::Loop(cfg) => run_experiment(cfg),
            Experiment::Lifted { model, run } => run_lifted(model.clone(), run),
        }
    }

    pub fn synthesize(&self) -> Result<SynthesisReport, IlcError> {
        let (model, weights, y_d, tolerances, spectral_radius) = match self {
            Experiment::Loop(cfg) => {
                cfg.validate()?;
                let closed = build_model(cfg)?;
                let model = LiftedModel::from_closed_loop(&closed, cfg.horizon_samples)?;
                let y_d = crate::runner::generate_reference(
                    &cfg.reference,
                    cfg.horizon_samples,
                    cfg.sample_time,
                )?;
                (model, cfg.weights, y_d, cfg.tolerances, Some(closed.spectral_radius()))
            }
            Experiment::Lifted { model, run } => {
                (model.clone(), run.weights, run.y_d.clone(), run.tolerances, None)
            }
        };
        let (_, convergence, theorem1, trackability_desired) =
            synthesize_only(&model, &weights, &y_d, &tolerances)?;
        let markov = |op: &LiftedOperator| op.markov().to_vec();
        Ok(SynthesisReport {
            horizon_samples: model.dim(),
            weights,
            closed_loop_spectral_radius: spectral_radius,
            convergence_norm: convergence.norm,
            theorem1_margin: theorem1.min_eig_sym,
            trackability_residual: trackability_desired.residual_norm,
            convergence,
            theorem1,
            trackability_desired,
            g_markov: markov(&model.g),
            g_r_markov: markov(&model.g_r),
        })
    }
}
