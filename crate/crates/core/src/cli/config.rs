//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "plant": { "num": [0.12, 235.0], "den": [9e-5, 1.092e-2, 21.385, 0, 0] },
//!   "controller": { "num": [2.527e5, 1.011e7], "den": [1, 351.9, 6.317e4] },
//!   "horizon_samples": 501,
//!   "sample_time": 0.001,
//!   "trials": 30,
//!   "weights": { "q": 1e3, "r": 1e-2, "s": 1e-3, "w": 1e3, "wr": 1e3 },
//!   "reference": { "kind": "smoothed_pulse", "amplitude": 1.0, "start_sample": 100,
//!                  "width_samples": 100, "smoothing_samples": 50 },
//!   "policies": ["empty", "input_only", "trajectory_only", "grand"],
//!   "discretization": { "plant": "zoh", "controller": "tustin" },
//!   "u0": null,
//!   "tolerances": { "trackability": null, "learned_trackability": 1e-6, "divergence": 1e12 }
//! }
//! ```
//!
//! Only `horizon_samples` and a model are required. The model is either
//! `plant` + `controller` (continuous transfer functions, descending powers
//! of `s`) or `markov: { "g": [...], "g_r": [...] }` giving the lifted pair
//! directly. Without `reference` the default pulse for the horizon is used.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{IlcError, Result};
use crate::game::Coalition;
use crate::ilc::Weights;
use crate::lifted::{lift, Signal};
use crate::lti::{ContinuousTransferFunction, DiscretizationMethod};
use crate::runner::{
    generate_reference, Discretization, ExperimentConfig, LiftedModel, LiftedRun, ReferenceSpec,
    Tolerances,
};

use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferFunctionSpec {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovSpec {
    pub g: Vec<f64>,
    pub g_r: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscretizationSpec {
    pub plant: DiscretizationMethod,
    pub controller: DiscretizationMethod,
}

impl Default for DiscretizationSpec {
    fn default() -> Self {
        let d = Discretization::default();
        Self {
            plant: d.plant,
            controller: d.controller,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TolerancesSpec {
    pub trackability: Option<f64>,
    pub learned_trackability: f64,
    pub divergence: f64,
}

impl Default for TolerancesSpec {
    fn default() -> Self {
        let t = Tolerances::default();
        Self {
            trackability: t.trackability,
            learned_trackability: t.learned_trackability,
            divergence: t.divergence,
        }
    }
}

fn default_sample_time() -> f64 {
    1e-3
}

fn default_trials() -> usize {
    30
}

fn default_policies() -> Vec<Coalition> {
    Coalition::ALL.to_vec()
}

/// On-disk configuration, before defaults are resolved into a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plant: Option<TransferFunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<TransferFunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markov: Option<MarkovSpec>,
    pub horizon_samples: usize,
    #[serde(default = "default_sample_time")]
    pub sample_time: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub weights: Weights,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceSpec>,
    #[serde(default = "default_policies")]
    pub policies: Vec<Coalition>,
    #[serde(default)]
    pub discretization: DiscretizationSpec,
    #[serde(default)]
    pub u0: Option<Vec<f64>>,
    #[serde(default)]
    pub tolerances: TolerancesSpec,
}

/// A validated run description.
#[derive(Debug, Clone)]
pub enum Experiment {
    /// Continuous plant and controller, discretized and closed.
    Loop(ExperimentConfig),
    /// Lifted pair given by Markov parameters.
    Lifted { model: LiftedModel, run: LiftedRun },
}

fn tf(spec: &TransferFunctionSpec, field: &str) -> Result<ContinuousTransferFunction> {
    ContinuousTransferFunction::new(spec.num.clone(), spec.den.clone())
        .map_err(|e| IlcError::Config(format!("{field}: {e}")))
}

impl ConfigFile {
    /// Case-study preset as a config document; the reference is left to the
    /// default pulse so a changed horizon rescales it.
    pub fn from_experiment(cfg: &ExperimentConfig) -> Self {
        let spec = |t: &ContinuousTransferFunction| TransferFunctionSpec {
            num: t.numerator().to_vec(),
            den: t.denominator().to_vec(),
        };
        Self {
            plant: Some(spec(&cfg.plant)),
            controller: Some(spec(&cfg.controller)),
            markov: None,
            horizon_samples: cfg.horizon_samples,
            sample_time: cfg.sample_time,
            trials: cfg.trials,
            weights: cfg.weights,
            reference: None,
            policies: cfg.policies.clone(),
            discretization: DiscretizationSpec {
                plant: cfg.discretization.plant,
                controller: cfg.discretization.controller,
            },
            u0: cfg.u0.clone(),
            tolerances: TolerancesSpec {
                trackability: cfg.tolerances.trackability,
                learned_trackability: cfg.tolerances.learned_trackability,
                divergence: cfg.tolerances.divergence,
            },
        }
    }

    pub fn resolve(self) -> Result<Experiment> {
        let reference = self
            .reference
            .clone()
            .unwrap_or_else(|| ReferenceSpec::default_pulse(self.horizon_samples));
        let tolerances = Tolerances {
            trackability: self.tolerances.trackability,
            learned_trackability: self.tolerances.learned_trackability,
            divergence: self.tolerances.divergence,
        };
        match (&self.plant, &self.controller, &self.markov) {
            (Some(p), Some(c), None) => {
                let cfg = ExperimentConfig {
                    plant: tf(p, "plant")?,
                    controller: tf(c, "controller")?,
                    sample_time: self.sample_time,
                    horizon_samples: self.horizon_samples,
                    trials: self.trials,
                    weights: self.weights,
                    reference,
                    policies: self.policies,
                    discretization: Discretization {
                        plant: self.discretization.plant,
                        controller: self.discretization.controller,
                    },
                    u0: self.u0,
                    tolerances,
                };
                cfg.validate()?;
                Ok(Experiment::Loop(cfg))
            }
            (None, None, Some(m)) => {
                // reuse the loop validation for the shared fields
                let mut probe = crate::runner::case_study_config(self.horizon_samples);
                probe.sample_time = self.sample_time;
                probe.trials = self.trials;
                probe.weights = self.weights;
                probe.policies = self.policies.clone();
                probe.u0 = self.u0.clone();
                probe.tolerances = tolerances;
                probe.validate()?;
                if m.g.is_empty() || m.g_r.is_empty() {
                    return Err(IlcError::Config("markov.g and markov.g_r must be nonempty".into()));
                }
                let n = self.horizon_samples - 1;
                let model = LiftedModel::new(lift(&m.g, n)?, lift(&m.g_r, n)?)?;
                let y_d = generate_reference(&reference, self.horizon_samples, self.sample_time)?;
                let run = LiftedRun {
                    weights: self.weights,
                    y_d,
                    u0: self.u0.map(|v| Signal::new(v, self.sample_time)),
                    trials: self.trials,
                    policies: self.policies,
                    tolerances,
                };
                Ok(Experiment::Lifted { model, run })
            }
            (_, _, Some(_)) => Err(IlcError::Config(
                "markov cannot be combined with plant/controller".into(),
            )),
            _ => Err(IlcError::Config(
                "plant and controller (or markov) are required".into(),
            )),
        }
    }
}

/// Sets `a.b.c = value` in a JSON document, creating objects on the way.
/// The value is read as JSON when it parses, otherwise as a string.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| IlcError::Config(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(IlcError::Config(format!("override `{assignment}` has an empty key")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if !node.is_object() {
            if node.is_null() {
                *node = Value::Object(Default::default());
            } else {
                return Err(IlcError::Config(format!(
                    "override `{key}`: `{}` is not an object",
                    parts[..i].join(".")
                )));
            }
        }
        let obj = node.as_object_mut().expect("checked above");
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("key has at least one part")
}

fn located(origin: &str, e: &serde_json::Error) -> CliError {
    CliError::Parse {
        origin: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses a config document, applies overrides and resolves defaults.
pub fn parse_config_str(text: &str, origin: &str, overrides: &[String]) -> Result<Experiment, CliError> {
    let file: ConfigFile = if overrides.is_empty() {
        serde_json::from_str(text).map_err(|e| located(origin, &e))?
    } else {
        let mut doc: Value = serde_json::from_str(text).map_err(|e| located(origin, &e))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        serde_json::from_value(doc).map_err(|e| CliError::Ilc(IlcError::Config(e.to_string())))?
    };
    Ok(file.resolve()?)
}

pub fn parse_config(path: &Path, overrides: &[String]) -> Result<Experiment, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text, &path.display().to_string(), overrides)
}

/// Resolves an in-memory document (the case-study preset) with overrides.
pub fn resolve_document(file: &ConfigFile, overrides: &[String]) -> Result<Experiment, CliError> {
    let mut doc = serde_json::to_value(file).map_err(|e| IlcError::Config(e.to_string()))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let file: ConfigFile =
        serde_json::from_value(doc).map_err(|e| CliError::Ilc(IlcError::Config(e.to_string())))?;
    Ok(file.resolve()?)
}
