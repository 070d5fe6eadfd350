//! Trial-domain experiment engine.
//!
//! One experiment builds the sampled loop, lifts it, synthesizes the gains
//! once and then runs every requested coalition for `trials` learning
//! iterations. Trial 0 is shared by all policies: it executes the initial
//! input `u_0` with `r_0 = y_d`.

mod preset;
mod reference;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{IlcError, Result};
use crate::game::{analyze_game, coalition_policy, Coalition, CostTraces, GameAnalysis};
use crate::ilc::{
    asymptotic_error, convergence_margin, cost, default_trackability_tolerance, synthesize,
    theorem1_margin, trackability, update_serial_only, ConvergenceMargin, CostBreakdown, GainSet,
    Theorem1Margin, TrackabilityReport, Weights,
};
use crate::lifted::{lift, LiftedOperator, Signal};
use crate::lti::{
    build_closed_loop, discretize, markov_parameters, tf_to_state_space, ClosedLoopModel,
    ContinuousTransferFunction, DiscreteStateSpace, DiscretizationMethod,
};

pub use preset::{case_study_config, CASE_STUDY_FULL_SAMPLES, CASE_STUDY_SAMPLES};
pub use reference::{generate_reference, ReferenceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Discretization {
    pub plant: DiscretizationMethod,
    pub controller: DiscretizationMethod,
}

impl Default for Discretization {
    fn default() -> Self {
        Self {
            plant: DiscretizationMethod::Zoh,
            controller: DiscretizationMethod::Tustin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Absolute residual bound for the desired trajectory; `None` means
    /// `1e-8·(1 + ‖y_d‖)`.
    pub trackability: Option<f64>,
    /// Absolute residual bound applied to the learned trajectory.
    pub learned_trackability: f64,
    /// A trial whose total cost exceeds this aborts the run.
    pub divergence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            trackability: None,
            learned_trackability: 1e-6,
            divergence: 1e12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub plant: ContinuousTransferFunction,
    pub controller: ContinuousTransferFunction,
    pub sample_time: f64,
    /// `N + 1`.
    pub horizon_samples: usize,
    pub trials: usize,
    pub weights: Weights,
    pub reference: ReferenceSpec,
    pub policies: Vec<Coalition>,
    pub discretization: Discretization,
    pub u0: Option<Vec<f64>>,
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(IlcError::Config("trials must be at least 1".into()));
        }
        if self.horizon_samples < 2 {
            return Err(IlcError::Config("horizon_samples must be at least 2".into()));
        }
        if self.policies.is_empty() {
            return Err(IlcError::Config("policies must not be empty".into()));
        }
        if !(self.sample_time > 0.0 && self.sample_time.is_finite()) {
            return Err(IlcError::Config("sample_time must be positive".into()));
        }
        self.weights.check_nonnegative()?;
        self.weights.validate()?;
        if let Some(u0) = &self.u0 {
            if u0.len() != self.horizon_samples {
                return Err(IlcError::Config(format!(
                    "u0 has {} samples, horizon_samples is {}",
                    u0.len(),
                    self.horizon_samples
                )));
            }
        }
        if !(self.tolerances.divergence > 0.0) {
            return Err(IlcError::Config("tolerances.divergence must be positive".into()));
        }
        Ok(())
    }
}

/// Lifted pair `y = G·u + G_r·r` plus the controller used to rebuild the
/// actuator signal.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedModel {
    pub g: LiftedOperator,
    pub g_r: LiftedOperator,
    pub controller: Option<DiscreteStateSpace>,
}

impl LiftedModel {
    pub fn new(g: LiftedOperator, g_r: LiftedOperator) -> Result<Self> {
        if g.dim() != g_r.dim() {
            return Err(IlcError::DimensionMismatch {
                context: "lifted model",
                expected: g.dim(),
                found: g_r.dim(),
            });
        }
        Ok(Self {
            g,
            g_r,
            controller: None,
        })
    }

    pub fn from_closed_loop(model: &ClosedLoopModel, horizon_samples: usize) -> Result<Self> {
        let n = horizon_samples - 1;
        Ok(Self {
            g: lift(&markov_parameters(&model.g_ps, horizon_samples), n)?,
            g_r: lift(&markov_parameters(&model.g_cs, horizon_samples), n)?,
            controller: Some(model.controller().clone()),
        })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSignals {
    pub y: Signal,
    pub e: Signal,
    pub u_mix: Signal,
}

/// One trial from rest: `y = G·u + G_r·r`, `e = r − y`,
/// `u_mix = C(q⁻¹)·e + u`. Without a controller model `u_mix = u`.
pub fn simulate_trial(u: &Signal, r: &Signal, model: &LiftedModel) -> Result<TrialSignals> {
    let y = &model.g.apply(u)? + &model.g_r.apply(r)?;
    let e = r - &y;
    let u_mix = match &model.controller {
        Some(c) => {
            let fb = c.simulate(e.as_slice());
            &Signal::new(fb, u.sample_time()) + u
        }
        None => u.clone(),
    };
    Ok(TrialSignals { y, e, u_mix })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub r: Signal,
    pub u: Signal,
    pub y: Signal,
    pub e: Signal,
    pub e_hat: Signal,
    pub u_mix: Signal,
    pub cost: CostBreakdown,
    pub err_norm: f64,
    pub actual_err_norm: f64,
}

/// Everything a policy run needs, shared read-only across policies.
pub struct LearningProblem<'a> {
    pub model: &'a LiftedModel,
    pub gains: &'a GainSet,
    pub weights: &'a Weights,
    pub y_d: &'a Signal,
    pub u0: &'a Signal,
    pub divergence_limit: f64,
}

/// Runs trials `0..=trials` of one coalition.
pub fn run_policy(
    policy: Coalition,
    problem: &LearningProblem<'_>,
    trials: usize,
) -> Result<Vec<TrialRecord>> {
    let LearningProblem {
        model,
        gains,
        weights,
        y_d,
        u0,
        divergence_limit,
    } = *problem;
    let mut serial: Option<Signal> = None;
    let mut u = u0.clone();
    let mut r = y_d.clone();
    let mut u_prev = u0.clone();
    let mut records = Vec::with_capacity(trials + 1);
    for k in 0..=trials {
        if k > 0 {
            let (u_next, r_next) = match policy {
                // trial-invariant; solve once
                Coalition::TrajectoryOnly => {
                    let r_s = match &serial {
                        Some(r_s) => r_s.clone(),
                        None => {
                            let r_s = update_serial_only(y_d, &model.g_r, weights)?;
                            serial = Some(r_s.clone());
                            r_s
                        }
                    };
                    (Signal::zeros(u.len(), u.sample_time()), r_s)
                }
                _ => coalition_policy(policy, &u, y_d, gains, &model.g_r, weights)?,
            };
            u_prev = std::mem::replace(&mut u, u_next);
            r = r_next;
        }
        let sim = simulate_trial(&u, &r, model)?;
        let c = cost(&u, &u_prev, &r, &sim.y, y_d, weights)?;
        if !(c.total <= divergence_limit) {
            return Err(IlcError::Divergence {
                policy: policy.to_string(),
                trial: k,
                cost: c.total,
                limit: divergence_limit,
            });
        }
        let e_hat = y_d - &sim.y;
        records.push(TrialRecord {
            trial: k,
            err_norm: sim.e.norm(),
            actual_err_norm: e_hat.norm(),
            r: r.clone(),
            u: u.clone(),
            y: sim.y,
            e: sim.e,
            e_hat,
            u_mix: sim.u_mix,
            cost: c,
        });
    }
    Ok(records)
}

/// Diagnostics written alongside the trial logs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisSummary {
    pub horizon_samples: usize,
    pub trials: usize,
    pub sample_time: f64,
    pub weights: Weights,
    pub closed_loop_spectral_radius: Option<f64>,
    pub convergence_norm: f64,
    /// Smallest eigenvalue of `sym(2·L_u·T_r + T_u − I)`.
    pub theorem1_margin: f64,
    /// Tracking residual of the desired trajectory.
    pub trackability_residual: f64,
    pub convergence: ConvergenceMargin,
    pub theorem1: Theorem1Margin,
    pub trackability_desired: TrackabilityReport,
    /// Tracking test of the end-to-end trajectory at the final trial.
    pub trackability_learned: Option<TrackabilityReport>,
    /// `‖r_final − y_d‖` of the end-to-end policy.
    pub learned_minus_desired_norm: Option<f64>,
    pub asymptotic_error_norm: Option<f64>,
    pub final_total_cost: BTreeMap<Coalition, f64>,
    /// End-to-end final cost strictly below NOILC final cost.
    pub grand_below_input_only: Option<bool>,
    pub game: Option<crate::game::GameSummary>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResults {
    pub y_d: Signal,
    pub policies: Vec<Coalition>,
    pub records: BTreeMap<Coalition, Vec<TrialRecord>>,
    pub game: Option<GameAnalysis>,
    pub analysis: AnalysisSummary,
    pub gains: GainSet,
    pub model: LiftedModel,
}

/// Discretizes and closes the loop described by `config`.
pub fn build_model(config: &ExperimentConfig) -> Result<ClosedLoopModel> {
    let plant = discretize(
        &tf_to_state_space(&config.plant),
        config.sample_time,
        config.discretization.plant,
    )?;
    let controller = discretize(
        &tf_to_state_space(&config.controller),
        config.sample_time,
        config.discretization.controller,
    )?;
    build_closed_loop(&plant, &controller)
}

/// Settings of a run on an already lifted model.
#[derive(Debug, Clone)]
pub struct LiftedRun {
    pub weights: Weights,
    pub y_d: Signal,
    pub u0: Option<Signal>,
    pub trials: usize,
    pub policies: Vec<Coalition>,
    pub tolerances: Tolerances,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResults> {
    config.validate()?;
    let closed = build_model(config)?;
    let model = LiftedModel::from_closed_loop(&closed, config.horizon_samples)?;
    let y_d = generate_reference(&config.reference, config.horizon_samples, config.sample_time)?;
    let run = LiftedRun {
        weights: config.weights,
        u0: config
            .u0
            .as_ref()
            .map(|v| Signal::new(v.clone(), config.sample_time)),
        y_d,
        trials: config.trials,
        policies: config.policies.clone(),
        tolerances: config.tolerances,
    };
    let mut results = run_lifted(model, &run)?;
    results.analysis.sample_time = config.sample_time;
    results.analysis.closed_loop_spectral_radius = Some(closed.spectral_radius());
    Ok(results)
}

/// Gains and analysis only, no trials.
pub fn synthesize_only(
    model: &LiftedModel,
    weights: &Weights,
    y_d: &Signal,
    tolerances: &Tolerances,
) -> Result<(GainSet, ConvergenceMargin, Theorem1Margin, TrackabilityReport)> {
    let gains = synthesize(&model.g, &model.g_r, weights)?;
    let conv = convergence_margin(&gains)?;
    let t1 = theorem1_margin(&gains);
    let tol = tolerances
        .trackability
        .unwrap_or_else(|| default_trackability_tolerance(y_d));
    let track = trackability(&model.g, &model.g_r, y_d, tol)?;
    Ok((gains, conv, t1, track))
}

pub fn run_lifted(model: LiftedModel, run: &LiftedRun) -> Result<ExperimentResults> {
    let n = model.dim();
    run.y_d.check_len(n, "desired trajectory")?;
    if run.policies.is_empty() {
        return Err(IlcError::Config("policies must not be empty".into()));
    }
    let (gains, convergence, theorem1, trackability_desired) =
        synthesize_only(&model, &run.weights, &run.y_d, &run.tolerances)?;
    let u0 = run
        .u0
        .clone()
        .unwrap_or_else(|| Signal::zeros(n, run.y_d.sample_time()));
    u0.check_len(n, "initial input")?;

    let problem = LearningProblem {
        model: &model,
        gains: &gains,
        weights: &run.weights,
        y_d: &run.y_d,
        u0: &u0,
        divergence_limit: run.tolerances.divergence,
    };
    let mut policies: Vec<Coalition> = Vec::with_capacity(run.policies.len());
    for p in &run.policies {
        if !policies.contains(p) {
            policies.push(*p);
        }
    }
    let runs: Vec<(Coalition, Vec<TrialRecord>)> = policies
        .par_iter()
        .map(|&p| run_policy(p, &problem, run.trials).map(|r| (p, r)))
        .collect::<Result<_>>()?;
    let records: BTreeMap<Coalition, Vec<TrialRecord>> = runs.into_iter().collect();

    let trace = |c: Coalition| -> Option<Vec<f64>> {
        records
            .get(&c)
            .map(|recs| recs.iter().map(|r| r.cost.total).collect())
    };
    let game = match (
        trace(Coalition::Empty),
        trace(Coalition::InputOnly),
        trace(Coalition::TrajectoryOnly),
        trace(Coalition::Grand),
    ) {
        (Some(empty), Some(input_only), Some(trajectory_only), Some(grand)) => {
            Some(analyze_game(&CostTraces {
                empty,
                input_only,
                trajectory_only,
                grand,
            })?)
        }
        _ => None,
    };

    let final_total_cost: BTreeMap<Coalition, f64> = records
        .iter()
        .map(|(c, recs)| (*c, recs.last().map_or(0.0, |r| r.cost.total)))
        .collect();
    let grand_below_input_only = match (
        final_total_cost.get(&Coalition::Grand),
        final_total_cost.get(&Coalition::InputOnly),
    ) {
        (Some(g), Some(i)) => Some(g < i),
        _ => None,
    };
    let learned = records
        .get(&Coalition::Grand)
        .and_then(|recs| recs.last())
        .map(|rec| rec.r.clone());
    let trackability_learned = learned
        .as_ref()
        .map(|r| trackability(&model.g, &model.g_r, r, run.tolerances.learned_trackability))
        .transpose()?;
    let learned_minus_desired_norm = learned.as_ref().map(|r| (r - &run.y_d).norm());
    let asymptotic_error_norm = if convergence.converges {
        Some(asymptotic_error(&gains, &model.g, &model.g_r, &run.y_d)?.norm())
    } else {
        None
    };

    let analysis = AnalysisSummary {
        horizon_samples: n,
        trials: run.trials,
        sample_time: run.y_d.sample_time(),
        weights: run.weights,
        closed_loop_spectral_radius: None,
        convergence_norm: convergence.norm,
        theorem1_margin: theorem1.min_eig_sym,
        trackability_residual: trackability_desired.residual_norm,
        convergence,
        theorem1,
        trackability_desired,
        trackability_learned,
        learned_minus_desired_norm,
        asymptotic_error_norm,
        final_total_cost,
        grand_below_input_only,
        game: game.as_ref().map(|g| g.summary.clone()),
    };
    Ok(ExperimentResults {
        y_d: run.y_d.clone(),
        policies,
        records,
        game,
        analysis,
        gains,
        model,
    })
}
