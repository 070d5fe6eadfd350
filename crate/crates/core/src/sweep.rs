//! Seeded random lifted instances for the superadditivity check.
//!
//! Instances use a biproper `G` (`g_0 ≠ 0`). With a strictly proper `G` the
//! last diagonal entry of `2·L_u·T_r + T_u − I` is `−s/(r+s)`, so the margin
//! condition and `‖ξ‖ < 1` cannot hold together.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{IlcError, Result};
use crate::game::{Coalition, GameTrialReport};
use crate::ilc::{convergence_margin, synthesize, theorem1_margin, Weights};
use crate::lifted::{lift, Signal};
use crate::runner::{run_lifted, LiftedModel, LiftedRun, Tolerances};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomInstance {
    pub model: LiftedModel,
    pub weights: Weights,
    pub y_d: Signal,
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo..hi))
}

/// Draws one instance; it may or may not satisfy the margin premises.
pub fn draw_instance(rng: &mut ChaCha8Rng) -> Result<RandomInstance> {
    let n: usize = rng.random_range(3..16);
    let gain = rng.random_range(0.2..1.5);
    let g: Vec<f64> = (0..n)
        .map(|i| gain * 0.6f64.powi(i as i32) * rng.random_range(0.5..1.0))
        .collect();
    let loop_gain = rng.random_range(0.1..0.8);
    let mut g_r = vec![0.0];
    g_r.extend((0..n - 1).map(|i| loop_gain * 0.5f64.powi(i as i32) * rng.random_range(0.0..1.0)));
    let weights = Weights::new(
        log_uniform(rng, -1.0, 1.0),
        log_uniform(rng, -1.0, 2.0),
        log_uniform(rng, -3.0, 0.0),
        log_uniform(rng, -2.0, 0.5),
        log_uniform(rng, -3.0, 0.0),
    );
    let mut y_d: Vec<f64> = (0..n)
        .map(|_| {
            // Box-Muller; avoids pulling in a distributions crate
            let u1: f64 = 1.0 - rng.random::<f64>();
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        })
        .collect();
    y_d[0] = 0.0;
    Ok(RandomInstance {
        model: LiftedModel::new(lift(&g, n - 1)?, lift(&g_r, n - 1)?)?,
        weights,
        y_d: Signal::new(y_d, 1.0),
    })
}

/// Whether the instance meets the premises: margin satisfied and `‖ξ‖ < 1`.
pub fn meets_premises(inst: &RandomInstance) -> Result<bool> {
    let gains = synthesize(&inst.model.g, &inst.model.g_r, &inst.weights)?;
    Ok(theorem1_margin(&gains).satisfied && convergence_margin(&gains)?.converges)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceOutcome {
    pub index: usize,
    pub horizon_samples: usize,
    pub weights: Weights,
    pub g: Vec<f64>,
    pub g_r: Vec<f64>,
    pub y_d: Vec<f64>,
    pub theorem1_min_eig: f64,
    pub convergence_norm: f64,
    pub violations: Vec<GameTrialReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub seed: u64,
    pub requested: usize,
    pub draws: usize,
    pub instances: Vec<InstanceOutcome>,
}

impl SweepReport {
    pub fn counterexamples(&self) -> impl Iterator<Item = &InstanceOutcome> {
        self.instances.iter().filter(|i| !i.violations.is_empty())
    }
}

/// Finds `count` instances meeting the premises and runs all four
/// coalitions on each for `trials` trials from `u_0 = 0`.
pub fn superadditivity_sweep(seed: u64, count: usize, trials: usize) -> Result<SweepReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_draws = 2000 * count.max(1);
    let mut draws = 0;
    let mut instances = Vec::with_capacity(count);
    while instances.len() < count {
        if draws >= max_draws {
            return Err(IlcError::Config(format!(
                "only {} of {count} qualifying instances in {max_draws} draws",
                instances.len()
            )));
        }
        draws += 1;
        let inst = draw_instance(&mut rng)?;
        if !meets_premises(&inst)? {
            continue;
        }
        let run = LiftedRun {
            weights: inst.weights,
            y_d: inst.y_d.clone(),
            u0: None,
            trials,
            policies: Coalition::ALL.to_vec(),
            tolerances: Tolerances::default(),
        };
        let res = run_lifted(inst.model.clone(), &run)?;
        let game = res.game.expect("all four coalitions ran");
        instances.push(InstanceOutcome {
            index: instances.len(),
            horizon_samples: inst.model.dim(),
            weights: inst.weights,
            g: inst.model.g.markov().to_vec(),
            g_r: inst.model.g_r.markov().to_vec(),
            y_d: inst.y_d.as_slice().to_vec(),
            theorem1_min_eig: res.analysis.theorem1.min_eig_sym,
            convergence_norm: res.analysis.convergence.norm,
            violations: game
                .reports
                .into_iter()
                .filter(|r| !r.superadditive)
                .collect(),
        });
    }
    Ok(SweepReport {
        seed,
        requested: count,
        draws,
        instances,
    })
}
