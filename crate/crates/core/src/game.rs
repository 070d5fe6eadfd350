//! Two-player cooperative game between the feedforward input and the
//! process trajectory.
//!
//! Each coalition runs its own trial history. Its characteristic value on
//! trial `k` is the NOILC (input-only) cost minus the coalition's own cost,
//! so `v_input` is identically zero and the empty coalition's raw value is
//! generally nonzero. The conventional `v(∅) = 0` is kept as a separate
//! field rather than folded into the raw number.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{IlcError, Result};
use crate::ilc::{update_end_to_end, update_noilc, update_serial_only, GainSet, Weights};
use crate::lifted::{LiftedOperator, Signal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coalition {
    /// Feedback loop only: `u = 0`, `r = y_d`.
    Empty,
    /// Parallel ILC (NOILC): learned `u`, `r = y_d`.
    InputOnly,
    /// Serial ILC: `u = 0`, learned `r`.
    TrajectoryOnly,
    /// End-to-end: both players learn.
    Grand,
}

impl Coalition {
    pub const ALL: [Coalition; 4] = [
        Coalition::Empty,
        Coalition::InputOnly,
        Coalition::TrajectoryOnly,
        Coalition::Grand,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Coalition::Empty => "empty",
            Coalition::InputOnly => "input_only",
            Coalition::TrajectoryOnly => "trajectory_only",
            Coalition::Grand => "grand",
        }
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Coalition {
    type Err = IlcError;

    fn from_str(s: &str) -> Result<Self> {
        Coalition::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| IlcError::Config(format!("unknown policy `{s}`")))
    }
}

/// Next-trial `(u, r)` of the given coalition.
pub fn coalition_policy(
    coalition: Coalition,
    u_k: &Signal,
    y_d: &Signal,
    gains: &GainSet,
    g_r: &LiftedOperator,
    weights: &Weights,
) -> Result<(Signal, Signal)> {
    let zero = || Signal::zeros(y_d.len(), y_d.sample_time());
    match coalition {
        Coalition::Empty => Ok((zero(), y_d.clone())),
        Coalition::InputOnly => Ok((update_noilc(u_k, y_d, gains)?, y_d.clone())),
        Coalition::TrajectoryOnly => Ok((zero(), update_serial_only(y_d, g_r, weights)?)),
        Coalition::Grand => {
            let (r, u) = update_end_to_end(u_k, y_d, gains)?;
            Ok((u, r))
        }
    }
}

/// `v_k(U) = V⁰_k − J_k(U)`.
pub fn characteristic_value(trial_cost: f64, baseline_v0: f64) -> f64 {
    baseline_v0 - trial_cost
}

fn slack(v: f64) -> f64 {
    1e-9 * (1.0 + v.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameTrialReport {
    pub trial: usize,
    pub baseline_v0: f64,
    pub v_empty_raw: f64,
    /// Conventional value of the empty coalition.
    pub v_empty: f64,
    pub v_input: f64,
    pub v_trajectory: f64,
    pub v_grand: f64,
    pub superadditive: bool,
    pub internally_stable: bool,
}

/// Per-trial total cost of every coalition.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CostTraces {
    pub empty: Vec<f64>,
    pub input_only: Vec<f64>,
    pub trajectory_only: Vec<f64>,
    pub grand: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameSummary {
    pub trials: usize,
    pub superadditive_fraction: f64,
    pub internally_stable_fraction: f64,
    pub final_superadditive: bool,
    pub final_internally_stable: bool,
    /// Trials on which superadditivity fails.
    pub superadditivity_violations: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameAnalysis {
    pub reports: Vec<GameTrialReport>,
    pub summary: GameSummary,
}

pub fn analyze_game(traces: &CostTraces) -> Result<GameAnalysis> {
    let n = traces.input_only.len();
    for (name, t) in [
        ("empty", &traces.empty),
        ("trajectory_only", &traces.trajectory_only),
        ("grand", &traces.grand),
    ] {
        if t.len() != n {
            return Err(IlcError::TraceMismatch(format!(
                "{name} has {} trials, input_only has {n}",
                t.len()
            )));
        }
    }
    let reports: Vec<GameTrialReport> = (0..n)
        .map(|k| {
            let v0 = traces.input_only[k];
            let v_empty_raw = characteristic_value(traces.empty[k], v0);
            let v_input = characteristic_value(traces.input_only[k], v0);
            let v_trajectory = characteristic_value(traces.trajectory_only[k], v0);
            let v_grand = characteristic_value(traces.grand[k], v0);
            let tol = slack(v_grand);
            GameTrialReport {
                trial: k,
                baseline_v0: v0,
                v_empty_raw,
                v_empty: 0.0,
                v_input,
                v_trajectory,
                v_grand,
                superadditive: v_input + v_trajectory <= v_grand + tol,
                internally_stable: v_grand >= v_input.max(v_trajectory) - tol,
            }
        })
        .collect();

    let frac = |f: fn(&GameTrialReport) -> bool| {
        if n == 0 {
            1.0
        } else {
            reports.iter().filter(|r| f(r)).count() as f64 / n as f64
        }
    };
    let summary = GameSummary {
        trials: n,
        superadditive_fraction: frac(|r| r.superadditive),
        internally_stable_fraction: frac(|r| r.internally_stable),
        final_superadditive: reports.last().is_none_or(|r| r.superadditive),
        final_internally_stable: reports.last().is_none_or(|r| r.internally_stable),
        superadditivity_violations: reports
            .iter()
            .filter(|r| !r.superadditive)
            .map(|r| r.trial)
            .collect(),
    };
    Ok(GameAnalysis { reports, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilc::synthesize;
    use crate::lifted::lift;

    #[test]
    fn names_round_trip() {
        for c in Coalition::ALL {
            assert_eq!(c.as_str().parse::<Coalition>().unwrap(), c);
        }
        assert!("both".parse::<Coalition>().is_err());
    }

    #[test]
    fn characteristic_value_edges() {
        assert_eq!(characteristic_value(3.5, 3.5), 0.0);
        assert_eq!(characteristic_value(0.0, 3.5), 3.5);
    }

    #[test]
    fn empty_coalition_ignores_inputs() {
        let g = lift(&[0.0, 1.0, 0.5], 2).unwrap();
        let gr = lift(&[0.0, 0.5, 0.25], 2).unwrap();
        let w = Weights::new(1.0, 0.1, 0.01, 1.0, 0.1);
        let gains = synthesize(&g, &gr, &w).unwrap();
        let yd = Signal::new(vec![0.0, 1.0, 1.0], 1.0);
        let u = Signal::new(vec![5.0, 5.0, 5.0], 1.0);
        let (u1, r1) = coalition_policy(Coalition::Empty, &u, &yd, &gains, &gr, &w).unwrap();
        assert!(u1.is_zero());
        assert_eq!(r1, yd);
    }

    #[test]
    fn input_only_is_trial_invariant_without_input_change_weight() {
        let g = lift(&[0.0, 1.0, 0.5], 2).unwrap();
        let gr = lift(&[0.0, 0.5, 0.25], 2).unwrap();
        let w = Weights::new(1.0, 0.0, 0.01, 1.0, 0.1);
        let gains = synthesize(&g, &gr, &w).unwrap();
        let yd = Signal::new(vec![0.0, 1.0, 1.0], 1.0);
        let mut u = Signal::zeros(3, 1.0);
        let want = &gains.l_u * yd.vector();
        for _ in 0..3 {
            u = coalition_policy(Coalition::InputOnly, &u, &yd, &gains, &gr, &w)
                .unwrap()
                .0;
            assert_eq!(u.vector(), &want);
        }
    }

    #[test]
    fn all_zero_costs() {
        let traces = CostTraces {
            empty: vec![0.0; 4],
            input_only: vec![0.0; 4],
            trajectory_only: vec![0.0; 4],
            grand: vec![0.0; 4],
        };
        let a = analyze_game(&traces).unwrap();
        assert!(a.reports.iter().all(|r| r.superadditive && r.internally_stable));
        assert!(a
            .reports
            .iter()
            .all(|r| r.v_grand == 0.0 && r.v_trajectory == 0.0 && r.v_empty_raw == 0.0));
        assert_eq!(a.summary.superadditive_fraction, 1.0);
    }

    #[test]
    fn flags_follow_costs() {
        let traces = CostTraces {
            empty: vec![10.0, 10.0],
            input_only: vec![5.0, 5.0],
            trajectory_only: vec![4.0, 2.0],
            grand: vec![3.0, 3.0],
        };
        let a = analyze_game(&traces).unwrap();
        assert_eq!(a.reports[0].v_empty_raw, -5.0);
        assert_eq!(a.reports[0].v_trajectory, 1.0);
        assert_eq!(a.reports[0].v_grand, 2.0);
        assert!(a.reports[0].superadditive && a.reports[0].internally_stable);
        assert!(!a.reports[1].superadditive && !a.reports[1].internally_stable);
        assert_eq!(a.summary.superadditivity_violations, vec![1]);
        assert!(!a.summary.final_superadditive);
    }

    #[test]
    fn mismatched_traces() {
        let traces = CostTraces {
            empty: vec![0.0; 2],
            input_only: vec![0.0; 3],
            trajectory_only: vec![0.0; 3],
            grand: vec![0.0; 3],
        };
        assert!(matches!(analyze_game(&traces), Err(IlcError::TraceMismatch(_))));
    }
}
