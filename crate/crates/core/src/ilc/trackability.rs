use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{IlcError, Result};
use crate::lifted::{LiftedOperator, Signal};
use crate::linalg::LuFactor;

/// Outcome of the exact-tracking test `y_d = (I − G_r)⁻¹G·u_d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackabilityReport {
    /// `unique && residual_norm <= tolerance_used`.
    pub trackable: bool,
    #[serde(skip)]
    pub u_d: Signal,
    pub residual_norm: f64,
    pub tolerance_used: f64,
    /// The reduced input-to-output block has full numerical column rank.
    pub unique: bool,
    pub numerical_rank: usize,
    /// Inputs that reach the output inside the horizon (`N + 1 − delay`).
    pub active_inputs: usize,
}

/// `1e-8·(1 + ‖y_d‖)`.
pub fn default_trackability_tolerance(y_d: &Signal) -> f64 {
    1e-8 * (1.0 + y_d.norm())
}

/// Least-squares tracking test on `Ĝ = (I − G_r)⁻¹G`.
///
/// `Ĝ` is lower-triangular Toeplitz with the relative degree `d` of `G`.
/// Its first `d` rows and last `d` columns vanish identically, so the test
/// works on the square block of rows `d..=N` and columns `0..=N−d`.
/// Uniqueness means that block has full numerical rank (singular values
/// above `σ_max·n·ε`); the truncated-SVD least-squares residual is measured
/// over every row, including the `d` rows no input can reach.
pub fn trackability(
    g: &LiftedOperator,
    g_r: &LiftedOperator,
    y_d: &Signal,
    tolerance: f64,
) -> Result<TrackabilityReport> {
    let n = g.dim();
    if g_r.dim() != n {
        return Err(IlcError::DimensionMismatch {
            context: "trackability operators",
            expected: n,
            found: g_r.dim(),
        });
    }
    y_d.check_len(n, "trackability: y_d")?;
    let eye = DMatrix::<f64>::identity(n, n);
    let fac = LuFactor::new(&(&eye - g_r.dense()), "I − G_r")?;
    let g_hat = fac.solve(g.dense());

    let Some(delay) = g.relative_degree() else {
        // no input reaches the output
        return Ok(TrackabilityReport {
            trackable: false,
            u_d: y_d.with_values(DVector::zeros(n)),
            residual_norm: y_d.norm(),
            tolerance_used: tolerance,
            unique: false,
            numerical_rank: 0,
            active_inputs: 0,
        });
    };
    let active = n - delay;
    let block = g_hat.view((delay, 0), (active, active)).into_owned();
    let target = y_d.vector().rows(delay, active).into_owned();

    let svd = block.svd(true, true);
    let sigma_max = svd.singular_values.max();
    let cutoff = sigma_max * active as f64 * f64::EPSILON;
    let rank = svd.singular_values.iter().filter(|s| **s > cutoff).count();
    let x = svd
        .solve(&target, cutoff)
        .map_err(|_| IlcError::Eigen("trackability least squares"))?;

    let mut u_d = DVector::zeros(n);
    u_d.rows_mut(0, active).copy_from(&x);
    let residual_norm = (y_d.vector() - &g_hat * &u_d).norm();
    let unique = rank == active;
    Ok(TrackabilityReport {
        trackable: unique && residual_norm <= tolerance,
        u_d: y_d.with_values(u_d),
        residual_norm,
        tolerance_used: tolerance,
        unique,
        numerical_rank: rank,
        active_inputs: active,
    })
}
