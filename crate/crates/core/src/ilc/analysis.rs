use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{IlcError, Result};
use crate::lifted::{LiftedOperator, Signal};
use crate::linalg::{min_symmetric_eigenvalue, spectral_radius, LuFactor};

use super::GainSet;

/// Tolerance on the smallest eigenvalue in the stable-set condition.
pub const THEOREM1_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceMargin {
    pub norm: f64,
    pub spectral_radius: f64,
    pub converges: bool,
}

/// `‖ξ‖₂` (asserted) and `ρ(ξ)` (reported).
pub fn convergence_margin(gains: &GainSet) -> Result<ConvergenceMargin> {
    let norm = gains.convergence_norm;
    Ok(ConvergenceMargin {
        norm,
        spectral_radius: spectral_radius(&gains.xi)?,
        converges: norm < 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem1Margin {
    pub min_eig_sym: f64,
    pub satisfied: bool,
}

/// Smallest eigenvalue of `sym(2·L_u·T_r + T_u − I)`; the grand coalition
/// is a stable set when it is nonnegative.
pub fn theorem1_margin(gains: &GainSet) -> Theorem1Margin {
    let n = gains.dim();
    let m = &gains.l_u * &gains.t_r * 2.0 + &gains.t_u - DMatrix::<f64>::identity(n, n);
    let min_eig_sym = if n == 0 { 0.0 } else { min_symmetric_eigenvalue(&m) };
    Theorem1Margin {
        min_eig_sym,
        satisfied: min_eig_sym >= -THEOREM1_SLACK,
    }
}

fn i_minus_xi(gains: &GainSet) -> Result<LuFactor> {
    let n = gains.dim();
    LuFactor::new(&(DMatrix::<f64>::identity(n, n) - &gains.xi), "I − ξ")
}

fn mat_pow(m: &DMatrix<f64>, mut k: u32) -> DMatrix<f64> {
    let n = m.nrows();
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// `u_k = ξᵏ·u₀ + (I−ξ)⁻¹(I−ξᵏ)·L_u·L_r·y_d`.
pub fn closed_form_input(k: u32, u0: &Signal, gains: &GainSet, y_d: &Signal) -> Result<Signal> {
    let n = gains.dim();
    u0.check_len(n, "closed form: u0")?;
    y_d.check_len(n, "closed form: y_d")?;
    let fac = i_minus_xi(gains)?;
    let xi_k = mat_pow(&gains.xi, k);
    let drive: DVector<f64> = &gains.l_u * (&gains.l_r * y_d.vector());
    let forced = fac.solve_vec(&(&drive - &xi_k * &drive));
    Ok(u0.with_values(&xi_k * u0.vector() + forced))
}

/// Limits of the input and trajectory iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub u: Signal,
    pub r: Signal,
}

/// `u_∞ = (I−ξ)⁻¹L_u·L_r·y_d`, `r_∞ = T_r·u_∞ + L_r·y_d`.
pub fn steady_state(gains: &GainSet, y_d: &Signal) -> Result<SteadyState> {
    if !(gains.convergence_norm < 1.0) {
        return Err(IlcError::NotConvergent {
            norm: gains.convergence_norm,
        });
    }
    y_d.check_len(gains.dim(), "steady state: y_d")?;
    let fac = i_minus_xi(gains)?;
    let u = fac.solve_vec(&(&gains.l_u * (&gains.l_r * y_d.vector())));
    let r = &gains.t_r * &u + &gains.l_r * y_d.vector();
    Ok(SteadyState {
        u: y_d.with_values(u),
        r: y_d.with_values(r),
    })
}

/// `ê_∞ = y_d − G·u_∞ − G_r·r_∞`.
pub fn asymptotic_error(
    gains: &GainSet,
    g: &LiftedOperator,
    g_r: &LiftedOperator,
    y_d: &Signal,
) -> Result<Signal> {
    let ss = steady_state(gains, y_d)?;
    let y = g.dense() * ss.u.vector() + g_r.dense() * ss.r.vector();
    Ok(y_d.with_values(y_d.vector() - y))
}
