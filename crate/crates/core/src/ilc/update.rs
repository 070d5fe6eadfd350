use nalgebra::DMatrix;

use crate::error::Result;
use crate::lifted::{LiftedOperator, Signal};
use crate::linalg::{symmetric_part, SpdFactor};

use super::{GainSet, Weights};

/// Joint update of trajectory and input from the previous trial's input.
pub fn update_end_to_end(u_k: &Signal, y_d: &Signal, gains: &GainSet) -> Result<(Signal, Signal)> {
    let n = gains.dim();
    u_k.check_len(n, "end-to-end update: u")?;
    y_d.check_len(n, "end-to-end update: y_d")?;
    let r_next = &gains.t_r * u_k.vector() + &gains.l_r * y_d.vector();
    let u_next = &gains.t_u * u_k.vector() + &gains.l_u * &r_next;
    Ok((y_d.with_values(r_next), u_k.with_values(u_next)))
}

/// Single-player norm-optimal update with the trajectory pinned to `y_d`.
pub fn update_noilc(u_k: &Signal, y_d: &Signal, gains: &GainSet) -> Result<Signal> {
    let n = gains.dim();
    u_k.check_len(n, "NOILC update: u")?;
    y_d.check_len(n, "NOILC update: y_d")?;
    let u_next = &gains.t_u * u_k.vector() + &gains.l_u * y_d.vector();
    Ok(u_k.with_values(u_next))
}

/// Trajectory-only optimum with no feedforward input:
/// `[(I−G_r)ᵀQ(I−G_r) + W + W_r]·r = W·y_d`.
pub fn update_serial_only(y_d: &Signal, g_r: &LiftedOperator, weights: &Weights) -> Result<Signal> {
    weights.validate()?;
    let n = g_r.dim();
    y_d.check_len(n, "serial update: y_d")?;
    let eye = DMatrix::<f64>::identity(n, n);
    let m = &eye - g_r.dense();
    let normal = symmetric_part(&(m.transpose() * &m * weights.q + &eye * (weights.w + weights.wr)));
    let fac = SpdFactor::new(&normal, "serial normal matrix")?;
    Ok(y_d.with_values(fac.solve_vec(&(y_d.vector() * weights.w))))
}

/// Norms of the two first-order optimality residuals after one joint update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityResiduals {
    /// Gradient with respect to the trajectory.
    pub trajectory: f64,
    /// Gradient with respect to the input.
    pub input: f64,
}

pub fn stationarity_residuals(
    gains: &GainSet,
    g: &LiftedOperator,
    g_r: &LiftedOperator,
    weights: &Weights,
    u_k: &Signal,
    y_d: &Signal,
) -> Result<StationarityResiduals> {
    let (r_next, u_next) = update_end_to_end(u_k, y_d, gains)?;
    let n = gains.dim();
    let Weights { q, r, s, w, wr } = *weights;
    let eye = DMatrix::<f64>::identity(n, n);
    let gd = g.dense();
    let m = &eye - g_r.dense();
    let (rv, uv) = (r_next.vector(), u_next.vector());

    let traj = (m.transpose() * &m * q + &eye * (w + wr)) * rv
        - m.transpose() * gd * uv * q
        - y_d.vector() * w;
    let input = (gd.transpose() * gd * q + &eye * (r + s)) * uv
        - u_k.vector() * r
        - gd.transpose() * &m * rv * q;
    Ok(StationarityResiduals {
        trajectory: traj.norm(),
        input: input.norm(),
    })
}
