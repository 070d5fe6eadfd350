use serde::Serialize;

use crate::error::Result;
use crate::lifted::Signal;

use super::Weights;

/// The five weighted terms of the trial cost and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CostBreakdown {
    pub total: f64,
    pub q_item: f64,
    pub r_item: f64,
    pub s_item: f64,
    pub w_item: f64,
    pub wr_item: f64,
}

/// `q‖r−y‖² + r‖u−u_prev‖² + s‖u‖² + w‖y_d−r‖² + wr‖r‖²`.
pub fn cost(
    u: &Signal,
    u_prev: &Signal,
    r: &Signal,
    y: &Signal,
    y_d: &Signal,
    weights: &Weights,
) -> Result<CostBreakdown> {
    let n = y_d.len();
    u.check_len(n, "cost: u")?;
    u_prev.check_len(n, "cost: previous u")?;
    r.check_len(n, "cost: r")?;
    y.check_len(n, "cost: y")?;

    let q_item = weights.q * (r - y).norm_sq();
    let r_item = weights.r * (u - u_prev).norm_sq();
    let s_item = weights.s * u.norm_sq();
    let w_item = weights.w * (y_d - r).norm_sq();
    let wr_item = weights.wr * r.norm_sq();
    Ok(CostBreakdown {
        total: q_item + r_item + s_item + w_item + wr_item,
        q_item,
        r_item,
        s_item,
        w_item,
        wr_item,
    })
}
