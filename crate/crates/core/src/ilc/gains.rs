use nalgebra::DMatrix;

use crate::error::{IlcError, Result};
use crate::lifted::LiftedOperator;
use crate::linalg::{spectral_norm, symmetric_part, SpdFactor};

use super::Weights;

/// Learning gains of the two-player update
/// `r⁺ = T_r·u + L_r·y_d`, `u⁺ = T_u·u + L_u·r⁺`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSet {
    pub t_u: DMatrix<f64>,
    pub l_u: DMatrix<f64>,
    pub t_r: DMatrix<f64>,
    pub l_r: DMatrix<f64>,
    pub rho: DMatrix<f64>,
    /// Input-to-input trial map `T_u + L_u·T_r`.
    pub xi: DMatrix<f64>,
    /// Largest singular value of `xi`.
    pub convergence_norm: f64,
}

impl GainSet {
    pub fn dim(&self) -> usize {
        self.t_u.nrows()
    }
}

/// Synthesizes the gains from the lifted sensitivities and the weights.
///
/// With `A = GᵀQG + R + S` and `M = I − G_r`:
/// `T_u = A⁻¹R`, `L_u = A⁻¹GᵀQM`,
/// `ρ = Mᵀ[Q⁻¹ + G(R+S)⁻¹Gᵀ]⁻¹M + W + W_r`,
/// `T_r = ρ⁻¹MᵀQG·T_u`, `L_r = ρ⁻¹W`.
pub fn synthesize(g: &LiftedOperator, g_r: &LiftedOperator, weights: &Weights) -> Result<GainSet> {
    weights.validate()?;
    let n = g.dim();
    if g_r.dim() != n {
        return Err(IlcError::DimensionMismatch {
            context: "synthesis operators",
            expected: n,
            found: g_r.dim(),
        });
    }
    let Weights { q, r, s, w, wr } = *weights;
    let eye = DMatrix::<f64>::identity(n, n);
    let gd = g.dense();
    let m = &eye - g_r.dense();

    let gt_q = gd.transpose() * q;
    let a = symmetric_part(&(&gt_q * gd + &eye * (r + s)));
    let a_fac = SpdFactor::new(&a, "GᵀQG + R + S (needs q > 0 and r + s > 0)")?;
    let t_u = a_fac.solve(&(&eye * r));
    let l_u = a_fac.solve(&(&gt_q * &m));

    let inner = symmetric_part(&(&eye * (1.0 / q) + gd * gd.transpose() * (1.0 / (r + s))));
    let inner_fac = SpdFactor::new(&inner, "Q⁻¹ + G(R+S)⁻¹Gᵀ")?;
    let rho = symmetric_part(&(m.transpose() * inner_fac.solve(&m) + &eye * (w + wr)));
    let rho_fac = SpdFactor::new(&rho, "ρ (needs w > 0)")?;

    let t_r = rho_fac.solve(&(m.transpose() * q * gd * &t_u));
    let l_r = rho_fac.solve(&(&eye * w));
    let xi = &t_u + &l_u * &t_r;
    let convergence_norm = spectral_norm(&xi);

    Ok(GainSet {
        t_u,
        l_u,
        t_r,
        l_r,
        rho,
        xi,
        convergence_norm,
    })
}
