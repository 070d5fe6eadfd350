//! Dense linear-algebra helpers shared by gain synthesis and analysis.
//!
//! Every solve reports a reciprocal condition estimate (Hager's 1-norm
//! estimator). Systems whose estimate drops below [`RCOND_MIN`] are
//! rejected instead of returning garbage.

use nalgebra::{DMatrix, DVector};

use crate::error::{IlcError, Result};

/// Reciprocal condition number below which a matrix counts as singular.
pub const RCOND_MIN: f64 = 1e-14;

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Hager/Higham estimate of ‖A⁻¹‖₁ given solvers for A and Aᵀ.
fn inverse_one_norm<F, G>(n: usize, solve: F, solve_t: G) -> f64
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
    G: Fn(&DVector<f64>) -> DVector<f64>,
{
    if n == 0 {
        return 0.0;
    }
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut estimate = 0.0;
    let mut last_j = usize::MAX;
    for _ in 0..5 {
        let y = solve(&x);
        estimate = y.iter().map(|v| v.abs()).sum::<f64>();
        if !estimate.is_finite() {
            return f64::INFINITY;
        }
        let sign = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let z = solve_t(&sign);
        let (j, zmax) = z
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| {
                if v.abs() > acc.1 {
                    (i, v.abs())
                } else {
                    acc
                }
            });
        if zmax <= z.dot(&x) || j == last_j {
            break;
        }
        x.fill(0.0);
        x[j] = 1.0;
        last_j = j;
    }
    estimate
}

/// Factorization of a symmetric positive-definite matrix.
pub struct SpdFactor {
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    pub rcond: f64,
}

impl SpdFactor {
    pub fn new(a: &DMatrix<f64>, what: &'static str) -> Result<Self> {
        let anorm = one_norm(a);
        let chol = a
            .clone()
            .cholesky()
            .ok_or(IlcError::Singular { what, rcond: 0.0 })?;
        let inv_norm = inverse_one_norm(a.nrows(), |v| chol.solve(v), |v| chol.solve(v));
        let rcond = if anorm == 0.0 { 0.0 } else { 1.0 / (anorm * inv_norm) };
        if !(rcond >= RCOND_MIN) {
            return Err(IlcError::Singular { what, rcond });
        }
        Ok(Self { chol, rcond })
    }

    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(b)
    }

    pub fn solve_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }
}

/// LU factorization with partial pivoting of a general square matrix.
pub struct LuFactor {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    pub rcond: f64,
}

impl LuFactor {
    pub fn new(a: &DMatrix<f64>, what: &'static str) -> Result<Self> {
        let anorm = one_norm(a);
        let lu = a.clone().lu();
        let u = lu.u();
        if u.diagonal().iter().any(|d| *d == 0.0 || !d.is_finite()) {
            return Err(IlcError::Singular { what, rcond: 0.0 });
        }
        // nalgebra has no transposed LU solve
        let lu_t = a.transpose().lu();
        let or_inf = |x: Option<DVector<f64>>, n: usize| {
            x.unwrap_or_else(|| DVector::from_element(n, f64::INFINITY))
        };
        let inv_norm = inverse_one_norm(
            a.nrows(),
            |v| or_inf(lu.solve(v), v.len()),
            |v| or_inf(lu_t.solve(v), v.len()),
        );
        let rcond = if anorm == 0.0 { 0.0 } else { 1.0 / (anorm * inv_norm) };
        if !(rcond >= RCOND_MIN) {
            return Err(IlcError::Singular { what, rcond });
        }
        Ok(Self { lu, rcond })
    }

    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.lu.solve(b).expect("LU factor checked nonsingular")
    }

    pub fn solve_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        self.lu.solve(b).expect("LU factor checked nonsingular")
    }
}

pub fn symmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Largest eigenvalue modulus of a general square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    if m.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    // symmetric up to rounding: eigenvalues move by at most ‖skew‖₂
    let skew = max_abs(&(m - m.transpose()));
    if skew <= 1e-12 * max_abs(m) {
        let eig = symmetric_part(m).symmetric_eigenvalues();
        return Ok(eig.iter().fold(0.0, |acc, v| acc.max(v.abs())));
    }
    // clustered spectra can stall deflation at machine precision
    for eps in [f64::EPSILON, 1e-13, 1e-11] {
        if let Some(schur) = nalgebra::Schur::try_new(m.clone(), eps, 20_000) {
            return Ok(schur
                .complex_eigenvalues()
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max));
        }
    }
    Err(IlcError::Eigen("spectral radius"))
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = symmetric_part(m);
    sym.symmetric_eigenvalues().min()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rcond_of_diagonal_matches_ratio() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 10.0, 100.0]));
        let f = SpdFactor::new(&a, "diag").unwrap();
        assert_relative_eq!(f.rcond, 0.01, max_relative = 1e-12);
        let lu = LuFactor::new(&a, "diag").unwrap();
        assert_relative_eq!(lu.rcond, 0.01, max_relative = 1e-12);
    }

    #[test]
    fn singular_matrices_are_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(
            LuFactor::new(&a, "rank one"),
            Err(IlcError::Singular { .. })
        ));
        assert!(matches!(
            SpdFactor::new(&a, "rank one"),
            Err(IlcError::Singular { .. })
        ));
        let near = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-16]);
        assert!(LuFactor::new(&near, "near").is_err());
    }

    #[test]
    fn lu_solves_nonsymmetric_system() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0]);
        let x = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let b = &a * &x;
        let f = LuFactor::new(&a, "test").unwrap();
        let got = f.solve_vec(&b);
        assert!((got - x).amax() < 1e-14);
    }

    #[test]
    fn spectral_quantities_of_scaled_identity() {
        let m = DMatrix::<f64>::identity(4, 4) * 0.5;
        assert_relative_eq!(spectral_norm(&m), 0.5, epsilon = 1e-14);
        assert_relative_eq!(spectral_radius(&m).unwrap(), 0.5, epsilon = 1e-14);
        assert_relative_eq!(min_symmetric_eigenvalue(&m), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn spectral_radius_of_rotation_block() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -0.8, 0.8, 0.0]);
        assert_relative_eq!(spectral_radius(&m).unwrap(), 0.8, epsilon = 1e-12);
    }
}
