//! SISO transfer functions, state-space realizations, discretization and the
//! feedback interconnection that yields the two closed-loop sensitivities.

use nalgebra::{Complex, DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

use crate::error::{IlcError, Result};
use crate::linalg::{spectral_radius, LuFactor};

/// Margin kept between the closed-loop spectral radius and the unit circle.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// Rational transfer function in `s`, coefficients in descending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousTransferFunction {
    numerator: Vec<f64>,
    denominator: Vec<f64>,
}

impl ContinuousTransferFunction {
    pub fn new(numerator: Vec<f64>, denominator: Vec<f64>) -> Result<Self> {
        if numerator.is_empty() || denominator.is_empty() {
            return Err(IlcError::EmptyPolynomial);
        }
        if denominator[0] == 0.0 {
            return Err(IlcError::ZeroLeadingCoefficient);
        }
        // leading zeros carry no degree
        let first = numerator.iter().position(|c| *c != 0.0);
        let numerator = match first {
            Some(i) => numerator[i..].to_vec(),
            None => vec![0.0],
        };
        let tf = Self {
            numerator,
            denominator,
        };
        if tf.numerator_degree() > tf.denominator_degree() {
            return Err(IlcError::NotProper {
                numerator: tf.numerator_degree(),
                denominator: tf.denominator_degree(),
            });
        }
        Ok(tf)
    }

    pub fn static_gain(k: f64) -> Self {
        Self {
            numerator: vec![k],
            denominator: vec![1.0],
        }
    }

    pub fn numerator(&self) -> &[f64] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[f64] {
        &self.denominator
    }

    pub fn numerator_degree(&self) -> usize {
        self.numerator.len() - 1
    }

    pub fn denominator_degree(&self) -> usize {
        self.denominator.len() - 1
    }

    /// Direct rational evaluation at complex frequency `s`.
    pub fn eval(&self, s: Complex<f64>) -> Complex<f64> {
        horner(&self.numerator, s) / horner(&self.denominator, s)
    }
}

fn horner(coeffs: &[f64], x: Complex<f64>) -> Complex<f64> {
    coeffs
        .iter()
        .fold(Complex::new(0.0, 0.0), |acc, c| acc * x + Complex::new(*c, 0.0))
}

/// Continuous-time SISO realization `ẋ = Ax + Bu`, `y = Cx + Du`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousStateSpace {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: RowDVector<f64>,
    pub d: f64,
}

impl ContinuousStateSpace {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// `C (sI − A)⁻¹ B + D`.
    pub fn frequency_response(&self, s: Complex<f64>) -> Complex<f64> {
        resolvent_gain(&self.a, &self.b, &self.c, self.d, s)
    }
}

fn resolvent_gain(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    c: &RowDVector<f64>,
    d: f64,
    x: Complex<f64>,
) -> Complex<f64> {
    let n = a.nrows();
    if n == 0 {
        return Complex::new(d, 0.0);
    }
    let ac = a.map(|v| Complex::new(v, 0.0));
    let m = DMatrix::<Complex<f64>>::identity(n, n) * x - ac;
    let bc = b.map(|v| Complex::new(v, 0.0));
    let sol = m.lu().solve(&bc).unwrap_or_else(|| {
        DVector::from_element(n, Complex::new(f64::INFINITY, 0.0))
    });
    let cc = c.map(|v| Complex::new(v, 0.0));
    (cc * sol)[0] + Complex::new(d, 0.0)
}

/// Discrete-time SISO realization with zero initial state by convention.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteStateSpace {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: RowDVector<f64>,
    pub d: f64,
    pub sample_time: f64,
}

impl DiscreteStateSpace {
    pub fn new(
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: RowDVector<f64>,
        d: f64,
        sample_time: f64,
    ) -> Result<Self> {
        check_sample_time(sample_time)?;
        let n = a.nrows();
        if a.ncols() != n {
            return Err(IlcError::DimensionMismatch {
                context: "state matrix columns",
                expected: n,
                found: a.ncols(),
            });
        }
        if b.len() != n {
            return Err(IlcError::DimensionMismatch {
                context: "input matrix rows",
                expected: n,
                found: b.len(),
            });
        }
        if c.len() != n {
            return Err(IlcError::DimensionMismatch {
                context: "output matrix columns",
                expected: n,
                found: c.len(),
            });
        }
        Ok(Self {
            a,
            b,
            c,
            d,
            sample_time,
        })
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// `C (zI − A)⁻¹ B + D`.
    pub fn frequency_response(&self, z: Complex<f64>) -> Complex<f64> {
        resolvent_gain(&self.a, &self.b, &self.c, self.d, z)
    }

    /// Runs the recursion from a zero state.
    pub fn simulate(&self, input: &[f64]) -> Vec<f64> {
        let mut state = DVector::zeros(self.order());
        input
            .iter()
            .map(|&u| self.step(&mut state, u))
            .collect()
    }

    /// Emits `y = Cx + Du`, then advances `x ← Ax + Bu`.
    pub fn step(&self, state: &mut DVector<f64>, input: f64) -> f64 {
        let y = self.c.dot(&state.transpose()) + self.d * input;
        if self.order() > 0 {
            *state = &self.a * &*state + &self.b * input;
        }
        y
    }
}

fn check_sample_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(IlcError::InvalidSampleTime(t))
    }
}

/// Controllable canonical form of a proper transfer function.
pub fn tf_to_state_space(tf: &ContinuousTransferFunction) -> ContinuousStateSpace {
    let n = tf.denominator_degree();
    let lead = tf.denominator[0];
    let den: Vec<f64> = tf.denominator.iter().map(|c| c / lead).collect();
    // numerator padded to n+1 coefficients, normalized by the same leading term
    let mut num = vec![0.0; n + 1 - tf.numerator.len()];
    num.extend(tf.numerator.iter().map(|c| c / lead));

    let d = num[0];
    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    let mut c = RowDVector::zeros(n);
    if n > 0 {
        for j in 0..n {
            a[(0, j)] = -den[j + 1];
            c[j] = num[j + 1] - d * den[j + 1];
        }
        for i in 1..n {
            a[(i, i - 1)] = 1.0;
        }
        b[0] = 1.0;
    }
    ContinuousStateSpace { a, b, c, d }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscretizationMethod {
    Zoh,
    Tustin,
}

pub fn discretize(
    ct: &ContinuousStateSpace,
    sample_time: f64,
    method: DiscretizationMethod,
) -> Result<DiscreteStateSpace> {
    match method {
        DiscretizationMethod::Zoh => discretize_zoh(ct, sample_time),
        DiscretizationMethod::Tustin => discretize_tustin(ct, sample_time),
    }
}

/// Exact zero-order-hold equivalent through the augmented exponential
/// `exp([[A, B], [0, 0]]·T) = [[A_d, B_d], [0, 1]]`.
pub fn discretize_zoh(ct: &ContinuousStateSpace, sample_time: f64) -> Result<DiscreteStateSpace> {
    check_sample_time(sample_time)?;
    let n = ct.order();
    let mut aug = DMatrix::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(&ct.a);
    aug.view_mut((0, n), (n, 1)).copy_from(&ct.b);
    aug *= sample_time;
    let norm = aug
        .column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if !norm.is_finite() {
        return Err(IlcError::MatrixExponential { norm });
    }
    let e = aug.exp();
    if e.iter().any(|v| !v.is_finite()) {
        return Err(IlcError::MatrixExponential { norm });
    }
    let a = e.view((0, 0), (n, n)).into_owned();
    let b = e.view((0, n), (n, 1)).column(0).into_owned();
    DiscreteStateSpace::new(a, b, ct.c.clone(), ct.d, sample_time)
}

/// Bilinear (Tustin) transform, `s = (2/T)(z − 1)/(z + 1)`.
pub fn discretize_tustin(
    ct: &ContinuousStateSpace,
    sample_time: f64,
) -> Result<DiscreteStateSpace> {
    check_sample_time(sample_time)?;
    let n = ct.order();
    let half = 0.5 * sample_time;
    let eye = DMatrix::<f64>::identity(n, n);
    if n == 0 {
        return DiscreteStateSpace::new(eye, DVector::zeros(0), RowDVector::zeros(0), ct.d, sample_time);
    }
    let lhs = &eye - &ct.a * half;
    let f = LuFactor::new(&lhs, "I − A·T/2 (Tustin)")?;
    let a = f.solve(&(&eye + &ct.a * half));
    let b = f.solve_vec(&(&ct.b * sample_time));
    let lhs_t = LuFactor::new(&lhs.transpose(), "I − A·T/2 (Tustin)")?;
    let c = lhs_t.solve_vec(&ct.c.transpose()).transpose();
    let d = ct.d + 0.5 * (&ct.c * &b)[0];
    DiscreteStateSpace::new(a, b, c, d, sample_time)
}

/// Sampled feedback loop: `g_cs` maps the trajectory `r` to `y`, `g_ps` maps
/// the feedforward input `u` to `y`. Both share one state vector
/// `[x_plant; x_controller]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopModel {
    pub g_cs: DiscreteStateSpace,
    pub g_ps: DiscreteStateSpace,
    pub sample_time: f64,
    plant: DiscreteStateSpace,
    controller: DiscreteStateSpace,
    spectral_radius: f64,
}

impl ClosedLoopModel {
    pub fn plant(&self) -> &DiscreteStateSpace {
        &self.plant
    }

    pub fn controller(&self) -> &DiscreteStateSpace {
        &self.controller
    }

    pub fn spectral_radius(&self) -> f64 {
        self.spectral_radius
    }
}

pub fn build_closed_loop(
    plant: &DiscreteStateSpace,
    controller: &DiscreteStateSpace,
) -> Result<ClosedLoopModel> {
    if plant.sample_time != controller.sample_time {
        return Err(IlcError::SampleTimeMismatch {
            left: plant.sample_time,
            right: controller.sample_time,
        });
    }
    let loop_gain = 1.0 + plant.d * controller.d;
    if loop_gain.abs() < 1e-12 {
        return Err(IlcError::IllPosedLoop { value: loop_gain });
    }
    let kappa = 1.0 / loop_gain;
    let np = plant.order();
    let nc = controller.order();
    let n = np + nc;

    // y = cy·x + dyr·r + dyu·u after solving the algebraic loop
    let mut cy = RowDVector::zeros(n);
    cy.columns_mut(0, np).copy_from(&(&plant.c * kappa));
    cy.columns_mut(np, nc)
        .copy_from(&(&controller.c * (kappa * plant.d)));
    let dyr = kappa * plant.d * controller.d;
    let dyu = kappa * plant.d;

    // plant input w = [0, C_c]·x + D_c·e + u,  e = r − y
    let mut w_x = RowDVector::zeros(n);
    w_x.columns_mut(np, nc).copy_from(&controller.c);
    w_x -= &cy * controller.d;

    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, 0), (np, np)).copy_from(&plant.a);
    a.view_mut((np, np), (nc, nc)).copy_from(&controller.a);
    {
        let mut top = a.rows_mut(0, np);
        top += &plant.b * &w_x;
    }
    {
        let mut bottom = a.rows_mut(np, nc);
        bottom -= &controller.b * &cy;
    }

    let mut b_r = DVector::zeros(n);
    b_r.rows_mut(0, np)
        .copy_from(&(&plant.b * (controller.d * (1.0 - dyr))));
    b_r.rows_mut(np, nc)
        .copy_from(&(&controller.b * (1.0 - dyr)));

    let mut b_u = DVector::zeros(n);
    b_u.rows_mut(0, np)
        .copy_from(&(&plant.b * (1.0 - controller.d * dyu)));
    b_u.rows_mut(np, nc).copy_from(&(&controller.b * (-dyu)));

    let radius = spectral_radius(&a)?;
    if !(radius < 1.0 - STABILITY_MARGIN) {
        return Err(IlcError::UnstableLoop {
            spectral_radius: radius,
        });
    }
    let t = plant.sample_time;
    Ok(ClosedLoopModel {
        g_cs: DiscreteStateSpace::new(a.clone(), b_r, cy.clone(), dyr, t)?,
        g_ps: DiscreteStateSpace::new(a, b_u, cy, dyu, t)?,
        sample_time: t,
        plant: plant.clone(),
        controller: controller.clone(),
        spectral_radius: radius,
    })
}

/// Impulse response `[D, CB, CAB, CA²B, …]` truncated to `count` samples.
pub fn markov_parameters(ss: &DiscreteStateSpace, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(ss.d);
    let mut x = ss.b.clone();
    for _ in 1..count {
        out.push(ss.c.dot(&x.transpose()));
        if ss.order() > 0 {
            x = &ss.a * x;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tf(num: &[f64], den: &[f64]) -> ContinuousTransferFunction {
        ContinuousTransferFunction::new(num.to_vec(), den.to_vec()).unwrap()
    }

    fn printer_plant() -> ContinuousTransferFunction {
        tf(&[0.12, 235.0], &[9e-5, 1.092e-2, 21.385, 0.0, 0.0])
    }

    #[test]
    fn integrator_canonical_form() {
        let ss = tf_to_state_space(&tf(&[1.0], &[1.0, 0.0]));
        assert_eq!(ss.a, DMatrix::from_element(1, 1, 0.0));
        assert_eq!(ss.b, DVector::from_element(1, 1.0));
        assert_eq!(ss.c, RowDVector::from_element(1, 1.0));
        assert_eq!(ss.d, 0.0);
    }

    #[test]
    fn pole_zero_cancellation_has_unit_response() {
        let ss = tf_to_state_space(&tf(&[1.0, 2.0], &[1.0, 2.0]));
        assert_eq!(ss.d, 1.0);
        for w in [0.0, 0.1, 1.0, 10.0, 1e3] {
            let g = ss.frequency_response(Complex::new(0.0, w));
            assert!((g - Complex::new(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn printer_plant_realization_matches_rational_evaluation() {
        let h = printer_plant();
        let ss = tf_to_state_space(&h);
        assert_eq!(ss.order(), 4);
        assert_eq!(ss.d, 0.0);
        let s = Complex::new(0.0, 10.0);
        let direct = h.eval(s);
        let realized = ss.frequency_response(s);
        assert!((direct - realized).norm() / direct.norm() < 1e-9);
    }

    #[test]
    fn improper_and_malformed_functions_are_rejected() {
        assert_eq!(
            ContinuousTransferFunction::new(vec![1.0, 0.0, 0.0], vec![1.0, 1.0]),
            Err(IlcError::NotProper {
                numerator: 2,
                denominator: 1
            })
        );
        assert_eq!(
            ContinuousTransferFunction::new(vec![1.0], vec![0.0, 1.0]),
            Err(IlcError::ZeroLeadingCoefficient)
        );
        // leading numerator zeros do not count toward the degree
        assert!(ContinuousTransferFunction::new(vec![0.0, 0.0, 1.0], vec![1.0, 1.0]).is_ok());
    }

    #[test]
    fn zoh_of_integrator() {
        let ss = tf_to_state_space(&tf(&[1.0], &[1.0, 0.0]));
        let d = discretize_zoh(&ss, 0.1).unwrap();
        assert_relative_eq!(d.a[(0, 0)], 1.0, epsilon = 1e-15);
        assert_relative_eq!(d.b[0], 0.1, epsilon = 1e-15);
        assert_eq!(d.c[0], 1.0);
        assert_eq!(d.d, 0.0);
    }

    #[test]
    fn zoh_of_double_integrator_markov() {
        let ss = tf_to_state_space(&tf(&[1.0], &[1.0, 0.0, 0.0]));
        let d = discretize_zoh(&ss, 1.0).unwrap();
        let h = markov_parameters(&d, 6);
        assert_eq!(h[0], 0.0);
        for (k, hk) in h.iter().enumerate().skip(1) {
            assert_relative_eq!(*hk, (2 * k - 1) as f64 / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zoh_rejects_bad_sample_time() {
        let ss = tf_to_state_space(&tf(&[1.0], &[1.0, 0.0]));
        assert!(matches!(
            discretize_zoh(&ss, 0.0),
            Err(IlcError::InvalidSampleTime(_))
        ));
        assert!(discretize_tustin(&ss, -1.0).is_err());
    }

    #[test]
    fn zoh_scalar_formula() {
        for (a, b, t) in [(-2.0, 1.5, 0.1), (0.7, -0.3, 0.05), (-40.0, 2.0, 1e-3)] {
            let ss = ContinuousStateSpace {
                a: DMatrix::from_element(1, 1, a),
                b: DVector::from_element(1, b),
                c: RowDVector::from_element(1, 1.0),
                d: 0.0,
            };
            let d = discretize_zoh(&ss, t).unwrap();
            let ea: f64 = (a * t).exp();
            assert!((d.a[(0, 0)] - ea).abs() < 1e-12);
            assert!((d.b[0] - (ea - 1.0) * b / a).abs() < 1e-12);
        }
    }

    #[test]
    fn tustin_matches_bilinear_substitution() {
        let c = tf(&[2.527e5, 1.011e7], &[1.0, 351.9, 6.317e4]);
        let t = 1e-3;
        let d = discretize_tustin(&tf_to_state_space(&c), t).unwrap();
        for w in [1.0, 30.0, 300.0, 1500.0] {
            let z = Complex::new(0.0, w * t).exp();
            let s = (z - 1.0) / (z + 1.0) * (2.0 / t);
            let want = c.eval(s);
            let got = d.frequency_response(z);
            assert!((want - got).norm() / want.norm() < 1e-9, "w = {w}");
        }
    }

    #[test]
    fn unity_static_loop() {
        let one = DiscreteStateSpace::new(
            DMatrix::zeros(0, 0),
            DVector::zeros(0),
            RowDVector::zeros(0),
            1.0,
            0.1,
        )
        .unwrap();
        let cl = build_closed_loop(&one, &one).unwrap();
        assert_eq!(markov_parameters(&cl.g_cs, 3), vec![0.5, 0.0, 0.0]);
        assert_eq!(markov_parameters(&cl.g_ps, 3), vec![0.5, 0.0, 0.0]);
    }

    #[test]
    fn open_loop_when_controller_is_zero() {
        let h = discretize_zoh(&tf_to_state_space(&tf(&[1.0], &[1.0, 3.0])), 0.1).unwrap();
        let zero = DiscreteStateSpace::new(
            DMatrix::zeros(0, 0),
            DVector::zeros(0),
            RowDVector::zeros(0),
            0.0,
            0.1,
        )
        .unwrap();
        let cl = build_closed_loop(&h, &zero).unwrap();
        assert!(markov_parameters(&cl.g_cs, 20).iter().all(|v| *v == 0.0));
        let want = markov_parameters(&h, 20);
        let got = markov_parameters(&cl.g_ps, 20);
        for (a, b) in want.iter().zip(&got) {
            assert_relative_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn ill_posed_and_unstable_loops() {
        let gain = |k: f64| {
            DiscreteStateSpace::new(
                DMatrix::zeros(0, 0),
                DVector::zeros(0),
                RowDVector::zeros(0),
                k,
                0.1,
            )
            .unwrap()
        };
        assert!(matches!(
            build_closed_loop(&gain(1.0), &gain(-1.0)),
            Err(IlcError::IllPosedLoop { .. })
        ));
        // unstable open loop, no feedback
        let unstable = discretize_zoh(&tf_to_state_space(&tf(&[1.0], &[1.0, -1.0])), 0.1).unwrap();
        match build_closed_loop(&unstable, &gain(0.0)) {
            Err(IlcError::UnstableLoop { spectral_radius }) => {
                assert_relative_eq!(spectral_radius, 0.1f64.exp(), epsilon = 1e-12)
            }
            other => panic!("expected instability, got {other:?}"),
        }
        let other_rate = DiscreteStateSpace { sample_time: 0.2, ..gain(1.0) };
        assert!(matches!(
            build_closed_loop(&gain(1.0), &other_rate),
            Err(IlcError::SampleTimeMismatch { .. })
        ));
    }

    #[test]
    fn markov_examples() {
        let ss = DiscreteStateSpace::new(
            DMatrix::from_element(1, 1, 0.5),
            DVector::from_element(1, 1.0),
            RowDVector::from_element(1, 1.0),
            0.0,
            1.0,
        )
        .unwrap();
        assert_eq!(markov_parameters(&ss, 4), vec![0.0, 1.0, 0.5, 0.25]);

        let fir = DiscreteStateSpace::new(
            DMatrix::from_element(1, 1, 0.0),
            DVector::from_element(1, 2.0),
            RowDVector::from_element(1, 1.5),
            3.0,
            1.0,
        )
        .unwrap();
        assert_eq!(markov_parameters(&fir, 5), vec![3.0, 3.0, 0.0, 0.0, 0.0]);
        assert!(markov_parameters(&fir, 0).is_empty());
    }

    #[test]
    fn dimension_checks() {
        let bad = DiscreteStateSpace::new(
            DMatrix::zeros(2, 2),
            DVector::zeros(1),
            RowDVector::zeros(2),
            0.0,
            1.0,
        );
        assert!(matches!(bad, Err(IlcError::DimensionMismatch { .. })));
    }
}
