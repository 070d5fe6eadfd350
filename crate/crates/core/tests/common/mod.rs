#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use e2e_ilc::ilc::Weights;
use e2e_ilc::lifted::{lift, LiftedOperator, Signal};
use e2e_ilc::runner::{LiftedModel, LiftedRun, Tolerances};
use e2e_ilc::game::Coalition;

pub const FIXTURE_G: [f64; 3] = [0.0, 1.0, 0.5];
pub const FIXTURE_GR: [f64; 3] = [0.0, 0.5, 0.25];
pub const FIXTURE_YD: [f64; 3] = [0.0, 1.0, 1.0];

pub fn fixture_weights() -> Weights {
    Weights::new(1.0, 0.1, 0.01, 1.0, 0.1)
}

pub fn fixture_ops() -> (LiftedOperator, LiftedOperator) {
    (lift(&FIXTURE_G, 2).unwrap(), lift(&FIXTURE_GR, 2).unwrap())
}

pub fn fixture_yd() -> Signal {
    Signal::new(FIXTURE_YD.to_vec(), 1.0)
}

pub fn fixture_run(policies: &[Coalition], trials: usize) -> (LiftedModel, LiftedRun) {
    let (g, gr) = fixture_ops();
    (
        LiftedModel::new(g, gr).unwrap(),
        LiftedRun {
            weights: fixture_weights(),
            y_d: fixture_yd(),
            u0: None,
            trials,
            policies: policies.to_vec(),
            tolerances: Tolerances::default(),
        },
    )
}

pub fn max_abs_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax()
}

/// Random lifted instance: Markov lists, positive weights, `y_d`, `u_k`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub g: LiftedOperator,
    pub g_r: LiftedOperator,
    pub weights: Weights,
    pub y_d: Signal,
    pub u_k: Signal,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo..hi))
}

/// `N + 1 ∈ {3, …, 30}`; `G` is strictly proper half the time.
pub fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n: usize = rng.random_range(3..=30);
    let decay = rng.random_range(0.3..0.9);
    let mut g: Vec<f64> = (0..n).map(|i| normal(rng) * f64::powi(decay, i as i32)).collect();
    if rng.random_bool(0.5) {
        g[0] = 0.0;
        g[1] = g[1].abs().max(0.1);
    }
    let mut g_r: Vec<f64> = (0..n).map(|i| 0.5 * normal(rng) * f64::powi(decay, i as i32)).collect();
    g_r[0] = 0.0;
    let weights = Weights::new(
        log_uniform(rng, -1.0, 1.0),
        log_uniform(rng, -2.0, 1.0),
        log_uniform(rng, -3.0, 0.0),
        log_uniform(rng, -1.0, 1.0),
        log_uniform(rng, -3.0, 0.0),
    );
    let mut y_d: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
    y_d[0] = 0.0;
    let u_k: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
    Instance {
        g: lift(&g, n - 1).unwrap(),
        g_r: lift(&g_r, n - 1).unwrap(),
        weights,
        y_d: Signal::new(y_d, 1.0),
        u_k: Signal::new(u_k, 1.0),
    }
}

pub fn random_instances(seed: u64, count: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_instance(&mut rng)).collect()
}

/// Minimizer of the trial cost over the stacked unknown `[u; r]`, solved
/// directly from the normal equations.
pub fn stacked_minimizer(inst: &Instance) -> (DVector<f64>, DVector<f64>) {
    let n = inst.g.dim();
    let Weights { q, r, s, w, wr } = inst.weights;
    let eye = DMatrix::<f64>::identity(n, n);
    let g = inst.g.dense();
    let m = &eye - inst.g_r.dense();
    let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n))
        .copy_from(&(g.transpose() * g * q + &eye * (r + s)));
    h.view_mut((0, n), (n, n))
        .copy_from(&(-(g.transpose() * &m) * q));
    h.view_mut((n, 0), (n, n))
        .copy_from(&(-(m.transpose() * g) * q));
    h.view_mut((n, n), (n, n))
        .copy_from(&(m.transpose() * &m * q + &eye * (w + wr)));
    let mut b = DVector::<f64>::zeros(2 * n);
    b.rows_mut(0, n).copy_from(&(inst.u_k.vector() * r));
    b.rows_mut(n, n).copy_from(&(inst.y_d.vector() * w));
    let z = h.lu().solve(&b).expect("stacked system is nonsingular");
    (z.rows(0, n).into_owned(), z.rows(n, n).into_owned())
}

/// `ρ` from the subtractive form `Mᵀ(Q − QG·A⁻¹·GᵀQ)M + W + W_r`.
pub fn rho_subtractive(inst: &Instance) -> DMatrix<f64> {
    let n = inst.g.dim();
    let Weights { q, r, s, w, wr } = inst.weights;
    let eye = DMatrix::<f64>::identity(n, n);
    let g = inst.g.dense();
    let m = &eye - inst.g_r.dense();
    let a = g.transpose() * g * q + &eye * (r + s);
    let a_inv = a.try_inverse().expect("A is invertible");
    let core = &eye * q - g * a_inv * g.transpose() * (q * q);
    m.transpose() * core * &m + &eye * (w + wr)
}
