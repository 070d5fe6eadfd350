//! Sampled-loop checks against independent time-domain and frequency-domain
//! computations on the printer model.

use nalgebra::{Complex, DVector, SVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use e2e_ilc::lifted::{lift, Signal};
use e2e_ilc::lti::{markov_parameters, DiscretizationMethod};
use e2e_ilc::runner::{build_model, case_study_config, simulate_trial, LiftedModel};

/// Printer plant, hand-written controllable canonical form.
fn plant_derivative(x: &SVector<f64, 4>, u: f64) -> SVector<f64, 4> {
    let (a0, a1, a2) = (9e-5, 1.092e-2, 21.385);
    // s⁴ + (a1/a0)s³ + (a2/a0)s² state chain
    SVector::<f64, 4>::new(
        x[1],
        x[2],
        x[3],
        -(a1 / a0) * x[3] - (a2 / a0) * x[2] + u / a0,
    )
}

fn plant_output(x: &SVector<f64, 4>) -> f64 {
    235.0 * x[0] + 0.12 * x[1]
}

#[test]
fn zoh_step_matches_fine_grid_integration() {
    let h = 1e-6;
    let steps = 100_000;
    let mut x = SVector::<f64, 4>::zeros();
    for _ in 0..steps {
        let k1 = plant_derivative(&x, 1.0);
        let k2 = plant_derivative(&(x + k1 * (h / 2.0)), 1.0);
        let k3 = plant_derivative(&(x + k2 * (h / 2.0)), 1.0);
        let k4 = plant_derivative(&(x + k3 * h), 1.0);
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    let want = plant_output(&x);

    let cfg = case_study_config(201);
    let model = build_model(&cfg).unwrap();
    let y = model.plant().simulate(&[1.0; 101]);
    let got = y[100];
    assert!(
        ((got - want) / want).abs() < 1e-4,
        "discrete {got} vs continuous {want}"
    );
}

#[test]
fn complementary_sensitivity_has_unit_dc_gain() {
    let cfg = case_study_config(201);
    let cl = build_model(&cfg).unwrap();
    let dc = cl.g_cs.frequency_response(Complex::new(1.0, 0.0));
    assert!((dc - 1.0).norm() < 1e-6, "g_cs(1) = {dc}");

    // HC/(1 + HC) from the separately evaluated sampled blocks
    for w in [0.5, 5.0, 50.0, 500.0] {
        let z = Complex::new(0.0, w * cfg.sample_time).exp();
        let l = cl.plant().frequency_response(z) * cl.controller().frequency_response(z);
        let want = l / (l + 1.0);
        let got = cl.g_cs.frequency_response(z);
        assert!((got - want).norm() <= 1e-9 * want.norm().max(1e-12), "w = {w}");
        let want_ps = cl.plant().frequency_response(z) / (l + 1.0);
        let got_ps = cl.g_ps.frequency_response(z);
        assert!((got_ps - want_ps).norm() <= 1e-9 * want_ps.norm(), "w = {w}");
    }
}

#[test]
fn controller_uses_tustin_by_default() {
    let cfg = case_study_config(11);
    assert_eq!(cfg.discretization.controller, DiscretizationMethod::Tustin);
    let cl = build_model(&cfg).unwrap();
    let t = cfg.sample_time;
    let z = Complex::new(0.0, 30.0 * t).exp();
    let s = (z - 1.0) / (z + 1.0) * (2.0 / t);
    let want = cfg.controller.eval(s);
    let got = cl.controller().frequency_response(z);
    assert!((got - want).norm() <= 1e-9 * want.norm());
}

#[test]
fn lifted_pulse_response_matches_state_space() {
    let cfg = case_study_config(501);
    let cl = build_model(&cfg).unwrap();
    let n = 501;
    let g = lift(&markov_parameters(&cl.g_ps, n), n - 1).unwrap();
    let mut pulse = vec![0.0; n];
    pulse[0] = 1.0;
    let lifted = g.apply(&Signal::new(pulse.clone(), cfg.sample_time)).unwrap();
    let direct = cl.g_ps.simulate(&pulse);
    let err = (lifted.vector() - DVector::from_vec(direct)).amax();
    assert!(err <= 1e-10, "max deviation {err}");
    assert_eq!(g.markov()[0], 0.0);
    assert!(g.markov()[1] > 0.0);
}

/// Loop of plant and controller stepped sample by sample.
fn loop_simulation(
    cl: &e2e_ilc::lti::ClosedLoopModel,
    u: &[f64],
    r: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let p = cl.plant();
    let c = cl.controller();
    assert_eq!(p.d, 0.0, "plant must be strictly proper for this ordering");
    let mut xp = DVector::zeros(p.order());
    let mut xc = DVector::zeros(c.order());
    let (mut ys, mut es, mut mix) = (vec![], vec![], vec![]);
    for t in 0..u.len() {
        let y = (&p.c * &xp)[0];
        let e = r[t] - y;
        let uc = c.step(&mut xc, e);
        let um = uc + u[t];
        p.step(&mut xp, um);
        ys.push(y);
        es.push(e);
        mix.push(um);
    }
    (ys, es, mix)
}

#[test]
fn lifted_trial_matches_loop_simulation() {
    let n = 201;
    let cfg = case_study_config(n);
    let cl = build_model(&cfg).unwrap();
    let model = LiftedModel::from_closed_loop(&cl, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let r: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let sim = simulate_trial(
        &Signal::new(u.clone(), cfg.sample_time),
        &Signal::new(r.clone(), cfg.sample_time),
        &model,
    )
    .unwrap();
    let (y, e, mix) = loop_simulation(&cl, &u, &r);
    for (name, lifted, direct) in [("y", &sim.y, y), ("e", &sim.e, e), ("u_mix", &sim.u_mix, mix)] {
        let direct = DVector::from_vec(direct);
        let err = (lifted.vector() - &direct).amax();
        assert!(err <= 1e-9 * (1.0 + direct.amax()), "{name}: {err}");
    }
}

#[test]
fn printer_loop_is_stable() {
    let cl = build_model(&case_study_config(11)).unwrap();
    let rho = cl.spectral_radius();
    assert!(rho < 1.0 && rho > 0.9, "{rho}");
}
