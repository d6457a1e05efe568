use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wavegauge::config::{initial_field, InitialData};
use wavegauge::constants::{analyze, StabilityConstants};
use wavegauge::det::{det_step, phase_increment, run_deterministic, DetConfig, PhaseState, Stepper};
use wavegauge::testfns::random_compact_field;
use wavegauge::wave::{build_profile, nagumo_profile, WaveMethod};
use wavegauge::{Field, GridSpec, ReactionSpec, WaveParams, WaveProfile};

fn wave(a: f64, n: usize) -> WaveProfile {
    let p = WaveParams::new(1.0, 2.0).unwrap();
    nagumo_profile(p, a, GridSpec::new(25.0, n).unwrap()).unwrap()
}

fn consts(w: &WaveProfile) -> StabilityConstants {
    analyze(w).unwrap().constants
}

fn cfg(dt: f64, t_end: f64) -> DetConfig {
    DetConfig {
        dt,
        t_end,
        delta: 0.5,
        record_every: 10,
    }
}

#[test]
fn phase_increment_signs() {
    let w = wave(0.5, 2048);
    let v = Field::from_vec(*w.grid(), w.v.clone()).unwrap();
    assert!(phase_increment(&v, &w, 0.0).unwrap().abs() < 1e-15);

    let ahead = Field::from_fn(*w.grid(), |x| w.eval(x + 0.1).v);
    assert!(phase_increment(&ahead, &w, 0.0).unwrap() > 0.0);

    assert!(phase_increment(&v, &w, 13.0).is_err());
}

#[test]
fn zero_perturbation_stays_zero() {
    let w = wave(0.25, 1024);
    let k = consts(&w);
    let u0 = Field::zeros(*w.grid());
    let dt = 1e-3;
    let rec = run_deterministic(&u0, &cfg(dt, 5.0), &k, &w, k.big_c_star, 0.01).unwrap();
    assert!(rec.h_norms.iter().all(|h| *h < 1e-12));
    assert!(rec.violations.is_empty());
    for (t, c) in rec.times.iter().zip(&rec.phases) {
        assert!((c - w.c * t).abs() <= dt * t * 1e-6 + 1e-12, "t={t}: {c}");
    }
}

#[test]
fn det_step_matches_stepper() {
    let w = wave(0.3, 512);
    let u0 = initial_field(&InitialData::Shift { shift: 0.2 }, &w);
    let st = PhaseState::new(2.0).unwrap();
    let (u1, st1) = det_step(&u0, st, &w, 1e-3).unwrap();
    let mut s = Stepper::new(&w, 1e-3).unwrap();
    let mut u = u0.vals().to_vec();
    let mut st2 = st;
    s.step(&mut u, &mut st2, None).unwrap();
    assert_eq!(u1.vals(), &u[..]);
    assert_eq!(st1, st2);
}

#[test]
fn shift_limit_enforced() {
    let w = wave(0.5, 256);
    let mut s = Stepper::new(&w, 1e-3).unwrap();
    let mut u = vec![0.0; 256];
    let mut st = PhaseState { c_shift: 12.6, m: 1.0 };
    assert!(s.step(&mut u, &mut st, None).is_err());
    assert!(PhaseState::new(-1.0).is_err());
}

#[test]
fn config_validation() {
    for (dt, delta) in [(0.0, 0.5), (-1e-3, 0.5), (1e-3, 0.0), (1e-3, 1.0)] {
        let c = DetConfig {
            dt,
            t_end: 1.0,
            delta,
            record_every: 1,
        };
        assert!(c.validate().is_err(), "dt={dt} delta={delta}");
    }
}

#[test]
fn preconditions_reported() {
    let w = wave(0.5, 1024);
    let k = consts(&w);
    let big = initial_field(
        &InitialData::Bump {
            norm: 0.05,
            center: 0.0,
            width: 1.0,
        },
        &w,
    );
    let rec = run_deterministic(&big, &cfg(1e-3, 0.1), &k, &w, k.big_c_star, 0.01).unwrap();
    assert!(!rec.certified);
    assert_eq!(rec.warnings.len(), 1);

    let small = initial_field(
        &InitialData::Bump {
            norm: 0.01,
            center: 0.0,
            width: 1.0,
        },
        &w,
    );
    let rec = run_deterministic(&small, &cfg(1e-3, 0.1), &k, &w, 0.5 * k.big_c_star, 0.01).unwrap();
    assert!(!rec.certified);
    let rec = run_deterministic(&small, &cfg(1e-3, 0.1), &k, &w, k.big_c_star, 0.01).unwrap();
    assert!(rec.certified && rec.warnings.is_empty());
}

#[test]
fn envelope_on_moving_front() {
    let w = wave(0.25, 2048);
    let k = consts(&w);
    let r = k.decay_radius(0.5);
    let u0 = initial_field(
        &InitialData::Bump {
            norm: 0.7 * r,
            center: 0.0,
            width: 1.0,
        },
        &w,
    );
    let rec = run_deterministic(&u0, &cfg(1e-3, 20.0), &k, &w, k.big_c_star, 0.01).unwrap();
    assert!(rec.certified);
    assert!(rec.within_envelope(), "violations at {:?}", rec.violations);
    assert!(rec.times.windows(2).all(|t| t[1] > t[0]));
}

#[test]
fn translated_initial_data_locks_phase() {
    for s in [-0.1, 0.07] {
        let w = wave(0.3, 2048);
        let k = consts(&w);
        let u0 = initial_field(&InitialData::Shift { shift: s }, &w);
        let rec = run_deterministic(&u0, &cfg(2e-3, 30.0), &k, &w, k.big_c_star, 0.01).unwrap();
        let n = rec.times.len();
        assert!(rec.h_norms[n - 1] < 1e-5 * rec.h_norms[0].max(1e-3));
        let d1 = rec.phases[n - 1] - w.c * rec.times[n - 1];
        let d0 = rec.phases[n - 20] - w.c * rec.times[n - 20];
        assert!((d1 - d0).abs() < 1e-6);
        assert!((d1 - s).abs() < 1e-3, "shift {s}: {d1}");
    }
}

#[test]
fn shooting_profile_dynamics() {
    let spec = ReactionSpec::nagumo(0.3).unwrap();
    let p = WaveParams::new(1.0, 2.0).unwrap();
    let w = build_profile(&spec, p, GridSpec::new(25.0, 1024).unwrap(), WaveMethod::Shooting, 1e-6).unwrap();
    let k = consts(&w);
    let u0 = initial_field(&InitialData::Shift { shift: 0.05 }, &w);
    let rec = run_deterministic(&u0, &cfg(2e-3, 20.0), &k, &w, k.big_c_star, 0.01).unwrap();
    let n = rec.times.len();
    assert!((rec.phases[n - 1] - w.c * rec.times[n - 1] - 0.05).abs() < 1e-3);
}

#[test]
fn first_order_in_time() {
    let w = wave(0.3, 512);
    let u0 = initial_field(&InitialData::Shift { shift: 0.3 }, &w);
    let run = |dt: f64| {
        let mut s = Stepper::new(&w, dt).unwrap();
        let mut st = PhaseState::new(2.0).unwrap();
        let mut u = u0.vals().to_vec();
        for _ in 0..(1.0 / dt).round() as usize {
            s.step(&mut u, &mut st, None).unwrap();
        }
        (u, st.c_shift)
    };
    let sols: Vec<(Vec<f64>, f64)> = [0.02, 0.01, 0.005].iter().map(|&dt| run(dt)).collect();
    let g = *w.grid();
    let diff = |a: &[f64], b: &[f64]| g.integrate(|i| (a[i] - b[i]).powi(2)).sqrt();
    let e1 = diff(&sols[0].0, &sols[1].0);
    let e2 = diff(&sols[1].0, &sols[2].0);
    let ratio = e1 / e2;
    assert!((1.7..2.3).contains(&ratio), "ratio {ratio}");
    let p_ratio = (sols[0].1 - sols[1].1) / (sols[1].1 - sols[2].1);
    assert!((1.7..2.3).contains(&p_ratio), "phase ratio {p_ratio}");
}

fn lipschitz_case(seed: u64) -> (f64, f64) {
    let w = wave(0.4, 1024);
    let g = *w.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_compact_field(&mut rng, &g, 5.0, (0.5, 6.0), 0.5);
    let c0: f64 = rand::Rng::gen_range(&mut rng, -1.0..1.0);
    let c1: f64 = rand::Rng::gen_range(&mut rng, -3.0..3.0);
    let c2: f64 = rand::Rng::gen_range(&mut rng, -3.0..3.0);
    let v = Field::from_fn(g, |x| w.eval(x + c0).v);
    let mut vv = v.into_vec();
    for (a, b) in vv.iter_mut().zip(u.vals()) {
        *a += b;
    }
    let v = Field::from_vec(g, vv).unwrap();
    let b1 = phase_increment(&v, &w, c1).unwrap();
    let b2 = phase_increment(&v, &w, c2).unwrap();
    let nvxx = g.integrate(|i| w.vxx[i] * w.vxx[i]).sqrt();
    let nvx2 = g.integrate(|i| w.vx[i] * w.vx[i]);
    let vs = Field::from_fn(g, |x| w.eval(x + c1).v);
    let ut: Vec<f64> = v.vals().iter().zip(vs.vals()).map(|(a, b)| a - b).collect();
    let nu = g.integrate(|i| ut[i] * ut[i]).sqrt();
    ((b1 - b2).abs(), (nvxx * nu + nvx2) * (c1 - c2).abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn phase_increment_lipschitz(seed in any::<u64>()) {
        let (lhs, rhs) = lipschitz_case(seed);
        prop_assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-14, "{lhs} > {rhs}");
    }
}
