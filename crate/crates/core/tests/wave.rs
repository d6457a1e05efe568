use proptest::prelude::*;
use wavegauge::report::Tolerances;
use wavegauge::wave::{
    build_profile, nagumo_profile, solve_profile, verify_profile_bounds, weighted_integrals,
    WaveMethod,
};
use wavegauge::{GridSpec, ReactionSpec, WaveParams, WaveProfile};

fn params() -> WaveParams {
    WaveParams::new(1.0, 2.0).unwrap()
}

fn grid(n: usize) -> GridSpec {
    GridSpec::new(25.0, n).unwrap()
}

fn closed(a: f64) -> WaveProfile {
    nagumo_profile(params(), a, grid(4096)).unwrap()
}

#[test]
fn closed_form_nagumo() {
    let w = closed(0.25);
    assert_eq!(params().k(), 1.0);
    assert!((w.c - 0.5).abs() < 1e-15);
    let p = w.eval(0.0);
    assert!((p.v - 0.5).abs() < 1e-15);

    let h = closed(0.5);
    assert_eq!(h.c, 0.0);
    let p = h.eval(0.0);
    assert!((p.vx - 0.25).abs() < 1e-15);
    assert!(p.vxx.abs() < 1e-15);
}

#[test]
fn closed_form_rejects_negative_speed() {
    assert!(nagumo_profile(params(), 0.6, grid(1024)).is_err());
}

#[test]
fn shooting_reproduces_closed_form() {
    let spec = ReactionSpec::nagumo(0.3).unwrap();
    let w = solve_profile(&spec, params(), grid(4096), 1e-6).unwrap();
    let exact = closed(0.3);
    let err = w.v.iter().zip(&exact.v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-6, "{err}");
    assert!((w.c - exact.c).abs() <= 1e-4);

    let spec = ReactionSpec::nagumo(0.5).unwrap();
    let w = solve_profile(&spec, params(), grid(4096), 1e-6).unwrap();
    assert!(w.c.abs() <= 1e-4);
}

#[test]
fn shooting_on_scaled_cubic() {
    // 3 v(1-v)(v-a) with b = 2 behaves like Nagumo with b = 6
    let a = 0.2;
    let spec = ReactionSpec::cubic([0.0, -3.0 * a, 3.0 * (1.0 + a), -3.0]).unwrap();
    let w = build_profile(&spec, params(), grid(4096), WaveMethod::Auto, 1e-6).unwrap();
    assert!(!w.is_closed_form());
    let exact = (2.0 * 6.0f64).sqrt() * (0.5 - a);
    assert!((w.c - exact).abs() < 1e-6, "{} vs {exact}", w.c);
    let k = 3f64.sqrt();
    let err = w
        .x
        .iter()
        .zip(&w.v)
        .map(|(x, v)| (v - 1.0 / (1.0 + (-k * x).exp())).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn closed_form_method_needs_nagumo() {
    let spec = ReactionSpec::cubic([0.0, -0.3, 1.3, -1.0]).unwrap();
    assert!(build_profile(&spec, params(), grid(1024), WaveMethod::ClosedForm, 1e-6).is_err());
}

#[test]
fn landmarks_quarter() {
    let lm = &closed(0.25).landmarks;
    let x_half = lm.x_alpha(0.5).unwrap();
    assert!((x_half - 0.6f64.ln()).abs() < 1e-8);
    assert!((lm.x0 - (1.0f64 / 3.0).ln()).abs() < 1e-8);
    assert!(lm.x1.abs() < 1e-8);
    assert!((lm.x_star - (5.0f64 / 7.0).ln()).abs() < 1e-8);
    assert!(lm.x0 < x_half && x_half < lm.x_star && lm.x_star < lm.x1);
}

#[test]
fn landmarks_balanced() {
    let lm = &closed(0.5).landmarks;
    assert!(lm.x0.abs() < 1e-8);
    assert!(lm.x1.abs() < 1e-8);
    assert!(lm.x_alpha(0.5).unwrap().abs() < 1e-8);
}

#[test]
fn integrals_balanced() {
    let i = weighted_integrals(&closed(0.5)).unwrap();
    assert!((i.z - 1.0 / 6.0).abs() < 1e-6);
    assert!((i.norm_vx_sq - 1.0 / 6.0).abs() < 1e-6);
    assert!((i.norm_vxx_sq - 1.0 / 30.0).abs() < 1e-6);
}

#[test]
fn profile_bound_equality_at_centre() {
    let w = closed(0.5);
    let spec = w.spec();
    let p = w.eval(0.0);
    let rhs = 4.0 * spec.upper_integral(0.5);
    assert!((p.vx * p.vx - 0.0625).abs() < 1e-14);
    assert!((rhs - 0.0625).abs() < 1e-12);
}

#[test]
fn ratio_is_affine_in_v() {
    let w = closed(0.25);
    for (i, r) in w.ratio().iter().enumerate().step_by(97) {
        let want = 2.0 * w.v[i] - 0.5;
        assert!((r - want).abs() < 1e-9, "x = {}: {r} vs {want}", w.x[i]);
    }
}

#[test]
fn ratio_limits_at_boundary() {
    for a in [0.1, 0.25, 0.4, 0.5] {
        let w = closed(a);
        let r = w.ratio();
        let (lo, hi) = (r[0], r[r.len() - 1]);
        assert!(((lo - w.gamma_minus) / w.gamma_minus).abs() < 0.01, "a={a}");
        assert!(((hi - w.gamma_plus) / w.gamma_plus).abs() < 0.01, "a={a}");
        assert!(r.iter().all(|v| *v > w.gamma_minus && *v < w.gamma_plus));
    }
}

#[test]
fn shooting_residual_small() {
    for a in [0.15, 0.35] {
        let spec = ReactionSpec::nagumo(a).unwrap();
        let w = solve_profile(&spec, params(), grid(4096), 1e-6).unwrap();
        let vmax = w.vx.iter().copied().fold(0.0, f64::max);
        assert!(w.residual_max() <= 1e-6 * vmax);
        assert!(verify_profile_bounds(&w, Tolerances::default()).all_passed());
    }
}

#[test]
fn shifted_profile_matches_evaluation() {
    let w = closed(0.3);
    let n = w.grid().n();
    let (mut v, mut vx) = (vec![0.0; n], vec![0.0; n]);
    w.shifted(0.7, &mut v, &mut vx);
    for i in (0..n).step_by(211) {
        let p = w.eval(w.x[i] + 0.7);
        assert!((v[i] - p.v).abs() < 1e-12);
        assert!((vx[i] - p.vx).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bounds_hold_across_family(a in 0.05f64..=0.5) {
        let w = closed(a);
        let rep = verify_profile_bounds(&w, Tolerances::default());
        prop_assert!(rep.all_passed(), "{}", rep);
    }

    #[test]
    fn integrals_cauchy_schwarz(a in 0.05f64..=0.5) {
        let i = weighted_integrals(&closed(a)).unwrap();
        prop_assert!(i.z > 0.0 && i.z_half > 0.0 && i.norm_vx_sq > 0.0 && i.norm_vxx_sq > 0.0);
        prop_assert!(i.z_half * i.z_half <= i.z * i.norm_vx_sq * (1.0 + 1e-12));
    }

    #[test]
    fn weighted_slope_monotone_about_x0(a in 0.05f64..=0.5) {
        let w = closed(a);
        let x0 = w.landmarks.x0;
        let e: Vec<f64> = w
            .x
            .iter()
            .zip(&w.vx)
            .map(|(x, vx)| (-2.0 * w.c * x).exp() * vx * vx)
            .collect();
        for i in 1..e.len() {
            let scale = e[i].max(e[i - 1]);
            if w.x[i] <= x0 {
                prop_assert!(e[i] >= e[i - 1] - 1e-12 * scale, "x = {}", w.x[i]);
            } else if w.x[i - 1] >= x0 {
                prop_assert!(e[i] <= e[i - 1] + 1e-12 * scale, "x = {}", w.x[i]);
            }
        }
    }

    #[test]
    fn profile_monotone(a in 0.05f64..=0.5) {
        let w = closed(a);
        prop_assert!(w.v.windows(2).all(|p| p[1] >= p[0]));
        prop_assert!(w.vx.iter().all(|v| *v >= 0.0));
        prop_assert!(w.v[0] < a && a < w.v[w.v.len() - 1]);
    }
}
