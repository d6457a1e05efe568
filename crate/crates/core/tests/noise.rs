use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wavegauge::noise::{build_noise, step_rng, translation_check, NoiseKind, NoiseModel, SigmaKind};
use wavegauge::testfns::random_compact_field;
use wavegauge::wave::nagumo_profile;
use wavegauge::{GridSpec, WaveParams, WaveProfile};

fn wave(n: usize) -> WaveProfile {
    let p = WaveParams::new(1.0, 2.0).unwrap();
    nagumo_profile(p, 0.5, GridSpec::new(25.0, n).unwrap()).unwrap()
}

fn white(g: GridSpec, amp: f64) -> NoiseModel {
    build_noise(NoiseKind::White, SigmaKind::Vv1m, amp, g).unwrap()
}

fn gaussian(g: GridSpec, corr_len: f64, amp: f64) -> NoiseModel {
    build_noise(NoiseKind::GaussianKernel { corr_len }, SigmaKind::Vv1m, amp, g).unwrap()
}

fn h_norm(g: &GridSpec, v: &[f64]) -> f64 {
    g.integrate(|i| v[i] * v[i]).sqrt()
}

#[test]
fn bad_parameters() {
    let g = GridSpec::new(10.0, 128).unwrap();
    assert!(build_noise(NoiseKind::White, SigmaKind::Vv1m, -1.0, g).is_err());
    assert!(build_noise(NoiseKind::GaussianKernel { corr_len: 0.0 }, SigmaKind::Vv1m, 1.0, g).is_err());
}

#[test]
fn zero_amplitude() {
    let w = wave(512);
    let m = white(*w.grid(), 0.0);
    assert!(m.is_zero());
    assert_eq!(m.hs_norm_sq(&w.v), 0.0);
    let mut out = vec![1.0; 512];
    m.sample_increment(&mut step_rng(3, 1), 0.01, &mut out);
    assert!(out.iter().all(|v| *v == 0.0));
}

#[test]
fn dispersion_vanishes_at_rest_states() {
    let g = GridSpec::new(10.0, 256).unwrap();
    let m = gaussian(g, 1.0, 1.0);
    let mut inc = vec![0.0; 256];
    m.sample_increment(&mut step_rng(1, 1), 0.1, &mut inc);
    let mut out = vec![1.0; 256];
    for rest in [0.0, 1.0] {
        m.apply_dispersion(&vec![rest; 256], &inc, &mut out);
        assert!(out.iter().all(|v| *v == 0.0));
    }
}

#[test]
fn dispersion_localised_at_front() {
    let w = wave(2048);
    let m = white(*w.grid(), 1.0);
    let ones = vec![1.0; 2048];
    let mut out = vec![0.0; 2048];
    m.apply_dispersion(&w.v, &ones, &mut out);
    for (x, o) in w.x.iter().zip(&out) {
        if x.abs() > 20.0 {
            assert!(o.abs() < 1e-8);
        }
    }
    assert!((out[1024] - 0.25).abs() < 0.01);
}

#[test]
fn gaussian_row_integral() {
    let g = GridSpec::new(25.0, 4096).unwrap();
    let m = gaussian(g, 1.0, 1.0);
    for i in [1024, 2048, 3000] {
        let r = m.row_square_integral(i);
        assert!(((r - PI.sqrt()) / PI.sqrt()).abs() < 0.01, "row {i}: {r}");
    }
}

#[test]
fn white_hs_norm_matches_closed_form() {
    // Sum of (v(1-v))^2 over nodes; times dx it is int (v(1-v))^2 = 1/6.
    let w = wave(4096);
    let m = white(*w.grid(), 1.0);
    let dx = w.grid().dx();
    assert!((m.hs_norm_sq(&w.v) * dx - 1.0 / 6.0).abs() < 1e-6);
    let m2 = m.with_amp(0.1).unwrap();
    assert!((m2.hs_norm_sq(&w.v) / m.hs_norm_sq(&w.v) - 0.01).abs() < 1e-14);
}

#[test]
fn gaussian_hs_norm_by_quadrature() {
    let w = wave(1024);
    let g = *w.grid();
    let m = gaussian(g, 0.5, 1.0);
    let x = g.nodes();
    let direct = g.integrate(|i| {
        let s = w.v[i] * (1.0 - w.v[i]);
        let row = g.integrate(|j| (-(x[i] - x[j]).powi(2) / 0.25).exp());
        s * s * row
    });
    let hs = m.hs_norm_sq(&w.v);
    assert!(((hs - direct) / direct).abs() < 1e-3, "{hs} vs {direct}");
}

#[test]
fn white_variance() {
    let g = GridSpec::new(10.0, 64).unwrap();
    let m = white(g, 1.0);
    let dt = 0.01;
    let n = 100_000;
    let mut out = vec![0.0; 64];
    let node = 20;
    let mut s2 = 0.0;
    for k in 0..n {
        m.sample_increment(&mut step_rng(11, k), dt, &mut out);
        s2 += out[node] * out[node];
    }
    let var = s2 / n as f64;
    let want = dt / g.dx();
    let se = want * (2.0 / n as f64).sqrt();
    assert!((var - want).abs() < 3.0 * se, "{var} vs {want}");
}

#[test]
fn gaussian_covariance() {
    let g = GridSpec::new(10.0, 256).unwrap();
    let m = gaussian(g, 1.0, 1.0);
    let dt = 0.05;
    let (i, j) = (120, 130);
    let x = g.nodes();
    let dx = g.dx();
    let kk = |a: usize, b: usize| {
        (0..256)
            .map(|l| {
                let k1 = (-(x[a] - x[l]).powi(2) / 2.0).exp();
                let k2 = (-(x[b] - x[l]).powi(2) / 2.0).exp();
                k1 * k2 * dx
            })
            .sum::<f64>()
    };
    let want = dt * kk(i, j);
    let (vi, vj) = (dt * kk(i, i), dt * kk(j, j));
    let n = 100_000;
    let mut out = vec![0.0; 256];
    let mut acc = 0.0;
    for k in 0..n {
        m.sample_increment(&mut step_rng(5, k), dt, &mut out);
        acc += out[i] * out[j];
    }
    let cov = acc / n as f64;
    let se = ((vi * vj + want * want) / n as f64).sqrt();
    assert!((cov - want).abs() < 3.0 * se, "{cov} vs {want} (se {se})");
}

#[test]
fn increments_reproducible_and_independent() {
    let g = GridSpec::new(10.0, 64).unwrap();
    let m = white(g, 1.0);
    let mut a = vec![0.0; 64];
    let mut b = vec![0.0; 64];
    m.sample_increment(&mut step_rng(42, 7), 0.1, &mut a);
    m.sample_increment(&mut step_rng(42, 7), 0.1, &mut b);
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));

    let n = 100_000;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for k in 0..n {
        m.sample_increment(&mut step_rng(1, k), 1.0, &mut a);
        m.sample_increment(&mut step_rng(2, k), 1.0, &mut b);
        sxy += a[10] * b[10];
        sxx += a[10] * a[10];
        syy += b[10] * b[10];
    }
    let rho = sxy / (sxx * syy).sqrt();
    assert!(rho.abs() < 3.0 / (n as f64).sqrt(), "rho = {rho}");

    m.sample_increment(&mut step_rng(42, 8), 0.1, &mut b);
    m.sample_increment(&mut step_rng(42, 7), 0.1, &mut a);
    assert!(a.iter().zip(&b).any(|(x, y)| x != y));
}

#[test]
fn translation_invariance() {
    let w = wave(4096);
    for m in [white(*w.grid(), 1.0), gaussian(*w.grid(), 1.0, 1.0)] {
        let rep = translation_check(&m, &w, &[0, 64, -64]);
        assert!(rep.all_passed(), "{rep}");
    }
}

#[test]
fn additive_noise_breaks_translation_invariance() {
    let w = wave(1024);
    let m = build_noise(NoiseKind::GaussianKernel { corr_len: 1.0 }, SigmaKind::Constant, 1.0, *w.grid()).unwrap();
    let m0 = build_noise(NoiseKind::White, SigmaKind::Constant, 1.0, *w.grid()).unwrap();
    assert_eq!(m0.l_sigma, 0.0);
    assert!(m.hs_norm_sq(&w.v) > 0.0);
    assert!(m.hs_norm_sq(&vec![0.0; 1024]) > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn dispersion_lipschitz(seed in any::<u64>()) {
        let w = wave(1024);
        let g = *w.grid();
        let m = gaussian(g, 1.0, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v1 = random_compact_field(&mut rng, &g, 10.0, (1.0, 8.0), 0.5).into_vec();
        let mut v2 = random_compact_field(&mut rng, &g, 10.0, (1.0, 8.0), 0.5).into_vec();
        for (a, b) in v1.iter_mut().zip(v2.iter_mut()) {
            *a = (*a * 1.5 + 0.5).clamp(-1.0, 2.0);
            *b = (*b * 1.5 + 0.5).clamp(-1.0, 2.0);
        }
        let mut xi = vec![0.0; 1024];
        m.sample_increment(&mut step_rng(seed, 0), 1.0, &mut xi);
        let sup = xi.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let (mut o1, mut o2) = (vec![0.0; 1024], vec![0.0; 1024]);
        m.apply_dispersion(&v1, &xi, &mut o1);
        m.apply_dispersion(&v2, &xi, &mut o2);
        let d_out: Vec<f64> = o1.iter().zip(&o2).map(|(a, b)| a - b).collect();
        let d_in: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| a - b).collect();
        let lip = m.amp * SigmaKind::Vv1m.lipschitz();
        prop_assert!(h_norm(&g, &d_out) <= lip * sup * h_norm(&g, &d_in) * (1.0 + 1e-12));

        // Hilbert-Schmidt triangle bound around the wave.
        let u: Vec<f64> = v1.iter().map(|a| a - 0.5).collect();
        let vu: Vec<f64> = w.v.iter().zip(&u).map(|(a, b)| a + b).collect();
        let lhs = m.hs_norm_sq(&vu).sqrt();
        let rhs = m.hs_norm_sq(&w.v).sqrt() + m.l_sigma * h_norm(&g, &u);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }
}
