//! The functional-inequality constant `kappa`, the weight `w = e^{-(c/2nu)x} v_x`,
//! Hardy/Poincare checks, the comparison function `g`, and the constants
//! `kappa_*`, `C_*`, `c_*`.

use crate::error::{Error, Result};
use crate::grid::{inner_slices, Field, GridSpec};
use crate::report::{Tolerances, ValidationReport};
use crate::wave::{weighted_integrals, ProfilePoint, WaveIntegrals, WaveProfile};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityConstants {
    pub kappa: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    #[serde(rename = "Z")]
    pub z: f64,
    #[serde(rename = "Zhalf")]
    pub z_half: f64,
    #[serde(rename = "C_prop")]
    pub c_prop: f64,
    pub q1: f64,
    pub q2: f64,
    pub kappa_star: f64,
    #[serde(rename = "C_star")]
    pub big_c_star: f64,
    pub c_star: f64,
    pub c: f64,
    pub nu: f64,
    pub b: f64,
    pub eta: f64,
    pub eta1: f64,
    pub eta2: f64,
}

impl StabilityConstants {
    /// Radius `(delta kappa_* / (2 b eta2)) ∧ 1` for the deterministic decay.
    pub fn decay_radius(&self, delta: f64) -> f64 {
        (delta * self.kappa_star / (2.0 * self.b * self.eta2)).min(1.0)
    }
}

/// `(gamma_-, gamma_+)` from the closed forms.
pub fn gamma_closed_form(w: &WaveProfile) -> (f64, f64) {
    (w.gamma_minus, w.gamma_plus)
}

/// `Phi = (b/nu) f'(v) + 2 r (r - c/nu)` with `r = (b/nu) f(v)/v_x`.
#[inline]
pub fn phi_at(w: &WaveProfile, p: &ProfilePoint) -> f64 {
    let r = w.ratio_at(p);
    w.params.b / w.params.nu * w.spec().df(p.v) + 2.0 * r * (r - w.c / w.params.nu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaInf {
    pub kappa: f64,
    /// Location of the minimum (infinite if attained in a tail).
    pub x_min: f64,
    pub tail_left: f64,
    pub tail_right: f64,
}

/// Minimum of `Phi` over the grid, refined by golden-section search around
/// the best node, together with the limits `Phi(-inf) = -(b/nu) f'(0)` and
/// `Phi(+inf) = -(b/nu) f'(1)`.
pub fn kappa_inf(w: &WaveProfile) -> Result<KappaInf> {
    let n = w.grid().n();
    let phi: Vec<f64> = (0..n).map(|i| phi_at(w, &w.point(i))).collect();
    let imin = (0..n)
        .min_by(|&i, &j| phi[i].total_cmp(&phi[j]))
        .unwrap_or(0);
    let q = w.params.b / w.params.nu;
    let tail_left = q * w.spec().df(0.0) + 2.0 * w.gamma_minus * (w.gamma_minus - w.c / w.params.nu);
    let tail_right = q * w.spec().df(1.0) + 2.0 * w.gamma_plus * (w.gamma_plus - w.c / w.params.nu);

    let mut best = (phi[imin], w.x[imin]);
    if imin > 0 && imin + 1 < n {
        let f = |x: f64| phi_at(w, &w.eval(x));
        let (xm, fm) = golden_min(f, w.x[imin - 1], w.x[imin + 1]);
        if fm < best.0 {
            best = (fm, xm);
        }
    }
    if tail_left < best.0 {
        best = (tail_left, f64::NEG_INFINITY);
    }
    if tail_right < best.0 {
        best = (tail_right, f64::INFINITY);
    }
    if !(best.0 > 0.0) {
        return Err(Error::NonPositiveKappa {
            min: best.0,
            x: best.1,
        });
    }
    Ok(KappaInf {
        kappa: best.0,
        x_min: best.1,
        tail_left,
        tail_right,
    })
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() < 1e-12 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `g2 = f'(v) v_x^2 / 2 - f(v) v_xx`.
#[inline]
pub fn g2_at(w: &WaveProfile, p: &ProfilePoint) -> f64 {
    0.5 * w.spec().df(p.v) * p.vx * p.vx - w.f_at(p) * p.vxx
}

/// Positivity of `g2` on the nodes of `[x0, x1]`.
pub fn g2_scan(w: &WaveProfile) -> ValidationReport {
    let mut rep = ValidationReport::new();
    let lm = &w.landmarks;
    let (lo, hi) = (lm.x0.min(lm.x1), lm.x0.max(lm.x1));
    let mut count = 0;
    let mut min = (f64::INFINITY, f64::NAN);
    for i in 0..w.grid().n() {
        if w.x[i] < lo || w.x[i] > hi {
            continue;
        }
        count += 1;
        let g = g2_at(w, &w.point(i));
        if g < min.0 {
            min = (g, w.x[i]);
        }
    }
    let passed = count == 0 || min.0 > 0.0;
    rep.push(
        "g2 > 0 on [x0, x1]",
        passed,
        if count == 0 { None } else { Some(min.1) },
        if count == 0 {
            "empty interval".to_string()
        } else {
            format!("min g2 = {:e} over {count} nodes", min.0)
        },
    );
    rep
}

#[derive(Debug, Clone)]
pub struct WeightProfile {
    pub grid: GridSpec,
    pub x: Vec<f64>,
    /// `w = e^{-(c/2nu) x} v_x`.
    pub w: Vec<f64>,
    /// `theta = w_x / w`.
    pub theta: Vec<f64>,
    /// `theta'` from the wave equation.
    pub theta_prime: Vec<f64>,
    /// Root of `theta` (the landmark `x_{0.5}`).
    pub root: f64,
    /// `kappa + (c/2nu)^2`.
    pub kappa0: f64,
    /// `c / 2nu`.
    pub s: f64,
}

/// Builds `w`, `theta = c/2nu - r` and `theta' = -(b/nu) f'(v) + r (c/nu - r)`,
/// and checks `-theta' + theta^2 >= kappa + (c/2nu)^2` at every node.
pub fn weight_profile(w: &WaveProfile, kappa: f64, tol: Tolerances) -> Result<WeightProfile> {
    let n = w.grid().n();
    let s = w.half_drift();
    let q = w.params.b / w.params.nu;
    let kappa0 = kappa + s * s;
    let mut wv = Vec::with_capacity(n);
    let mut theta = Vec::with_capacity(n);
    let mut theta_prime = Vec::with_capacity(n);
    for i in 0..n {
        let p = w.point(i);
        let r = w.ratio_at(&p);
        wv.push((-s * w.x[i]).exp() * p.vx);
        theta.push(s - r);
        let tp = -q * w.spec().df(p.v) + r * (2.0 * s - r);
        theta_prime.push(tp);
        let lhs = -tp + (s - r) * (s - r);
        if !tol.le(kappa0, lhs) {
            return Err(Error::WeightInequality {
                x: w.x[i],
                lhs,
                rhs: kappa0,
            });
        }
    }
    let root = w
        .landmarks
        .x_alpha(0.5)
        .ok_or_else(|| Error::param("landmarks", "x_0.5 missing"))?;
    Ok(WeightProfile {
        grid: *w.grid(),
        x: w.x.clone(),
        w: wv,
        theta,
        theta_prime,
        root,
        kappa0,
        s,
    })
}

impl WeightProfile {
    /// `int phi w^2`.
    pub fn weighted_mass(&self, phi: impl Fn(usize) -> f64) -> f64 {
        self.grid.integrate(|i| phi(i) * self.w[i] * self.w[i])
    }

    /// Cubic Hermite value of samples `h` (slopes `hx`) at `x`.
    pub fn interpolate(&self, h: &[f64], hx: &[f64], x: f64) -> f64 {
        let dx = self.grid.dx();
        let n = self.grid.n();
        let j = (((x - self.x[0]) / dx).floor().max(0.0) as usize).min(n - 2);
        let t = (x - self.x[j]) / dx;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * h[j]
            + (t3 - 2.0 * t2 + t) * dx * hx[j]
            + (-2.0 * t3 + 3.0 * t2) * h[j + 1]
            + (t3 - t2) * dx * hx[j + 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Weighted Hardy inequality `int h^2 w^2 <= (1/kappa0) int h_x^2 w^2` for `h`
/// vanishing at the root of `theta`. `hx` holds the exact derivative samples.
pub fn hardy_verify(
    wp: &WeightProfile,
    kappa0: f64,
    h: &[f64],
    hx: &[f64],
    tol: Tolerances,
) -> Result<InequalityOutcome> {
    let scale = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let at_root = wp.interpolate(h, hx, wp.root);
    if at_root.abs() > 1e-8 * (1.0 + scale) {
        return Err(Error::Vanishing { value: at_root });
    }
    let lhs = wp.weighted_mass(|i| h[i] * h[i]);
    let rhs = wp.weighted_mass(|i| hx[i] * hx[i]) / kappa0;
    Ok(InequalityOutcome {
        lhs,
        rhs,
        pass: lhs <= rhs * (1.0 + tol.rel) + tol.abs,
    })
}

/// `int h^2 w^2 <= (1/kappa0) int h_x^2 w^2 + Z^{-1} (int h w^2)^2`.
pub fn poincare_verify(
    wp: &WeightProfile,
    z: f64,
    h: &[f64],
    hx: &[f64],
    tol: Tolerances,
) -> InequalityOutcome {
    let lhs = wp.weighted_mass(|i| h[i] * h[i]);
    let mean = wp.weighted_mass(|i| h[i]);
    let rhs = wp.weighted_mass(|i| hx[i] * hx[i]) / wp.kappa0 + mean * mean / z;
    InequalityOutcome {
        lhs,
        rhs,
        pass: tol.le(lhs, rhs),
    }
}

/// Drift used in the comparison equation for `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GDrift {
    /// `c/nu - 2 (b/nu) f(v)/v_x`, i.e. `(w^2)'/w^2`; the operator is then
    /// symmetric in `L^2(w^2)` and `int g w^2 = Zhalf`.
    #[default]
    Symmetric,
    /// `c/nu - (b/nu) f(v)/v_x`.
    Single,
}

#[derive(Debug, Clone)]
pub struct ComparisonG {
    pub g: Vec<f64>,
    /// Max-norm residual of the discrete equation relative to the right-hand side.
    pub residual: f64,
    /// `int g^2 w^2`.
    pub mass: f64,
    pub report: ValidationReport,
}

/// Solves `kappa0 g - g_xx - D(x) g_x = kappa0 e^{(c/2nu) x}` with central
/// differences. The ends are closed by `g_{i+1} = e^{(c/2nu) dx} g_i`, the
/// far-field behaviour `g ~ e^{(c/2nu) x}` of the right-hand side.
pub fn comparison_g(
    wp: &WeightProfile,
    w: &WaveProfile,
    ints: &WaveIntegrals,
    drift: GDrift,
    tol: Tolerances,
) -> Result<ComparisonG> {
    let n = wp.grid.n();
    let dx = wp.grid.dx();
    let s = wp.s;
    let k0 = wp.kappa0;
    let g = if s == 0.0 {
        vec![1.0; n]
    } else {
        let nu_c = 2.0 * s;
        let d: Vec<f64> = (0..n)
            .map(|i| {
                let r = w.ratio_at(&w.point(i));
                match drift {
                    GDrift::Symmetric => nu_c - 2.0 * r,
                    GDrift::Single => nu_c - r,
                }
            })
            .collect();
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            lower[i] = -1.0 / (dx * dx) + d[i] / (2.0 * dx);
            diag[i] = k0 + 2.0 / (dx * dx);
            upper[i] = -1.0 / (dx * dx) - d[i] / (2.0 * dx);
            rhs[i] = k0 * (s * wp.x[i]).exp();
        }
        let growth = (s * dx).exp();
        diag[0] = -growth;
        upper[0] = 1.0;
        lower[n - 1] = -growth;
        diag[n - 1] = 1.0;
        thomas(&lower, &diag, &upper, &rhs)?
    };

    let mut residual = 0.0f64;
    if s != 0.0 {
        let mut rmax = 0.0f64;
        for i in 1..n - 1 {
            let r = w.ratio_at(&w.point(i));
            let dr = match drift {
                GDrift::Symmetric => 2.0 * s - 2.0 * r,
                GDrift::Single => 2.0 * s - r,
            };
            let gxx = (g[i + 1] - 2.0 * g[i] + g[i - 1]) / (dx * dx);
            let gx = (g[i + 1] - g[i - 1]) / (2.0 * dx);
            let f = k0 * (s * wp.x[i]).exp();
            residual = residual.max((k0 * g[i] - gxx - dr * gx - f).abs());
            rmax = rmax.max(f.abs());
        }
        residual /= rmax;
    }

    let mut report = ValidationReport::new();
    let neg = (0..n).find(|&i| !(g[i] > 0.0));
    report.push(
        "comparison g > 0",
        neg.is_none(),
        neg.map(|i| wp.x[i]),
        neg.map(|i| format!("g = {:e}", g[i])).unwrap_or_default(),
    );
    // |g_x| <= (c/2nu) g, read as a bound on the discrete log-derivative.
    let mut worst = (0.0f64, f64::NAN);
    if neg.is_none() {
        for i in 0..n - 1 {
            let slope = (g[i + 1] / g[i]).ln().abs() / dx;
            if slope - s > worst.0 || worst.1.is_nan() {
                worst = (slope - s, wp.x[i]);
            }
        }
    }
    let deriv_ok = neg.is_none() && worst.0 <= s * tol.rel + tol.abs;
    report.push(
        "comparison |g_x| <= (c/2nu) g",
        deriv_ok,
        Some(worst.1),
        format!("max |(ln g)_x| - c/2nu = {:e}", worst.0),
    );
    let mass = wp.weighted_mass(|i| g[i] * g[i]);
    let bound = ints.z_half * ints.z_half / ints.z;
    report.push(
        "comparison int g^2 w^2 >= Zhalf^2/Z",
        tol.le(bound, mass),
        None,
        format!("{mass} vs {bound}"),
    );
    Ok(ComparisonG {
        g,
        residual,
        mass,
        report,
    })
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    let mut denom = diag[0];
    if denom.abs() < 1e-300 {
        return Err(Error::LinearSolve("zero pivot at row 0".into()));
    }
    cp[0] = upper[0] / denom;
    dp[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * cp[i - 1];
        if denom.abs() < 1e-300 || !denom.is_finite() {
            return Err(Error::LinearSolve(format!("zero pivot at row {i}")));
        }
        cp[i] = upper[i] / denom;
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    Ok(x)
}

/// `<nu Delta u + b f'(v) u, u> = -nu int u_x^2 + b int f'(v) u^2`, with the
/// gradient term from forward differences.
pub fn quadratic_form(w: &WaveProfile, u: &Field) -> f64 {
    let g = w.grid();
    let b = w.params.b;
    let react = g.integrate(|i| w.spec().df(w.v[i]) * u.vals()[i] * u.vals()[i]);
    -w.params.nu * u.grad_sq() + b * react
}

/// Both sides of `<nu Delta u + b f'(v) u, u> <= -kappa_* ||u||_V^2 + C_* <u, v_x>^2`.
pub fn master_inequality(w: &WaveProfile, k: &StabilityConstants, u: &Field) -> (f64, f64) {
    let lhs = quadratic_form(w, u);
    let nv = u.norms().v;
    let proj = inner_slices(w.grid(), u.vals(), &w.vx);
    (lhs, -k.kappa_star * nv * nv + k.big_c_star * proj * proj)
}

/// `G(u) = f(u + v) - f(v)` at every node.
fn nonlinearity(w: &WaveProfile, u: &[f64]) -> Vec<f64> {
    u.iter()
        .zip(&w.v)
        .map(|(&ui, &vi)| w.spec().shifted_increment(ui, vi))
        .collect()
}

/// Global monotonicity: returns `(<A d + b(G(u1) - G(u2)), d>, b eta1 ||d||_H^2)`
/// with `d = u1 - u2` and `A = nu Delta` (Dirichlet).
pub fn monotonicity_sides(w: &WaveProfile, u1: &Field, u2: &Field) -> (f64, f64) {
    let g = w.grid();
    let d: Vec<f64> = u1.vals().iter().zip(u2.vals()).map(|(a, b)| a - b).collect();
    let df = Field::from_vec(*g, d.clone()).expect("finite difference field");
    let lap = df.apply_laplacian(crate::grid::Boundary::Dirichlet);
    let g1 = nonlinearity(w, u1.vals());
    let g2 = nonlinearity(w, u2.vals());
    let b = w.params.b;
    let lhs = g.integrate(|i| (w.params.nu * lap.vals()[i] + b * (g1[i] - g2[i])) * d[i]);
    (lhs, b * w.spec().eta1 * df.h_norm().powi(2))
}

/// Coercivity: returns `(<A u + b G(u), u>, -nu ||u||_V^2 + (nu + b eta1) ||u||_H^2)`.
pub fn coercivity_sides(w: &WaveProfile, u: &Field) -> (f64, f64) {
    let g = w.grid();
    let lap = u.apply_laplacian(crate::grid::Boundary::Dirichlet);
    let gu = nonlinearity(w, u.vals());
    let nu = w.params.nu;
    let b = w.params.b;
    let lhs = g.integrate(|i| (nu * lap.vals()[i] + b * gu[i]) * u.vals()[i]);
    let nm = u.norms();
    (lhs, -nu * nm.v * nm.v + (nu + b * w.spec().eta1) * nm.h * nm.h)
}

/// Assembles the constants from `kappa` and the weighted integrals.
pub fn compute_constants(w: &WaveProfile, kappa: f64, ints: &WaveIntegrals) -> StabilityConstants {
    let spec = w.spec();
    let nu = w.params.nu;
    let b = w.params.b;
    let s = w.half_drift();
    let k0 = kappa + s * s;
    let ratio = ints.z / (ints.z_half * ints.z_half);
    let c_prop = k0 / kappa * ratio;
    let growth = b * spec.eta / nu + 1.0;
    let q1 = 1.0 + growth / k0;
    let q2 = growth * c_prop;
    let kappa_star = kappa / k0 * nu / q1;
    let big_c_star = kappa_star * q2 + nu / kappa * s * s * k0 * ratio;
    let c_star = (kappa_star / (4.0 * b * spec.eta2)).min(1.0);
    StabilityConstants {
        kappa,
        gamma_minus: w.gamma_minus,
        gamma_plus: w.gamma_plus,
        z: ints.z,
        z_half: ints.z_half,
        c_prop,
        q1,
        q2,
        kappa_star,
        big_c_star,
        c_star,
        c: w.c,
        nu,
        b,
        eta: spec.eta,
        eta1: spec.eta1,
        eta2: spec.eta2,
    }
}

/// Everything downstream needs from a profile.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub integrals: WaveIntegrals,
    pub kappa: KappaInf,
    pub constants: StabilityConstants,
}

pub fn analyze(w: &WaveProfile) -> Result<Analysis> {
    let integrals = weighted_integrals(w)?;
    let kappa = kappa_inf(w)?;
    let constants = compute_constants(w, kappa.kappa, &integrals);
    Ok(Analysis {
        integrals,
        kappa,
        constants,
    })
}
