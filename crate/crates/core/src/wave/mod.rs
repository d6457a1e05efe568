//! Travelling-wave profiles `c v_x = nu v_xx + b f(v)` with `v(-inf) = 0`,
//! `v(+inf) = 1`, their landmark points and weighted integrals.

mod shooting;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::reaction::{ReactionKind, ReactionSpec};
use crate::report::{Tolerances, ValidationReport};
use serde::{Deserialize, Serialize};
use shooting::{sample_branch, Shooter, Side};

/// Below this `v_x` the ratio `f(v)/v_x` is replaced by its limit.
const VX_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub nu: f64,
    pub b: f64,
}

impl WaveParams {
    pub fn new(nu: f64, b: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::param("nu", format!("must be positive, got {nu}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::param("b", format!("must be positive, got {b}")));
        }
        Ok(Self { nu, b })
    }

    /// Inverse front width `sqrt(b / (2 nu))`.
    pub fn k(&self) -> f64 {
        (self.b / (2.0 * self.nu)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveMethod {
    /// Closed form for Nagumo reactions, shooting otherwise.
    #[default]
    Auto,
    ClosedForm,
    Shooting,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Landmarks {
    /// `v(x0) = a`.
    pub x0: f64,
    /// `v_xx(x1) = 0`.
    pub x1: f64,
    /// `v(x_star) = v*`.
    pub x_star: f64,
    /// Pairs `(alpha, x_alpha)` with `(b/nu) f(v)/v_x = alpha c / nu` at `x_alpha`.
    pub alphas: Vec<(f64, f64)>,
}

impl Landmarks {
    pub fn x_alpha(&self, alpha: f64) -> Option<f64> {
        self.alphas
            .iter()
            .find(|(a, _)| (a - alpha).abs() < 1e-12)
            .map(|&(_, x)| x)
    }
}

/// Profile values at a point. `vc = 1 - v` is carried separately so that the
/// right tail keeps relative precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub v: f64,
    pub vc: f64,
    pub vx: f64,
    pub vxx: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveIntegrals {
    /// `int e^{-(c/nu) x} v_x^2`.
    #[serde(rename = "Z")]
    pub z: f64,
    /// `int e^{-(c/2nu) x} v_x^2`.
    #[serde(rename = "Zhalf")]
    pub z_half: f64,
    pub norm_vx_sq: f64,
    pub norm_vxx_sq: f64,
}

#[derive(Debug, Clone)]
pub struct WaveProfile {
    pub params: WaveParams,
    pub c: f64,
    grid: GridSpec,
    spec: ReactionSpec,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub vc: Vec<f64>,
    pub vx: Vec<f64>,
    pub vxx: Vec<f64>,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub landmarks: Landmarks,
    /// `Some(k)` when the profile is the logistic closed form.
    logistic_k: Option<f64>,
}

/// `gamma_-/+ = c/2nu -/+ sqrt((c/2nu)^2 - (b/nu) f'(0 resp. 1))`.
pub fn asymptotic_ratios(spec: &ReactionSpec, params: WaveParams, c: f64) -> (f64, f64) {
    let s = c / (2.0 * params.nu);
    let q = params.b / params.nu;
    (
        s - (s * s - q * spec.df(0.0)).sqrt(),
        s + (s * s - q * spec.df(1.0)).sqrt(),
    )
}

/// Closed-form Nagumo wave `v = 1 / (1 + e^{-k x})`, `c = sqrt(2 nu b) (1/2 - a)`.
pub fn nagumo_profile(params: WaveParams, a: f64, grid: GridSpec) -> Result<WaveProfile> {
    if a > 0.5 {
        return Err(Error::param(
            "a",
            format!("closed-form wave needs a <= 1/2 for c >= 0, got {a}"),
        ));
    }
    let spec = ReactionSpec::nagumo(a)?;
    let k = params.k();
    let c = (2.0 * params.nu * params.b).sqrt() * (0.5 - a);
    let n = grid.n();
    let x = grid.nodes();
    let mut v = Vec::with_capacity(n);
    let mut vc = Vec::with_capacity(n);
    let mut vx = Vec::with_capacity(n);
    let mut vxx = Vec::with_capacity(n);
    for &xi in &x {
        let p = logistic_point(k, xi);
        v.push(p.v);
        vc.push(p.vc);
        vx.push(p.vx);
        vxx.push(p.vxx);
    }
    WaveProfile::assemble(params, c, grid, spec, x, v, vc, vx, vxx, Some(k))
}

#[inline]
fn logistic_point(k: f64, x: f64) -> ProfilePoint {
    let v = 1.0 / (1.0 + (-k * x).exp());
    let vc = 1.0 / (1.0 + (k * x).exp());
    let vx = k * v * vc;
    ProfilePoint {
        v,
        vc,
        vx,
        vxx: k * vx * (vc - v),
    }
}

/// Wave by two-sided shooting on the speed, recentred so that `v(0) = 1/2`.
/// Fails if the ODE residual (fourth-order differences of `v_x`) exceeds
/// `tol * max v_x` at any interior node.
pub fn solve_profile(
    spec: &ReactionSpec,
    params: WaveParams,
    grid: GridSpec,
    tol: f64,
) -> Result<WaveProfile> {
    let c = shooting::find_speed(spec, params)?;
    let sh = Shooter { spec, params, c };
    let left = sample_branch(&sh, Side::Left, &grid)?;
    let right = sample_branch(&sh, Side::Right, &grid)?;
    let n = grid.n();
    let x = grid.nodes();
    let (mut v, mut vc, mut vx, mut vxx) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        if x[i] < 0.0 {
            v[i] = left.y[i];
            vc[i] = 1.0 - left.y[i];
            vx[i] = left.p[i];
            vxx[i] = (c * vx[i] - params.b * spec.f(v[i])) / params.nu;
        } else {
            vc[i] = right.y[i];
            v[i] = 1.0 - right.y[i];
            vx[i] = right.p[i];
            vxx[i] = (c * vx[i] - params.b * spec.f_reflected(vc[i])) / params.nu;
        }
        if !(vx[i] > 0.0) {
            return Err(Error::NonMonotone { x: x[i] });
        }
    }
    let w = WaveProfile::assemble(params, c, grid, spec.clone(), x, v, vc, vx, vxx, None)?;
    let res = w.residual_max();
    let vmax = w.vx.iter().copied().fold(0.0, f64::max);
    if !(res <= tol * vmax) {
        return Err(Error::ProfileResidual {
            residual: res / vmax,
            tol,
        });
    }
    Ok(w)
}

/// Picks closed form or shooting per `method`.
pub fn build_profile(
    spec: &ReactionSpec,
    params: WaveParams,
    grid: GridSpec,
    method: WaveMethod,
    tol: f64,
) -> Result<WaveProfile> {
    let nagumo_a = match spec.kind {
        ReactionKind::Nagumo { a } => Some(a),
        ReactionKind::Polynomial => None,
    };
    match (method, nagumo_a) {
        (WaveMethod::Auto | WaveMethod::ClosedForm, Some(a)) => nagumo_profile(params, a, grid),
        (WaveMethod::ClosedForm, None) => Err(Error::param(
            "method",
            "closed form is only available for the Nagumo reaction",
        )),
        _ => solve_profile(spec, params, grid, tol),
    }
}

impl WaveProfile {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        params: WaveParams,
        c: f64,
        grid: GridSpec,
        spec: ReactionSpec,
        x: Vec<f64>,
        v: Vec<f64>,
        vc: Vec<f64>,
        vx: Vec<f64>,
        vxx: Vec<f64>,
        logistic_k: Option<f64>,
    ) -> Result<Self> {
        let (gamma_minus, gamma_plus) = asymptotic_ratios(&spec, params, c);
        let mut w = Self {
            params,
            c,
            grid,
            spec,
            x,
            v,
            vc,
            vx,
            vxx,
            gamma_minus,
            gamma_plus,
            landmarks: Landmarks {
                x0: f64::NAN,
                x1: f64::NAN,
                x_star: f64::NAN,
                alphas: Vec::new(),
            },
            logistic_k,
        };
        w.landmarks = find_landmarks(&w, &[0.5])?;
        Ok(w)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn spec(&self) -> &ReactionSpec {
        &self.spec
    }

    pub fn is_closed_form(&self) -> bool {
        self.logistic_k.is_some()
    }

    /// Decay rate of `v_x` at `-inf`, `c/nu - gamma_-`.
    pub fn rate_left(&self) -> f64 {
        self.c / self.params.nu - self.gamma_minus
    }

    /// Decay rate of `v_x` at `+inf`, `c/nu - gamma_+` (negative).
    pub fn rate_right(&self) -> f64 {
        self.c / self.params.nu - self.gamma_plus
    }

    /// `c / 2nu`.
    pub fn half_drift(&self) -> f64 {
        self.c / (2.0 * self.params.nu)
    }

    /// Profile at an arbitrary point: closed form when available, cubic
    /// Hermite interpolation inside the grid and exponential tails outside.
    pub fn eval(&self, x: f64) -> ProfilePoint {
        if let Some(k) = self.logistic_k {
            return logistic_point(k, x);
        }
        let n = self.grid.n();
        let x_lo = self.x[0];
        let x_hi = self.x[n - 1];
        if x <= x_lo {
            let e = (self.rate_left() * (x - x_lo)).exp();
            let v = self.v[0] * e;
            let vx = self.vx[0] * e;
            return ProfilePoint {
                v,
                vc: 1.0 - v,
                vx,
                vxx: self.rate_left() * vx,
            };
        }
        if x >= x_hi {
            let e = (self.rate_right() * (x - x_hi)).exp();
            let vc = self.vc[n - 1] * e;
            let vx = self.vx[n - 1] * e;
            return ProfilePoint {
                v: 1.0 - vc,
                vc,
                vx,
                vxx: self.rate_right() * vx,
            };
        }
        let dx = self.grid.dx();
        let j = (((x - x_lo) / dx).floor() as usize).min(n - 2);
        let t = (x - self.x[j]) / dx;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let herm = |y0: f64, m0: f64, y1: f64, m1: f64| {
            h00 * y0 + h10 * dx * m0 + h01 * y1 + h11 * dx * m1
        };
        let v = herm(self.v[j], self.vx[j], self.v[j + 1], self.vx[j + 1]);
        let vc = herm(self.vc[j], -self.vx[j], self.vc[j + 1], -self.vx[j + 1]);
        let vx = herm(
            self.vx[j],
            self.vxx[j],
            self.vx[j + 1],
            self.vxx[j + 1],
        );
        // v_xx itself follows from the ODE.
        let WaveParams { nu, b } = self.params;
        let fv = if v <= 0.5 { self.spec.f(v) } else { self.spec.f_reflected(vc) };
        ProfilePoint {
            v,
            vc,
            vx,
            vxx: (self.c * vx - b * fv) / nu,
        }
    }

    /// `f(v)` computed from whichever of `v`, `1 - v` is the small one.
    #[inline]
    pub fn f_at(&self, p: &ProfilePoint) -> f64 {
        if p.v <= 0.5 {
            self.spec.f(p.v)
        } else {
            self.spec.f_reflected(p.vc)
        }
    }

    /// `(b/nu) f(v)/v_x`, with the limits `gamma_-/+` once `v_x` underflows.
    #[inline]
    pub fn ratio_at(&self, p: &ProfilePoint) -> f64 {
        if p.vx < VX_FLOOR {
            return if p.v < 0.5 { self.gamma_minus } else { self.gamma_plus };
        }
        self.params.b / self.params.nu * self.f_at(p) / p.vx
    }

    pub fn point(&self, i: usize) -> ProfilePoint {
        ProfilePoint {
            v: self.v[i],
            vc: self.vc[i],
            vx: self.vx[i],
            vxx: self.vxx[i],
        }
    }

    /// `(b/nu) f(v)/v_x` at every node.
    pub fn ratio(&self) -> Vec<f64> {
        (0..self.grid.n()).map(|i| self.ratio_at(&self.point(i))).collect()
    }

    /// Largest `|c v_x - nu D v_x - b f(v)|` over nodes `2..n-3`, with `D` the
    /// fourth-order central difference.
    pub fn residual_max(&self) -> f64 {
        let n = self.grid.n();
        let dx = self.grid.dx();
        let WaveParams { nu, b } = self.params;
        (2..n - 2)
            .map(|i| {
                let d = (-self.vx[i + 2] + 8.0 * self.vx[i + 1] - 8.0 * self.vx[i - 1]
                    + self.vx[i - 2])
                    / (12.0 * dx);
                (self.c * self.vx[i] - nu * d - b * self.f_at(&self.point(i))).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Samples of `v(x + shift)` and `v_x(x + shift)` on the grid.
    pub fn shifted(&self, shift: f64, v_out: &mut [f64], vx_out: &mut [f64]) {
        for (i, (vo, vxo)) in v_out.iter_mut().zip(vx_out.iter_mut()).enumerate() {
            let p = self.eval(self.x[i] + shift);
            *vo = p.v;
            *vxo = p.vx;
        }
    }
}

/// Bisection for the root of an increasing function on `[lo, hi]`.
fn bisect_increasing(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    if !(g(lo) <= 0.0 && g(hi) >= 0.0) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-14 * (1.0 + mid.abs()) {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Landmarks `x0`, `x1`, `x_star` and `x_alpha` for each requested `alpha`.
pub fn find_landmarks(w: &WaveProfile, alphas: &[f64]) -> Result<Landmarks> {
    let spec = &w.spec;
    let lo = w.x[0];
    let hi = w.x[w.x.len() - 1];
    let by_value = |target: f64| {
        bisect_increasing(
            |x| {
                let p = w.eval(x);
                if target <= 0.5 {
                    p.v - target
                } else {
                    (1.0 - target) - p.vc
                }
            },
            lo,
            hi,
        )
        .unwrap_or(f64::NAN)
    };
    let x0 = by_value(spec.a);
    let x_star = by_value(spec.v_star);
    let x1 = bisect_increasing(|x| -w.eval(x).vxx, lo, hi).unwrap_or(f64::NAN);
    let nu = w.params.nu;
    let mut out = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let target = alpha * w.c / nu;
        if !(target > w.gamma_minus && target < w.gamma_plus) {
            return Err(Error::LandmarkRange {
                alpha,
                lo: w.gamma_minus * nu / w.c,
                hi: w.gamma_plus * nu / w.c,
            });
        }
        let xa = bisect_increasing(|x| w.ratio_at(&w.eval(x)) - target, lo, hi).ok_or(
            Error::LandmarkRange {
                alpha,
                lo: w.ratio_at(&w.eval(lo)),
                hi: w.ratio_at(&w.eval(hi)),
            },
        )?;
        out.push((alpha, xa));
    }
    Ok(Landmarks {
        x0,
        x1,
        x_star,
        alphas: out,
    })
}

fn tail(value: f64, rate: f64, side: &'static str) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::TailGrowth { side, rate });
    }
    Ok(value / rate)
}

/// Trapezoid integral of `e^{-beta x} v_x^2` (or `v_xx^2`) plus the
/// exponential tails beyond the grid.
fn weighted(w: &WaveProfile, beta: f64, second: bool) -> Result<f64> {
    let g = &w.grid;
    let n = g.n();
    let d = |i: usize| if second { w.vxx[i] } else { w.vx[i] };
    let integrand = |i: usize| (-beta * w.x[i]).exp() * d(i) * d(i);
    let body = g.integrate(integrand);
    let left = tail(integrand(0), 2.0 * w.rate_left() - beta, "left")?;
    let right = tail(integrand(n - 1), beta - 2.0 * w.rate_right(), "right")?;
    Ok(body + left + right)
}

pub fn weighted_integrals(w: &WaveProfile) -> Result<WaveIntegrals> {
    let s = w.c / w.params.nu;
    Ok(WaveIntegrals {
        z: weighted(w, s, false)?,
        z_half: weighted(w, 0.5 * s, false)?,
        norm_vx_sq: weighted(w, 0.0, false)?,
        norm_vxx_sq: weighted(w, 0.0, true)?,
    })
}

/// Pointwise profile bounds: the energy bound `v_x^2 <= (2b/nu) int_v^1 f`,
/// monotonicity of `(b/nu) f(v)/v_x`, the tail ratios anchored at the grid
/// centre, and log-concavity of `v_x`.
pub fn verify_profile_bounds(w: &WaveProfile, tol: Tolerances) -> ValidationReport {
    let n = w.grid.n();
    let WaveParams { nu, b } = w.params;
    let spec = &w.spec;
    let mut rep = ValidationReport::new();

    let mut worst: Option<(f64, f64, f64)> = None;
    for i in 0..n {
        let lhs = w.vx[i] * w.vx[i];
        let rhs = 2.0 * b / nu * spec.upper_integral(w.v[i]);
        if !tol.le(lhs, rhs) && worst.is_none() {
            worst = Some((w.x[i], lhs, rhs));
        }
    }
    rep.push(
        "energy bound v_x^2 <= (2b/nu) int_v^1 f",
        worst.is_none(),
        worst.map(|t| t.0),
        worst
            .map(|(_, l, r)| format!("lhs {l:e} > rhs {r:e}"))
            .unwrap_or_default(),
    );

    let ratio = w.ratio();
    let bad = (1..n).find(|&i| ratio[i] < ratio[i - 1] - tol.slack(ratio[i - 1]));
    rep.push(
        "ratio (b/nu) f(v)/v_x increasing",
        bad.is_none(),
        bad.map(|i| w.x[i]),
        bad.map(|i| format!("{} < {}", ratio[i], ratio[i - 1]))
            .unwrap_or_else(|| format!("range [{}, {}]", ratio[0], ratio[n - 1])),
    );

    let ic = n / 2;
    let k_plus = w.vc[ic] / w.vx[ic];
    let k_minus = w.v[ic] / w.vx[ic];
    let bad = (0..n).find(|&i| {
        if i >= ic {
            !tol.le(w.vc[i] / w.vx[i], k_plus)
        } else {
            !tol.le(w.v[i] / w.vx[i], k_minus)
        }
    });
    rep.push(
        "tail ratios bounded by K+/K- at grid centre",
        bad.is_none(),
        bad.map(|i| w.x[i]),
        format!("K+ = {k_plus}, K- = {k_minus}"),
    );

    let lc: Vec<f64> = (0..n).map(|i| w.vxx[i] / w.vx[i]).collect();
    let bad = (1..n).find(|&i| lc[i] > lc[i - 1] + tol.slack(lc[i - 1]));
    rep.push(
        "log-concavity v_xx/v_x decreasing",
        bad.is_none(),
        bad.map(|i| w.x[i]),
        bad.map(|i| format!("{} > {}", lc[i], lc[i - 1])).unwrap_or_default(),
    );
    rep
}
