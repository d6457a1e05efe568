//! Bistable polynomial reaction terms and their global growth constants.

use crate::error::{Error, Result};
use crate::report::ValidationReport;
use serde::Serialize;

/// Tolerance for accepting `int_0^1 f dv >= 0`; the balanced Nagumo case is exactly zero.
pub const INTEGRAL_SLACK: f64 = 1e-9;
const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReactionKind {
    Nagumo { a: f64 },
    Polynomial,
}

/// A polynomial reaction term `f(v) = sum_k coeffs[k] v^k` together with the
/// constants used by the nonlinear estimates.
///
/// `eta1 = sup f'` over the real line, `lip_l` is a constant with
/// `|f(x1) - f(x2)| <= L |x1 - x2| (1 + x1^2 + x2^2)`, `eta2` bounds the
/// Taylor remainder `|f(u+v) - f(v) - f'(v) u| <= eta2 (1 + |u|) u^2` for
/// `v` in `[0, 1]`, and `eta = max_{[0,1]} f'`. Polynomials of degree above
/// three have no finite `lip_l`/`eta2`; those are reported as infinite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReactionSpec {
    pub kind: ReactionKind,
    pub coeffs: Vec<f64>,
    #[serde(skip)]
    dcoeffs: Vec<f64>,
    #[serde(skip)]
    d2coeffs: Vec<f64>,
    /// Coefficients of `y -> f(1 - y)`, used near the upper rest state.
    #[serde(skip)]
    comp_coeffs: Vec<f64>,
    pub a: f64,
    pub v_star: f64,
    pub eta1: f64,
    pub lip_l: f64,
    pub eta2: f64,
    pub eta: f64,
}

#[inline]
fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &ck)| k as f64 * ck)
        .collect()
}

/// Coefficients of `p(1 - y)` in powers of `y`.
fn reflect_about_one(c: &[f64]) -> Vec<f64> {
    let d = c.len();
    let mut out = vec![0.0; d];
    let mut mag = 0.0;
    for (k, &ck) in c.iter().enumerate() {
        mag += ck.abs();
        // (1 - y)^k = sum_j binom(k, j) (-y)^j
        let mut binom = 1.0;
        for (j, o) in out.iter_mut().enumerate().take(k + 1) {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            *o += ck * binom * sign;
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
    }
    // f(1) that is zero up to rounding is zero; otherwise f(v)/v_x blows up in the right tail.
    if out[0].abs() <= 8.0 * f64::EPSILON * mag {
        out[0] = 0.0;
    }
    out
}

fn trim(mut c: Vec<f64>) -> Vec<f64> {
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    c
}

/// Roots of `p` in `[lo, hi]` located by a sign-change scan plus bisection.
fn roots_in(p: &[f64], lo: f64, hi: f64, scan: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let h = (hi - lo) / scan as f64;
    let mut x0 = lo;
    let mut f0 = horner(p, x0);
    for i in 1..=scan {
        let x1 = if i == scan { hi } else { lo + i as f64 * h };
        let f1 = horner(p, x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            let (mut a, mut b, mut fa) = (x0, x1, f0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = horner(p, m);
                if fm == 0.0 || (b - a) < 1e-15 * (1.0 + m.abs()) {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        roots.push(hi);
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    roots
}

impl ReactionSpec {
    /// `f(v) = v (1 - v) (v - a)`.
    pub fn nagumo(a: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::param("a", format!("must lie in (0, 1), got {a}")));
        }
        let coeffs = vec![0.0, -a, 1.0 + a, -1.0];
        let mut spec = Self::assemble(coeffs, ReactionKind::Nagumo { a });
        spec.a = a;
        spec.v_star = (1.0 + a) / 3.0;
        spec.eta1 = (1.0 - a + a * a) / 3.0;
        spec.eta = spec.eta1;
        spec.eta2 = (1.0 + a).max(2.0 - a).max(1.0);
        Ok(spec)
    }

    /// Cubic `c0 + c1 v + c2 v^2 + c3 v^3`.
    pub fn cubic(coeffs: [f64; 4]) -> Result<Self> {
        Self::polynomial(coeffs.to_vec())
    }

    /// General polynomial in ascending powers. Structural assumptions are not
    /// enforced here; run [`ReactionSpec::validate_assumptions`].
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::param("coeffs", "empty coefficient list"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("coeffs", "non-finite coefficient"));
        }
        Ok(Self::assemble(trim(coeffs), ReactionKind::Polynomial))
    }

    fn assemble(coeffs: Vec<f64>, kind: ReactionKind) -> Self {
        let dcoeffs = derivative(&coeffs);
        let d2coeffs = derivative(&dcoeffs);
        let comp_coeffs = reflect_about_one(&coeffs);
        let mut spec = Self {
            kind,
            coeffs,
            dcoeffs,
            d2coeffs,
            comp_coeffs,
            a: f64::NAN,
            v_star: f64::NAN,
            eta1: f64::INFINITY,
            lip_l: f64::INFINITY,
            eta2: f64::INFINITY,
            eta: f64::NAN,
        };
        spec.a = spec.find_middle_zero();
        spec.v_star = spec.find_inflection();
        spec.eta = spec.max_df_on_unit();
        spec.eta1 = spec.sup_df();
        let (lip, eta2) = spec.cubic_growth_constants();
        spec.lip_l = lip;
        spec.eta2 = eta2;
        spec
    }

    fn find_middle_zero(&self) -> f64 {
        // The unstable zero is where f crosses from negative to positive.
        roots_in(&self.coeffs, 1e-9, 1.0 - 1e-9, 4096)
            .into_iter()
            .find(|&r| self.df(r) > 0.0)
            .unwrap_or(f64::NAN)
    }

    fn find_inflection(&self) -> f64 {
        roots_in(&self.d2coeffs, 0.0, 1.0, 4096)
            .into_iter()
            .find(|&r| horner(&self.d2coeffs, r - 1e-7) > 0.0)
            .unwrap_or(f64::NAN)
    }

    fn max_df_on_unit(&self) -> f64 {
        let mut best = self.df(0.0).max(self.df(1.0));
        for r in roots_in(&self.d2coeffs, 0.0, 1.0, 4096) {
            best = best.max(self.df(r));
        }
        best
    }

    fn sup_df(&self) -> f64 {
        let d = &self.dcoeffs;
        let deg = d.len() - 1;
        let lead = d[deg];
        if deg == 0 {
            return d[0];
        }
        if deg % 2 == 1 || lead > 0.0 {
            return f64::INFINITY;
        }
        // Cauchy bound on the critical points of f'.
        let d2 = &self.d2coeffs;
        let l2 = *d2.last().unwrap();
        let r = 1.0 + d2.iter().map(|c| (c / l2).abs()).fold(0.0, f64::max);
        roots_in(d2, -r, r, 1 << 16)
            .into_iter()
            .map(|x| self.df(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(lip_l, eta2)` for polynomials of degree at most three.
    ///
    /// With `c = [c0, c1, c2, c3]`, the difference quotient is
    /// `c1 + c2 (x1 + x2) + c3 (x1^2 + x1 x2 + x2^2)`; using
    /// `|x1 + x2| <= 1/2 + x1^2 + x2^2` and `|x1^2 + x1 x2 + x2^2| <= 3/2 (x1^2 + x2^2)`
    /// gives `L = max(|c1| + |c2|/2, |c2| + 3|c3|/2)`. The remainder of a cubic
    /// is `f''(v)/2 u^2 + c3 u^3` exactly, and `f''` is affine so its maximum
    /// modulus on `[0,1]` sits at an endpoint.
    fn cubic_growth_constants(&self) -> (f64, f64) {
        if self.coeffs.len() > 4 {
            return (f64::INFINITY, f64::INFINITY);
        }
        let c = |k: usize| self.coeffs.get(k).copied().unwrap_or(0.0);
        let lip = (c(1).abs() + 0.5 * c(2).abs()).max(c(2).abs() + 1.5 * c(3).abs());
        let m2 = self.d2f(0.0).abs().max(self.d2f(1.0).abs());
        let eta2 = (0.5 * m2).max(c(3).abs()).max(1.0);
        (lip, eta2)
    }

    #[inline]
    pub fn f(&self, v: f64) -> f64 {
        horner(&self.coeffs, v)
    }

    #[inline]
    pub fn df(&self, v: f64) -> f64 {
        horner(&self.dcoeffs, v)
    }

    #[inline]
    pub fn d2f(&self, v: f64) -> f64 {
        horner(&self.d2coeffs, v)
    }

    /// `f(1 - y)` evaluated without forming `1 - y`.
    #[inline]
    pub fn f_reflected(&self, y: f64) -> f64 {
        horner(&self.comp_coeffs, y)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `f(u + v_ref) - f(v_ref)`.
    #[inline]
    pub fn shifted_increment(&self, u: f64, v_ref: f64) -> f64 {
        self.f(u + v_ref) - self.f(v_ref)
    }

    /// `f(u + v_ref) - f(v_ref) - f'(v_ref) u`.
    #[inline]
    pub fn linearization_remainder(&self, u: f64, v_ref: f64) -> f64 {
        self.f(u + v_ref) - self.f(v_ref) - self.df(v_ref) * u
    }

    /// Pointwise [`Self::shifted_increment`] over sample vectors.
    pub fn shifted_increment_field(&self, u: &[f64], v_ref: &[f64], out: &mut [f64]) {
        for ((o, &ui), &vi) in out.iter_mut().zip(u).zip(v_ref) {
            *o = self.shifted_increment(ui, vi);
        }
    }

    /// `int_0^1 f(v) dv` by composite Simpson, refined until successive
    /// estimates agree to `1e-10`.
    pub fn unit_integral(&self) -> f64 {
        let simpson = |m: usize| {
            let h = 1.0 / m as f64;
            let mut s = self.f(0.0) + self.f(1.0);
            for i in 1..m {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * self.f(i as f64 * h);
            }
            s * h / 3.0
        };
        let mut m = 8;
        let mut prev = simpson(m);
        loop {
            m *= 2;
            let cur = simpson(m);
            if (cur - prev).abs() < 1e-10 || m > 1 << 20 {
                return cur;
            }
            prev = cur;
        }
    }

    /// `int_v^1 f(s) ds` by the same Simpson rule (used by the profile bounds).
    pub fn upper_integral(&self, v: f64) -> f64 {
        let m = 64;
        let h = (1.0 - v) / m as f64;
        let mut s = self.f(v) + self.f(1.0);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * self.f(v + i as f64 * h);
        }
        s * h / 3.0
    }

    /// Checks the bistable structure on a uniform sample of `[-0.1, 1.1]`.
    /// Violations are reported with the offending `v`; nothing here errors.
    pub fn validate_assumptions(&self, samples: usize) -> ValidationReport {
        let samples = samples.max(100);
        let mut r = ValidationReport::new();
        let a = self.a;
        let vs = self.v_star;
        let pts: Vec<f64> = (0..samples)
            .map(|i| -0.1 + 1.2 * i as f64 / (samples - 1) as f64)
            .collect();

        r.push(
            "a in (0,1)",
            a > 0.0 && a < 1.0,
            Some(a),
            format!("middle zero a = {a}"),
        );
        for (name, v) in [("f(0)=0", 0.0), ("f(a)=0", a), ("f(1)=0", 1.0)] {
            let fv = self.f(v);
            r.push(name, fv.abs() <= ZERO_TOL, Some(v), format!("f = {fv:e}"));
        }

        let worst = |range: &dyn Fn(f64) -> bool, bad: &dyn Fn(f64) -> bool| {
            pts.iter()
                .copied()
                .filter(|&v| range(v) && bad(v))
                .next()
        };
        let neg = worst(&|v| v > 0.0 && v < a, &|v| self.f(v) >= 0.0);
        r.push(
            "f<0 on (0,a)",
            a.is_finite() && neg.is_none(),
            neg,
            neg.map(|v| format!("f({v}) = {:e}", self.f(v))).unwrap_or_default(),
        );
        let pos = worst(&|v| v > a && v < 1.0, &|v| self.f(v) <= 0.0);
        r.push(
            "f>0 on (a,1)",
            a.is_finite() && pos.is_none(),
            pos,
            pos.map(|v| format!("f({v}) = {:e}", self.f(v))).unwrap_or_default(),
        );

        let d0 = self.df(0.0);
        let da = self.df(a);
        let d1 = self.df(1.0);
        r.push("f'(0)<0", d0 < 0.0, Some(0.0), format!("f'(0) = {d0}"));
        r.push("f'(a)>0", da > 0.0, Some(a), format!("f'(a) = {da}"));
        r.push("f'(1)<0", d1 < 0.0, Some(1.0), format!("f'(1) = {d1}"));

        let convex = worst(&|v| (0.0..vs).contains(&v), &|v| self.d2f(v) <= 0.0);
        r.push(
            "f''>0 on [0,v*)",
            vs.is_finite() && convex.is_none(),
            convex.or(if vs.is_finite() { None } else { Some(f64::NAN) }),
            convex.map(|v| format!("f''({v}) = {:e}", self.d2f(v))).unwrap_or_default(),
        );
        let concave = worst(&|v| v > vs && v <= 1.0, &|v| self.d2f(v) >= 0.0);
        r.push(
            "f''<0 on (v*,1]",
            vs.is_finite() && concave.is_none(),
            concave,
            concave.map(|v| format!("f''({v}) = {:e}", self.d2f(v))).unwrap_or_default(),
        );

        let integral = self.unit_integral();
        r.push(
            "int_0^1 f >= 0",
            integral >= -INTEGRAL_SLACK,
            None,
            format!("integral = {integral:e}"),
        );
        r.push(
            "eta <= eta1 < inf",
            self.eta1.is_finite() && self.eta <= self.eta1 + ZERO_TOL,
            None,
            format!("eta = {}, eta1 = {}", self.eta, self.eta1),
        );
        r.push(
            "growth constants L, eta2 finite",
            self.lip_l.is_finite() && self.eta2.is_finite(),
            None,
            format!("L = {}, eta2 = {}", self.lip_l, self.eta2),
        );
        r
    }
}
