//! Two-sided shooting for the heteroclinic connection of
//! `v' = p`, `nu p' = c p - b f(v)`.
//!
//! The left branch leaves the saddle `(0, 0)` along its unstable direction and
//! runs forward until `v = 1/2`. The right branch is written in `y = 1 - v` so
//! that values near the upper rest state keep full relative precision; it
//! leaves `(1, 0)` backwards in `x`. The speed is bisected on the mismatch of
//! the two slopes at `v = 1/2`, which is increasing in `c`.

use super::WaveParams;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::reaction::ReactionSpec;

/// Distance of the starting point from the rest state.
const EPS: f64 = 1e-9;
/// Target `rate * h` for the RK4 step.
const STEP_SCALE: f64 = 0.005;
const MAX_STEPS: usize = 4_000_000;
const SPEED_WIDTH: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Shooter<'a> {
    pub spec: &'a ReactionSpec,
    pub params: WaveParams,
    pub c: f64,
}

enum Outcome {
    /// Reached `y = 1/2` after travelling `dist` with slope `p`.
    Reached { p: f64, dist: f64 },
    Turned,
    TooLong,
}

impl<'a> Shooter<'a> {
    /// Decay rate of `v_x` at `-inf` (positive).
    pub fn lambda(&self) -> f64 {
        let s = self.c / (2.0 * self.params.nu);
        s + (s * s - self.params.b / self.params.nu * self.spec.df(0.0)).sqrt()
    }

    /// Decay rate of `v_x` at `+inf` (negative).
    pub fn mu(&self) -> f64 {
        let s = self.c / (2.0 * self.params.nu);
        s - (s * s - self.params.b / self.params.nu * self.spec.df(1.0)).sqrt()
    }

    fn rate_scale(&self) -> f64 {
        let stiff = (self.params.b * self.spec.eta.abs().max(self.spec.df(0.0).abs())
            / self.params.nu)
            .sqrt();
        self.lambda().max(-self.mu()).max(stiff)
    }

    #[inline]
    fn rhs(&self, side: Side, y: f64, p: f64) -> (f64, f64) {
        let WaveParams { nu, b } = self.params;
        match side {
            Side::Left => (p, (self.c * p - b * self.spec.f(y)) / nu),
            Side::Right => (-p, (self.c * p - b * self.spec.f_reflected(y)) / nu),
        }
    }

    #[inline]
    fn rk4(&self, side: Side, y: f64, p: f64, h: f64) -> (f64, f64) {
        let (k1y, k1p) = self.rhs(side, y, p);
        let (k2y, k2p) = self.rhs(side, y + 0.5 * h * k1y, p + 0.5 * h * k1p);
        let (k3y, k3p) = self.rhs(side, y + 0.5 * h * k2y, p + 0.5 * h * k2p);
        let (k4y, k4p) = self.rhs(side, y + h * k3y, p + h * k3p);
        (
            y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
            p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
        )
    }

    fn start(&self, side: Side) -> (f64, f64) {
        match side {
            Side::Left => (EPS, self.lambda() * EPS),
            Side::Right => (EPS, -self.mu() * EPS),
        }
    }

    /// Signed step: forward for the left branch, backward for the right one.
    fn step(&self, side: Side) -> f64 {
        let h = STEP_SCALE / self.rate_scale();
        match side {
            Side::Left => h,
            Side::Right => -h,
        }
    }

    fn march(&self, side: Side) -> Outcome {
        let h = self.step(side);
        let (mut y, mut p) = self.start(side);
        for n in 0..MAX_STEPS {
            let (y1, p1) = self.rk4(side, y, p, h);
            if !(p1 > 0.0) || !y1.is_finite() {
                return Outcome::Turned;
            }
            if y1 >= 0.5 {
                // Locate the crossing inside the last step.
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let (ym, _) = self.rk4(side, y, p, mid * h);
                    if ym < 0.5 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let theta = 0.5 * (lo + hi);
                let (_, pc) = self.rk4(side, y, p, theta * h);
                let dist = (n as f64 + theta) * h.abs();
                return Outcome::Reached { p: pc, dist };
            }
            y = y1;
            p = p1;
        }
        Outcome::TooLong
    }

    /// Slope mismatch at `v = 1/2`; `-inf`/`+inf` when a branch fails.
    fn mismatch(&self) -> f64 {
        let pl = match self.march(Side::Left) {
            Outcome::Reached { p, .. } => p,
            _ => return f64::NEG_INFINITY,
        };
        match self.march(Side::Right) {
            Outcome::Reached { p, .. } => pl - p,
            _ => f64::INFINITY,
        }
    }
}

/// Bisects the speed to width `1e-10`.
pub(crate) fn find_speed(spec: &ReactionSpec, params: WaveParams) -> Result<f64> {
    let at = |c: f64| Shooter { spec, params, c }.mismatch();
    let scale = (params.nu * params.b).sqrt() * (1.0 + spec.eta.abs() + spec.df(0.0).abs());
    let mut hi = scale;
    let mut lo = -scale;
    let mut tries = 0;
    while !(at(hi) > 0.0) {
        hi *= 2.0;
        tries += 1;
        if tries > 20 {
            return Err(Error::Bracket { lo, hi });
        }
    }
    tries = 0;
    while !(at(lo) < 0.0) {
        lo *= 2.0;
        tries += 1;
        if tries > 20 {
            return Err(Error::Bracket { lo, hi });
        }
    }
    while hi - lo > SPEED_WIDTH {
        let mid = 0.5 * (lo + hi);
        let d = at(mid);
        if d == 0.0 {
            return Ok(mid);
        }
        if d > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Samples of `(y, p)` on the grid for the branch on `side`, with the branch
/// shifted so that `y = 1/2` sits at `x = 0`. Left-branch nodes are those with
/// `x < 0`, right-branch nodes those with `x >= 0`.
pub(crate) struct BranchSamples {
    pub y: Vec<f64>,
    pub p: Vec<f64>,
}

pub(crate) fn sample_branch(sh: &Shooter<'_>, side: Side, grid: &GridSpec) -> Result<BranchSamples> {
    let dist = match sh.march(side) {
        Outcome::Reached { dist, .. } => dist,
        _ => return Err(Error::Bracket { lo: sh.c, hi: sh.c }),
    };
    let rate = match side {
        Side::Left => sh.lambda(),
        Side::Right => sh.mu(),
    };
    let n = grid.n();
    let nodes: Vec<usize> = match side {
        Side::Left => (0..n).filter(|&i| grid.x(i) < 0.0).collect(),
        Side::Right => (0..n).filter(|&i| grid.x(i) >= 0.0).rev().collect(),
    };
    let x_start = match side {
        Side::Left => -dist,
        Side::Right => dist,
    };
    let h_max = STEP_SCALE / sh.rate_scale();
    let mut y_out = vec![f64::NAN; n];
    let mut p_out = vec![f64::NAN; n];
    let (mut y, mut p) = sh.start(side);
    let mut xc = x_start;
    for &i in &nodes {
        let xi = grid.x(i);
        let before_start = match side {
            Side::Left => xi < x_start,
            Side::Right => xi > x_start,
        };
        if before_start {
            // Linear asymptote ahead of the starting point.
            let ya = EPS * (rate * (xi - x_start)).exp();
            y_out[i] = ya;
            p_out[i] = match side {
                Side::Left => rate * ya,
                Side::Right => -rate * ya,
            };
            continue;
        }
        let span = xi - xc;
        let m = (span.abs() / h_max).ceil().max(1.0) as usize;
        let hs = span / m as f64;
        for _ in 0..m {
            let (y1, p1) = sh.rk4(side, y, p, hs);
            y = y1;
            p = p1;
        }
        xc = xi;
        if !(p > 0.0) {
            return Err(Error::NonMonotone { x: xi });
        }
        y_out[i] = y;
        p_out[i] = p;
    }
    Ok(BranchSamples { y: y_out, p: p_out })
}
