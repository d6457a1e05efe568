//! Uniform grid on a truncated line, trapezoid quadrature, the three-point
//! Laplacian and the `H`/`V` norms.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// Uniform grid `x_i = -l_dom + i dx`, `i = 0..n`, with `dx = 2 l_dom / (n - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    l_dom: f64,
    n: usize,
    dx: f64,
}

impl GridSpec {
    pub fn new(l_dom: f64, n: usize) -> Result<Self> {
        if !(l_dom.is_finite() && l_dom > 0.0) {
            return Err(Error::param("l_dom", format!("must be positive, got {l_dom}")));
        }
        if n < 16 {
            return Err(Error::param("n", format!("need at least 16 nodes, got {n}")));
        }
        Ok(Self {
            l_dom,
            n,
            dx: 2.0 * l_dom / (n - 1) as f64,
        })
    }

    pub fn l_dom(&self) -> f64 {
        self.l_dom
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        // Anchored at both ends so that the grid is symmetric to rounding.
        if 2 * i < self.n {
            -self.l_dom + i as f64 * self.dx
        } else {
            self.l_dom - (self.n - 1 - i) as f64 * self.dx
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Index of the node closest to `x` (clamped to the grid).
    pub fn nearest(&self, x: f64) -> usize {
        let t = ((x + self.l_dom) / self.dx).round();
        t.clamp(0.0, (self.n - 1) as f64) as usize
    }

    /// Trapezoid rule for samples on this grid.
    pub fn trapezoid(&self, vals: &[f64]) -> f64 {
        debug_assert_eq!(vals.len(), self.n);
        let inner: f64 = vals[1..self.n - 1].iter().sum();
        self.dx * (inner + 0.5 * (vals[0] + vals[self.n - 1]))
    }

    /// Trapezoid rule of `f(x_i)` evaluated on the fly.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        let n = self.n;
        let inner: f64 = (1..n - 1).map(&f).sum();
        self.dx * (inner + 0.5 * (f(0) + f(n - 1)))
    }

    pub fn same_as(&self, other: &GridSpec) -> bool {
        self.n == other.n && self.l_dom == other.l_dom
    }
}

/// Boundary treatment for the discrete Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Boundary nodes are held at zero; perturbation fields decay at infinity.
    Dirichlet,
    /// Reflecting ghost node, zero flux.
    Neumann,
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" => Ok(Boundary::Dirichlet),
            "neumann" => Ok(Boundary::Neumann),
            _ => Err(Error::UnknownBoundary(s.to_string())),
        }
    }
}

/// A real function sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    vals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    pub h: f64,
    pub v: f64,
    pub sup: f64,
}

impl Field {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            vals: vec![0.0; grid.n()],
        }
    }

    pub fn from_vec(grid: GridSpec, vals: Vec<f64>) -> Result<Self> {
        if vals.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} nodes",
                vals.len(),
                grid.n()
            )));
        }
        if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
            return Err(Error::param("field", format!("non-finite sample at node {i}")));
        }
        Ok(Self { grid, vals })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            vals: grid.nodes().into_iter().map(f).collect(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn vals(&self) -> &[f64] {
        &self.vals
    }

    pub fn vals_mut(&mut self) -> &mut [f64] {
        &mut self.vals
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.vals
    }

    pub fn scale(&mut self, s: f64) {
        self.vals.iter_mut().for_each(|v| *v *= s);
    }

    pub fn apply_laplacian(&self, bc: Boundary) -> Field {
        let n = self.grid.n();
        let inv = 1.0 / (self.grid.dx() * self.grid.dx());
        let u = &self.vals;
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv;
        }
        match bc {
            Boundary::Dirichlet => {}
            Boundary::Neumann => {
                out[0] = 2.0 * (u[1] - u[0]) * inv;
                out[n - 1] = 2.0 * (u[n - 2] - u[n - 1]) * inv;
            }
        }
        Field {
            grid: self.grid,
            vals: out,
        }
    }

    /// `sum ((u_{i+1} - u_i)/dx)^2 dx`, the forward-difference Dirichlet energy.
    pub fn grad_sq(&self) -> f64 {
        let dx = self.grid.dx();
        self.vals
            .windows(2)
            .map(|w| {
                let d = w[1] - w[0];
                d * d
            })
            .sum::<f64>()
            / dx
    }

    pub fn norms(&self) -> Norms {
        let h2 = self.grid.integrate(|i| self.vals[i] * self.vals[i]);
        let sup = self.vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        Norms {
            h: h2.sqrt(),
            v: (h2 + self.grad_sq()).sqrt(),
            sup,
        }
    }

    pub fn h_norm(&self) -> f64 {
        self.grid.integrate(|i| self.vals[i] * self.vals[i]).sqrt()
    }

    pub fn inner(&self, other: &Field) -> Result<f64> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch(format!(
                "n = {} vs {}, l_dom = {} vs {}",
                self.grid.n(),
                other.grid.n(),
                self.grid.l_dom(),
                other.grid.l_dom()
            )));
        }
        Ok(inner_slices(&self.grid, &self.vals, &other.vals))
    }
}

/// Trapezoid inner product of two sample vectors on `grid`.
#[inline]
pub fn inner_slices(grid: &GridSpec, a: &[f64], b: &[f64]) -> f64 {
    grid.integrate(|i| a[i] * b[i])
}

/// Prefactored backward-Euler diffusion solve `(I - dt nu Delta) u = rhs` with
/// homogeneous Dirichlet nodes at both ends.
#[derive(Debug, Clone)]
pub struct ImplicitDiffusion {
    r: f64,
    cprime: Vec<f64>,
    inv_denom: Vec<f64>,
}

impl ImplicitDiffusion {
    pub fn new(grid: &GridSpec, nu: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        let m = grid.n() - 2;
        let r = dt * nu / (grid.dx() * grid.dx());
        let diag = 1.0 + 2.0 * r;
        let off = -r;
        let mut cprime = vec![0.0; m];
        let mut inv_denom = vec![0.0; m];
        let mut prev = 0.0;
        for i in 0..m {
            let denom = diag - off * prev;
            if denom.abs() < 1e-300 {
                return Err(Error::LinearSolve(format!("zero pivot at row {i}")));
            }
            inv_denom[i] = 1.0 / denom;
            cprime[i] = off * inv_denom[i];
            prev = cprime[i];
        }
        Ok(Self { r, cprime, inv_denom })
    }

    /// Overwrites the interior of `u` with the solution; boundary nodes are set to zero.
    pub fn solve_in_place(&self, u: &mut [f64]) {
        let n = u.len();
        let m = n - 2;
        debug_assert_eq!(m, self.cprime.len());
        let off = -self.r;
        let rhs = &mut u[1..n - 1];
        let mut prev = 0.0;
        for i in 0..m {
            rhs[i] = (rhs[i] - off * prev) * self.inv_denom[i];
            prev = rhs[i];
        }
        for i in (0..m - 1).rev() {
            rhs[i] -= self.cprime[i] * rhs[i + 1];
        }
        u[0] = 0.0;
        u[n - 1] = 0.0;
    }
}
