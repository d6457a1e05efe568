//! Grid realisation of multiplicative Q-Wiener noise `Sigma(v) dW = amp sigma(v) K dW`.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::report::ValidationReport;
use crate::wave::WaveProfile;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Kernel entries below this are dropped from the band.
const KERNEL_CUTOFF: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    /// One independent white-noise coordinate per node, `K = I / sqrt(dx)`.
    White,
    /// `k(x, y) = exp(-(x - y)^2 / (2 corr_len^2))`, `K_ij = k(x_i, x_j) sqrt(dx)`.
    GaussianKernel { corr_len: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaKind {
    /// `sigma(v) = v (1 - v)` with `v` clamped to `[-1, 2]`.
    #[default]
    Vv1m,
    /// `sigma = 1`: additive noise. Does not vanish at the rest states.
    Constant,
}

impl SigmaKind {
    #[inline]
    pub fn eval(self, v: f64) -> f64 {
        match self {
            SigmaKind::Vv1m => {
                let v = v.clamp(-1.0, 2.0);
                v * (1.0 - v)
            }
            SigmaKind::Constant => 1.0,
        }
    }

    /// Global Lipschitz constant of `sigma`.
    pub fn lipschitz(self) -> f64 {
        match self {
            SigmaKind::Vv1m => 3.0,
            SigmaKind::Constant => 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub sigma: SigmaKind,
    pub amp: f64,
    /// `L_Sigma = amp * Lip(sigma) * sqrt(max_i sum_j K_ij^2)`.
    pub l_sigma: f64,
    #[serde(skip)]
    grid: GridSpec,
    /// `K_{i, i+d}` for `d = 0..band.len()`, Toeplitz and symmetric.
    #[serde(skip)]
    band: Vec<f64>,
}

pub fn build_noise(kind: NoiseKind, sigma: SigmaKind, amp: f64, grid: GridSpec) -> Result<NoiseModel> {
    if !(amp >= 0.0 && amp.is_finite()) {
        return Err(Error::param("amp", format!("must be nonnegative, got {amp}")));
    }
    let dx = grid.dx();
    let band = match kind {
        NoiseKind::White => vec![1.0 / dx.sqrt()],
        NoiseKind::GaussianKernel { corr_len } => {
            if !(corr_len > 0.0 && corr_len.is_finite()) {
                return Err(Error::param(
                    "corr_len",
                    format!("must be positive, got {corr_len}"),
                ));
            }
            let mut band = Vec::new();
            for d in 0..grid.n() {
                let r = d as f64 * dx / corr_len;
                let k = (-0.5 * r * r).exp();
                if k < KERNEL_CUTOFF {
                    break;
                }
                band.push(k * dx.sqrt());
            }
            band
        }
    };
    let mut model = NoiseModel {
        kind,
        sigma,
        amp,
        l_sigma: 0.0,
        grid,
        band,
    };
    let max_row = (0..grid.n()).map(|i| model.row_sum_sq(i)).fold(0.0, f64::max);
    model.l_sigma = amp * sigma.lipschitz() * max_row.sqrt();
    Ok(model)
}

impl NoiseModel {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn is_zero(&self) -> bool {
        self.amp == 0.0
    }

    /// Same model with a different amplitude.
    pub fn with_amp(&self, amp: f64) -> Result<Self> {
        build_noise(self.kind, self.sigma, amp, self.grid)
    }

    /// `sum_j K_ij^2`.
    pub fn row_sum_sq(&self, i: usize) -> f64 {
        let n = self.grid.n();
        let mut s = self.band[0] * self.band[0];
        for (d, &k) in self.band.iter().enumerate().skip(1) {
            if i >= d {
                s += k * k;
            }
            if i + d < n {
                s += k * k;
            }
        }
        s
    }

    /// `sum_j k(x_i, x_j)^2 dx` for the kernel kind (`sqrt(pi) corr_len` in the interior).
    pub fn row_square_integral(&self, i: usize) -> f64 {
        self.row_sum_sq(i)
    }

    /// `sqrt(dt) K xi` for standard normal `xi`, written into `out`.
    pub fn sample_increment<R: rand::Rng + ?Sized>(&self, rng: &mut R, dt: f64, out: &mut [f64]) {
        let n = self.grid.n();
        if self.is_zero() {
            out.fill(0.0);
            return;
        }
        let sdt = dt.sqrt();
        match self.kind {
            NoiseKind::White => {
                let s = sdt * self.band[0];
                for o in out.iter_mut() {
                    let z: f64 = StandardNormal.sample(rng);
                    *o = s * z;
                }
            }
            NoiseKind::GaussianKernel { .. } => {
                let xi: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
                let bw = self.band.len();
                for (i, o) in out.iter_mut().enumerate() {
                    let mut acc = self.band[0] * xi[i];
                    for d in 1..bw {
                        let k = self.band[d];
                        if i >= d {
                            acc += k * xi[i - d];
                        }
                        if i + d < n {
                            acc += k * xi[i + d];
                        }
                    }
                    *o = sdt * acc;
                }
            }
        }
    }

    /// `out_i = amp sigma(v_i) inc_i`.
    pub fn apply_dispersion(&self, v: &[f64], inc: &[f64], out: &mut [f64]) {
        for ((o, &vi), &di) in out.iter_mut().zip(v).zip(inc) {
            *o = self.amp * self.sigma.eval(vi) * di;
        }
    }

    /// `||Sigma(v)||^2_{L2(U,H)} = sum_i w_i (amp sigma(v_i))^2 sum_j K_ij^2`
    /// with trapezoid weights `w_i`. For white noise this is `sum_i (amp sigma(v_i))^2`
    /// up to the half weights at the two end nodes.
    pub fn hs_norm_sq(&self, v: &[f64]) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let g = &self.grid;
        g.integrate(|i| {
            let s = self.amp * self.sigma.eval(v[i]);
            s * s * self.row_sum_sq(i)
        })
    }
}

/// Generator for one step of one trial; independent of scheduling.
pub fn step_rng(seed: u64, step: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(step);
    rng
}

/// `hs_norm_sq(v(. - s dx)) == hs_norm_sq(v)` for each integer shift `s`.
pub fn translation_check(model: &NoiseModel, w: &WaveProfile, shifts: &[i64]) -> ValidationReport {
    let g = model.grid();
    let dx = g.dx();
    let base: Vec<f64> = w.v.clone();
    let h0 = model.hs_norm_sq(&base);
    let tol = match model.kind {
        NoiseKind::White => 1e-8,
        NoiseKind::GaussianKernel { .. } => 1e-6,
    };
    let mut rep = ValidationReport::new();
    for &s in shifts {
        let shifted: Vec<f64> = (0..g.n()).map(|i| w.eval(g.x(i) - s as f64 * dx).v).collect();
        let hs = model.hs_norm_sq(&shifted);
        let rel = if h0 == 0.0 { hs.abs() } else { (hs - h0).abs() / h0 };
        rep.push(
            format!("translation invariance, shift {s} dx"),
            rel <= tol,
            Some(s as f64 * dx),
            format!("relative difference {rel:e}"),
        );
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_vanishes_at_rest_states_and_is_clamped() {
        let s = SigmaKind::Vv1m;
        assert_eq!(s.eval(0.0), 0.0);
        assert_eq!(s.eval(1.0), 0.0);
        assert_eq!(s.eval(5.0), s.eval(2.0));
        assert_eq!(s.eval(-7.0), s.eval(-1.0));
    }

    #[test]
    fn zero_amplitude_gives_zero_increment() {
        let g = GridSpec::new(10.0, 64).unwrap();
        let m = build_noise(NoiseKind::White, SigmaKind::Vv1m, 0.0, g).unwrap();
        let mut out = vec![1.0; 64];
        m.sample_increment(&mut step_rng(1, 0), 0.1, &mut out);
        assert!(out.iter().all(|&v| v == 0.0));
        assert_eq!(m.hs_norm_sq(&vec![0.5; 64]), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = GridSpec::new(10.0, 64).unwrap();
        assert!(build_noise(NoiseKind::White, SigmaKind::Vv1m, -1.0, g).is_err());
        let k = NoiseKind::GaussianKernel { corr_len: 0.0 };
        assert!(build_noise(k, SigmaKind::Vv1m, 1.0, g).is_err());
    }
}
