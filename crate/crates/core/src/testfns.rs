//! Random smooth test functions with exact derivatives, used by the inequality
//! batteries.

use crate::grid::{Field, GridSpec};
use rand::Rng;

/// `h(x) = a0 + sum_j (a_j cos(w_j x) + b_j sin(w_j x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSum {
    pub a0: f64,
    pub modes: Vec<(f64, f64, f64)>,
}

impl FourierSum {
    /// At most `max_modes` modes with frequencies `j * base` and
    /// coefficients uniform in `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_modes: usize, base: f64) -> Self {
        let m = rng.gen_range(1..=max_modes.max(1));
        let modes = (1..=m)
            .map(|j| {
                (
                    rng.gen_range(-1.0..=1.0),
                    rng.gen_range(-1.0..=1.0),
                    j as f64 * base,
                )
            })
            .collect();
        Self {
            a0: rng.gen_range(-1.0..=1.0),
            modes,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.a0
            + self
                .modes
                .iter()
                .map(|&(a, b, w)| a * (w * x).cos() + b * (w * x).sin())
                .sum::<f64>()
    }

    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        self.modes
            .iter()
            .map(|&(a, b, w)| w * (b * (w * x).cos() - a * (w * x).sin()))
            .sum()
    }

    /// Shifts the constant so that `h(x0) = 0`.
    pub fn vanishing_at(mut self, x0: f64) -> Self {
        self.a0 -= self.eval(x0);
        self
    }

    /// Samples of `h` and `h_x` on the grid.
    pub fn sample(&self, grid: &GridSpec) -> (Vec<f64>, Vec<f64>) {
        let xs = grid.nodes();
        (
            xs.iter().map(|&x| self.eval(x)).collect(),
            xs.iter().map(|&x| self.deriv(x)).collect(),
        )
    }
}

/// `(1 - t^2)^4` on `|t| < 1`, zero outside.
#[inline]
fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        let s = 1.0 - t * t;
        s * s * s * s
    }
}

/// Random field supported in `[centre - radius, centre + radius]`: a smooth
/// bump times a random Fourier sum, scaled to a random amplitude.
pub fn random_compact_field<R: Rng + ?Sized>(
    rng: &mut R,
    grid: &GridSpec,
    centre_range: f64,
    radius: (f64, f64),
    base: f64,
) -> Field {
    let centre = rng.gen_range(-centre_range..=centre_range);
    let r = rng.gen_range(radius.0..=radius.1);
    let h = FourierSum::random(rng, 8, base);
    let amp = rng.gen_range(0.01..=1.0);
    let mut f = Field::from_fn(*grid, |x| bump((x - centre) / r) * h.eval(x));
    let vals = f.vals_mut();
    let n = vals.len();
    vals[0] = 0.0;
    vals[n - 1] = 0.0;
    let peak = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        f.scale(amp / peak);
    }
    f
}
