//! Euler-Maruyama for the noisy perturbation equation, first exit from the
//! ball of radius `c_*`, and Monte Carlo aggregation.

use crate::constants::StabilityConstants;
use crate::det::{PhaseState, Stepper};
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::noise::{step_rng, NoiseModel};
use crate::wave::WaveProfile;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959963984540054;
/// Number of geometrically spaced times for the moment check.
pub const MOMENT_TIMES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpdeConfig {
    pub dt: f64,
    pub t_max: f64,
    pub trials: usize,
    pub seed: u64,
    pub m: f64,
}

impl SpdeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::param("t_max", format!("must be positive, got {}", self.t_max)));
        }
        if self.trials == 0 {
            return Err(Error::param("trials", "must be at least 1"));
        }
        if !(self.m >= 0.0) {
            return Err(Error::param("m", format!("must be nonnegative, got {}", self.m)));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round().max(1.0) as usize
    }

    /// Step indices at which `||u(t ∧ T)||^2` is sampled: `t_max 2^{-j}`, `j = 7..0`.
    pub fn moment_steps(&self) -> Vec<usize> {
        let steps = self.steps();
        (0..MOMENT_TIMES)
            .rev()
            .map(|j| ((steps as f64) / 2f64.powi(j as i32)).round().max(1.0) as usize)
            .collect()
    }
}

/// One Euler-Maruyama step: the deterministic update of [`Stepper`] plus
/// `amp sigma(u + vt) sqrt(dt) K xi` with `xi` drawn from `(seed, step)`.
pub fn spde_step(
    stepper: &mut Stepper<'_>,
    u: &mut [f64],
    state: &mut PhaseState,
    model: &NoiseModel,
    seed: u64,
    step: u64,
    inc: &mut [f64],
) -> Result<()> {
    if model.is_zero() {
        return stepper.step(u, state, None);
    }
    let mut rng = step_rng(seed, step);
    model.sample_increment(&mut rng, stepper.dt(), inc);
    stepper.step(u, state, Some((model, inc)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub seed: u64,
    pub exited: bool,
    pub t_exit: Option<f64>,
    /// `||u(t_j ∧ T)||_H^2` at the moment-check times.
    pub stopped_sq: Vec<f64>,
    /// `(t, ||u||_H)` after every step when requested.
    pub path: Vec<(f64, f64)>,
}

/// Runs until `||u||_H > c_*` after a step, or until `t_max`.
pub fn run_trial(
    u0: &Field,
    cfg: &SpdeConfig,
    consts: &StabilityConstants,
    w: &WaveProfile,
    model: &NoiseModel,
    seed: u64,
    record_path: bool,
) -> Result<TrialOutcome> {
    let mut stepper = Stepper::new(w, cfg.dt)?;
    let mut st = PhaseState::new(cfg.m)?;
    let mut u = u0.vals().to_vec();
    let mut inc = vec![0.0; u.len()];
    let grid = *w.grid();
    let norm_sq = |u: &[f64]| grid.integrate(|i| u[i] * u[i]);
    let steps = cfg.steps();
    let marks = cfg.moment_steps();
    let mut stopped_sq = Vec::with_capacity(marks.len());
    let mut path = Vec::new();
    let mut next_mark = 0;
    let mut exit: Option<(usize, f64)> = None;
    if record_path {
        path.push((0.0, norm_sq(&u).sqrt()));
    }
    for k in 1..=steps {
        spde_step(&mut stepper, &mut u, &mut st, model, seed, k as u64, &mut inc)?;
        let nsq = norm_sq(&u);
        if record_path {
            path.push((k as f64 * cfg.dt, nsq.sqrt()));
        }
        while next_mark < marks.len() && marks[next_mark] == k {
            stopped_sq.push(nsq);
            next_mark += 1;
        }
        if nsq.sqrt() > consts.c_star {
            exit = Some((k, nsq));
            break;
        }
    }
    if let Some((_, nsq)) = exit {
        while stopped_sq.len() < marks.len() {
            stopped_sq.push(nsq);
        }
    }
    Ok(TrialOutcome {
        seed,
        exited: exit.is_some(),
        t_exit: exit.map(|(k, _)| k as f64 * cfg.dt),
        stopped_sq,
        path,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentPoint {
    pub t: f64,
    pub mean: f64,
    pub std_err: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitStats {
    pub exits: usize,
    pub trials: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `(||u0||^2 + (4/kappa_*) ||Sigma(v)||^2) / c_*^2`.
    pub bound: f64,
    pub hs_norm_sq: f64,
    pub l_sigma: f64,
    /// `L_Sigma^2 <= kappa_* / 4`.
    pub hypothesis_ok: bool,
    /// Hypothesis holds and the Wilson lower bound does not exceed `bound`.
    pub certified: bool,
    pub moments: Vec<MomentPoint>,
    pub seed: u64,
    pub t_max: f64,
    pub dt: f64,
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Runs `cfg.trials` independent trials with seeds `seed + i` and aggregates
/// them in trial order.
pub fn mc_exit(
    u0: &Field,
    cfg: &SpdeConfig,
    consts: &StabilityConstants,
    w: &WaveProfile,
    model: &NoiseModel,
) -> Result<ExitStats> {
    cfg.validate()?;
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| run_trial(u0, cfg, consts, w, model, cfg.seed.wrapping_add(i), false))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(&outcomes, u0, cfg, consts, w, model))
}

pub fn aggregate(
    outcomes: &[TrialOutcome],
    u0: &Field,
    cfg: &SpdeConfig,
    consts: &StabilityConstants,
    w: &WaveProfile,
    model: &NoiseModel,
) -> ExitStats {
    let trials = outcomes.len();
    let exits = outcomes.iter().filter(|o| o.exited).count();
    let p_hat = exits as f64 / trials as f64;
    let (ci_low, ci_high) = wilson_interval(exits, trials);
    let hs = model.hs_norm_sq(&w.v);
    let u0sq = u0.h_norm().powi(2);
    let moment_bound = u0sq + 4.0 / consts.kappa_star * hs;
    let bound = moment_bound / (consts.c_star * consts.c_star);
    let hypothesis_ok = model.l_sigma * model.l_sigma <= consts.kappa_star / 4.0;
    let moments = cfg
        .moment_steps()
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let vals: Vec<f64> = outcomes.iter().map(|o| o.stopped_sq[j]).collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = if vals.len() > 1 {
                vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            let std_err = (var / n).sqrt();
            MomentPoint {
                t: k as f64 * cfg.dt,
                mean,
                std_err,
                bound: moment_bound,
                pass: mean <= moment_bound + 3.0 * std_err,
            }
        })
        .collect();
    ExitStats {
        exits,
        trials,
        p_hat,
        ci_low,
        ci_high,
        bound,
        hs_norm_sq: hs,
        l_sigma: model.l_sigma,
        hypothesis_ok,
        certified: hypothesis_ok && ci_low <= bound,
        moments,
        seed: cfg.seed,
        t_max: cfg.t_max,
        dt: cfg.dt,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_estimate() {
        for (k, n) in [(0, 10), (3, 10), (10, 10), (37, 2000)] {
            let (lo, hi) = wilson_interval(k, n);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi, "{k}/{n}: [{lo}, {hi}]");
        }
        let (lo, hi) = wilson_interval(0, 2000);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.002);
    }

    #[test]
    fn wilson_reference_value() {
        // 5 successes in 20 trials: (0.1119, 0.4687) to four digits.
        let (lo, hi) = wilson_interval(5, 20);
        assert!((lo - 0.1119).abs() < 1e-4, "{lo}");
        assert!((hi - 0.4687).abs() < 1e-4, "{hi}");
    }
}
