//! Perturbation dynamics around the phase-adapted wave:
//! `du = [nu Delta u + b (f(u + vt) - f(vt)) - (C' - c) vt_x] dt`, `C' = c + m <u, vt_x>`,
//! with `vt = v(. + C)`.

use crate::constants::StabilityConstants;
use crate::error::{Error, Result};
use crate::grid::{inner_slices, Field, ImplicitDiffusion};
use crate::noise::NoiseModel;
use crate::wave::WaveProfile;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub c_shift: f64,
    pub m: f64,
}

impl PhaseState {
    pub fn new(m: f64) -> Result<Self> {
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::param("m", format!("must be nonnegative, got {m}")));
        }
        Ok(Self { c_shift: 0.0, m })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetConfig {
    pub dt: f64,
    pub t_end: f64,
    pub delta: f64,
    pub record_every: usize,
}

impl DetConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::param("t_end", format!("must be nonnegative, got {}", self.t_end)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::param("delta", format!("must lie in (0, 1), got {}", self.delta)));
        }
        if self.record_every == 0 {
            return Err(Error::param("record_every", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub h_norms: Vec<f64>,
    pub phases: Vec<f64>,
    pub envelope: Vec<f64>,
    /// The decay preconditions (`m >= C_*`, small initial norm) hold.
    pub certified: bool,
    /// Indices of samples above `envelope * (1 + tol_env)`.
    pub violations: Vec<usize>,
    pub warnings: Vec<String>,
}

impl TrajectoryRecord {
    pub fn within_envelope(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn write_csv<W: std::io::Write>(&self, c: f64, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["t", "h_norm", "envelope", "C", "C_minus_ct"])?;
        for i in 0..self.times.len() {
            let t = self.times[i];
            wtr.write_record(&[
                t.to_string(),
                self.h_norms[i].to_string(),
                self.envelope[i].to_string(),
                self.phases[i].to_string(),
                (self.phases[i] - c * t).to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Fast evaluation of `v(x_i + C)` on the grid: one exponential per call for
/// the logistic closed form, interpolation otherwise.
#[derive(Debug, Clone)]
struct ShiftedWave {
    /// `e^{-k x_i}` for the logistic profile.
    decay: Option<(f64, Vec<f64>)>,
}

impl ShiftedWave {
    fn new(w: &WaveProfile) -> Self {
        let decay = if w.is_closed_form() {
            let k = w.params.k();
            Some((k, w.x.iter().map(|&x| (-k * x).exp()).collect()))
        } else {
            None
        };
        Self { decay }
    }

    fn fill(&self, w: &WaveProfile, shift: f64, v: &mut [f64], vx: &mut [f64]) {
        match &self.decay {
            Some((k, e)) => {
                let s = (-k * shift).exp();
                for ((vi, vxi), &ei) in v.iter_mut().zip(vx.iter_mut()).zip(e) {
                    let q = ei * s;
                    let inv = 1.0 / (1.0 + q);
                    *vi = inv;
                    *vxi = k * q * inv * inv;
                }
            }
            None => w.shifted(shift, v, vx),
        }
    }
}

/// `B(C) = <v - v(. + C), v_x(. + C)>` for the full state `v`.
pub fn phase_increment(v: &Field, w: &WaveProfile, c_shift: f64) -> Result<f64> {
    let limit = 0.5 * w.grid().l_dom();
    if !(c_shift.abs() <= limit) {
        return Err(Error::ShiftOutOfRange { shift: c_shift, limit });
    }
    let n = w.grid().n();
    let mut vt = vec![0.0; n];
    let mut vtx = vec![0.0; n];
    w.shifted(c_shift, &mut vt, &mut vtx);
    let diff: Vec<f64> = v.vals().iter().zip(&vt).map(|(a, b)| a - b).collect();
    Ok(inner_slices(w.grid(), &diff, &vtx))
}

/// Semi-implicit stepper: backward Euler for diffusion, explicit reaction,
/// phase drift and noise, all evaluated at the step start.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    w: &'a WaveProfile,
    dt: f64,
    solver: ImplicitDiffusion,
    shifted: ShiftedWave,
    limit: f64,
    vt: Vec<f64>,
    vtx: Vec<f64>,
    scratch: Vec<f64>,
    disp: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(w: &'a WaveProfile, dt: f64) -> Result<Self> {
        let solver = ImplicitDiffusion::new(w.grid(), w.params.nu, dt)?;
        let n = w.grid().n();
        Ok(Self {
            w,
            dt,
            solver,
            shifted: ShiftedWave::new(w),
            limit: 0.5 * w.grid().l_dom(),
            vt: vec![0.0; n],
            vtx: vec![0.0; n],
            scratch: vec![0.0; n],
            disp: vec![0.0; n],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `u` and the phase by one step. `noise` carries the model and
    /// the increment `sqrt(dt) K xi`; a zero-amplitude model adds nothing.
    pub fn step(
        &mut self,
        u: &mut [f64],
        st: &mut PhaseState,
        noise: Option<(&NoiseModel, &[f64])>,
    ) -> Result<()> {
        if !(st.c_shift.abs() <= self.limit) {
            return Err(Error::ShiftOutOfRange {
                shift: st.c_shift,
                limit: self.limit,
            });
        }
        let w = self.w;
        let (b, c, dt) = (w.params.b, w.c, self.dt);
        self.shifted.fill(w, st.c_shift, &mut self.vt, &mut self.vtx);
        let proj = inner_slices(w.grid(), u, &self.vtx);
        let c_dot = c + st.m * proj;
        let drift = c_dot - c;
        let spec = w.spec();
        if let Some((model, inc)) = noise.filter(|(m, _)| !m.is_zero()) {
            for i in 0..u.len() {
                self.scratch[i] = u[i] + self.vt[i];
            }
            model.apply_dispersion(&self.scratch, inc, &mut self.disp);
            for i in 0..u.len() {
                let g = spec.shifted_increment(u[i], self.vt[i]);
                u[i] = u[i] + dt * (b * g - drift * self.vtx[i]) + self.disp[i];
            }
        } else {
            for i in 0..u.len() {
                let g = spec.shifted_increment(u[i], self.vt[i]);
                u[i] = u[i] + dt * (b * g - drift * self.vtx[i]);
            }
        }
        self.solver.solve_in_place(u);
        st.c_shift += dt * c_dot;
        Ok(())
    }
}

/// One deterministic step; see [`Stepper`] for repeated use.
pub fn det_step(u: &Field, state: PhaseState, w: &WaveProfile, dt: f64) -> Result<(Field, PhaseState)> {
    let mut st = state;
    let mut vals = u.vals().to_vec();
    Stepper::new(w, dt)?.step(&mut vals, &mut st, None)?;
    Ok((Field::from_vec(*u.grid(), vals)?, st))
}

/// Integrates to `t_end` and compares `||u(t)||_H` with
/// `e^{-(1 - delta) kappa_* t} ||u0||_H`.
pub fn run_deterministic(
    u0: &Field,
    cfg: &DetConfig,
    consts: &StabilityConstants,
    w: &WaveProfile,
    m: f64,
    tol_env: f64,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let mut rec = TrajectoryRecord::default();
    let n0 = u0.h_norm();
    let radius = consts.decay_radius(cfg.delta);
    rec.certified = true;
    if m < consts.big_c_star {
        rec.certified = false;
        rec.warnings
            .push(format!("m = {m} is below C_* = {}", consts.big_c_star));
    }
    if !(n0 < radius) {
        rec.certified = false;
        rec.warnings.push(format!(
            "||u0||_H = {n0} is not below the radius {radius}"
        ));
    }
    let rate = (1.0 - cfg.delta) * consts.kappa_star;
    let mut stepper = Stepper::new(w, cfg.dt)?;
    let mut st = PhaseState::new(m)?;
    let mut u = u0.vals().to_vec();
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    let push = |rec: &mut TrajectoryRecord, t: f64, u: &[f64], c: f64| {
        let h = w.grid().trapezoid(&u.iter().map(|x| x * x).collect::<Vec<_>>()).sqrt();
        let env = (-rate * t).exp() * n0;
        if h > env * (1.0 + tol_env) {
            rec.violations.push(rec.times.len());
        }
        rec.times.push(t);
        rec.h_norms.push(h);
        rec.phases.push(c);
        rec.envelope.push(env);
    };
    push(&mut rec, 0.0, &u, st.c_shift);
    for k in 1..=steps {
        stepper.step(&mut u, &mut st, None)?;
        if k % cfg.record_every == 0 || k == steps {
            push(&mut rec, k as f64 * cfg.dt, &u, st.c_shift);
        }
    }
    Ok(rec)
}
