//! TOML run configuration with defaults and `--set key=value` overrides.

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::noise::{build_noise, NoiseKind, NoiseModel, SigmaKind};
use crate::reaction::ReactionSpec;
use crate::report::Tolerances;
use crate::wave::{build_profile, WaveMethod, WaveParams, WaveProfile};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    reaction: Option<String>,
    a: Option<f64>,
    coeffs: Option<Vec<f64>>,
    #[serde(default)]
    wave: RawWave,
    #[serde(default)]
    noise: RawNoise,
    #[serde(default)]
    sim: RawSim,
    #[serde(default)]
    tol: RawTol,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWave {
    nu: Option<f64>,
    b: Option<f64>,
    l_dom: Option<f64>,
    n: Option<usize>,
    method: Option<WaveMethod>,
    profile_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    kind: Option<String>,
    corr_len: Option<f64>,
    amp: Option<f64>,
    sigma: Option<SigmaKind>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    dt: Option<f64>,
    t_end: Option<f64>,
    t_max: Option<f64>,
    delta: Option<f64>,
    m: Option<f64>,
    trials: Option<usize>,
    seed: Option<u64>,
    record_every: Option<usize>,
    #[serde(default)]
    u0: RawInit,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInit {
    kind: Option<String>,
    norm: Option<f64>,
    center: Option<f64>,
    width: Option<f64>,
    shift: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTol {
    abs: Option<f64>,
    rel: Option<f64>,
    env: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "reaction", rename_all = "lowercase")]
pub enum ReactionChoice {
    Nagumo { a: f64 },
    Cubic { coeffs: [f64; 4] },
    Poly { coeffs: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveBlock {
    pub nu: f64,
    pub b: f64,
    pub l_dom: f64,
    pub n: usize,
    pub method: WaveMethod,
    pub profile_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseBlock {
    pub kind: NoiseKind,
    pub sigma: SigmaKind,
    pub amp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Zero,
    /// Gaussian bump `exp(-(x - center)^2 / (2 width^2))` scaled to H-norm `norm`.
    Bump { norm: f64, center: f64, width: f64 },
    /// `v(. + shift) - v`.
    Shift { shift: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimBlock {
    pub dt: f64,
    pub t_end: f64,
    /// `None` means `20 / kappa_*`.
    pub t_max: Option<f64>,
    pub delta: f64,
    /// `None` means `C_*`.
    pub m: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub record_every: usize,
    pub u0: InitialData,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TolBlock {
    pub abs: f64,
    pub rel: f64,
    pub env: f64,
}

impl TolBlock {
    pub fn inequality(&self) -> Tolerances {
        Tolerances {
            abs: self.abs,
            rel: self.rel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub reaction: ReactionChoice,
    pub wave: WaveBlock,
    pub noise: NoiseBlock,
    pub sim: SimBlock,
    pub tol: TolBlock,
}

fn cfg_err(key: &str, reason: impl std::fmt::Display) -> Error {
    Error::Config(format!("`{key}`: {reason}"))
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(cfg_err(key, format!("must be positive, got {v}")))
    }
}

/// Parses a `--set` value as a TOML literal, falling back to a bare string.
fn parse_literal(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

/// Applies `a.b.c=value` to a TOML table, creating intermediate tables.
pub fn apply_override(root: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, value) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key `{key}`")));
    }
    let mut table = root;
    for p in &parts[..parts.len() - 1] {
        let entry = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| cfg_err(key, format!("`{p}` is not a table")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), parse_literal(value.trim()));
    Ok(())
}

impl RunConfig {
    pub fn from_path(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str_with(&text, overrides)
    }

    pub fn from_str_with(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(format!("parse error: {e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let raw: RawConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        Self::resolve(raw)
    }

    fn resolve(raw: RawConfig) -> Result<Self> {
        let reaction = match raw.reaction.as_deref().unwrap_or("nagumo") {
            "nagumo" => {
                let a = raw.a.ok_or_else(|| cfg_err("a", "required for reaction = \"nagumo\""))?;
                if !(a > 0.0 && a < 1.0) {
                    return Err(cfg_err("a", format!("must lie in (0, 1), got {a}")));
                }
                ReactionChoice::Nagumo { a }
            }
            "cubic" => {
                let c = raw.coeffs.ok_or_else(|| cfg_err("coeffs", "required for a cubic"))?;
                let arr: [f64; 4] = c
                    .try_into()
                    .map_err(|c: Vec<f64>| cfg_err("coeffs", format!("need 4 entries, got {}", c.len())))?;
                ReactionChoice::Cubic { coeffs: arr }
            }
            "poly" => {
                let c = raw.coeffs.ok_or_else(|| cfg_err("coeffs", "required for a polynomial"))?;
                if c.is_empty() {
                    return Err(cfg_err("coeffs", "empty"));
                }
                ReactionChoice::Poly { coeffs: c }
            }
            other => return Err(cfg_err("reaction", format!("unknown reaction `{other}`"))),
        };

        let nu = positive("wave.nu", raw.wave.nu.unwrap_or(1.0))?;
        let b = positive("wave.b", raw.wave.b.unwrap_or(2.0))?;
        let k = (b / (2.0 * nu)).sqrt();
        let l_dom = positive("wave.l_dom", raw.wave.l_dom.unwrap_or(25.0 / k))?;
        let n = raw.wave.n.unwrap_or(4096);
        if n < 16 {
            return Err(cfg_err("wave.n", format!("need at least 16 nodes, got {n}")));
        }
        let wave = WaveBlock {
            nu,
            b,
            l_dom,
            n,
            method: raw.wave.method.unwrap_or_default(),
            profile_tol: positive("wave.profile_tol", raw.wave.profile_tol.unwrap_or(1e-6))?,
        };

        let amp = raw.noise.amp.unwrap_or(0.0);
        if !(amp >= 0.0 && amp.is_finite()) {
            return Err(cfg_err("noise.amp", format!("must be nonnegative, got {amp}")));
        }
        let kind = match raw.noise.kind.as_deref().unwrap_or("white") {
            "white" => NoiseKind::White,
            "gaussian_kernel" | "gaussian" => NoiseKind::GaussianKernel {
                corr_len: positive("noise.corr_len", raw.noise.corr_len.unwrap_or(1.0))?,
            },
            other => return Err(cfg_err("noise.kind", format!("unknown kind `{other}`"))),
        };
        let noise = NoiseBlock {
            kind,
            sigma: raw.noise.sigma.unwrap_or_default(),
            amp,
        };

        let s = raw.sim;
        let delta = s.delta.unwrap_or(0.5);
        if !(delta > 0.0 && delta < 1.0) {
            return Err(cfg_err("sim.delta", format!("must lie in (0, 1), got {delta}")));
        }
        if let Some(m) = s.m {
            if !(m >= 0.0 && m.is_finite()) {
                return Err(cfg_err("sim.m", format!("must be nonnegative, got {m}")));
            }
        }
        let trials = s.trials.unwrap_or(1000);
        if trials == 0 {
            return Err(cfg_err("sim.trials", "must be at least 1"));
        }
        let record_every = s.record_every.unwrap_or(100);
        if record_every == 0 {
            return Err(cfg_err("sim.record_every", "must be at least 1"));
        }
        let u0 = match s.u0.kind.as_deref().unwrap_or("zero") {
            "zero" => InitialData::Zero,
            "bump" => InitialData::Bump {
                norm: s.u0.norm.unwrap_or(0.015),
                center: s.u0.center.unwrap_or(0.0),
                width: positive("sim.u0.width", s.u0.width.unwrap_or(1.0 / k))?,
            },
            "shift" => InitialData::Shift {
                shift: s.u0.shift.unwrap_or(0.05),
            },
            other => return Err(cfg_err("sim.u0.kind", format!("unknown kind `{other}`"))),
        };
        let sim = SimBlock {
            dt: positive("sim.dt", s.dt.unwrap_or(1e-3))?,
            t_end: positive("sim.t_end", s.t_end.unwrap_or(40.0))?,
            t_max: s.t_max.map(|t| positive("sim.t_max", t)).transpose()?,
            delta,
            m: s.m,
            trials,
            seed: s.seed.unwrap_or(0),
            record_every,
            u0,
        };
        let tol = TolBlock {
            abs: positive("tol.abs", raw.tol.abs.unwrap_or(1e-8))?,
            rel: positive("tol.rel", raw.tol.rel.unwrap_or(1e-6))?,
            env: positive("tol.env", raw.tol.env.unwrap_or(1e-2))?,
        };
        Ok(Self {
            reaction,
            wave,
            noise,
            sim,
            tol,
        })
    }

    pub fn reaction_spec(&self) -> Result<ReactionSpec> {
        match &self.reaction {
            ReactionChoice::Nagumo { a } => ReactionSpec::nagumo(*a),
            ReactionChoice::Cubic { coeffs } => ReactionSpec::cubic(*coeffs),
            ReactionChoice::Poly { coeffs } => ReactionSpec::polynomial(coeffs.clone()),
        }
    }

    pub fn params(&self) -> Result<WaveParams> {
        WaveParams::new(self.wave.nu, self.wave.b)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.wave.l_dom, self.wave.n)
    }

    pub fn profile(&self, spec: &ReactionSpec) -> Result<WaveProfile> {
        build_profile(
            spec,
            self.params()?,
            self.grid()?,
            self.wave.method,
            self.wave.profile_tol,
        )
    }

    pub fn noise_model(&self, grid: GridSpec) -> Result<NoiseModel> {
        build_noise(self.noise.kind, self.noise.sigma, self.noise.amp, grid)
    }

    pub fn initial_field(&self, w: &WaveProfile) -> Field {
        initial_field(&self.sim.u0, w)
    }
}

/// Samples the initial perturbation; the end nodes are set to zero.
pub fn initial_field(u0: &InitialData, w: &WaveProfile) -> Field {
    let g = *w.grid();
    let mut f = match *u0 {
        InitialData::Zero => Field::zeros(g),
        InitialData::Bump {
            norm,
            center,
            width,
        } => {
            let mut f = Field::from_fn(g, |x| (-(x - center).powi(2) / (2.0 * width * width)).exp());
            let h = f.h_norm();
            f.scale(norm / h);
            f
        }
        InitialData::Shift { shift } => {
            let vals = (0..g.n())
                .map(|i| {
                    let p = w.eval(w.x[i] + shift);
                    if w.v[i] <= 0.5 {
                        p.v - w.v[i]
                    } else {
                        w.vc[i] - p.vc
                    }
                })
                .collect();
            Field::from_vec(g, vals).expect("finite profile samples")
        }
    };
    let n = g.n();
    let v = f.vals_mut();
    v[0] = 0.0;
    v[n - 1] = 0.0;
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_applied() {
        let c = RunConfig::from_str_with("reaction = \"nagumo\"\na = 0.25\n", &[]).unwrap();
        assert_eq!(c.wave.nu, 1.0);
        assert_eq!(c.wave.b, 2.0);
        assert_eq!(c.wave.n, 4096);
        assert_eq!(c.wave.l_dom, 25.0);
        assert_eq!(c.reaction, ReactionChoice::Nagumo { a: 0.25 });
    }

    #[test]
    fn out_of_range_a_names_key() {
        let e = RunConfig::from_str_with("a = 1.5\n", &[]).unwrap_err();
        assert!(e.to_string().contains("`a`"), "{e}");
    }

    #[test]
    fn override_supersedes_file() {
        let text = "a = 0.25\n[noise]\namp = 0.5\n";
        let c = RunConfig::from_str_with(text, &["noise.amp=0.01".into()]).unwrap();
        assert_eq!(c.noise.amp, 0.01);
        let c = RunConfig::from_str_with(text, &["sim.u0.kind=shift".into()]).unwrap();
        assert_eq!(c.sim.u0, InitialData::Shift { shift: 0.05 });
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_str_with("a = 0.25\nbogus = 1\n", &[]).is_err());
        assert!(RunConfig::from_str_with("a = 0.25\n[wave]\nlength = 3\n", &[]).is_err());
    }

    #[test]
    fn parse_error_reports_line() {
        let e = RunConfig::from_str_with("a = 0.25\n[wave\n", &[]).unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn domain_errors() {
        let e = RunConfig::from_str_with("a = 0.25\n[sim]\ndt = 0\n", &[]).unwrap_err();
        assert!(e.to_string().contains("sim.dt"));
        let e = RunConfig::from_str_with("reaction = \"cubic\"\ncoeffs = [1, 2]\n", &[]).unwrap_err();
        assert!(e.to_string().contains("coeffs"));
    }
}
