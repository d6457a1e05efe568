//! `wavegauge` subcommands.

use crate::config::RunConfig;
use crate::constants::{analyze, Analysis};
use crate::det::{run_deterministic, DetConfig, PhaseState, Stepper};
use crate::error::{Error, Result};
use crate::spde::{mc_exit, run_trial, spde_step, SpdeConfig};
use crate::suite::{run_suite, SuiteSettings};
use crate::wave::WaveProfile;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wavegauge", version, about = "Travelling-wave stability constants and exit-time checks")]
pub struct Cli {
    /// Worker threads for Monte Carlo runs.
    #[arg(long, global = true, env = "WAVEGAUGE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// TOML run configuration.
    #[arg(long, short)]
    pub config: PathBuf,

    /// Override a configuration key, e.g. `--set noise.amp=0.01`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Det,
    Stoch,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Wave profile as CSV (x, v, vx, vxx) plus a JSON sidecar.
    Wave {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// CSV path; the sidecar goes next to it with a .json extension.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Stability constants as JSON.
    Constants {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// JSON path; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Full inequality suite; exits 1 if any check fails.
    Verify {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// One trajectory of the perturbation dynamics.
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Deterministic or noisy dynamics.
        #[arg(long, value_enum, default_value = "det")]
        mode: Mode,
        /// CSV path for the recorded trajectory.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Monte Carlo estimate of the exit probability.
    McExit {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// JSON path for the exit statistics.
        #[arg(long, short)]
        out: PathBuf,
        /// Directory for per-trial norm paths.
        #[arg(long)]
        paths: Option<PathBuf>,
    },
}

/// Maps an error to the documented exit code.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else if matches!(e, Error::Io(_) | Error::Csv(_) | Error::Json(_)) {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

struct Loaded {
    cfg: RunConfig,
    wave: WaveProfile,
}

fn load(args: &ConfigArgs) -> Result<Loaded> {
    let cfg = RunConfig::from_path(&args.config, &args.overrides)?;
    let spec = cfg.reaction_spec()?;
    let wave = cfg.profile(&spec)?;
    Ok(Loaded { cfg, wave })
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

fn provenance(cfg: &RunConfig) -> serde_json::Value {
    json!({
        "n": cfg.wave.n,
        "l_dom": cfg.wave.l_dom,
        "method": cfg.wave.method,
        "tol": cfg.tol,
    })
}

fn constants_json(l: &Loaded, an: &Analysis) -> serde_json::Value {
    json!({
        "constants": an.constants,
        "integrals": an.integrals,
        "kappa_argmin": if an.kappa.x_min.is_finite() { json!(an.kappa.x_min) } else { json!(an.kappa.x_min.to_string()) },
        "provenance": provenance(&l.cfg),
    })
}

pub fn run(cli: Cli) -> Result<i32> {
    if let Some(t) = cli.threads {
        // A second initialisation (e.g. in tests) is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match cli.command {
        Command::Wave { cfg, out } => cmd_wave(&cfg, &out),
        Command::Constants { cfg, out } => cmd_constants(&cfg, out.as_deref()),
        Command::Verify { cfg, json } => cmd_verify(&cfg, json.as_deref()),
        Command::Simulate { cfg, mode, out } => cmd_simulate(&cfg, mode, &out),
        Command::McExit { cfg, out, paths } => cmd_mc_exit(&cfg, &out, paths.as_deref()),
    }
}

fn cmd_wave(args: &ConfigArgs, out: &Path) -> Result<i32> {
    let l = load(args)?;
    let w = &l.wave;
    let mut wtr = csv::Writer::from_path(out)?;
    wtr.write_record(["x", "v", "vx", "vxx"])?;
    for i in 0..w.x.len() {
        wtr.write_record(&[
            w.x[i].to_string(),
            w.v[i].to_string(),
            w.vx[i].to_string(),
            w.vxx[i].to_string(),
        ])?;
    }
    wtr.flush()?;
    let ints = crate::wave::weighted_integrals(w)?;
    write_json(
        &out.with_extension("json"),
        &json!({
            "c": w.c,
            "closed_form": w.is_closed_form(),
            "landmarks": w.landmarks,
            "gamma_minus": w.gamma_minus,
            "gamma_plus": w.gamma_plus,
            "integrals": ints,
            "provenance": provenance(&l.cfg),
        }),
    )?;
    println!("c = {}", w.c);
    Ok(EXIT_OK)
}

fn cmd_constants(args: &ConfigArgs, out: Option<&Path>) -> Result<i32> {
    let l = load(args)?;
    let an = analyze(&l.wave)?;
    let doc = constants_json(&l, &an);
    match out {
        Some(p) => write_json(p, &doc)?,
        None => println!("{}", serde_json::to_string_pretty(&doc)?),
    }
    Ok(EXIT_OK)
}

fn cmd_verify(args: &ConfigArgs, json_out: Option<&Path>) -> Result<i32> {
    let cfg = RunConfig::from_path(&args.config, &args.overrides)?;
    let spec = cfg.reaction_spec()?;
    let pre = spec.validate_assumptions(1000);
    if !pre.all_passed() {
        // Without the structural assumptions there is no wave to build.
        print!("{pre}");
        if let Some(p) = json_out {
            write_json(p, &json!({ "passed": false, "report": pre }))?;
        }
        return Ok(EXIT_VERIFY);
    }
    let wave = cfg.profile(&spec)?;
    let an = analyze(&wave);
    let settings = SuiteSettings {
        seed: cfg.sim.seed,
        noise_kind: cfg.noise.kind,
        ..SuiteSettings::default()
    };
    let rep = run_suite(&spec, &wave, an.as_ref().ok(), cfg.tol.inequality(), &settings);
    print!("{rep}");
    if let Ok(an) = &an {
        let k = &an.constants;
        println!(
            "kappa = {}, gamma- = {}, gamma+ = {}",
            k.kappa, k.gamma_minus, k.gamma_plus
        );
        println!(
            "kappa* = {}, C* = {}, c* = {}",
            k.kappa_star, k.big_c_star, k.c_star
        );
    }
    let passed = rep.all_passed();
    if let Some(p) = json_out {
        let l = Loaded { cfg, wave };
        let consts = an.as_ref().ok().map(|a| constants_json(&l, a));
        write_json(p, &json!({ "passed": passed, "report": rep, "constants": consts }))?;
    }
    Ok(if passed { EXIT_OK } else { EXIT_VERIFY })
}

fn cmd_simulate(args: &ConfigArgs, mode: Mode, out: &Path) -> Result<i32> {
    let l = load(args)?;
    let an = analyze(&l.wave)?;
    let k = &an.constants;
    let s = &l.cfg.sim;
    let m = s.m.unwrap_or(k.big_c_star);
    let u0 = l.cfg.initial_field(&l.wave);
    match mode {
        Mode::Det => {
            let dc = DetConfig {
                dt: s.dt,
                t_end: s.t_end,
                delta: s.delta,
                record_every: s.record_every,
            };
            let rec = run_deterministic(&u0, &dc, k, &l.wave, m, l.cfg.tol.env)?;
            rec.write_csv(l.wave.c, BufWriter::new(File::create(out)?))?;
            for w in &rec.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "final ||u||_H = {:e}, envelope violations: {}",
                rec.h_norms.last().copied().unwrap_or(0.0),
                rec.violations.len()
            );
            Ok(if rec.certified && !rec.within_envelope() { EXIT_VERIFY } else { EXIT_OK })
        }
        Mode::Stoch => {
            let model = l.cfg.noise_model(*l.wave.grid())?;
            let mut stepper = Stepper::new(&l.wave, s.dt)?;
            let mut st = PhaseState::new(m)?;
            let mut u = u0.vals().to_vec();
            let mut inc = vec![0.0; u.len()];
            let grid = *l.wave.grid();
            let rate = (1.0 - s.delta) * k.kappa_star;
            let n0 = u0.h_norm();
            let mut wtr = csv::Writer::from_writer(BufWriter::new(File::create(out)?));
            wtr.write_record(["t", "h_norm", "envelope", "C", "C_minus_ct"])?;
            let steps = (s.t_end / s.dt).round() as usize;
            let mut row = |t: f64, u: &[f64], c: f64| -> Result<()> {
                let h = grid.integrate(|i| u[i] * u[i]).sqrt();
                wtr.write_record(&[
                    t.to_string(),
                    h.to_string(),
                    ((-rate * t).exp() * n0).to_string(),
                    c.to_string(),
                    (c - l.wave.c * t).to_string(),
                ])?;
                Ok(())
            };
            row(0.0, &u, 0.0)?;
            for step in 1..=steps {
                spde_step(&mut stepper, &mut u, &mut st, &model, s.seed, step as u64, &mut inc)?;
                if step % s.record_every == 0 || step == steps {
                    row(step as f64 * s.dt, &u, st.c_shift)?;
                }
            }
            drop(row);
            wtr.flush()?;
            Ok(EXIT_OK)
        }
    }
}

fn cmd_mc_exit(args: &ConfigArgs, out: &Path, paths: Option<&Path>) -> Result<i32> {
    let l = load(args)?;
    let an = analyze(&l.wave)?;
    let k = &an.constants;
    let s = &l.cfg.sim;
    let sc = SpdeConfig {
        dt: s.dt,
        t_max: s.t_max.unwrap_or(20.0 / k.kappa_star),
        trials: s.trials,
        seed: s.seed,
        m: s.m.unwrap_or(k.big_c_star),
    };
    let model = l.cfg.noise_model(*l.wave.grid())?;
    let u0 = l.cfg.initial_field(&l.wave);
    if u0.h_norm() > k.c_star {
        return Err(Error::Config(format!(
            "initial norm {} exceeds the exit radius {}",
            u0.h_norm(),
            k.c_star
        )));
    }
    let started = Instant::now();
    let stats = mc_exit(&u0, &sc, k, &l.wave, &model)?;
    let runtime = started.elapsed().as_secs_f64();
    if let Some(dir) = paths {
        std::fs::create_dir_all(dir)?;
        for i in 0..sc.trials as u64 {
            let seed = sc.seed.wrapping_add(i);
            let tr = run_trial(&u0, &sc, k, &l.wave, &model, seed, true)?;
            let mut wtr = csv::Writer::from_path(dir.join(format!("trial_{i:05}.csv")))?;
            wtr.write_record(["t", "h_norm"])?;
            for (t, h) in tr.path {
                wtr.write_record(&[t.to_string(), h.to_string()])?;
            }
            wtr.flush()?;
        }
    }
    write_json(
        out,
        &json!({
            "stats": stats,
            "constants": k,
            "noise": model,
            "config": l.cfg,
            "runtime_s": runtime,
        }),
    )?;
    println!(
        "p_hat = {} [{}, {}], bound = {}, hypothesis {}, certified {}",
        stats.p_hat,
        stats.ci_low,
        stats.ci_high,
        stats.bound,
        stats.hypothesis_ok,
        stats.certified
    );
    Ok(if stats.hypothesis_ok && !stats.certified { EXIT_VERIFY } else { EXIT_OK })
}
