//! The one-shot verification battery behind `wavegauge verify`.

use crate::constants::{
    coercivity_sides, comparison_g, g2_scan, hardy_verify, master_inequality, monotonicity_sides,
    poincare_verify, weight_profile, Analysis, GDrift,
};
use crate::noise::{build_noise, translation_check, NoiseKind, SigmaKind};
use crate::reaction::ReactionSpec;
use crate::report::{Tolerances, ValidationReport};
use crate::testfns::{random_compact_field, FourierSum};
use crate::wave::{verify_profile_bounds, WaveProfile};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteSettings {
    pub hardy_trials: usize,
    pub poincare_trials: usize,
    pub master_trials: usize,
    pub estimate_trials: usize,
    pub seed: u64,
    pub noise_kind: NoiseKind,
}

impl Default for SuiteSettings {
    fn default() -> Self {
        Self {
            hardy_trials: 100,
            poincare_trials: 100,
            master_trials: 200,
            estimate_trials: 50,
            seed: 0,
            noise_kind: NoiseKind::White,
        }
    }
}

/// Worst `lhs / rhs` and failure count over a battery.
fn battery_check(
    rep: &mut ValidationReport,
    name: &str,
    outcomes: impl Iterator<Item = (f64, f64, bool)>,
) {
    let mut fails = 0;
    let mut total = 0;
    let mut worst = f64::NEG_INFINITY;
    for (lhs, rhs, pass) in outcomes {
        total += 1;
        if !pass {
            fails += 1;
        }
        let margin = lhs - rhs;
        worst = worst.max(margin);
    }
    rep.push(
        name,
        fails == 0,
        None,
        format!("{fails}/{total} failures, max lhs - rhs = {worst:e}"),
    );
}

/// Runs every inequality check on a profile. `analysis` is `None` when the
/// constant pipeline itself failed; dependent checks are then reported as failed.
pub fn run_suite(
    spec: &ReactionSpec,
    w: &WaveProfile,
    analysis: Option<&Analysis>,
    tol: Tolerances,
    settings: &SuiteSettings,
) -> ValidationReport {
    let mut rep = ValidationReport::new();
    rep.extend(spec.validate_assumptions(1000));
    rep.extend(verify_profile_bounds(w, tol));

    let Some(an) = analysis else {
        rep.push("kappa > 0", false, None, "constant pipeline failed");
        return rep;
    };
    let k = &an.constants;
    rep.push(
        "kappa > 0",
        an.kappa.kappa > 0.0,
        Some(an.kappa.x_min),
        format!(
            "kappa = {}, tails ({}, {})",
            an.kappa.kappa, an.kappa.tail_left, an.kappa.tail_right
        ),
    );
    rep.extend(g2_scan(w));

    let wp = match weight_profile(w, an.kappa.kappa, tol) {
        Ok(wp) => {
            rep.push(
                "-theta' + theta^2 >= kappa + (c/2nu)^2",
                true,
                None,
                format!("kappa0 = {}", an.kappa.kappa + w.half_drift().powi(2)),
            );
            wp
        }
        Err(e) => {
            rep.push("-theta' + theta^2 >= kappa + (c/2nu)^2", false, None, e.to_string());
            return rep;
        }
    };

    let grid = *w.grid();
    let kscale = w.params.k();
    let base = 0.25 * kscale;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);

    let hardy: Vec<(f64, f64, bool)> = (0..settings.hardy_trials)
        .map(|_| {
            let h = FourierSum::random(&mut rng, 16, base).vanishing_at(wp.root);
            let (hv, hx) = h.sample(&grid);
            match hardy_verify(&wp, wp.kappa0, &hv, &hx, tol) {
                Ok(o) => (o.lhs, o.rhs, o.pass),
                Err(_) => (f64::NAN, f64::NAN, false),
            }
        })
        .collect();
    battery_check(&mut rep, "weighted Hardy inequality", hardy.into_iter());

    let poinc: Vec<(f64, f64, bool)> = (0..settings.poincare_trials)
        .map(|_| {
            let h = FourierSum::random(&mut rng, 16, base);
            let (hv, hx) = h.sample(&grid);
            let o = poincare_verify(&wp, k.z, &hv, &hx, tol);
            (o.lhs, o.rhs, o.pass)
        })
        .collect();
    battery_check(&mut rep, "Poincare inequality", poinc.into_iter());

    match comparison_g(&wp, w, &an.integrals, GDrift::Symmetric, tol) {
        Ok(g) => {
            rep.extend(g.report);
            rep.push(
                "comparison equation residual <= 1e-6",
                g.residual <= 1e-6,
                None,
                format!("relative residual {:e}", g.residual),
            );
        }
        Err(e) => rep.push("comparison g solve", false, None, e.to_string()),
    }

    let centre = 5.0 / kscale;
    let radius = (0.5 / kscale, 8.0 / kscale);
    let master: Vec<(f64, f64, bool)> = (0..settings.master_trials)
        .map(|_| {
            let u = random_compact_field(&mut rng, &grid, centre, radius, base * 2.0);
            let (lhs, rhs) = master_inequality(w, k, &u);
            (lhs, rhs, tol.le(lhs, rhs))
        })
        .collect();
    battery_check(&mut rep, "master inequality", master.into_iter());

    let mono: Vec<(f64, f64, bool)> = (0..settings.estimate_trials)
        .map(|_| {
            let u1 = random_compact_field(&mut rng, &grid, centre, radius, base * 2.0);
            let u2 = random_compact_field(&mut rng, &grid, centre, radius, base * 2.0);
            let (lhs, rhs) = monotonicity_sides(w, &u1, &u2);
            (lhs, rhs, tol.le(lhs, rhs))
        })
        .collect();
    battery_check(&mut rep, "global monotonicity", mono.into_iter());

    let coer: Vec<(f64, f64, bool)> = (0..settings.estimate_trials)
        .map(|_| {
            let u = random_compact_field(&mut rng, &grid, centre, radius, base * 2.0);
            let (lhs, rhs) = coercivity_sides(w, &u);
            (lhs, rhs, tol.le(lhs, rhs))
        })
        .collect();
    battery_check(&mut rep, "coercivity", coer.into_iter());

    if let Ok(model) = build_noise(settings.noise_kind, SigmaKind::Vv1m, 1.0, grid) {
        rep.extend(translation_check(&model, w, &[0, 64, -64]));
    }
    rep
}
