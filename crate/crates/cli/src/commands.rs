use std::fmt;

use anyhow::{anyhow, Result};
use delaywave_core::continuation::{continuation_options, critical_wave, ScalarCriticalSpec};
use delaywave_core::output::{fmt_num, write_continuation, write_index, write_profile, write_snapshot};
use delaywave_core::pde::{
    advection_check, nonexistence_probe, simulate, spreading_speed, stable_dt, AdvectionOptions, SimOptions,
};
use delaywave_core::rectangles::{
    default_y_levels, limit_verdict, lv_family, lv_family_auto, lv_family_unchecked, nicholson_family,
    verify_strict_contraction, zou_family, ContractionReport, RectangleFamily, DEFAULT_FACE_SAMPLES,
};
use delaywave_core::wave::{tail_ratio, SolveOptions};
use delaywave_core::*;

use crate::config::{resolve_model, ResolvedModel, RunConfig, SimMode};
use crate::out::{Report, Sink};
use crate::plot;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Config = 1,
    Failed = 2,
    Threshold = 3,
    Stability = 4,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Maps an error to its exit status.
pub fn classify(err: &anyhow::Error) -> Exit {
    if err.downcast_ref::<ConfigError>().is_some() || err.downcast_ref::<std::io::Error>().is_some() {
        return Exit::Config;
    }
    match err.downcast_ref::<WaveError>() {
        Some(WaveError::BelowThreshold { .. }) | Some(WaveError::Inapplicable(_)) => Exit::Threshold,
        Some(WaveError::Stability { .. }) => Exit::Stability,
        Some(
            WaveError::Domain(_)
            | WaveError::SpeciesIndex { .. }
            | WaveError::SingularInteraction
            | WaveError::NonPositiveEquilibrium(_)
            | WaveError::NoInstantaneousWeight(_)
            | WaveError::Unsupported(_),
        ) => Exit::Config,
        Some(_) => Exit::Failed,
        None => Exit::Config,
    }
}

pub struct Ctx {
    pub config: RunConfig,
    pub preset_flag: Option<String>,
    pub speed_flag: Option<f64>,
    pub sink: Sink,
    pub seed: u64,
    pub plot: bool,
}

impl Ctx {
    fn model(&self) -> Result<ResolvedModel> {
        resolve_model(&self.config, self.preset_flag.as_deref()).map_err(|e| config_err(format!("{e:#}")))
    }

    fn stride(&self) -> usize {
        self.config.output.stride.unwrap_or(1)
    }

    fn speed(&self, section: Option<f64>, resolved: &ResolvedModel, what: &str) -> Result<f64> {
        self.speed_flag
            .or(section)
            .or(resolved.preset_speed)
            .ok_or_else(|| config_err(format!("no speed given: set {what} or pass --speed")))
    }

    fn solve_options(&self) -> Result<SolveOptions> {
        let s = &self.config.solve;
        let mut o = SolveOptions::default();
        if let Some(v) = s.damping {
            o.damping = v;
        }
        if let Some(v) = s.tol_update {
            o.tol_update = v;
        }
        if let Some(v) = s.tol_residual {
            o.tol_residual = v;
        }
        if let Some(v) = s.max_iter {
            o.max_iter = v;
        }
        if let Some(g) = s.grid {
            o.grid = Some(Grid::spanning(g.xi_min, g.xi_max, g.h).map_err(|e| config_err(format!("[solve.grid]: {e}")))?);
        }
        Ok(o)
    }
}

fn species_list<T: fmt::Display>(v: &[T]) -> String {
    let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", s.join(", "))
}

fn solve_report(rep: &SolveReport, profile: &WaveProfile, model: &ReactionModel, seed: u64) -> Report {
    let mut r = Report::default();
    r.add("speed", profile.speed)
        .add("converged", rep.converged)
        .add("iterations", rep.iterations)
        .add_num("final_update_norm", rep.final_update_norm)
        .add_num("final_residual", rep.final_residual)
        .add_nums("residual_per_species", &rep.residual_per_species)
        .add_nums("right_limits", &rep.right_limits)
        .add_nums("target", &rep.target)
        .add_nums("overshoot", &rep.overshoot)
        .add_list("monotone", &rep.monotone_flags)
        .add_num("beta", rep.beta)
        .add_nums("gamma1", &rep.gamma1);
    if let Some(b) = &rep.bounds {
        r.add_num("eta", b.eta).add_num("q", b.q);
    }
    let nonmono: Vec<String> =
        (0..profile.n()).filter(|&i| !rep.monotone_flags[i]).map(|i| (i + 1).to_string()).collect();
    r.add("nonmonotone_species", format!("[{}]", nonmono.join(", ")));
    let tails: Vec<String> = tail_ratio(profile).iter().map(|t| t.map_or("none".into(), fmt_num)).collect();
    r.add("tail_ratio", format!("[{}]", tails.join(", ")));
    match lv_family_auto(model, seed).and_then(|(fam, _)| limit_verdict(profile, &fam)) {
        Ok(v) => {
            r.add("limit_verdict", if v.converges_to_target { "converges-to-target" } else { "undecided" })
                .add_num("limit_y_end", v.y_end);
        }
        Err(e) => {
            r.add("limit_verdict", format!("unavailable ({e})"));
        }
    }
    r
}

pub fn solve(ctx: &Ctx) -> Result<Exit> {
    let resolved = ctx.model()?;
    let c = ctx.speed(ctx.config.solve.speed, &resolved, "solve.speed")?;
    let (profile, rep) = solve_wave(&resolved.model, c, &ctx.solve_options()?)?;
    let mut report = solve_report(&rep, &profile, &resolved.model, ctx.seed);
    let name = resolved.preset.clone().unwrap_or_else(|| resolved.model.kind_name().to_string());
    report.lines.insert(0, ("model".into(), name));
    ctx.sink.write("profile.csv", |w| write_profile(w, &ctx.sink.header, &profile, ctx.stride()))?;
    ctx.sink.write_report("report.txt", &report.lines)?;
    if ctx.plot {
        plot::profile_svg(&ctx.sink.path("profile.svg"), &profile, &format!("wave profile, c = {c}"))?;
    }
    println!(
        "solve c = {c}: converged = {}, iterations = {}, residual = {:.3e}, right limits = {}, monotone = {}",
        rep.converged,
        rep.iterations,
        rep.final_residual,
        species_list(&rep.right_limits),
        species_list(&rep.monotone_flags)
    );
    Ok(if rep.converged { Exit::Ok } else { Exit::Failed })
}

fn rectangle_family(model: &ReactionModel, ctx: &Ctx) -> Result<(RectangleFamily, bool)> {
    let v = &ctx.config.verify;
    Ok(match model.reaction() {
        Reaction::Nicholson { .. } => (nicholson_family(v.epsilon.unwrap_or(0.5))?, true),
        Reaction::Zou { .. } => (zou_family(v.k.unwrap_or(1.0))?, true),
        _ => {
            let eps = v.epsilon.unwrap_or(0.25);
            match lv_family(model, eps) {
                Ok(f) => (f, true),
                Err(WaveError::NotContracting(msg)) => {
                    println!("coupling condition fails ({msg}); checking the unguarded family");
                    (lv_family_unchecked(model, eps)?, false)
                }
                Err(e) => return Err(e.into()),
            }
        }
    })
}

pub fn verify(ctx: &Ctx) -> Result<Exit> {
    let resolved = ctx.model()?;
    let model = &resolved.model;
    let v = &ctx.config.verify;
    let mut all_pass = true;

    let is_competition = matches!(model.reaction(), Reaction::LotkaVolterra { .. } | Reaction::Fisher { .. });
    let speed = ctx.speed_flag.or(v.speed).or(resolved.preset_speed);
    if is_competition {
        if let Some(c) = speed {
            let b = build_bounds(model, c)?;
            let g_min = b.gamma1.iter().copied().fold(f64::INFINITY, f64::min);
            let far = (0..b.n())
                .map(|i| b.upper_corner(i).abs().max(b.lower_corner(i).abs()).max(b.lower_peak(i).0.abs()))
                .fold(0.0, f64::max);
            let span = far + 20.0 / g_min;
            let rep = verify_bound_inequalities(&b, model, -span, span, v.points.unwrap_or(20_001))?;
            ctx.sink.write("bounds.txt", |w| {
                use std::io::Write;
                for (k, val) in &ctx.sink.header {
                    writeln!(w, "# {k}: {val}")?;
                }
                writeln!(w, "speed = {c}")?;
                write!(w, "{rep}")
            })?;
            println!("bound inequalities at c = {c}: {} ({} violations)", pass_word(rep.passed()), rep.violations.len());
            all_pass &= rep.passed();
        }
    }

    let (family, guarded) = rectangle_family(model, ctx)?;
    let ys = v.y_levels.clone().unwrap_or_else(default_y_levels);
    let rep: ContractionReport =
        verify_strict_contraction(&family, model, &ys, v.face_samples.unwrap_or(DEFAULT_FACE_SAMPLES), ctx.seed)?;
    ctx.sink.write("contraction.txt", |w| {
        use std::io::Write;
        for (k, val) in &ctx.sink.header {
            writeln!(w, "# {k}: {val}")?;
        }
        writeln!(w, "family = {:?}", family.kind)?;
        writeln!(w, "coupling_condition = {guarded}")?;
        write!(w, "{rep}")
    })?;
    println!("strict contraction: {} (worst margin {:.3e})", pass_word(rep.passed()), rep.worst_margin());
    all_pass &= rep.passed() && guarded;
    Ok(if all_pass { Exit::Ok } else { Exit::Failed })
}

fn pass_word(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

pub fn simulate_cmd(ctx: &Ctx) -> Result<Exit> {
    let resolved = ctx.model()?;
    let model = &resolved.model;
    let s = &ctx.config.simulate;
    match s.mode {
        SimMode::Field | SimMode::Spreading => {
            let target = model.target_state().unwrap_or_else(|_| vec![1.0; model.n()]);
            let (lo, hi) = (s.x_min.unwrap_or(-100.0), s.x_max.unwrap_or(100.0));
            let grid = Grid::spanning(lo, hi, s.dx.unwrap_or(0.1)).map_err(|e| config_err(format!("[simulate]: {e}")))?;
            let t_end = s.t_end.unwrap_or(40.0);
            let dt = s.dt.unwrap_or_else(|| 0.5 * stable_dt(&grid, model));
            let steps = (t_end / dt).ceil().max(1.0) as usize;
            let dt = if s.dt.is_some() { dt } else { t_end / steps as f64 };
            let snapshots = s.snapshots.unwrap_or(400).max(1);
            let step_at = s.step_at.unwrap_or(lo + 0.025 * (hi - lo));
            let init = |i: usize, x: f64, _: f64| if x < step_at { target[i] } else { 0.0 };
            let opts = SimOptions { dt, steps, snapshot_every: (steps / snapshots).max(1) };
            let field = simulate(model, grid, &init, &opts)?;

            let mut entries = Vec::new();
            for (k, snap) in field.snapshots.iter().enumerate() {
                let name = format!("snapshots/snap_{k:05}.csv");
                ctx.sink.write(&name, |w| write_snapshot(w, &ctx.sink.header, &grid, snap, ctx.stride()))?;
                entries.push((snap.t, name));
            }
            ctx.sink.write("snapshots/index.csv", |w| write_index(w, &ctx.sink.header, &entries))?;
            if ctx.plot {
                plot::heatmap_svg(&ctx.sink.path("field.svg"), &field, 0)?;
            }
            println!("simulated to t = {t_end} with dt = {dt:.3e}: {} snapshots", field.snapshots.len());
            if s.mode == SimMode::Spreading {
                let i = s.species.map(|k| k.saturating_sub(1)).unwrap_or(0);
                if i >= model.n() {
                    return Err(config_err(format!("simulate.species must be at most {}", model.n())));
                }
                let level = s.level.unwrap_or(0.5 * target[i]);
                let window = s.window.unwrap_or([0.5 * t_end, t_end]);
                let speed = spreading_speed(&field, i, level, (window[0], window[1]))?;
                let expected = 2.0 * (model.d()[i] * model.rates()[i]).sqrt();
                let mut r = Report::default();
                r.add("species", i + 1)
                    .add("level", level)
                    .add("window", format!("[{}, {}]", window[0], window[1]))
                    .add_num("measured_speed", speed)
                    .add_num("linear_speed", expected)
                    .add_num("relative_error", (speed - expected) / expected);
                ctx.sink.write_report("spreading.txt", &r.lines)?;
                println!("spreading speed of species {}: {speed:.6} (linear value {expected:.6})", i + 1);
            }
            Ok(Exit::Ok)
        }
        SimMode::Advection => {
            let c = ctx.speed(s.speed, &resolved, "simulate.speed")?;
            let (profile, rep) = solve_wave(model, c, &ctx.solve_options()?)?;
            if !rep.converged {
                println!("wave solve did not converge (residual {:.3e})", rep.final_residual);
                return Ok(Exit::Failed);
            }
            let opts = AdvectionOptions {
                horizon: s.horizon.unwrap_or(20.0),
                dx: s.dx.unwrap_or(0.05),
                ..AdvectionOptions::default()
            };
            let a = advection_check(&profile, model, &opts)?;
            let shape_tol = s.shape_tol.unwrap_or(2e-2);
            let drift_tol = s.drift_tol.unwrap_or(0.02);
            let pass = a.shape_error < shape_tol && a.drift_error.abs() <= drift_tol * a.expected_shift;
            let mut r = Report::default();
            r.add("speed", c)
                .add("horizon", opts.horizon)
                .add_num("expected_shift", a.expected_shift)
                .add_num("best_shift", a.best_shift)
                .add_num("drift_error", a.drift_error)
                .add_num("shape_error", a.shape_error)
                .add("status", pass_word(pass));
            ctx.sink.write_report("advection.txt", &r.lines)?;
            println!("advection: shape error {:.3e}, shift {:.5} vs {:.5}: {}", a.shape_error, a.best_shift, a.expected_shift, pass_word(pass));
            Ok(if pass { Exit::Ok } else { Exit::Failed })
        }
        SimMode::Probe => {
            let c = ctx
                .speed_flag
                .or(s.speed)
                .ok_or_else(|| config_err("no probe speed given: set simulate.speed or pass --speed"))?;
            let v = nonexistence_probe(model, c)?;
            let verdict = if v.consistent { "nonexistence-consistent" } else { "inconclusive" };
            let mut r = Report::default();
            r.add("speed", c)
                .add_num("threshold", v.threshold)
                .add("species", v.species + 1)
                .add_num("measured_floor_speed", v.measured_speed)
                .add_num("required_margin", v.required_margin)
                .add("decay_rates_complex", v.decay_rates_fail)
                .add("verdict", verdict);
            ctx.sink.write_report("probe.txt", &r.lines)?;
            println!("probe at c = {c}: {verdict} (floor speed {:.5}, threshold {:.5})", v.measured_speed, v.threshold);
            Ok(if v.consistent { Exit::Ok } else { Exit::Failed })
        }
    }
}

pub fn critical(ctx: &Ctx) -> Result<Exit> {
    let cc = &ctx.config.critical;
    let from_model = ctx.model().ok().and_then(|m| match m.model.reaction() {
        Reaction::Fisher { r } => Some((m.model.d()[0], *r)),
        _ => None,
    });
    let (d, r) = match (cc.d, cc.r, from_model) {
        (Some(d), Some(r), _) => (d, r),
        (None, None, Some(dr)) => dr,
        (None, None, None) => (1.0, 1.0),
        _ => return Err(config_err("critical needs both d and r")),
    };
    let kernel = match &cc.kernel {
        Some(k) => k.build().map_err(|e| config_err(format!("[critical.kernel]: {e:#}")))?,
        None => DelayKernel::instantaneous(),
    };
    let spec = ScalarCriticalSpec::new(d, r, kernel, cc.speed_tol.unwrap_or(1e-3)).map_err(|e| config_err(e.to_string()))?;
    let mut opts = continuation_options();
    if let Some(m) = cc.max_iter {
        opts.max_iter = m;
    }
    let res = critical_wave(&spec, None, &opts)?;
    for (k, p) in res.profiles.iter().enumerate() {
        ctx.sink.write(&format!("profiles/profile_{:02}.csv", k + 1), |w| write_profile(w, &ctx.sink.header, p, ctx.stride()))?;
    }
    ctx.sink.write("continuation.csv", |w| write_continuation(w, &ctx.sink.header, &res.steps))?;
    let mut rep = Report::default();
    rep.add("d", d)
        .add("r", r)
        .add("b", spec.b())
        .add_num("critical_speed", spec.critical_speed())
        .add_num("normalization_level", spec.normalization_level())
        .add("steps", res.steps.len())
        .add("completed", res.completed());
    if let Some((idx, e)) = &res.failure {
        rep.add("failed_at_speed", spec.speeds()[*idx]).add("failure", e);
    }
    if let Some(p) = res.last() {
        rep.add_num("final_speed", p.speed)
            .add_num("phi_at_0", p.value(0, 0.0))
            .add_num("right_limit", p.right_limit(0))
            .add_num("left_value", p.values[0][0])
            .add("tail_ratio", tail_ratio(p)[0].map_or("none".into(), fmt_num));
        if ctx.plot {
            plot::profile_svg(&ctx.sink.path("critical.svg"), p, &format!("critical wave, c = {}", p.speed))?;
        }
    }
    ctx.sink.write_report("critical_report.txt", &rep.lines)?;
    match (&res.failure, res.last()) {
        (None, Some(p)) => {
            println!("continuation reached c = {:.6} (c* = {:.6}); right limit {:.6}", p.speed, spec.critical_speed(), p.right_limit(0));
            Ok(Exit::Ok)
        }
        (failure, _) => {
            println!("continuation stopped: {}", failure.as_ref().map_or("no profiles".into(), |(_, e)| e.to_string()));
            Ok(Exit::Failed)
        }
    }
}

pub fn sweep(ctx: &Ctx) -> Result<Exit> {
    let resolved = ctx.model()?;
    let model = &resolved.model;
    let sw = &ctx.config.sweep;
    let speeds: Vec<f64> = match (&sw.speeds, sw.from, sw.to, sw.count) {
        (Some(v), None, None, None) => v.clone(),
        (None, Some(a), Some(b), Some(n)) if n >= 2 => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
        _ => return Err(config_err("[sweep] needs either `speeds` or `from`, `to` and `count >= 2`")),
    };
    let opts = ctx.solve_options()?;
    let n = model.n();
    let mut rows = Vec::new();
    let mut all_ok = true;
    for &c in &speeds {
        match solve_wave(model, c, &opts) {
            Ok((_, rep)) => {
                all_ok &= rep.converged;
                rows.push((c, if rep.converged { "converged" } else { "not-converged" }.to_string(), Some(rep)));
            }
            Err(WaveError::BelowThreshold { .. }) => rows.push((c, "below-threshold".to_string(), None)),
            Err(WaveError::DegenerateShapeInterval { .. }) => rows.push((c, "degenerate".to_string(), None)),
            Err(e) => return Err(anyhow!(e)),
        }
    }
    ctx.sink.write("sweep.csv", |w| {
        use std::io::Write;
        for (k, v) in &ctx.sink.header {
            writeln!(w, "# {k}: {v}")?;
        }
        let mut cols = vec!["c".to_string(), "status".into(), "iterations".into(), "residual".into()];
        for prefix in ["right", "overshoot", "monotone"] {
            cols.extend((1..=n).map(|i| format!("{prefix}_{i}")));
        }
        writeln!(w, "{}", cols.join(","))?;
        for (c, status, rep) in &rows {
            match rep {
                Some(r) => {
                    let fields: Vec<String> = r
                        .right_limits
                        .iter()
                        .chain(&r.overshoot)
                        .map(|&v| fmt_num(v))
                        .chain(r.monotone_flags.iter().map(|b| b.to_string()))
                        .collect();
                    writeln!(w, "{},{status},{},{},{}", fmt_num(*c), r.iterations, fmt_num(r.final_residual), fields.join(","))?
                }
                None => writeln!(w, "{},{status},,,{}", fmt_num(*c), vec![""; 3 * n].join(","))?,
            }
        }
        Ok(())
    })?;
    println!("sweep over {} speeds: all solvable speeds converged = {all_ok}", speeds.len());
    Ok(if all_ok { Exit::Ok } else { Exit::Failed })
}
