use crate::bounds::{build_bounds, critical_speed, decay_rates, BoundPair};
use crate::error::{Result, WaveError};
use crate::model::ReactionModel;

use super::operator::{closure_of, exponents, reaction_field, residual, sup_norms, GreenOperator, RightClosure};
use super::profile::{Grid, LeftTail, WaveProfile};

/// Where iterates are clipped after every step.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// Between the closed-form lower and upper profiles.
    Sandwich,
    /// Componentwise in `[0, upper]`.
    Box(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Normalization {
    /// Species 0 first reaches half its target value at `xi = 0`.
    HalfTarget,
    /// Species `species` first reaches `level` at `xi = 0`.
    Level { species: usize, level: f64 },
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub damping: f64,
    pub tol_update: f64,
    pub tol_residual: f64,
    pub max_iter: usize,
    /// Explicit grid; otherwise chosen from the decay scales.
    pub grid: Option<Grid>,
    pub constraint: Constraint,
    /// Warm start, resampled onto the grid; otherwise the upper profile.
    pub initial: Option<WaveProfile>,
    pub normalization: Normalization,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tol_update: 1e-8,
            tol_residual: 1e-5,
            max_iter: 10_000,
            grid: None,
            constraint: Constraint::Sandwich,
            initial: None,
            normalization: Normalization::HalfTarget,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_update_norm: f64,
    /// Largest per-species sup-norm of the residual.
    pub final_residual: f64,
    pub residual_per_species: Vec<f64>,
    pub converged: bool,
    pub monotone_flags: Vec<bool>,
    /// `max psi_i - E_i`.
    pub overshoot: Vec<f64>,
    pub right_limits: Vec<f64>,
    pub target: Vec<f64>,
    pub beta: f64,
    pub gamma1: Vec<f64>,
    pub bounds: Option<BoundPair>,
    pub tol_update: f64,
    pub tol_residual: f64,
}

const MONOTONE_TOL: f64 = 1e-9;

/// Default grid: half-width `40 / min gamma1`, widened to hold the bound
/// corners, and spacing `0.01` of the shortest of `1/gamma1`, `1/|nu1|`.
pub fn default_grid(gamma1: &[f64], nu1: &[f64], bounds: Option<&BoundPair>) -> Result<Grid> {
    let g_min = gamma1.iter().copied().fold(f64::INFINITY, f64::min);
    let mut half = 40.0 / g_min;
    if let Some(b) = bounds {
        for i in 0..b.n() {
            let far = [b.upper_corner(i), b.lower_corner(i), b.lower_peak(i).0]
                .iter()
                .fold(0.0f64, |m, x| m.max(x.abs()));
            half = half.max(1.25 * far);
        }
    }
    let scale = gamma1
        .iter()
        .zip(nu1)
        .map(|(g, n)| (1.0 / g).min(1.0 / n.abs()))
        .fold(f64::INFINITY, f64::min);
    Grid::spanning(-half, half, 0.01 * scale)
}

/// Damped Picard iteration `Phi <- (1 - w) Phi + w clip(F(Phi))`.
pub fn solve_wave(model: &ReactionModel, c: f64, options: &SolveOptions) -> Result<(WaveProfile, SolveReport)> {
    let lv = model.to_lotka_volterra()?;
    let n = lv.n();
    if !(options.damping > 0.0 && options.damping <= 1.0) {
        return Err(WaveError::Domain(format!("damping must lie in (0, 1], got {}", options.damping)));
    }
    let target = lv.target_state()?;

    let (bounds, box_upper) = match &options.constraint {
        Constraint::Sandwich => {
            let b = build_bounds(&lv, c)?;
            let caps = b.caps.clone();
            (Some(b), caps)
        }
        Constraint::Box(upper) => {
            if upper.len() != n {
                return Err(WaveError::Domain("box dimension mismatch".into()));
            }
            if c <= critical_speed(&lv) {
                let threshold = critical_speed(&lv);
                return Err(WaveError::BelowThreshold { speed: c, threshold });
            }
            (None, upper.clone())
        }
    };
    let gamma1: Vec<f64> = match &bounds {
        Some(b) => b.gamma1.clone(),
        None => (0..n)
            .map(|i| decay_rates(lv.d()[i], lv.rates()[i], c).map(|r| r.0))
            .collect::<Result<_>>()?,
    };
    let beta = lv.lipschitz_beta(&box_upper)?;
    let b = beta.value();
    let nu1: Vec<f64> = lv.d().iter().map(|&d| exponents(d, c, b).0).collect();
    let grid = match options.grid {
        Some(g) => g,
        None => default_grid(&gamma1, &nu1, bounds.as_ref())?,
    };

    let tails: Vec<LeftTail> = gamma1.iter().map(|&rate| LeftTail::Exponential { rate }).collect();
    let (lo, up): (Vec<Vec<f64>>, Vec<Vec<f64>>) = match &bounds {
        Some(bp) => (
            (0..n).map(|i| grid.points().map(|x| bp.lower(i, x)).collect()).collect(),
            (0..n).map(|i| grid.points().map(|x| bp.upper(i, x)).collect()).collect(),
        ),
        None => (
            vec![vec![0.0; grid.len]; n],
            box_upper.iter().map(|&u| vec![u; grid.len]).collect(),
        ),
    };

    let mut phi = match &options.initial {
        Some(init) => {
            if init.n() != n {
                return Err(WaveError::Domain("initial profile has the wrong species count".into()));
            }
            let mut p = init.resampled(grid);
            p.speed = c;
            p.left_tail = tails.clone();
            p.frame_shift = 0.0;
            p
        }
        None => WaveProfile::new(grid, up.clone(), tails.clone(), c)?,
    };
    for i in 0..n {
        for k in 0..grid.len {
            phi.values[i][k] = phi.values[i][k].clamp(lo[i][k], up[i][k]);
        }
    }

    let ops: Vec<GreenOperator> = lv.d().iter().map(|&d| GreenOperator::new(d, c, b, grid.h)).collect();
    let w = options.damping;
    let mut update = f64::INFINITY;
    let mut iterations = 0;
    while iterations < options.max_iter {
        iterations += 1;
        let f = reaction_field(&phi, &lv)?;
        update = 0.0;
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let l: Vec<f64> = phi.values[i].iter().zip(&f[i]).map(|(p, fi)| b * p + fi).collect();
            let mut fresh = ops[i].convolve(&l, closure_of(phi.left_tail[i]), RightClosure::Constant);
            for k in 0..grid.len {
                let clipped = fresh[k].clamp(lo[i][k], up[i][k]);
                let old = phi.values[i][k];
                let v = (1.0 - w) * old + w * clipped;
                update = update.max((v - old).abs());
                fresh[k] = v;
            }
            if let Some(k) = fresh.iter().position(|x| !x.is_finite()) {
                return Err(WaveError::NonFinite { t: iterations as f64, species: i, x: grid.xi(k) });
            }
            next.push(fresh);
        }
        phi.values = next;
        if update <= options.tol_update {
            break;
        }
    }

    let res = sup_norms(&residual(&phi, &lv)?);
    let final_residual = res.iter().copied().fold(0.0, f64::max);
    let converged = update <= options.tol_update && final_residual <= options.tol_residual;

    let normalized = match &options.normalization {
        Normalization::HalfTarget => phi.normalized(0, 0.5 * target[0]),
        Normalization::Level { species, level } => phi.normalized(*species, *level),
        Normalization::None => None,
    };
    if let Some(p) = normalized {
        phi = p;
    }

    let report = SolveReport {
        iterations,
        final_update_norm: update,
        final_residual,
        residual_per_species: res,
        converged,
        monotone_flags: (0..n).map(|i| phi.is_monotone(i, MONOTONE_TOL)).collect(),
        overshoot: phi.max_values().iter().zip(&target).map(|(m, e)| m - e).collect(),
        right_limits: phi.right_limits(),
        target,
        beta: b,
        gamma1,
        bounds,
        tol_update: options.tol_update,
        tol_residual: options.tol_residual,
    };
    Ok((phi, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave::profile::tail_ratio;
    use approx::assert_relative_eq;

    #[test]
    fn fisher_front() {
        let m = ReactionModel::fisher(1.0, 1.0).unwrap();
        let (p, rep) = solve_wave(&m, 3.0, &SolveOptions::default()).unwrap();
        assert!(rep.converged, "{rep:?}");
        assert!(rep.final_residual < 1e-6);
        assert!(rep.monotone_flags[0]);
        assert_eq!(rep.beta, 3.0);
        assert_relative_eq!(p.right_limit(0), 1.0, max_relative = 1e-6);
        assert_relative_eq!(p.value(0, 0.0), 0.5, max_relative = 1e-9);
        assert_relative_eq!(tail_ratio(&p)[0].unwrap(), 1.0, max_relative = 0.05);
    }

    #[test]
    fn below_threshold_is_refused() {
        let m = ReactionModel::fisher(1.0, 1.0).unwrap();
        assert!(matches!(
            solve_wave(&m, 1.8, &SolveOptions::default()),
            Err(WaveError::BelowThreshold { .. })
        ));
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let m = ReactionModel::fisher(1.0, 1.0).unwrap();
        let opts = SolveOptions { max_iter: 3, ..SolveOptions::default() };
        let (_, rep) = solve_wave(&m, 3.0, &opts).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 3);
    }
}
