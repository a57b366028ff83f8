//! Scalar critical-speed wave by continuation along a decreasing speed
//! sequence, each solve warm-started from the previous normalized profile.

use nalgebra::DMatrix;

use crate::bounds::{build_bounds, decay_rates};
use crate::error::{Result, WaveError};
use crate::kernel::DelayKernel;
use crate::model::ReactionModel;
use crate::wave::{solve_wave, Constraint, Grid, Normalization, SolveOptions, SolveReport, WaveProfile};

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarCriticalSpec {
    pub d: f64,
    pub r: f64,
    kernel: DelayKernel,
    speeds: Vec<f64>,
}

impl ScalarCriticalSpec {
    /// Speeds `c* (1 + 2^-n)` for `n = 1..`, stopping once within
    /// `speed_tol` (relative) of `c* = 2 sqrt(d r)`, at most 20 of them.
    pub fn new(d: f64, r: f64, kernel: DelayKernel, speed_tol: f64) -> Result<Self> {
        if !(speed_tol > 0.0) {
            return Err(WaveError::Domain(format!("speed tolerance must be positive, got {speed_tol}")));
        }
        let cstar = 2.0 * (d * r).sqrt();
        let mut speeds = Vec::new();
        for n in 1..=20 {
            let eps = 0.5f64.powi(n);
            speeds.push(cstar * (1.0 + eps));
            if eps < speed_tol {
                break;
            }
        }
        Self::with_speeds(d, r, kernel, speeds)
    }

    pub fn with_speeds(d: f64, r: f64, kernel: DelayKernel, speeds: Vec<f64>) -> Result<Self> {
        if !(d > 0.0 && r > 0.0 && d.is_finite() && r.is_finite()) {
            return Err(WaveError::Domain(format!("need d > 0 and r > 0, got d = {d}, r = {r}")));
        }
        let b = kernel.instantaneous_weight();
        if !(b > 0.5 && b <= 1.0) {
            return Err(WaveError::Domain(format!("instantaneous weight b = {b} must lie in (1/2, 1]")));
        }
        let cstar = 2.0 * (d * r).sqrt();
        if speeds.is_empty() {
            return Err(WaveError::Domain("empty speed sequence".into()));
        }
        if speeds[0] >= 2.0 * cstar {
            return Err(WaveError::Domain(format!("first speed {} must be below {}", speeds[0], 2.0 * cstar)));
        }
        if speeds.windows(2).any(|w| w[1] >= w[0]) || speeds.iter().any(|&c| c <= cstar) {
            return Err(WaveError::Domain(format!("speeds must decrease strictly and stay above {cstar}")));
        }
        Ok(Self { d, r, kernel, speeds })
    }

    pub fn kernel(&self) -> &DelayKernel {
        &self.kernel
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn b(&self) -> f64 {
        self.kernel.instantaneous_weight()
    }

    pub fn critical_speed(&self) -> f64 {
        2.0 * (self.d * self.r).sqrt()
    }

    /// `(2b - 1) / (8b)`.
    pub fn normalization_level(&self) -> f64 {
        let b = self.b();
        (2.0 * b - 1.0) / (8.0 * b)
    }

    /// `v_t = d v_xx + r v (1 - int v dzeta)` as a one-species competition model.
    pub fn model(&self) -> Result<ReactionModel> {
        ReactionModel::lotka_volterra(
            vec![self.d],
            vec![self.r],
            DMatrix::from_element(1, 1, 1.0),
            vec![vec![self.kernel.clone()]],
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationStep {
    pub speed: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Sup-norm distance to the previous normalized profile (`None` for the first).
    pub delta: Option<f64>,
    /// Further crossings of the normalization level within `1/gamma` of the first.
    pub ambiguous_crossings: usize,
}

#[derive(Debug, Clone)]
pub struct CriticalResult {
    pub profiles: Vec<WaveProfile>,
    pub steps: Vec<ContinuationStep>,
    pub reports: Vec<SolveReport>,
    /// Index into the speed sequence and the error that stopped it.
    pub failure: Option<(usize, WaveError)>,
}

impl CriticalResult {
    pub fn last(&self) -> Option<&WaveProfile> {
        self.profiles.last()
    }

    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

fn profile_distance(a: &WaveProfile, b: &WaveProfile) -> f64 {
    b.grid
        .points()
        .enumerate()
        .map(|(k, x)| (a.value(0, x) - b.values[0][k]).abs())
        .fold(0.0, f64::max)
}

/// Solver defaults for continuation: Picard slows down like a power of
/// `1 / (c - c*)`, so the iteration cap is raised.
pub fn continuation_options() -> SolveOptions {
    SolveOptions { max_iter: 40_000, ..SolveOptions::default() }
}

/// Runs the continuation. Each speed is solved inside the closed-form
/// sandwich when it can be built, otherwise with box clipping to `[0, 1/b]`.
pub fn critical_wave(spec: &ScalarCriticalSpec, grid: Option<Grid>, base: &SolveOptions) -> Result<CriticalResult> {
    let model = spec.model()?;
    let level = spec.normalization_level();
    let upper = 1.0 / spec.b();
    let mut result = CriticalResult { profiles: Vec::new(), steps: Vec::new(), reports: Vec::new(), failure: None };

    for (idx, &c) in spec.speeds.iter().enumerate() {
        let prev = result.profiles.last();
        let sandwich = build_bounds(&model, c).is_ok();
        // warm starts go back to the bound frame so the sandwich clips them in place
        let initial = prev.map(|p| if sandwich { p.translated(p.frame_shift) } else { p.clone() });
        let opts = SolveOptions {
            grid: grid.or_else(|| prev.map(|p| p.grid)),
            constraint: if sandwich { Constraint::Sandwich } else { Constraint::Box(vec![upper]) },
            initial,
            normalization: Normalization::Level { species: 0, level },
            ..base.clone()
        };
        let solved = solve_wave(&model, c, &opts).and_then(|(p, rep)| {
            if rep.converged {
                Ok((p, rep))
            } else {
                Err(WaveError::NotContracting(format!(
                    "no convergence at c = {c}: update {:.3e}, residual {:.3e} after {} iterations",
                    rep.final_update_norm, rep.final_residual, rep.iterations
                )))
            }
        });
        let (profile, report) = match solved {
            Ok(v) => v,
            Err(e) => {
                result.failure = Some((idx, e));
                break;
            }
        };
        let gamma = decay_rates(spec.d, spec.r, c)?.0;
        let ambiguous_crossings = profile.first_crossing(0, level, 1.0 / gamma).map_or(0, |(_, e)| e);
        let delta = prev.map(|p| profile_distance(p, &profile));
        result.steps.push(ContinuationStep {
            speed: c,
            iterations: report.iterations,
            residual: report.final_residual,
            converged: report.converged,
            delta,
            ambiguous_crossings,
        });
        result.reports.push(report);
        result.profiles.push(profile);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn speed_sequence_shape() {
        let s = ScalarCriticalSpec::new(1.0, 1.0, DelayKernel::instantaneous(), 1e-3).unwrap();
        let c = s.speeds();
        assert_eq!(c.len(), 10);
        assert_relative_eq!(c[0], 3.0, max_relative = 1e-15);
        assert!(c.windows(2).all(|w| w[1] < w[0]));
        assert!(c.last().unwrap() - 2.0 < 2e-3);
        assert!(c[0] < 4.0);
    }

    #[test]
    fn normalization_level() {
        let k = DelayKernel::new([(0.0, 0.6), (-2.0, 0.4)], 2.0).unwrap();
        let s = ScalarCriticalSpec::new(1.0, 1.0, k, 1e-3).unwrap();
        assert_relative_eq!(s.normalization_level(), 0.2 / 4.8, max_relative = 1e-12);
        let s = ScalarCriticalSpec::new(1.0, 1.0, DelayKernel::instantaneous(), 1e-3).unwrap();
        assert_relative_eq!(s.normalization_level(), 0.125, max_relative = 1e-15);
    }

    #[test]
    fn invalid_specs() {
        let k = DelayKernel::new([(0.0, 0.4), (-2.0, 0.6)], 2.0).unwrap();
        assert!(ScalarCriticalSpec::new(1.0, 1.0, k, 1e-3).is_err());
        let i = DelayKernel::instantaneous();
        assert!(ScalarCriticalSpec::with_speeds(1.0, 1.0, i.clone(), vec![4.5, 3.0]).is_err());
        assert!(ScalarCriticalSpec::with_speeds(1.0, 1.0, i.clone(), vec![3.0, 3.0]).is_err());
        assert!(ScalarCriticalSpec::with_speeds(1.0, 1.0, i, vec![3.0, 1.9]).is_err());
    }

    #[test]
    fn short_continuation_is_cauchy_like() {
        let k = DelayKernel::new([(0.0, 0.75), (-1.0, 0.25)], 1.0).unwrap();
        let s = ScalarCriticalSpec::new(1.0, 1.0, k, 0.1).unwrap();
        let r = critical_wave(&s, None, &continuation_options()).unwrap();
        assert!(r.completed(), "{:?}", r.failure);
        assert_eq!(r.profiles.len(), s.speeds().len());
        let level = s.normalization_level();
        for p in &r.profiles {
            assert_relative_eq!(p.value(0, 0.0), level, max_relative = 1e-9);
            assert!(p.values[0].iter().all(|&v| (0.0..=1.0 / s.b() + 1e-12).contains(&v)));
            assert!((p.right_limit(0) - 1.0).abs() < 1e-3);
        }
        let deltas: Vec<f64> = r.steps.iter().filter_map(|st| st.delta).collect();
        assert!(deltas.windows(2).all(|w| w[1] < w[0]), "{deltas:?}");
    }
}
