//! Explicit method-of-lines simulator for the delayed system on a truncated
//! line with zero-flux ends.

use crate::bounds::{critical_speed, decay_rates};
use crate::error::{Result, WaveError};
use crate::model::{History, ReactionModel};
use crate::wave::{Grid, WaveProfile};

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    pub grid: Grid,
    pub snapshots: Vec<Snapshot>,
}

impl SpaceTimeField {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("at least the initial snapshot")
    }
}

/// Ring of the most recent fields, newest at lag 0, spaced by `dt`.
#[derive(Debug, Clone)]
pub struct HistoryBuffer {
    ring: Vec<Vec<Vec<f64>>>,
    head: usize,
    dt: f64,
}

impl HistoryBuffer {
    /// Fills lags `0..=ceil(tau/dt)+1` from `initial(i, x, s)` on `[-tau, 0]`.
    pub fn new(grid: &Grid, n: usize, tau: f64, dt: f64, initial: &dyn Fn(usize, f64, f64) -> f64) -> Self {
        let lags = (tau / dt).ceil() as usize + 2;
        // slot (cap - m) % cap holds lag m, so head = 0 is the newest
        let ring = (0..lags)
            .map(|slot| {
                let m = (lags - slot) % lags;
                let s = -(m as f64) * dt;
                (0..n).map(|i| grid.points().map(|x| initial(i, x, s)).collect()).collect()
            })
            .collect();
        Self { ring, head: 0, dt }
    }

    pub fn capacity(&self) -> usize {
        self.ring.len()
    }

    #[inline]
    fn lag(&self, m: usize) -> &Vec<Vec<f64>> {
        let cap = self.ring.len();
        &self.ring[(self.head + cap - m) % cap]
    }

    pub fn current(&self) -> &Vec<Vec<f64>> {
        self.lag(0)
    }

    /// Stores a new newest field, dropping the oldest.
    pub fn push(&mut self, field: Vec<Vec<f64>>) {
        self.head = (self.head + 1) % self.ring.len();
        self.ring[self.head] = field;
    }

    /// Field value at time offset `s <= 0`, linear in time between stored lags.
    #[inline]
    pub fn value(&self, species: usize, x_index: usize, s: f64) -> f64 {
        if s == 0.0 {
            return self.lag(0)[species][x_index];
        }
        let p = -s / self.dt;
        let m = p.floor() as usize;
        let w = p - m as f64;
        let a = self.lag(m)[species][x_index];
        if w == 0.0 {
            return a;
        }
        a + w * (self.lag(m + 1)[species][x_index] - a)
    }
}

struct PointHistory<'a> {
    buffer: &'a HistoryBuffer,
    k: usize,
}

impl History for PointHistory<'_> {
    #[inline]
    fn value(&self, species: usize, s: f64) -> f64 {
        self.buffer.value(species, self.k, s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub dt: f64,
    pub steps: usize,
    /// Record a snapshot every this many steps (and always the last one).
    pub snapshot_every: usize,
}

/// Largest stable step for explicit central diffusion.
pub fn stable_dt(grid: &Grid, model: &ReactionModel) -> f64 {
    let dmax = model.d().iter().copied().fold(0.0, f64::max);
    grid.h * grid.h / (2.0 * dmax)
}

/// Forward Euler in time, central differences in space, history lookups
/// through a ring buffer.
pub fn simulate(
    model: &ReactionModel,
    grid: Grid,
    initial: &dyn Fn(usize, f64, f64) -> f64,
    options: &SimOptions,
) -> Result<SpaceTimeField> {
    let limit = stable_dt(&grid, model);
    if !(options.dt > 0.0) || options.dt > limit {
        return Err(WaveError::Stability { dt: options.dt, suggested: 0.9 * limit });
    }
    if options.snapshot_every == 0 {
        return Err(WaveError::Domain("snapshot cadence must be positive".into()));
    }
    let n = model.n();
    let dt = options.dt;
    let len = grid.len;
    let mut buffer = HistoryBuffer::new(&grid, n, model.max_delay(), dt, initial);
    let mut snapshots = vec![Snapshot { t: 0.0, values: buffer.current().clone() }];
    let coef: Vec<f64> = model.d().iter().map(|d| d * dt / (grid.h * grid.h)).collect();

    for step in 1..=options.steps {
        let now = buffer.current();
        let mut next = vec![vec![0.0; len]; n];
        for i in 0..n {
            let u = &now[i];
            let out = &mut next[i];
            for k in 0..len {
                let left = if k == 0 { u[1] } else { u[k - 1] };
                let right = if k == len - 1 { u[len - 2] } else { u[k + 1] };
                let lap = left - 2.0 * u[k] + right;
                let f = model.reaction_unchecked(i, &PointHistory { buffer: &buffer, k });
                out[k] = u[k] + coef[i] * lap + dt * f;
            }
            if let Some(k) = out.iter().position(|v| !v.is_finite()) {
                return Err(WaveError::NonFinite { t: step as f64 * dt, species: i, x: grid.xi(k) });
            }
        }
        buffer.push(next);
        if step % options.snapshot_every == 0 || step == options.steps {
            snapshots.push(Snapshot { t: step as f64 * dt, values: buffer.current().clone() });
        }
    }
    Ok(SpaceTimeField { grid, snapshots })
}

/// Rightmost downward crossing of `level` by `species`, linearly interpolated.
pub fn front_position(grid: &Grid, values: &[f64], level: f64) -> Option<f64> {
    let k = values.iter().rposition(|&v| v >= level)?;
    if k == values.len() - 1 {
        return Some(grid.xi_max());
    }
    let (a, b) = (values[k], values[k + 1]);
    Some(grid.xi(k) + grid.h * (a - level) / (a - b))
}

/// Leftmost upward crossing of `level`, for profiles rising to the right.
pub fn rising_edge(grid: &Grid, values: &[f64], level: f64) -> Option<f64> {
    let k = values.iter().position(|&v| v >= level)?;
    if k == 0 {
        return Some(grid.xi_min);
    }
    let (a, b) = (values[k - 1], values[k]);
    Some(grid.xi(k - 1) + grid.h * (level - a) / (b - a))
}

fn least_squares_slope(ts: &[f64], xs: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let xm = xs.iter().sum::<f64>() / n;
    let num: f64 = ts.iter().zip(xs).map(|(t, x)| (t - tm) * (x - xm)).sum();
    let den: f64 = ts.iter().map(|t| (t - tm) * (t - tm)).sum();
    num / den
}

/// Slope of the front location over snapshots with `t` in `window`.
pub fn spreading_speed(field: &SpaceTimeField, species: usize, level: f64, window: (f64, f64)) -> Result<f64> {
    spreading_speed_corrected(field, species, level, window, 0.0)
}

/// As [`spreading_speed`], fitting `x(t) + log_coef * ln t` instead of `x(t)`.
pub fn spreading_speed_corrected(
    field: &SpaceTimeField,
    species: usize,
    level: f64,
    window: (f64, f64),
    log_coef: f64,
) -> Result<f64> {
    let mut ts = Vec::new();
    let mut xs = Vec::new();
    for snap in field.snapshots.iter().filter(|s| s.t >= window.0 && s.t <= window.1) {
        let x = front_position(&field.grid, &snap.values[species], level).ok_or(WaveError::NoFront { level })?;
        ts.push(snap.t);
        xs.push(x + if log_coef != 0.0 { log_coef * snap.t.ln() } else { 0.0 });
    }
    if ts.len() < 10 {
        return Err(WaveError::Domain(format!("need at least 10 snapshots in the window, found {}", ts.len())));
    }
    Ok(least_squares_slope(&ts, &xs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdvectionResult {
    /// Best-fit shift minus `c T`.
    pub drift_error: f64,
    /// Sup-norm mismatch after alignment, over the interior.
    pub shape_error: f64,
    pub best_shift: f64,
    pub expected_shift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdvectionOptions {
    pub horizon: f64,
    /// Fraction of the profile grid covered by the simulation domain.
    pub domain_fraction: f64,
    pub dx: f64,
    /// Fraction of the stability limit used as time step.
    pub dt_fraction: f64,
}

impl Default for AdvectionOptions {
    fn default() -> Self {
        Self { horizon: 20.0, domain_fraction: 0.75, dx: 0.05, dt_fraction: 0.5 }
    }
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let g = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Simulates from the history `u_i(x, s) = psi_i(x + c s)` and compares
/// `u(., T)` with translates of the profile.
pub fn advection_check(profile: &WaveProfile, model: &ReactionModel, options: &AdvectionOptions) -> Result<AdvectionResult> {
    let c = profile.speed;
    let t_end = options.horizon;
    let pg = profile.grid;
    let mid = 0.5 * (pg.xi_min + pg.xi_max());
    let half = 0.5 * (pg.xi_max() - pg.xi_min) * options.domain_fraction;
    let grid = Grid::spanning(mid - half, mid + half, options.dx)?;
    let gamma_min = profile
        .left_tail
        .iter()
        .filter_map(|t| match t {
            crate::wave::LeftTail::Exponential { rate } => Some(*rate),
            crate::wave::LeftTail::Constant => None,
        })
        .fold(f64::INFINITY, f64::min);
    let guard = if gamma_min.is_finite() { 5.0 / gamma_min } else { 0.0 };

    let dt_limit = stable_dt(&grid, model);
    let steps = (t_end / (options.dt_fraction * dt_limit)).ceil() as usize;
    let dt = t_end / steps as f64;
    let initial = |i: usize, x: f64, s: f64| profile.value(i, x + c * s);
    let field = simulate(model, grid, &initial, &SimOptions { dt, steps, snapshot_every: steps })?;
    let end = &field.last().values;

    // contamination: every species' half-level front must stay clear of the edges
    let maxes = profile.max_values();
    for i in 0..profile.n() {
        if maxes[i] - profile.values[i].iter().copied().fold(f64::INFINITY, f64::min) <= 1e-12 {
            continue;
        }
        let level = 0.5 * profile.right_limit(i);
        for (label, vals) in [("start", &field.snapshots[0].values[i]), ("end", &end[i])] {
            if let Some(x) = rising_edge(&grid, vals, level) {
                if x - grid.xi_min < guard || grid.xi_max() - x < guard {
                    return Err(WaveError::Contaminated(format!(
                        "species {i} front at x = {x:.3} ({label}) is within {guard:.3} of the domain edge"
                    )));
                }
            }
        }
    }

    let lo = grid.index_at_or_after(grid.xi_min + guard);
    let hi = grid.index_at_or_after(grid.xi_max() - guard);
    let misfit = |delta: f64| -> f64 {
        let mut acc = 0.0;
        for i in 0..profile.n() {
            for k in lo..hi {
                let e = end[i][k] - profile.value(i, grid.xi(k) + delta);
                acc += e * e;
            }
        }
        acc
    };
    let expected = c * t_end;
    let width = (0.5 * expected).max(2.0);
    let scan = 200;
    let mut best = (expected, f64::INFINITY);
    let mut worst = 0.0f64;
    for s in 0..=scan {
        let delta = expected - width + 2.0 * width * s as f64 / scan as f64;
        let m = misfit(delta);
        worst = worst.max(m);
        if m < best.1 {
            best = (delta, m);
        }
    }
    let step = 2.0 * width / scan as f64;
    let best_shift = if worst - best.1 <= 1e-24 {
        expected
    } else {
        golden_min(&misfit, best.0 - step, best.0 + step, 60)
    };
    let mut shape_error = 0.0f64;
    for i in 0..profile.n() {
        for k in lo..hi {
            shape_error = shape_error.max((end[i][k] - profile.value(i, grid.xi(k) + best_shift)).abs());
        }
    }
    Ok(AdvectionResult { drift_error: best_shift - expected, shape_error, best_shift, expected_shift: expected })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeVerdict {
    pub species: usize,
    pub speed: f64,
    pub threshold: f64,
    pub measured_speed: f64,
    pub required_margin: f64,
    pub consistent: bool,
    /// The decay-rate computation for `species` at `speed` fails (complex roots).
    pub decay_rates_fail: bool,
}

/// Simulates the logistic floor `w_t = d w_xx + r w (1 - M w)` of the fastest
/// species from compact data and checks that it outruns speed `c`.
pub fn nonexistence_probe(model: &ReactionModel, c: f64) -> Result<ProbeVerdict> {
    let threshold = critical_speed(model);
    if c >= threshold {
        return Err(WaveError::Inapplicable(format!("speed {c} is not below the threshold {threshold}")));
    }
    let rates = model.rates();
    let species = (0..model.n())
        .max_by(|&a, &b| {
            let sa = model.d()[a] * rates[a];
            let sb = model.d()[b] * rates[b];
            sa.total_cmp(&sb)
        })
        .unwrap();
    let (d, r) = (model.d()[species], rates[species]);
    let m = model
        .positive_equilibrium()
        .ok()
        .and_then(|e| e.positive)
        .map(|u| 1.0 / u[species])
        .unwrap_or(1.0);
    let floor = ReactionModel::lotka_volterra_undelayed(vec![d], vec![r], nalgebra::DMatrix::from_element(1, 1, m))?;

    // nondimensional layout: length sqrt(d/r), time 1/r
    let ell = (d / r).sqrt();
    let grid = Grid::spanning(0.0, 500.0 * ell, 0.1 * ell)?;
    let dt = 0.4 * stable_dt(&grid, &floor);
    let t_end = 200.0 / r;
    let steps = (t_end / dt).ceil() as usize;
    let snapshot_every = (steps / 400).max(1);
    let cap = 1.0 / m;
    let bump = 5.0 * ell;
    let initial = move |_: usize, x: f64, _: f64| if x < bump { 0.5 * cap } else { 0.0 };
    let field = simulate(&floor, grid, &initial, &SimOptions { dt, steps, snapshot_every })?;
    let measured_speed =
        spreading_speed_corrected(&field, 0, 0.5 * cap, (100.0 / r, t_end), 1.5 * ell)?;
    let required_margin = 0.5 * (threshold - c);
    let decay_rates_fail = matches!(decay_rates(d, r, c), Err(WaveError::BelowThreshold { .. }));
    Ok(ProbeVerdict {
        species,
        speed: c,
        threshold,
        measured_speed,
        required_margin,
        consistent: measured_speed - c >= required_margin,
        decay_rates_fail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::DelayKernel;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn bump(x: f64) -> f64 {
        (-(x * x) / 4.0).exp()
    }

    #[test]
    fn equilibria_stay_put() {
        let m = ReactionModel::lotka_volterra_undelayed(
            vec![0.0001, 0.05],
            vec![0.1, 0.5],
            DMatrix::from_row_slice(2, 2, &[1.0, 0.55, 0.75, 1.0]),
        )
        .unwrap();
        let u = m.target_state().unwrap();
        let g = Grid::spanning(-10.0, 10.0, 0.1).unwrap();
        let opts = SimOptions { dt: 0.05, steps: 400, snapshot_every: 100 };
        let f = simulate(&m, g, &|i, _, _| u[i], &opts).unwrap();
        for s in &f.snapshots {
            for i in 0..2 {
                assert!(s.values[i].iter().all(|v| (v - u[i]).abs() < 1e-8));
            }
        }
        let z = simulate(&m, g, &|_, _, _| 0.0, &opts).unwrap();
        assert!(z.last().values.iter().flatten().all(|&v| v == 0.0));
        assert_eq!(z.snapshots.len(), 5);
    }

    #[test]
    fn stability_bound_is_enforced() {
        let m = ReactionModel::fisher(1.0, 1.0).unwrap();
        let g = Grid::spanning(-10.0, 10.0, 0.1).unwrap();
        let err = simulate(&m, g, &|_, _, _| 0.0, &SimOptions { dt: 0.01, steps: 1, snapshot_every: 1 }).unwrap_err();
        match err {
            WaveError::Stability { suggested, .. } => assert_relative_eq!(suggested, 0.9 * 0.005, max_relative = 1e-9),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn fisher_bump_saturates() {
        let m = ReactionModel::fisher(1.0, 1.0).unwrap();
        let g = Grid::spanning(-60.0, 60.0, 0.2).unwrap();
        let f = simulate(&m, g, &|_, x, _| 0.1 * bump(x), &SimOptions { dt: 0.01, steps: 1500, snapshot_every: 1500 }).unwrap();
        let mid = g.index_at_or_after(0.0);
        assert!((f.last().values[0][mid] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn stationary_field_has_zero_speed() {
        let m = ReactionModel::fisher(1.0, 1.0).unwrap();
        let g = Grid::spanning(-10.0, 10.0, 0.1).unwrap();
        let f = simulate(&m, g, &|_, _, _| 1.0, &SimOptions { dt: 0.004, steps: 100, snapshot_every: 5 }).unwrap();
        let s = spreading_speed(&f, 0, 0.5, (0.0, 1.0)).unwrap();
        assert!(s.abs() < 1e-12);
        assert!(matches!(spreading_speed(&f, 0, 2.0, (0.0, 1.0)), Err(WaveError::NoFront { .. })));
    }

    #[test]
    fn history_buffer_interpolates_in_time() {
        let g = Grid::new(0.0, 1.0, 3).unwrap();
        let b = HistoryBuffer::new(&g, 1, 1.0, 0.25, &|_, x, s| x + 10.0 * s);
        assert_eq!(b.capacity(), 6);
        assert_relative_eq!(b.value(0, 2, -0.6), 2.0 - 6.0, max_relative = 1e-12);
        assert_relative_eq!(b.value(0, 1, -1.0), 1.0 - 10.0, max_relative = 1e-12);
    }

    #[test]
    fn delayed_history_is_read() {
        // u' = u(t-1)(1 - u(t)) for a flat field u = 0.5 on [-1, 0]
        let m = ReactionModel::zou(1.0, 1.0, DelayKernel::point_mass(-1.0, 1.0).unwrap()).unwrap();
        let g = Grid::new(0.0, 1.0, 5).unwrap();
        let f = simulate(&m, g, &|_, _, s| if s < -0.5 { 0.2 } else { 0.5 }, &SimOptions { dt: 0.01, steps: 1, snapshot_every: 1 }).unwrap();
        assert_relative_eq!(f.last().values[0][2], 0.5 + 0.01 * 0.2 * 0.5, max_relative = 1e-12);
    }

    #[test]
    fn refinement_order_is_two() {
        let m = ReactionModel::fisher(1.0, 1.0).unwrap();
        let init = |_: usize, x: f64, _: f64| 0.5 * bump(x);
        let run = |h: f64| {
            let g = Grid::spanning(-20.0, 20.0, h).unwrap();
            let dt = 0.2 * h * h;
            let steps = (1.0 / dt).round() as usize;
            let f = simulate(&m, g, &init, &SimOptions { dt, steps, snapshot_every: steps }).unwrap();
            (g, f.last().values[0].clone())
        };
        let (g1, u1) = run(0.4);
        let (g2, u2) = run(0.2);
        let (g3, u3) = run(0.1);
        let at = |g: &Grid, u: &[f64], x: f64| u[((x - g.xi_min) / g.h).round() as usize];
        let mut e1 = 0.0f64;
        let mut e2 = 0.0f64;
        for k in 0..=40 {
            let x = -8.0 + 0.4 * k as f64;
            e1 = e1.max((at(&g1, &u1, x) - at(&g2, &u2, x)).abs());
            e2 = e2.max((at(&g2, &u2, x) - at(&g3, &u3, x)).abs());
        }
        let order = (e1 / e2).log2();
        assert!(order >= 1.8, "order {order}");
    }

    #[test]
    fn translation_invariance() {
        let m = ReactionModel::fisher(1.0, 1.0).unwrap();
        let g = Grid::spanning(-40.0, 40.0, 0.1).unwrap();
        let opts = SimOptions { dt: 0.004, steps: 500, snapshot_every: 500 };
        let a = simulate(&m, g, &|_, x, _| 0.5 * bump(x), &opts).unwrap();
        let b = simulate(&m, g, &|_, x, _| 0.5 * bump(x - 3.0), &opts).unwrap();
        let shift = 30;
        for k in 100..g.len - 100 - shift {
            assert!((a.last().values[0][k] - b.last().values[0][k + shift]).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn comparison_keeps_order(amps in prop::collection::vec(0.0f64..0.5, 8), extra in prop::collection::vec(0.0f64..0.4, 8)) {
            let m = ReactionModel::fisher(1.0, 1.0).unwrap();
            let g = Grid::spanning(-20.0, 20.0, 0.2).unwrap();
            let lower = |x: f64| amps.iter().enumerate().map(|(j, a)| a * bump(x - 4.0 * j as f64 + 14.0)).sum::<f64>().min(1.0);
            let upper = |x: f64| (lower(x) + extra.iter().enumerate().map(|(j, a)| a * bump(x - 4.0 * j as f64 + 12.0)).sum::<f64>()).min(1.0);
            let opts = SimOptions { dt: 0.01, steps: 300, snapshot_every: 30 };
            let fl = simulate(&m, g, &|_, x, _| lower(x), &opts).unwrap();
            let fu = simulate(&m, g, &|_, x, _| upper(x), &opts).unwrap();
            for (sl, su) in fl.snapshots.iter().zip(&fu.snapshots) {
                for (a, b) in sl.values[0].iter().zip(&su.values[0]) {
                    prop_assert!(a <= &(b + 1e-10));
                }
            }
        }

        #[test]
        fn box_is_invariant(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = ReactionModel::lotka_volterra_undelayed(
                vec![0.5, 1.0],
                vec![1.0, 0.7],
                DMatrix::from_row_slice(2, 2, &[1.0, 0.55, 0.75, 1.0]),
            ).unwrap();
            let g = Grid::spanning(-10.0, 10.0, 0.25).unwrap();
            let data: Vec<Vec<f64>> = (0..2).map(|_| (0..g.len).map(|_| rng.gen::<f64>()).collect()).collect();
            let init = |i: usize, x: f64, _: f64| data[i][((x - g.xi_min) / g.h).round() as usize];
            let f = simulate(&m, g, &init, &SimOptions { dt: 0.02, steps: 200, snapshot_every: 20 }).unwrap();
            for s in &f.snapshots {
                for v in s.values.iter().flatten() {
                    prop_assert!(*v >= -1e-8 && *v <= 1.0 + 1e-8);
                }
            }
        }
    }

    #[test]
    fn equilibrium_profile_has_no_advection_error() {
        let m = ReactionModel::fisher(1.0, 1.0).unwrap();
        let g = Grid::spanning(-50.0, 50.0, 0.1).unwrap();
        let p = WaveProfile::constant(g, &[1.0], 3.0);
        let opts = AdvectionOptions { horizon: 2.0, dx: 0.1, ..AdvectionOptions::default() };
        let r = advection_check(&p, &m, &opts).unwrap();
        assert_eq!(r.drift_error, 0.0);
        assert!(r.shape_error < 1e-12);
    }

    #[test]
    fn solved_fisher_front_advects() {
        let m = ReactionModel::fisher(1.0, 1.0).unwrap();
        let (p, _) = crate::wave::solve_wave(&m, 3.0, &Default::default()).unwrap();
        let opts = AdvectionOptions { horizon: 5.0, dx: 0.1, ..AdvectionOptions::default() };
        let r = advection_check(&p, &m, &opts).unwrap();
        assert!(r.shape_error < 5e-3, "{r:?}");
        assert!(r.drift_error.abs() < 0.02 * r.expected_shift, "{r:?}");

        let mut bent = p.clone();
        for (k, v) in bent.values[0].iter_mut().enumerate() {
            *v += 0.1 * bump(p.grid.xi(k) - 5.0);
        }
        let r = advection_check(&bent, &m, &opts).unwrap();
        assert!(r.shape_error > 2e-2, "{r:?}");
    }

    #[test]
    fn probe_requires_subcritical_speed() {
        let m = ReactionModel::fisher(1.0, 1.0).unwrap();
        assert!(matches!(nonexistence_probe(&m, 2.0), Err(WaveError::Inapplicable(_))));
    }
}
