use crate::error::{Result, WaveError};

/// Uniform grid `xi_k = xi_min + k h`, `k = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub xi_min: f64,
    pub h: f64,
    pub len: usize,
}

impl Grid {
    pub fn new(xi_min: f64, h: f64, len: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite() && xi_min.is_finite()) || len < 3 {
            return Err(WaveError::Domain(format!(
                "grid needs h > 0 and at least 3 points (h = {h}, len = {len})"
            )));
        }
        Ok(Self { xi_min, h, len })
    }

    /// Grid covering `[lo, hi]` with spacing at most `h_max`.
    pub fn spanning(lo: f64, hi: f64, h_max: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(WaveError::Domain(format!("empty grid interval [{lo}, {hi}]")));
        }
        let cells = ((hi - lo) / h_max).ceil().max(2.0) as usize;
        Self::new(lo, (hi - lo) / cells as f64, cells + 1)
    }

    #[inline]
    pub fn xi(&self, k: usize) -> f64 {
        self.xi_min + k as f64 * self.h
    }

    pub fn xi_max(&self) -> f64 {
        self.xi(self.len - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|k| self.xi(k))
    }

    /// First index with `xi_k >= x`, clamped to the grid.
    pub fn index_at_or_after(&self, x: f64) -> usize {
        let k = ((x - self.xi_min) / self.h).ceil();
        k.clamp(0.0, (self.len - 1) as f64) as usize
    }

    pub fn translated(&self, dx: f64) -> Self {
        Self { xi_min: self.xi_min + dx, ..*self }
    }
}

/// Extension of a profile to the left of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeftTail {
    /// `A e^{rate xi}` with `A` fixed by continuity at the left end.
    Exponential { rate: f64 },
    /// The leftmost grid value.
    Constant,
}

/// Gridded traveling profile with analytic tails.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveProfile {
    pub grid: Grid,
    pub values: Vec<Vec<f64>>,
    pub left_tail: Vec<LeftTail>,
    pub speed: f64,
    /// Coordinate of this grid's origin in the frame of the bound pair.
    pub frame_shift: f64,
}

impl WaveProfile {
    pub fn new(grid: Grid, values: Vec<Vec<f64>>, left_tail: Vec<LeftTail>, speed: f64) -> Result<Self> {
        if values.is_empty() || values.len() != left_tail.len() {
            return Err(WaveError::Domain("profile needs one tail per species".into()));
        }
        if let Some(bad) = values.iter().position(|v| v.len() != grid.len) {
            return Err(WaveError::Domain(format!("species {bad} has the wrong number of grid values")));
        }
        for (i, v) in values.iter().enumerate() {
            if let Some(k) = v.iter().position(|x| !x.is_finite()) {
                return Err(WaveError::NonFinite { t: 0.0, species: i, x: grid.xi(k) });
            }
        }
        Ok(Self { grid, values, left_tail, speed, frame_shift: 0.0 })
    }

    /// Spatially constant profile; tails are constant so equilibria stay exact.
    pub fn constant(grid: Grid, state: &[f64], speed: f64) -> Self {
        Self {
            grid,
            values: state.iter().map(|&s| vec![s; grid.len]).collect(),
            left_tail: vec![LeftTail::Constant; state.len()],
            speed,
            frame_shift: 0.0,
        }
    }

    /// Samples `f(i, xi)` on the grid.
    pub fn from_fn(grid: Grid, speed: f64, left_tail: Vec<LeftTail>, f: impl Fn(usize, f64) -> f64) -> Self {
        let values = (0..left_tail.len()).map(|i| grid.points().map(|x| f(i, x)).collect()).collect();
        Self { grid, values, left_tail, speed, frame_shift: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Tail amplitude `A_i` (for an exponential tail) in this grid's frame.
    pub fn left_amplitude(&self, i: usize) -> Option<f64> {
        match self.left_tail[i] {
            LeftTail::Exponential { rate } => Some(self.values[i][0] * (-rate * self.grid.xi_min).exp()),
            LeftTail::Constant => None,
        }
    }

    pub fn right_limit(&self, i: usize) -> f64 {
        *self.values[i].last().unwrap()
    }

    pub fn right_limits(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.right_limit(i)).collect()
    }

    /// Value at any `xi`: linear interpolation on the grid, analytic tails outside.
    #[inline]
    pub fn value(&self, i: usize, xi: f64) -> f64 {
        let v = &self.values[i];
        let t = (xi - self.grid.xi_min) / self.grid.h;
        if t <= 0.0 {
            return match self.left_tail[i] {
                LeftTail::Exponential { rate } => v[0] * (rate * (xi - self.grid.xi_min)).exp(),
                LeftTail::Constant => v[0],
            };
        }
        let last = self.grid.len - 1;
        if t >= last as f64 {
            return v[last];
        }
        let k = t as usize;
        let w = t - k as f64;
        v[k] + w * (v[k + 1] - v[k])
    }

    /// Same values on a grid whose origin is moved by `dx`.
    pub fn translated(&self, dx: f64) -> Self {
        Self {
            grid: self.grid.translated(dx),
            frame_shift: self.frame_shift - dx,
            ..self.clone()
        }
    }

    /// Resamples onto `grid`, keeping tails and the bound frame.
    pub fn resampled(&self, grid: Grid) -> Self {
        let values = (0..self.n()).map(|i| grid.points().map(|x| self.value(i, x)).collect()).collect();
        Self { grid, values, ..self.clone() }
    }

    /// Leftmost point where species `i` reaches `level`, linearly interpolated,
    /// and the number of further upward crossings within `window` of it.
    pub fn first_crossing(&self, i: usize, level: f64, window: f64) -> Option<(f64, usize)> {
        let v = &self.values[i];
        let mut first = None;
        let mut extra = 0;
        for k in 0..v.len() - 1 {
            if v[k] < level && v[k + 1] >= level {
                let x = self.grid.xi(k) + self.grid.h * (level - v[k]) / (v[k + 1] - v[k]);
                match first {
                    None => first = Some(x),
                    Some(x0) if x - x0 <= window => extra += 1,
                    Some(_) => break,
                }
            }
        }
        first.map(|x| (x, extra))
    }

    /// Translates so that species `i` first reaches `level` at `xi = 0`.
    pub fn normalized(&self, i: usize, level: f64) -> Option<Self> {
        self.first_crossing(i, level, 0.0).map(|(x, _)| self.translated(-x))
    }

    pub fn max_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect()
    }

    /// `true` when no grid step decreases by more than `tol` times the largest magnitude.
    pub fn is_monotone(&self, i: usize, tol: f64) -> bool {
        let v = &self.values[i];
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        v.windows(2).all(|w| w[1] - w[0] >= -tol * scale)
    }

    /// `psi_i(xi) e^{-rate (xi + frame_shift)}` at a grid-frame point.
    pub fn tail_ratio_at(&self, i: usize, xi: f64) -> Option<f64> {
        let rate = match self.left_tail[i] {
            LeftTail::Exponential { rate } => rate,
            LeftTail::Constant => return None,
        };
        let xb = xi + self.frame_shift;
        if rate * xb < -690.0 {
            return None;
        }
        Some(self.value(i, xi) * (-rate * xb).exp())
    }
}

/// Average of the tail ratio over the leftmost tenth of the grid, skipping
/// points where `e^{rate xi}` underflows. `None` for constant tails.
pub fn tail_ratio(profile: &WaveProfile) -> Vec<Option<f64>> {
    let g = profile.grid;
    let stop = (g.len / 10).max(1);
    (0..profile.n())
        .map(|i| {
            let rate = match profile.left_tail[i] {
                LeftTail::Exponential { rate } => rate,
                LeftTail::Constant => return None,
            };
            let mut sum = 0.0;
            let mut count = 0usize;
            for k in 0..stop {
                let xi = g.xi(k);
                if (rate * (xi + profile.frame_shift)).exp() < 1e-300 {
                    continue;
                }
                if let Some(r) = profile.tail_ratio_at(i, xi) {
                    sum += r;
                    count += 1;
                }
            }
            (count > 0).then(|| sum / count as f64)
        })
        .collect()
}
