//! Closed-form upper and lower wave profiles for the competition system and a
//! pointwise check of their differential inequalities.

use std::fmt;

use crate::error::{Result, WaveError};
use crate::model::ReactionModel;

/// Roots `0 < gamma1 <= gamma2` of `d g^2 - c g + r = 0`.
pub fn decay_rates(d: f64, r: f64, c: f64) -> Result<(f64, f64)> {
    if !(d > 0.0 && r > 0.0 && c.is_finite()) {
        return Err(WaveError::Domain(format!("decay rates need d, r > 0 (d = {d}, r = {r})")));
    }
    let threshold = 2.0 * (d * r).sqrt();
    let disc = c * c - 4.0 * d * r;
    if c <= 0.0 || disc < -1e-12 * c * c {
        return Err(WaveError::BelowThreshold { speed: c, threshold });
    }
    let root = disc.max(0.0).sqrt();
    let big = c + root;
    Ok((2.0 * r / big, big / (2.0 * d)))
}

/// `max_i 2 sqrt(d_i r_i)`.
pub fn critical_speed(model: &ReactionModel) -> f64 {
    model
        .d()
        .iter()
        .zip(model.rates())
        .map(|(d, r)| 2.0 * (d * r).sqrt())
        .fold(0.0, f64::max)
}

fn all_rates(model: &ReactionModel, c: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let r = model.rates();
    let mut g1 = Vec::with_capacity(model.n());
    let mut g2 = Vec::with_capacity(model.n());
    for (d, r) in model.d().iter().zip(&r) {
        let (a, b) = decay_rates(*d, *r, c)?;
        g1.push(a);
        g2.push(b);
    }
    Ok((g1, g2))
}

/// Upper end of the admissible shape interval `(1, upper)`.
pub fn eta_upper(gamma1: &[f64], gamma2: &[f64]) -> f64 {
    let mut upper = f64::INFINITY;
    for i in 0..gamma1.len() {
        upper = upper.min(gamma2[i] / gamma1[i]);
        for g in gamma1 {
            upper = upper.min((gamma1[i] + g) / gamma1[i]);
        }
    }
    upper
}

/// Midpoint of the admissible shape interval.
pub fn select_eta(model: &ReactionModel, c: f64) -> Result<f64> {
    let (g1, g2) = all_rates(model, c)?;
    let upper = eta_upper(&g1, &g2);
    if upper <= 1.0 + 1e-12 {
        return Err(WaveError::DegenerateShapeInterval { upper_end: upper });
    }
    Ok(0.5 * (1.0 + upper))
}

fn lv_coefficients(model: &ReactionModel) -> Result<ReactionModel> {
    model.to_lotka_volterra()
}

/// Depth parameter: the largest species ratio plus two.
pub fn select_q(model: &ReactionModel, c: f64, eta: f64) -> Result<f64> {
    let lv = lv_coefficients(model)?;
    let (r, cm, _) = lv.lv_parts().expect("competition model");
    let a = lv.self_weights();
    let (g1, _) = all_rates(&lv, c)?;
    let mut q = f64::NEG_INFINITY;
    for i in 0..lv.n() {
        let d = lv.d()[i];
        let den = d * eta * eta * g1[i] * g1[i] - c * eta * g1[i] + r[i];
        if den >= 0.0 {
            return Err(WaveError::InadmissibleShape { eta, species: i, denominator: den });
        }
        let row: f64 = (0..lv.n()).map(|j| cm[(i, j)]).sum();
        let num = -r[i] * cm[(i, i)] * a[i] - r[i] * row;
        q = q.max(num / den);
    }
    Ok(q + 2.0)
}

/// Upper profile `min(e^{g xi}, cap)` and lower profile `max(e^{g xi} - q e^{eta g xi}, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundPair {
    pub speed: f64,
    pub gamma1: Vec<f64>,
    pub gamma2: Vec<f64>,
    pub eta: f64,
    pub q: f64,
    pub caps: Vec<f64>,
}

/// Value and first two derivatives on a smooth piece.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl BoundPair {
    /// Pair with caller-chosen `eta` and `q`; no admissibility checks on them.
    pub fn with_params(model: &ReactionModel, c: f64, eta: f64, q: f64) -> Result<Self> {
        let lv = lv_coefficients(model)?;
        let caps = lv.carrying_caps()?;
        let (gamma1, gamma2) = all_rates(&lv, c)?;
        if !(eta > 1.0 && q > 0.0) {
            return Err(WaveError::Domain(format!("need eta > 1 and q > 0 (eta = {eta}, q = {q})")));
        }
        Ok(Self { speed: c, gamma1, gamma2, eta, q, caps })
    }

    pub fn n(&self) -> usize {
        self.gamma1.len()
    }

    /// Where the exponential branch of the upper profile meets the cap.
    pub fn upper_corner(&self, i: usize) -> f64 {
        self.caps[i].ln() / self.gamma1[i]
    }

    /// Where the lower profile reaches zero.
    pub fn lower_corner(&self, i: usize) -> f64 {
        -self.q.ln() / ((self.eta - 1.0) * self.gamma1[i])
    }

    /// Location and value of the lower profile's maximum.
    pub fn lower_peak(&self, i: usize) -> (f64, f64) {
        let xi = -(self.q * self.eta).ln() / ((self.eta - 1.0) * self.gamma1[i]);
        (xi, (self.gamma1[i] * xi).exp() * (1.0 - 1.0 / self.eta))
    }

    pub fn breakpoints(&self, i: usize) -> Vec<f64> {
        let mut b = vec![self.lower_corner(i), self.upper_corner(i)];
        b.sort_by(f64::total_cmp);
        b
    }

    pub fn upper(&self, i: usize, xi: f64) -> f64 {
        (self.gamma1[i] * xi).exp().min(self.caps[i])
    }

    pub fn lower(&self, i: usize, xi: f64) -> f64 {
        if xi >= self.lower_corner(i) {
            return 0.0;
        }
        let g = self.gamma1[i];
        ((g * xi).exp() - self.q * (self.eta * g * xi).exp()).max(0.0)
    }

    /// Derivatives of the piece containing `xi`; at a corner the right piece is used.
    pub fn upper_jet(&self, i: usize, xi: f64) -> Jet {
        let g = self.gamma1[i];
        if xi >= self.upper_corner(i) {
            Jet { value: self.caps[i], d1: 0.0, d2: 0.0 }
        } else {
            let e = (g * xi).exp();
            Jet { value: e, d1: g * e, d2: g * g * e }
        }
    }

    pub fn lower_jet(&self, i: usize, xi: f64) -> Jet {
        if xi >= self.lower_corner(i) {
            return Jet { value: 0.0, d1: 0.0, d2: 0.0 };
        }
        let g = self.gamma1[i];
        let eg = self.eta * g;
        let e1 = (g * xi).exp();
        let e2 = self.q * (eg * xi).exp();
        Jet {
            value: (e1 - e2).max(0.0),
            d1: g * e1 - eg * e2,
            d2: g * g * e1 - eg * eg * e2,
        }
    }

    /// One-sided slopes `(left, right)` of the upper profile.
    pub fn upper_slopes(&self, i: usize, xi: f64) -> (f64, f64) {
        let corner = self.upper_corner(i);
        let g = self.gamma1[i];
        let exp_slope = g * (g * xi).exp();
        if xi < corner {
            (exp_slope, exp_slope)
        } else if xi > corner {
            (0.0, 0.0)
        } else {
            (g * self.caps[i], 0.0)
        }
    }

    /// One-sided slopes `(left, right)` of the lower profile.
    pub fn lower_slopes(&self, i: usize, xi: f64) -> (f64, f64) {
        let corner = self.lower_corner(i);
        let jet = |x: f64| {
            let g = self.gamma1[i];
            g * (g * x).exp() - self.eta * g * self.q * (self.eta * g * x).exp()
        };
        if xi < corner {
            (jet(xi), jet(xi))
        } else if xi > corner {
            (0.0, 0.0)
        } else {
            (jet(xi), 0.0)
        }
    }
}

/// Builds the pair at speed `c` with the midpoint shape parameter and the formula depth.
pub fn build_bounds(model: &ReactionModel, c: f64) -> Result<BoundPair> {
    let eta = select_eta(model, c)?;
    let q = select_q(model, c, eta)?;
    BoundPair::with_params(model, c, eta, q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub side: Side,
    pub species: usize,
    pub xi: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheckReport {
    /// Smallest `-(upper inequality)` over the grid, per species.
    pub upper_worst: Vec<f64>,
    /// Smallest `lower inequality` over the grid, per species.
    pub lower_worst: Vec<f64>,
    pub violations: Vec<Violation>,
    pub points_checked: usize,
    pub breakpoints: Vec<Vec<f64>>,
    pub gamma1: Vec<f64>,
    pub eta: f64,
    pub q: f64,
}

impl BoundCheckReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for BoundCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "eta = {:.12e}", self.eta)?;
        writeln!(f, "q = {:.12e}", self.q)?;
        writeln!(f, "points_checked = {}", self.points_checked)?;
        for i in 0..self.gamma1.len() {
            writeln!(
                f,
                "species {i}: gamma1 = {:.12e}, breakpoints = {:?}, upper_worst_margin = {:.6e}, lower_worst_margin = {:.6e}",
                self.gamma1[i], self.breakpoints[i], self.upper_worst[i], self.lower_worst[i]
            )?;
        }
        writeln!(f, "violations = {}", self.violations.len())?;
        for v in self.violations.iter().take(20) {
            writeln!(f, "  {:?} species {} at xi = {:.6e}: {:.6e}", v.side, v.species, v.xi, v.value)?;
        }
        writeln!(f, "status = {}", if self.passed() { "pass" } else { "fail" })
    }
}

const VIOLATION_REL: f64 = 1e-12;
// jets this small are subnormal and carry no relative precision
const VIOLATION_ABS: f64 = 1e-300;

/// Evaluates both differential inequalities on `n_points` uniform points of
/// `[xi_min, xi_max]`, skipping points within half a spacing of a breakpoint.
pub fn verify_bound_inequalities(
    pair: &BoundPair,
    model: &ReactionModel,
    xi_min: f64,
    xi_max: f64,
    n_points: usize,
) -> Result<BoundCheckReport> {
    let lv = lv_coefficients(model)?;
    let (r, cm, kernels) = lv.lv_parts().expect("competition model");
    let n = lv.n();
    if pair.n() != n {
        return Err(WaveError::Domain("bound pair and model differ in species count".into()));
    }
    if n_points < 2 || !(xi_max > xi_min) {
        return Err(WaveError::Domain("verification grid needs two or more points on a proper interval".into()));
    }
    let a = lv.self_weights();
    let splits: Vec<_> = (0..n).map(|i| kernels[i][i].diagonal_split()).collect();
    let c = pair.speed;
    let h = (xi_max - xi_min) / (n_points - 1) as f64;
    let breakpoints: Vec<Vec<f64>> = (0..n).map(|i| pair.breakpoints(i)).collect();

    let mut report = BoundCheckReport {
        upper_worst: vec![f64::INFINITY; n],
        lower_worst: vec![f64::INFINITY; n],
        violations: Vec::new(),
        points_checked: 0,
        breakpoints: breakpoints.clone(),
        gamma1: pair.gamma1.clone(),
        eta: pair.eta,
        q: pair.q,
    };

    // load_i(xi) = sum_j c_ij int p_j(xi + c s) d eta_ij, diagonal without its atom at zero
    let load = |i: usize, xi: f64, profile: &dyn Fn(usize, f64) -> f64| -> f64 {
        let mut total = 0.0;
        for j in 0..n {
            let cij = cm[(i, j)];
            if cij == 0.0 {
                continue;
            }
            let integral = if i == j {
                splits[i].delayed_integral(|s| profile(j, xi + c * s))
            } else {
                kernels[i][j].stieltjes(|s| profile(j, xi + c * s))
            };
            total += cij * integral;
        }
        total
    };
    let lower_fn = |j: usize, x: f64| pair.lower(j, x);
    let upper_fn = |j: usize, x: f64| pair.upper(j, x);

    for k in 0..n_points {
        let xi = xi_min + k as f64 * h;
        for i in 0..n {
            if breakpoints[i].iter().any(|b| (xi - b).abs() < 0.5 * h) {
                continue;
            }
            report.points_checked += 1;
            let d = lv.d()[i];
            let cii_a = cm[(i, i)] * a[i];

            let up = pair.upper_jet(i, xi);
            let diff = d * up.d2 - c * up.d1;
            let react = r[i] * up.value * (1.0 - cii_a * up.value - load(i, xi, &lower_fn));
            let value = diff + react;
            let scale = (d * up.d2).abs() + (c * up.d1).abs() + (r[i] * up.value).abs() * (1.0 + cii_a * up.value);
            report.upper_worst[i] = report.upper_worst[i].min(-value);
            if value > VIOLATION_REL * scale + VIOLATION_ABS {
                report.violations.push(Violation { side: Side::Upper, species: i, xi, value });
            }

            let lo = pair.lower_jet(i, xi);
            let diff = d * lo.d2 - c * lo.d1;
            let react = r[i] * lo.value * (1.0 - cii_a * lo.value - load(i, xi, &upper_fn));
            let value = diff + react;
            let scale = (d * lo.d2).abs() + (c * lo.d1).abs() + (r[i] * lo.value).abs() * (1.0 + cii_a * lo.value);
            report.lower_worst[i] = report.lower_worst[i].min(value);
            if value < -(VIOLATION_REL * scale + VIOLATION_ABS) {
                report.violations.push(Violation { side: Side::Lower, species: i, xi, value });
            }
        }
    }
    Ok(report)
}
