//! Contracting rectangle families `y -> [a(y), b(y)]` and the face checks
//! that make them strictly contracting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, WaveError};
use crate::model::{nicholson_birth, nicholson_square, ReactionModel};
use crate::wave::WaveProfile;

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    /// `a = y u*`, `b = y u* + (1 - y)(cap + eps)`.
    LotkaVolterra { ustar: Vec<f64>, caps: Vec<f64>, epsilon: f64 },
    /// `a = m + eps h`, `b = f(m)` with `m = 2y + (1 - y) k1`.
    Nicholson { epsilon: f64 },
    /// `a = y`, `b = (1 + k)(1 - y) + y`.
    Zou { k: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RectangleFamily {
    pub kind: FamilyKind,
    pub target: Vec<f64>,
}

/// `e^{3 - e}`, the lower end of the Nicholson box.
pub fn nicholson_k1() -> f64 {
    (3.0 - std::f64::consts::E).exp()
}

const NICHOLSON_K: f64 = 2.0;

fn nicholson_mid(y: f64) -> f64 {
    y * NICHOLSON_K + (1.0 - y) * nicholson_k1()
}

/// `h(y) = (f^2(m) - m) / 2`.
pub fn nicholson_h(y: f64) -> f64 {
    let m = nicholson_mid(y);
    0.5 * (nicholson_square(m) - m)
}

impl RectangleFamily {
    pub fn n(&self) -> usize {
        self.target.len()
    }

    pub fn a(&self, y: f64) -> Vec<f64> {
        match &self.kind {
            FamilyKind::LotkaVolterra { ustar, .. } => ustar.iter().map(|u| y * u).collect(),
            FamilyKind::Nicholson { epsilon } => vec![nicholson_mid(y) + epsilon * nicholson_h(y)],
            FamilyKind::Zou { .. } => vec![y],
        }
    }

    pub fn b(&self, y: f64) -> Vec<f64> {
        match &self.kind {
            FamilyKind::LotkaVolterra { ustar, caps, epsilon } => ustar
                .iter()
                .zip(caps)
                .map(|(u, cap)| y * u + (1.0 - y) * (cap + epsilon))
                .collect(),
            FamilyKind::Nicholson { .. } => vec![nicholson_birth(nicholson_mid(y))],
            FamilyKind::Zou { k } => vec![(1.0 + k) * (1.0 - y) + y],
        }
    }

    pub fn contains(&self, y: f64, lo: &[f64], hi: &[f64]) -> bool {
        let (a, b) = (self.a(y), self.b(y));
        (0..self.n()).all(|i| a[i] <= lo[i] && hi[i] <= b[i])
    }

    /// Checks `a(0) <= a(y1) <= a(y2) <= E <= b(y2) <= b(y1) <= b(0)` on a uniform `y` grid.
    pub fn is_nested(&self, n_grid: usize) -> bool {
        let ys: Vec<f64> = (0..n_grid).map(|k| k as f64 / (n_grid - 1) as f64).collect();
        let tol = 1e-12;
        for w in ys.windows(2) {
            let (a0, a1, b0, b1) = (self.a(w[0]), self.a(w[1]), self.b(w[0]), self.b(w[1]));
            for i in 0..self.n() {
                if a1[i] + tol < a0[i] || b1[i] > b0[i] + tol || a1[i] > b1[i] + tol {
                    return false;
                }
            }
        }
        let (a1, b1) = (self.a(1.0), self.b(1.0));
        (0..self.n()).all(|i| (a1[i] - self.target[i]).abs() <= 1e-12 && (b1[i] - self.target[i]).abs() <= 1e-12)
    }
}

fn lv_family_parts(model: &ReactionModel, epsilon: f64) -> Result<RectangleFamily> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(WaveError::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let lv = model.to_lotka_volterra()?;
    let ustar = lv.target_state()?;
    let caps = lv.carrying_caps()?;
    Ok(RectangleFamily {
        kind: FamilyKind::LotkaVolterra { ustar: ustar.clone(), caps, epsilon },
        target: ustar,
    })
}

/// The affine family around `u*`; refused when the weak-coupling condition fails.
pub fn lv_family(model: &ReactionModel, epsilon: f64) -> Result<RectangleFamily> {
    let (holds, margins) = model.to_lotka_volterra()?.weak_coupling_check()?;
    if !holds {
        return Err(WaveError::NotContracting(format!("coupling margins {margins:?} are not all positive")));
    }
    lv_family_parts(model, epsilon)
}

/// As [`lv_family`] without the coupling precondition, for negative controls.
pub fn lv_family_unchecked(model: &ReactionModel, epsilon: f64) -> Result<RectangleFamily> {
    lv_family_parts(model, epsilon)
}

/// Largest `epsilon` in `{1, 1/2, 1/4, ...}` whose family passes the face check.
pub fn lv_family_auto(model: &ReactionModel, seed: u64) -> Result<(RectangleFamily, ContractionReport)> {
    let ys = default_y_levels();
    let mut eps = 1.0;
    for _ in 0..40 {
        let fam = lv_family(model, eps)?;
        let rep = verify_strict_contraction(&fam, model, &ys, DEFAULT_FACE_SAMPLES, seed)?;
        if rep.passed() {
            return Ok((fam, rep));
        }
        eps *= 0.5;
    }
    Err(WaveError::NotContracting("no epsilon down to 2^-40 passes the face check".into()))
}

pub fn nicholson_family(epsilon: f64) -> Result<RectangleFamily> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(WaveError::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let fam = RectangleFamily { kind: FamilyKind::Nicholson { epsilon }, target: vec![NICHOLSON_K] };
    for k in 1..1000 {
        let y = k as f64 / 1000.0;
        let a = fam.a(y)[0];
        if a >= NICHOLSON_K {
            return Err(WaveError::Domain(format!("epsilon {epsilon} too large: a({y}) = {a} >= 2")));
        }
    }
    Ok(fam)
}

pub fn zou_family(k: f64) -> Result<RectangleFamily> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(WaveError::Domain(format!("headroom k must be positive, got {k}")));
    }
    Ok(RectangleFamily { kind: FamilyKind::Zou { k }, target: vec![1.0] })
}

/// `y = 0.1, 0.2, ..., 0.9`.
pub fn default_y_levels() -> Vec<f64> {
    (1..10).map(|k| k as f64 / 10.0).collect()
}

pub const DEFAULT_FACE_SAMPLES: usize = 1000;
const MAX_CORNER_COORDS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelMargins {
    pub y: f64,
    /// Minimum of `f_i` on the lower face, per species (must be positive).
    pub lower_face_min: Vec<f64>,
    /// Maximum of `f_i` on the upper face, per species (must be negative).
    pub upper_face_max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub levels: Vec<LevelMargins>,
    pub nested: bool,
    pub corners_enumerated: bool,
    pub samples_per_face: usize,
}

impl ContractionReport {
    pub fn passed(&self) -> bool {
        self.nested
            && self.levels.iter().all(|l| {
                l.lower_face_min.iter().all(|&m| m > 0.0) && l.upper_face_max.iter().all(|&m| m < 0.0)
            })
    }

    /// Smallest signed margin over all levels, faces and species.
    pub fn worst_margin(&self) -> f64 {
        self.levels
            .iter()
            .flat_map(|l| l.lower_face_min.iter().copied().chain(l.upper_face_max.iter().map(|m| -m)))
            .fold(f64::INFINITY, f64::min)
    }
}

impl std::fmt::Display for ContractionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "nested = {}", self.nested)?;
        writeln!(f, "corners_enumerated = {}", self.corners_enumerated)?;
        writeln!(f, "samples_per_face = {}", self.samples_per_face)?;
        for l in &self.levels {
            writeln!(f, "y = {:.4}: lower_face_min = {:?}, upper_face_max = {:?}", l.y, l.lower_face_min, l.upper_face_max)?;
        }
        writeln!(f, "worst_margin = {:.6e}", self.worst_margin())?;
        writeln!(f, "status = {}", if self.passed() { "pass" } else { "fail" })
    }
}

/// Evaluates `f_i` with `u_i(0)` pinned to each face and every other history
/// coordinate inside `[a(y), b(y)]`: all corners when few enough, plus
/// `face_samples` seeded uniform draws.
pub fn verify_strict_contraction(
    family: &RectangleFamily,
    model: &ReactionModel,
    y_samples: &[f64],
    face_samples: usize,
    seed: u64,
) -> Result<ContractionReport> {
    let n = model.n();
    if family.n() != n {
        return Err(WaveError::Domain("family and model differ in species count".into()));
    }
    let offsets: Vec<Vec<f64>> = (0..n).map(|j| model.history_offsets(j)).collect();
    let coords: Vec<(usize, usize)> = offsets
        .iter()
        .enumerate()
        .flat_map(|(j, o)| (0..o.len()).map(move |k| (j, k)))
        .collect();
    let free = coords.len() - 1;
    let enumerate = n <= 8 && free <= MAX_CORNER_COORDS;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut levels = Vec::with_capacity(y_samples.len());
    for &y in y_samples {
        let (a, b) = (family.a(y), family.b(y));
        let mut lower_face_min = vec![f64::INFINITY; n];
        let mut upper_face_max = vec![f64::NEG_INFINITY; n];
        for i in 0..n {
            let zero = offsets[i].iter().position(|&s| s == 0.0).unwrap();
            let pinned = coords.iter().position(|&(j, k)| j == i && k == zero).unwrap();
            let others: Vec<(usize, usize)> = coords.iter().copied().filter(|&c| c != coords[pinned]).collect();
            let mut table: Vec<Vec<f64>> = offsets.iter().map(|o| vec![0.0; o.len()]).collect();

            for (face, value) in [(0usize, a[i]), (1, b[i])] {
                let mut eval = |table: &mut Vec<Vec<f64>>| {
                    table[i][zero] = value;
                    let hist = |j: usize, s: f64| {
                        let k = offsets[j].binary_search_by(|o| o.total_cmp(&s)).expect("tabulated offset");
                        table[j][k]
                    };
                    let f = model.reaction_unchecked(i, &hist);
                    if face == 0 {
                        lower_face_min[i] = lower_face_min[i].min(f);
                    } else {
                        upper_face_max[i] = upper_face_max[i].max(f);
                    }
                };
                if enumerate {
                    for mask in 0u64..(1u64 << others.len()) {
                        for (bit, &(j, k)) in others.iter().enumerate() {
                            table[j][k] = if mask >> bit & 1 == 1 { b[j] } else { a[j] };
                        }
                        eval(&mut table);
                    }
                }
                for _ in 0..face_samples {
                    for &(j, k) in &others {
                        table[j][k] = a[j] + rng.gen::<f64>() * (b[j] - a[j]);
                    }
                    eval(&mut table);
                }
            }
        }
        levels.push(LevelMargins { y, lower_face_min, upper_face_max });
    }
    Ok(ContractionReport {
        levels,
        nested: family.is_nested(100),
        corners_enumerated: enumerate,
        samples_per_face: face_samples,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitVerdict {
    pub converges_to_target: bool,
    /// Level `y` reached at the evaluation point near the right end.
    pub y_end: f64,
    /// `(xi, y(xi))`; `None` where the tail leaves the outer box.
    pub y_trace: Vec<(f64, Option<f64>)>,
}

pub const TOL_Y: f64 = 0.02;
const VERDICT_FRACTION: f64 = 0.95;

/// For each `xi`, the largest `y` whose rectangle holds the profile on `[xi, inf)`.
pub fn limit_verdict(profile: &WaveProfile, family: &RectangleFamily) -> Result<LimitVerdict> {
    let n = profile.n();
    if family.n() != n {
        return Err(WaveError::Domain("family and profile differ in species count".into()));
    }
    let len = profile.grid.len;
    let mut lo = vec![vec![0.0; n]; len];
    let mut hi = vec![vec![0.0; n]; len];
    for i in 0..n {
        let v = &profile.values[i];
        let (mut m, mut mx) = (v[len - 1], v[len - 1]);
        for k in (0..len).rev() {
            m = m.min(v[k]);
            mx = mx.max(v[k]);
            lo[k][i] = m;
            hi[k][i] = mx;
        }
    }
    let level = |k: usize| -> Option<f64> {
        if !family.contains(0.0, &lo[k], &hi[k]) {
            return None;
        }
        if family.contains(1.0, &lo[k], &hi[k]) {
            return Some(1.0);
        }
        let (mut yl, mut yh) = (0.0, 1.0);
        for _ in 0..50 {
            let mid = 0.5 * (yl + yh);
            if family.contains(mid, &lo[k], &hi[k]) {
                yl = mid;
            } else {
                yh = mid;
            }
        }
        Some(yl)
    };
    let y_trace: Vec<(f64, Option<f64>)> = (0..len).map(|k| (profile.grid.xi(k), level(k))).collect();
    if y_trace[len - 1].1.is_none() {
        return Err(WaveError::HypothesisViolated(format!(
            "right limit {:?} lies outside the outer rectangle",
            profile.right_limits()
        )));
    }
    let k_end = ((len - 1) as f64 * VERDICT_FRACTION) as usize;
    let y_end = y_trace[k_end].1.unwrap_or(0.0);
    Ok(LimitVerdict { converges_to_target: y_end > 1.0 - TOL_Y, y_end, y_trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::DelayKernel;
    use crate::wave::{Grid, LeftTail};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn lv54() -> ReactionModel {
        ReactionModel::lotka_volterra_undelayed(
            vec![0.0001, 0.05],
            vec![0.1, 0.5],
            DMatrix::from_row_slice(2, 2, &[1.0, 0.55, 0.75, 1.0]),
        )
        .unwrap()
    }

    #[test]
    fn lv_family_values() {
        let m = lv54();
        let fam = lv_family(&m, 0.05).unwrap();
        let u = m.target_state().unwrap();
        assert_eq!(fam.a(1.0), u);
        assert_eq!(fam.b(1.0), u);
        assert_eq!(fam.a(0.0), vec![0.0, 0.0]);
        assert_eq!(fam.b(0.0), vec![1.05, 1.05]);
        let a = fam.a(0.5);
        assert_relative_eq!(a[0], 0.3830, epsilon = 1e-4);
        assert_relative_eq!(a[1], 0.2128, epsilon = 1e-4);
        assert_relative_eq!(fam.b(0.5)[0], 0.5 * u[0] + 0.5 * 1.05, max_relative = 1e-14);
        assert!(fam.is_nested(100));
    }

    #[test]
    fn lv_face_checks() {
        let m = lv54();
        let (fam, rep) = lv_family_auto(&m, 0).unwrap();
        assert!(rep.passed(), "{rep}");
        assert!(rep.corners_enumerated);
        match fam.kind {
            FamilyKind::LotkaVolterra { epsilon, .. } => assert!(epsilon > 0.0),
            _ => unreachable!(),
        }

        let strong = ReactionModel::lotka_volterra_undelayed(
            vec![1.0; 2],
            vec![1.0; 2],
            DMatrix::from_row_slice(2, 2, &[1.0, 1.5, 1.5, 1.0]),
        )
        .unwrap();
        assert!(matches!(lv_family(&strong, 0.1), Err(WaveError::NotContracting(_))));
        assert!(!strong.weak_coupling_check().unwrap().0);
        let fam = lv_family_unchecked(&strong, 0.1).unwrap();
        let rep = verify_strict_contraction(&fam, &strong, &default_y_levels(), 100, 0).unwrap();
        assert!(!rep.passed());
    }

    #[test]
    fn lv_margins_shrink_linearly() {
        let m = lv54();
        let fam = lv_family(&m, 0.25).unwrap();
        let ys = [0.9, 0.99, 0.999];
        let rep = verify_strict_contraction(&fam, &m, &ys, 0, 0).unwrap();
        let ratios: Vec<f64> = rep.levels.iter().map(|l| l.lower_face_min[0] / (1.0 - l.y)).collect();
        assert_relative_eq!(ratios[1], ratios[2], max_relative = 0.02);
        assert!(rep.levels[2].lower_face_min[0] < rep.levels[0].lower_face_min[0]);
    }

    #[test]
    fn nicholson_family_values() {
        let fam = nicholson_family(0.5).unwrap();
        assert_relative_eq!(fam.a(1.0)[0], 2.0, epsilon = 1e-14);
        assert_relative_eq!(fam.b(1.0)[0], 2.0, epsilon = 1e-14);
        let k1 = nicholson_k1();
        let e = std::f64::consts::E;
        assert_relative_eq!(fam.b(0.0)[0], nicholson_square(e), max_relative = 1e-14);
        assert!(fam.a(0.0)[0] < nicholson_square(k1));
        assert!(nicholson_square(k1) < nicholson_square(e));
        assert!(nicholson_h(0.0) > 0.0);
        assert!(fam.is_nested(100));
        assert!(nicholson_family(1.5).is_err());
    }

    #[test]
    fn nicholson_faces_match_closed_form() {
        let eps = 0.5;
        let fam = nicholson_family(eps).unwrap();
        let model = ReactionModel::nicholson(1.0, DelayKernel::point_mass(-1.0, 1.0).unwrap()).unwrap();
        let rep = verify_strict_contraction(&fam, &model, &default_y_levels(), 200, 3).unwrap();
        assert!(rep.passed(), "{rep}");
        for l in &rep.levels {
            assert_relative_eq!(l.lower_face_min[0], (2.0 - eps) * nicholson_h(l.y), max_relative = 1e-10);
        }
    }

    #[test]
    fn zou_family_values_and_faces() {
        let fam = zou_family(1.0).unwrap();
        assert_eq!((fam.a(1.0), fam.b(1.0)), (vec![1.0], vec![1.0]));
        assert_eq!((fam.a(0.0), fam.b(0.0)), (vec![0.0], vec![2.0]));
        assert_eq!((fam.a(0.5), fam.b(0.5)), (vec![0.5], vec![1.5]));
        let model = ReactionModel::zou(1.0, 1.0, DelayKernel::point_mass(-2.0, 2.0).unwrap()).unwrap();
        let ys: Vec<f64> = (1..100).map(|k| k as f64 / 100.0).collect();
        let rep = verify_strict_contraction(&fam, &model, &ys, 50, 1).unwrap();
        assert!(rep.passed(), "{rep}");
        for l in &rep.levels {
            // lag at its smallest admissible value s gives s(1 - s)
            assert_relative_eq!(l.lower_face_min[0], l.y * (1.0 - l.y), max_relative = 1e-12);
        }
    }

    #[test]
    fn face_sampling_is_reproducible() {
        let m = lv54();
        let fam = lv_family(&m, 0.25).unwrap();
        let a = verify_strict_contraction(&fam, &m, &default_y_levels(), 1000, 42).unwrap();
        let b = verify_strict_contraction(&fam, &m, &default_y_levels(), 1000, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn verdicts_on_constant_profiles() {
        let m = lv54();
        let fam = lv_family(&m, 0.25).unwrap();
        let g = Grid::new(0.0, 0.1, 101).unwrap();
        let u = m.target_state().unwrap();
        let at_target = WaveProfile::constant(g, &u, 1.0);
        let v = limit_verdict(&at_target, &fam).unwrap();
        assert!(v.converges_to_target);
        assert!(v.y_trace.iter().all(|(_, y)| *y == Some(1.0)));

        // a state on the lower faces of level 0.35
        let inside: Vec<f64> = fam.a(0.35);
        let p = WaveProfile::constant(g, &inside, 1.0);
        let v = limit_verdict(&p, &fam).unwrap();
        assert!(!v.converges_to_target);
        assert_relative_eq!(v.y_end, 0.35, epsilon = 1e-9);

        let outside = WaveProfile::constant(g, &[3.0, 3.0], 1.0);
        assert!(matches!(limit_verdict(&outside, &fam), Err(WaveError::HypothesisViolated(_))));

        let tails = vec![LeftTail::Constant; 2];
        let ramp = WaveProfile::from_fn(g, 1.0, tails, |i, x| u[i] * (x / 5.0).min(1.0));
        let v = limit_verdict(&ramp, &fam).unwrap();
        assert!(v.converges_to_target);
    }
}
