//! Reaction systems: Lotka-Volterra competition with distributed delays and
//! the scalar built-ins (Fisher, Zou, Nicholson-type).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, WaveError};
use crate::kernel::DelayKernel;

/// A per-species history segment, `history.value(j, s)` = `u_j(s)` for `s` in `[-tau, 0]`.
pub trait History {
    fn value(&self, species: usize, s: f64) -> f64;
}

impl<F: Fn(usize, f64) -> f64> History for F {
    fn value(&self, species: usize, s: f64) -> f64 {
        self(species, s)
    }
}

/// Constant-in-time history.
#[derive(Debug, Clone)]
pub struct ConstantHistory<'a>(pub &'a [f64]);

impl History for ConstantHistory<'_> {
    fn value(&self, species: usize, _s: f64) -> f64 {
        self.0[species]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reaction {
    /// `r_i u_i(0) [1 - sum_j c_ij int u_j d eta_ij]`.
    LotkaVolterra {
        r: Vec<f64>,
        c: DMatrix<f64>,
        kernels: Vec<Vec<DelayKernel>>,
    },
    /// `r u (1 - u)`.
    Fisher { r: f64 },
    /// `r (int u d eta) (1 - u(0))`.
    Zou { r: f64, kernel: DelayKernel },
    /// `-w(0) + int f(w) d eta` with `f(w) = e^2 w e^{-w}`.
    Nicholson { kernel: DelayKernel },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactionModel {
    d: Vec<f64>,
    reaction: Reaction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSet {
    pub zero: Vec<f64>,
    /// `None` when the linear solve has a nonpositive component.
    pub positive: Option<Vec<f64>>,
    /// `(a_i c_ii)^{-1}`, infinite when `a_i = 0`.
    pub carrying_caps: Vec<f64>,
}

/// A shift constant that passed the monotonicity audit on `box_upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditedBeta {
    value: f64,
    box_upper: Vec<f64>,
    worst_slope: f64,
}

impl AuditedBeta {
    pub fn value(&self) -> f64 {
        self.value
    }
    pub fn box_upper(&self) -> &[f64] {
        &self.box_upper
    }
    /// Smallest sampled difference quotient of `beta * u_i(0) + f_i`.
    pub fn worst_slope(&self) -> f64 {
        self.worst_slope
    }
}

const AUDIT_SAMPLES: usize = 1000;
const AUDIT_SEED: u64 = 0x00be_7a5e_ed00;

fn check_positive(name: &str, v: &[f64]) -> Result<()> {
    for (i, &x) in v.iter().enumerate() {
        if !(x.is_finite() && x > 0.0) {
            return Err(WaveError::Domain(format!("{name}[{i}] must be positive, got {x}")));
        }
    }
    Ok(())
}

/// `f(w) = e^2 w e^{-w}`.
pub fn nicholson_birth(w: f64) -> f64 {
    (2.0 - w).exp() * w
}

/// `f(f(w))`.
pub fn nicholson_square(w: f64) -> f64 {
    nicholson_birth(nicholson_birth(w))
}

impl ReactionModel {
    pub fn lotka_volterra(
        d: Vec<f64>,
        r: Vec<f64>,
        c: DMatrix<f64>,
        kernels: Vec<Vec<DelayKernel>>,
    ) -> Result<Self> {
        let n = d.len();
        if n == 0 {
            return Err(WaveError::Domain("model needs at least one species".into()));
        }
        if r.len() != n || c.nrows() != n || c.ncols() != n {
            return Err(WaveError::Domain(format!(
                "dimension mismatch: d has {n} entries, r {}, c is {}x{}",
                r.len(),
                c.nrows(),
                c.ncols()
            )));
        }
        if kernels.len() != n || kernels.iter().any(|row| row.len() != n) {
            return Err(WaveError::Domain(format!("kernel matrix must be {n}x{n}")));
        }
        check_positive("d", &d)?;
        check_positive("r", &r)?;
        for i in 0..n {
            for j in 0..n {
                let cij = c[(i, j)];
                let ok = if i == j { cij > 0.0 } else { cij >= 0.0 };
                if !(cij.is_finite() && ok) {
                    return Err(WaveError::Domain(format!("invalid interaction c[{i}][{j}] = {cij}")));
                }
            }
        }
        Ok(Self {
            d,
            reaction: Reaction::LotkaVolterra { r, c, kernels },
        })
    }

    /// Undelayed competition: every kernel is the Dirac mass at zero.
    pub fn lotka_volterra_undelayed(d: Vec<f64>, r: Vec<f64>, c: DMatrix<f64>) -> Result<Self> {
        let n = d.len();
        let kernels = vec![vec![DelayKernel::instantaneous(); n]; n];
        Self::lotka_volterra(d, r, c, kernels)
    }

    pub fn fisher(d: f64, r: f64) -> Result<Self> {
        check_positive("d", &[d])?;
        check_positive("r", &[r])?;
        Ok(Self {
            d: vec![d],
            reaction: Reaction::Fisher { r },
        })
    }

    pub fn zou(d: f64, r: f64, kernel: DelayKernel) -> Result<Self> {
        check_positive("d", &[d])?;
        check_positive("r", &[r])?;
        Ok(Self {
            d: vec![d],
            reaction: Reaction::Zou { r, kernel },
        })
    }

    pub fn nicholson(d: f64, kernel: DelayKernel) -> Result<Self> {
        check_positive("d", &[d])?;
        Ok(Self {
            d: vec![d],
            reaction: Reaction::Nicholson { kernel },
        })
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn reaction(&self) -> &Reaction {
        &self.reaction
    }

    /// Intrinsic rates; Nicholson has none (unit death rate is returned).
    pub fn rates(&self) -> Vec<f64> {
        match &self.reaction {
            Reaction::LotkaVolterra { r, .. } => r.clone(),
            Reaction::Fisher { r } | Reaction::Zou { r, .. } => vec![*r],
            Reaction::Nicholson { .. } => vec![1.0],
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.reaction {
            Reaction::LotkaVolterra { .. } => "lotka_volterra",
            Reaction::Fisher { .. } => "fisher",
            Reaction::Zou { .. } => "zou",
            Reaction::Nicholson { .. } => "nicholson",
        }
    }

    fn kernels(&self) -> Vec<&DelayKernel> {
        match &self.reaction {
            Reaction::LotkaVolterra { kernels, .. } => kernels.iter().flatten().collect(),
            Reaction::Fisher { .. } => Vec::new(),
            Reaction::Zou { kernel, .. } | Reaction::Nicholson { kernel } => vec![kernel],
        }
    }

    /// Largest delay carried by any kernel.
    pub fn max_delay(&self) -> f64 {
        self.kernels().iter().map(|k| k.max_delay()).fold(0.0, f64::max)
    }

    /// Distinct history offsets read for species `j`, including zero.
    pub fn history_offsets(&self, j: usize) -> Vec<f64> {
        let mut out = vec![0.0];
        match &self.reaction {
            Reaction::LotkaVolterra { kernels, .. } => {
                for row in kernels {
                    out.extend(row[j].atoms().iter().map(|a| a.offset));
                }
            }
            Reaction::Fisher { .. } => {}
            Reaction::Zou { kernel, .. } | Reaction::Nicholson { kernel } => {
                out.extend(kernel.atoms().iter().map(|a| a.offset))
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Weight of the instantaneous atom in each diagonal kernel.
    pub fn self_weights(&self) -> Vec<f64> {
        match &self.reaction {
            Reaction::LotkaVolterra { kernels, .. } => {
                (0..self.n()).map(|i| kernels[i][i].instantaneous_weight()).collect()
            }
            Reaction::Fisher { .. } => vec![1.0],
            Reaction::Zou { kernel, .. } | Reaction::Nicholson { kernel } => {
                vec![kernel.instantaneous_weight()]
            }
        }
    }

    fn check_species(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            return Err(WaveError::SpeciesIndex { index: i, n: self.n() });
        }
        Ok(())
    }

    /// `f_i` evaluated on a history segment.
    pub fn reaction_eval<H: History + ?Sized>(&self, i: usize, history: &H) -> Result<f64> {
        self.check_species(i)?;
        Ok(self.reaction_unchecked(i, history))
    }

    /// As [`reaction_eval`](Self::reaction_eval) without the index check.
    #[inline]
    pub fn reaction_unchecked<H: History + ?Sized>(&self, i: usize, history: &H) -> f64 {
        match &self.reaction {
            Reaction::LotkaVolterra { r, c, kernels } => {
                let mut load = 0.0;
                for (j, kernel) in kernels[i].iter().enumerate() {
                    let cij = c[(i, j)];
                    if cij != 0.0 {
                        load += cij * kernel.stieltjes(|s| history.value(j, s));
                    }
                }
                r[i] * history.value(i, 0.0) * (1.0 - load)
            }
            Reaction::Fisher { r } => {
                let u = history.value(0, 0.0);
                r * u * (1.0 - u)
            }
            Reaction::Zou { r, kernel } => {
                let lagged = kernel.stieltjes(|s| history.value(0, s));
                r * lagged * (1.0 - history.value(0, 0.0))
            }
            Reaction::Nicholson { kernel } => {
                -history.value(0, 0.0) + kernel.stieltjes(|s| nicholson_birth(history.value(0, s)))
            }
        }
    }

    /// Equilibria of the model; for Lotka-Volterra solves `sum_j c_ij u_j = 1`.
    pub fn positive_equilibrium(&self) -> Result<EquilibriumSet> {
        let n = self.n();
        let zero = vec![0.0; n];
        match &self.reaction {
            Reaction::LotkaVolterra { c, .. } => {
                let a = self.self_weights();
                let carrying_caps = (0..n)
                    .map(|i| if a[i] > 0.0 { 1.0 / (a[i] * c[(i, i)]) } else { f64::INFINITY })
                    .collect();
                let lu = c.clone().lu();
                let sol = lu
                    .solve(&DVector::from_element(n, 1.0))
                    .filter(|s| s.iter().all(|x| x.is_finite()))
                    .ok_or(WaveError::SingularInteraction)?;
                // reject numerically singular systems
                let scale = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let det = lu.determinant();
                if det.abs() <= 1e-14 * scale.powi(n as i32) {
                    return Err(WaveError::SingularInteraction);
                }
                let sol: Vec<f64> = sol.iter().copied().collect();
                let positive = sol.iter().all(|&x| x > 0.0).then_some(sol);
                Ok(EquilibriumSet { zero, positive, carrying_caps })
            }
            Reaction::Fisher { .. } => Ok(EquilibriumSet {
                zero,
                positive: Some(vec![1.0]),
                carrying_caps: vec![1.0],
            }),
            Reaction::Zou { kernel, .. } => {
                let a = kernel.instantaneous_weight();
                Ok(EquilibriumSet {
                    zero,
                    positive: Some(vec![1.0]),
                    carrying_caps: vec![if a > 0.0 { 1.0 / a } else { f64::INFINITY }],
                })
            }
            Reaction::Nicholson { .. } => Ok(EquilibriumSet {
                zero,
                positive: Some(vec![2.0]),
                carrying_caps: vec![std::f64::consts::E],
            }),
        }
    }

    /// The positive state `E`, or an error if it does not exist.
    pub fn target_state(&self) -> Result<Vec<f64>> {
        let eq = self.positive_equilibrium()?;
        eq.positive.ok_or_else(|| {
            let c = self.interaction().unwrap();
            let sol = c.lu().solve(&DVector::from_element(self.n(), 1.0)).unwrap();
            WaveError::NonPositiveEquilibrium(sol.iter().copied().collect())
        })
    }

    /// Carrying caps `(a_i c_ii)^{-1}`; errors if some `a_i = 0`.
    pub fn carrying_caps(&self) -> Result<Vec<f64>> {
        let a = self.self_weights();
        if let Some(i) = a.iter().position(|&x| x <= 0.0) {
            return Err(WaveError::NoInstantaneousWeight(i));
        }
        Ok(self.positive_equilibrium()?.carrying_caps)
    }

    /// `(r, c, kernels)` of a competition model.
    pub fn lv_parts(&self) -> Option<(&[f64], &DMatrix<f64>, &[Vec<DelayKernel>])> {
        match &self.reaction {
            Reaction::LotkaVolterra { r, c, kernels } => Some((r, c, kernels)),
            _ => None,
        }
    }

    pub fn interaction(&self) -> Option<DMatrix<f64>> {
        match &self.reaction {
            Reaction::LotkaVolterra { c, .. } => Some(c.clone()),
            Reaction::Fisher { .. } => Some(DMatrix::from_element(1, 1, 1.0)),
            _ => None,
        }
    }

    /// `2 - sum_j c_ij (c_jj a_j)^{-1}` per species.
    pub fn weak_coupling_check(&self) -> Result<(bool, Vec<f64>)> {
        let c = self.interaction().ok_or(WaveError::Unsupported("coupling condition needs a competition model"))?;
        let caps = self.carrying_caps()?;
        let margins: Vec<f64> = (0..self.n())
            .map(|i| 2.0 - (0..self.n()).map(|j| c[(i, j)] * caps[j]).sum::<f64>())
            .collect();
        Ok((margins.iter().all(|&m| m > 0.0), margins))
    }

    /// Fisher rewritten as a one-species competition model.
    pub fn to_lotka_volterra(&self) -> Result<Self> {
        match &self.reaction {
            Reaction::LotkaVolterra { .. } => Ok(self.clone()),
            Reaction::Fisher { r } => {
                Self::lotka_volterra_undelayed(self.d.clone(), vec![*r], DMatrix::from_element(1, 1, 1.0))
            }
            _ => Err(WaveError::Unsupported("only Fisher converts to a competition model")),
        }
    }

    /// Closed-form shift constant on `[0, box_upper]`.
    pub fn beta_bound(&self, box_upper: &[f64]) -> Result<f64> {
        if box_upper.len() != self.n() {
            return Err(WaveError::Domain("box dimension mismatch".into()));
        }
        check_positive("box", box_upper)?;
        let a = self.self_weights();
        Ok(match &self.reaction {
            Reaction::LotkaVolterra { r, c, .. } => (0..self.n())
                .map(|i| {
                    let cii = c[(i, i)];
                    let cross: f64 = (0..self.n()).filter(|&j| j != i).map(|j| c[(i, j)] * box_upper[j]).sum();
                    r[i] * (2.0 * cii * a[i] * box_upper[i] + cii * (1.0 - a[i]) * box_upper[i] + cross + 1.0)
                })
                .fold(0.0, f64::max),
            Reaction::Fisher { r } => r * (2.0 * box_upper[0] + 1.0),
            Reaction::Zou { r, .. } => 2.0 * r * box_upper[0].max(1.0) + 1.0,
            Reaction::Nicholson { .. } => 2.0 + a[0],
        })
    }

    /// Closed-form `beta` checked by the seeded monotonicity audit.
    pub fn lipschitz_beta(&self, box_upper: &[f64]) -> Result<AuditedBeta> {
        let beta = self.beta_bound(box_upper)?;
        self.audit_beta(beta, box_upper, AUDIT_SEED)
    }

    /// Samples histories in `[0, box_upper]` and checks that
    /// `u_i(0) -> beta u_i(0) + f_i` is nondecreasing.
    pub fn audit_beta(&self, beta: f64, box_upper: &[f64], seed: u64) -> Result<AuditedBeta> {
        let n = self.n();
        let offsets: Vec<Vec<f64>> = (0..n).map(|j| self.history_offsets(j)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = f64::INFINITY;
        for _ in 0..AUDIT_SAMPLES {
            let mut table: Vec<Vec<f64>> = (0..n)
                .map(|j| offsets[j].iter().map(|_| rng.gen::<f64>() * box_upper[j]).collect())
                .collect();
            let i = rng.gen_range(0..n);
            let mut x = rng.gen::<f64>() * box_upper[i];
            let mut y = rng.gen::<f64>() * box_upper[i];
            if x > y {
                std::mem::swap(&mut x, &mut y);
            }
            if y - x < 1e-9 * box_upper[i] {
                continue;
            }
            let zero = offsets[i].iter().position(|&s| s == 0.0).unwrap();
            let mut eval = |v: f64| {
                table[i][zero] = v;
                let h = |j: usize, s: f64| {
                    let k = offsets[j].iter().position(|&o| o == s).expect("offset in table");
                    table[j][k]
                };
                beta * v + self.reaction_unchecked(i, &h)
            };
            let gx = eval(x);
            let gy = eval(y);
            let diff = gy - gx;
            worst = worst.min(diff / (y - x));
            if diff < -1e-10 {
                return Err(WaveError::BetaAudit { beta, worst_slope: diff / (y - x) });
            }
        }
        Ok(AuditedBeta {
            value: beta,
            box_upper: box_upper.to_vec(),
            worst_slope: worst,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig, Strategy};

    fn lv54() -> ReactionModel {
        ReactionModel::lotka_volterra_undelayed(
            vec![0.0001, 0.05],
            vec![0.1, 0.5],
            DMatrix::from_row_slice(2, 2, &[1.0, 0.55, 0.75, 1.0]),
        )
        .unwrap()
    }

    #[test]
    fn equilibrium_of_the_benchmark() {
        let m = lv54();
        let u = m.target_state().unwrap();
        assert_abs_diff_eq!(u[0], 0.7660, epsilon = 1e-4);
        assert_abs_diff_eq!(u[1], 0.4255, epsilon = 1e-4);
        for i in 0..2 {
            let f = m.reaction_eval(i, &ConstantHistory(&u)).unwrap();
            assert!(f.abs() < 1e-12);
        }
        let h = ConstantHistory(&[1.0, 0.0]);
        assert_eq!(m.reaction_eval(0, &h).unwrap(), 0.0);
        assert_eq!(m.reaction_eval(1, &h).unwrap(), 0.0);
        assert!(matches!(m.reaction_eval(2, &h), Err(WaveError::SpeciesIndex { .. })));
    }

    #[test]
    fn equilibrium_small_systems() {
        let id = ReactionModel::lotka_volterra_undelayed(vec![1.0; 3], vec![1.0; 3], DMatrix::identity(3, 3)).unwrap();
        assert_eq!(id.target_state().unwrap(), vec![1.0; 3]);

        let sym = ReactionModel::lotka_volterra_undelayed(
            vec![1.0; 2],
            vec![1.0; 2],
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]),
        )
        .unwrap();
        let u = sym.target_state().unwrap();
        assert_abs_diff_eq!(u[0], 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(u[1], 2.0 / 3.0, epsilon = 1e-14);

        let sing = ReactionModel::lotka_volterra_undelayed(vec![1.0; 2], vec![1.0; 2], DMatrix::from_element(2, 2, 1.0)).unwrap();
        assert_eq!(sing.positive_equilibrium(), Err(WaveError::SingularInteraction));

        let neg = ReactionModel::lotka_volterra_undelayed(
            vec![1.0; 2],
            vec![1.0; 2],
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.1, 1.0]),
        )
        .unwrap();
        assert!(neg.positive_equilibrium().unwrap().positive.is_none());
        assert!(matches!(neg.target_state(), Err(WaveError::NonPositiveEquilibrium(_))));
    }

    #[test]
    fn coupling_margins() {
        let (holds, m) = lv54().weak_coupling_check().unwrap();
        assert!(holds);
        assert_abs_diff_eq!(m[0], 0.45, epsilon = 1e-14);
        assert_abs_diff_eq!(m[1], 0.25, epsilon = 1e-14);

        let strong = ReactionModel::lotka_volterra_undelayed(
            vec![1.0; 2],
            vec![1.0; 2],
            DMatrix::from_row_slice(2, 2, &[1.0, 1.5, 1.5, 1.0]),
        )
        .unwrap();
        let (holds, m) = strong.weak_coupling_check().unwrap();
        assert!(!holds);
        assert_abs_diff_eq!(m[0], -0.5, epsilon = 1e-14);

        let id = ReactionModel::lotka_volterra_undelayed(vec![1.0; 2], vec![1.0; 2], DMatrix::identity(2, 2)).unwrap();
        assert_eq!(id.weak_coupling_check().unwrap(), (true, vec![1.0, 1.0]));

        let delayed = DelayKernel::point_mass(-1.0, 1.0).unwrap();
        let k = vec![vec![delayed.clone(), DelayKernel::instantaneous()], vec![DelayKernel::instantaneous(), delayed]];
        let no_self = ReactionModel::lotka_volterra(vec![1.0; 2], vec![1.0; 2], DMatrix::identity(2, 2), k).unwrap();
        assert_eq!(no_self.weak_coupling_check(), Err(WaveError::NoInstantaneousWeight(0)));
    }

    #[test]
    fn builtins_vanish_at_states() {
        let k = DelayKernel::point_mass(-2.0, 2.0).unwrap();
        let models = [
            (ReactionModel::fisher(1.0, 1.0).unwrap(), 1.0),
            (ReactionModel::zou(1.0, 1.0, k.clone()).unwrap(), 1.0),
            (ReactionModel::nicholson(1.0, k).unwrap(), 2.0),
        ];
        for (m, e) in &models {
            assert_eq!(m.reaction_eval(0, &ConstantHistory(&[0.0])).unwrap(), 0.0);
            assert!(m.reaction_eval(0, &ConstantHistory(&[*e])).unwrap().abs() < 1e-14);
            assert_eq!(m.target_state().unwrap(), vec![*e]);
        }
    }

    #[test]
    fn zou_reads_the_lag() {
        let m = ReactionModel::zou(1.0, 1.0, DelayKernel::point_mass(-1.0, 1.0).unwrap()).unwrap();
        let h = |_: usize, s: f64| if s == -1.0 { 0.5 } else { 0.25 };
        assert_eq!(m.reaction_eval(0, &h).unwrap(), 0.5 * 0.75);
    }

    #[test]
    fn nicholson_values() {
        assert_abs_diff_eq!(nicholson_square(2.0), 2.0, epsilon = 1e-14);
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(nicholson_birth(e), (3.0 - e).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(nicholson_birth(e), 1.3254, epsilon = 1e-4);
        assert!(nicholson_square(1.5) > 1.5);
    }

    #[test]
    fn nicholson_grid_properties() {
        let e = std::f64::consts::E;
        let k1 = (3.0 - e).exp();
        let n = 1000;
        let ws: Vec<f64> = (0..n).map(|k| k1 + (e - k1) * k as f64 / (n - 1) as f64).collect();
        for pair in ws.windows(2) {
            assert!(nicholson_square(pair[1]) > nicholson_square(pair[0]));
            assert!(nicholson_birth(pair[1]) < nicholson_birth(pair[0]));
        }
        for &w in &ws {
            let g = nicholson_square(w) - w;
            if w < 2.0 - 1e-9 {
                assert!(g > 0.0, "w = {w}");
            } else if w > 2.0 + 1e-9 {
                assert!(g < 0.0, "w = {w}");
            }
        }
    }

    #[test]
    fn beta_closed_forms() {
        let f = ReactionModel::fisher(1.0, 1.0).unwrap();
        let b = f.lipschitz_beta(&[1.0]).unwrap();
        assert_eq!(b.value(), 3.0);
        // slope of beta u + u(1-u) is beta + 1 - 2u >= beta - 1
        assert!(b.worst_slope() >= 2.0 - 1e-9);

        let nich = ReactionModel::nicholson(1.0, DelayKernel::point_mass(-1.0, 1.0).unwrap()).unwrap();
        let b = nich.lipschitz_beta(&[std::f64::consts::E]).unwrap();
        assert_eq!(b.value(), 2.0);
        assert_abs_diff_eq!(b.worst_slope(), 1.0, epsilon = 1e-9);

        let m = lv54();
        let b = m.lipschitz_beta(&[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(b.value(), 0.5 * (2.0 + 0.75 + 1.0), epsilon = 1e-14);
    }

    #[test]
    fn audit_rejects_small_beta() {
        let f = ReactionModel::fisher(1.0, 1.0).unwrap();
        assert!(matches!(f.audit_beta(0.2, &[1.0], 7), Err(WaveError::BetaAudit { .. })));
    }

    #[test]
    fn fisher_converts() {
        let lv = ReactionModel::fisher(2.0, 0.5).unwrap().to_lotka_volterra().unwrap();
        let h = ConstantHistory(&[0.3]);
        assert_abs_diff_eq!(lv.reaction_eval(0, &h).unwrap(), 0.5 * 0.3 * 0.7, epsilon = 1e-15);
    }

    fn arb_lv() -> impl Strategy<Value = ReactionModel> {
        (1usize..4, any::<u64>()).prop_map(|(n, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
            let r = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
            let c = DMatrix::from_fn(n, n, |i, j| if i == j { rng.gen_range(0.5..2.0) } else { rng.gen_range(0.0..0.3) });
            let kernels = (0..n)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            let a: f64 = rng.gen_range(0.3..1.0);
                            let s: f64 = rng.gen_range(-3.0..-0.1);
                            DelayKernel::new([(s, 1.0 - a), (0.0, a)], 3.0).unwrap()
                        })
                        .collect()
                })
                .collect();
            ReactionModel::lotka_volterra(d, r, c, kernels).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn equilibrium_is_a_zero(m in arb_lv()) {
            let u = m.target_state().unwrap();
            let c = m.interaction().unwrap();
            for i in 0..m.n() {
                let row: f64 = (0..m.n()).map(|j| c[(i, j)] * u[j]).sum();
                prop_assert!((row - 1.0).abs() < 1e-10);
                prop_assert!(m.reaction_eval(i, &ConstantHistory(&u)).unwrap().abs() < 1e-9);
            }
        }

        #[test]
        fn beta_passes_audit(m in arb_lv(), scale in 1.0f64..3.0) {
            let caps = m.carrying_caps().unwrap();
            let boxed: Vec<f64> = caps.iter().map(|x| x * scale).collect();
            prop_assert!(m.lipschitz_beta(&boxed).is_ok());
        }
    }
}
