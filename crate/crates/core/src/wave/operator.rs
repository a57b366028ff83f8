use crate::error::{Result, WaveError};
use crate::model::{AuditedBeta, History, ReactionModel};

use super::profile::{LeftTail, WaveProfile};

/// Roots `nu1 < 0 < nu2` of `d nu^2 - c nu - beta = 0`.
pub fn exponents(d: f64, c: f64, beta: f64) -> (f64, f64) {
    let s = (c * c + 4.0 * beta * d).sqrt();
    if c >= 0.0 {
        (-2.0 * beta / (c + s), (c + s) / (2.0 * d))
    } else {
        ((c - s) / (2.0 * d), 2.0 * beta / (s - c))
    }
}

/// Exact integrals of `e^{-lam t}` against the hat functions of one cell of
/// width `h`: weight of the near node and of the far node.
fn cell_weights(lam: f64, h: f64) -> (f64, f64) {
    let x = lam * h;
    let (e0, e1) = if x < 1e-4 {
        (h * (1.0 - x / 2.0 + x * x / 6.0), h * h * (0.5 - x / 3.0 + x * x / 8.0))
    } else {
        let em = (-x).exp();
        ((1.0 - em) / lam, (1.0 - em * (1.0 + x)) / (lam * lam))
    };
    let far = e1 / h;
    (e0 - far, far)
}

/// How the integrand continues beyond the left end of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeftClosure {
    /// `L_0 e^{rate (s - xi_0)}`.
    Exponential(f64),
    Constant,
    Zero,
}

/// How the integrand continues beyond the right end of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RightClosure {
    Constant,
    Zero,
}

/// The Green's kernel of `d u'' - c u' - beta u` on a uniform grid. The
/// integrand is taken piecewise linear and integrated exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenOperator {
    pub d: f64,
    pub c: f64,
    pub beta: f64,
    pub nu1: f64,
    pub nu2: f64,
    h: f64,
    fwd: (f64, f64, f64),
    bwd: (f64, f64, f64),
}

impl GreenOperator {
    pub fn new(d: f64, c: f64, beta: f64, h: f64) -> Self {
        let (nu1, nu2) = exponents(d, c, beta);
        let (a0, a1) = cell_weights(-nu1, h);
        let (b0, b1) = cell_weights(nu2, h);
        Self {
            d,
            c,
            beta,
            nu1,
            nu2,
            h,
            fwd: ((nu1 * h).exp(), a0, a1),
            bwd: ((-nu2 * h).exp(), b0, b1),
        }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `(1/(d(nu2 - nu1))) [int_{-inf}^xi e^{nu1(xi-s)} L + int_xi^inf e^{nu2(xi-s)} L]` at every node.
    pub fn convolve(&self, l: &[f64], left: LeftClosure, right: RightClosure) -> Vec<f64> {
        let n = l.len();
        let mut out = vec![0.0; n];
        let (e1, a0, a1) = self.fwd;
        let mut acc = match left {
            LeftClosure::Exponential(rate) => l[0] / (rate - self.nu1),
            LeftClosure::Constant => l[0] / (-self.nu1),
            LeftClosure::Zero => 0.0,
        };
        out[0] = acc;
        for k in 0..n - 1 {
            acc = e1 * acc + a0 * l[k + 1] + a1 * l[k];
            out[k + 1] = acc;
        }
        let (e2, b0, b1) = self.bwd;
        let mut acc = match right {
            RightClosure::Constant => l[n - 1] / self.nu2,
            RightClosure::Zero => 0.0,
        };
        let scale = 1.0 / (self.d * (self.nu2 - self.nu1));
        out[n - 1] = (out[n - 1] + acc) * scale;
        for k in (0..n - 1).rev() {
            acc = e2 * acc + b0 * l[k] + b1 * l[k + 1];
            out[k] = (out[k] + acc) * scale;
        }
        out
    }
}

/// Profile histories `Phi(xi_k + c s)` tabulated for every offset the model reads.
pub(crate) struct ShiftTable {
    offsets: Vec<Vec<f64>>,
    data: Vec<Vec<Vec<f64>>>,
}

impl ShiftTable {
    pub(crate) fn new(profile: &WaveProfile, model: &ReactionModel) -> Self {
        let g = profile.grid;
        let c = profile.speed;
        let offsets: Vec<Vec<f64>> = (0..model.n()).map(|j| model.history_offsets(j)).collect();
        let data = offsets
            .iter()
            .enumerate()
            .map(|(j, offs)| {
                offs.iter()
                    .map(|&s| {
                        if s == 0.0 {
                            profile.values[j].clone()
                        } else {
                            g.points().map(|x| profile.value(j, x + c * s)).collect()
                        }
                    })
                    .collect()
            })
            .collect();
        Self { offsets, data }
    }

    pub(crate) fn at(&self, k: usize) -> ShiftView<'_> {
        ShiftView { table: self, k }
    }
}

pub(crate) struct ShiftView<'a> {
    table: &'a ShiftTable,
    k: usize,
}

impl History for ShiftView<'_> {
    #[inline]
    fn value(&self, j: usize, s: f64) -> f64 {
        let offs = &self.table.offsets[j];
        let idx = if offs.len() == 1 {
            0
        } else {
            offs.binary_search_by(|o| o.total_cmp(&s)).expect("history offset is tabulated")
        };
        self.table.data[j][idx][self.k]
    }
}

/// `f_i(Phi_{xi_k})` for every species and node.
pub fn reaction_field(profile: &WaveProfile, model: &ReactionModel) -> Result<Vec<Vec<f64>>> {
    if profile.n() != model.n() {
        return Err(WaveError::Domain("profile and model differ in species count".into()));
    }
    let table = ShiftTable::new(profile, model);
    Ok((0..model.n())
        .map(|i| (0..profile.grid.len).map(|k| model.reaction_unchecked(i, &table.at(k))).collect())
        .collect())
}

pub(crate) fn closure_of(tail: LeftTail) -> LeftClosure {
    match tail {
        LeftTail::Exponential { rate } => LeftClosure::Exponential(rate),
        LeftTail::Constant => LeftClosure::Constant,
    }
}

/// One application of the fixed-point operator, `F(Phi)` on the same grid.
pub fn apply_operator(profile: &WaveProfile, model: &ReactionModel, beta: &AuditedBeta) -> Result<WaveProfile> {
    let boxed = beta.box_upper();
    if boxed.len() != profile.n() {
        return Err(WaveError::Domain("audited box and profile differ in species count".into()));
    }
    for (i, v) in profile.values.iter().enumerate() {
        let slack = 1e-9 * boxed[i].max(1.0);
        if let Some(&bad) = v.iter().find(|&&x| x > boxed[i] + slack || x < -slack) {
            return Err(WaveError::OutsideBox { species: i, value: bad, bound: boxed[i] });
        }
    }
    let f = reaction_field(profile, model)?;
    let b = beta.value();
    let values = (0..profile.n())
        .map(|i| {
            let op = GreenOperator::new(model.d()[i], profile.speed, b, profile.grid.h);
            let l: Vec<f64> = profile.values[i].iter().zip(&f[i]).map(|(p, fi)| b * p + fi).collect();
            op.convolve(&l, closure_of(profile.left_tail[i]), RightClosure::Constant)
        })
        .collect();
    Ok(WaveProfile { values, ..profile.clone() })
}

/// Central-difference residual of `d psi'' - c psi' + f(Psi_xi)`; zero at the two end nodes.
pub fn residual(profile: &WaveProfile, model: &ReactionModel) -> Result<Vec<Vec<f64>>> {
    let f = reaction_field(profile, model)?;
    let h = profile.grid.h;
    let c = profile.speed;
    Ok((0..profile.n())
        .map(|i| {
            let v = &profile.values[i];
            let d = model.d()[i];
            let mut out = vec![0.0; v.len()];
            for k in 1..v.len() - 1 {
                let d1 = (v[k + 1] - v[k - 1]) / (2.0 * h);
                let d2 = (v[k + 1] - 2.0 * v[k] + v[k - 1]) / (h * h);
                out[k] = d * d2 - c * d1 + f[i][k];
            }
            out
        })
        .collect())
}

pub fn sup_norms(fields: &[Vec<f64>]) -> Vec<f64> {
    fields.iter().map(|v| v.iter().fold(0.0f64, |m, x| m.max(x.abs()))).collect()
}
