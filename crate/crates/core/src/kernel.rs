//! Distributed-delay measures on `[-tau, 0]`.
//!
//! Every delay measure is stored as a finite list of atoms, so point delays,
//! several discrete delays and discretised densities share one representation
//! and every Stieltjes integral is an exact weighted sum.

use crate::error::{Result, WaveError};

const MASS_TOL: f64 = 1e-12;
const COALESCE_REL: f64 = 1e-12;

/// A single atom of a delay measure: weight `weight` at time offset `offset <= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub offset: f64,
    pub weight: f64,
}

/// A probability measure on `[-tau, 0]` made of strictly increasing atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayKernel {
    atoms: Vec<Atom>,
    tau: f64,
}

impl DelayKernel {
    /// Builds a kernel from `(offset, weight)` pairs inside `[-tau, 0]`.
    ///
    /// Atoms closer than `1e-12 * tau` are merged. Weights must be positive and
    /// sum to one.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(WaveError::Domain(format!("maximum delay must be finite and >= 0, got {tau}")));
        }
        let mut raw: Vec<Atom> = Vec::new();
        for (offset, weight) in atoms {
            if !offset.is_finite() || offset > 0.0 || offset < -tau {
                return Err(WaveError::Domain(format!(
                    "atom location {offset} outside [-{tau}, 0]"
                )));
            }
            if !(weight.is_finite() && weight > 0.0) {
                return Err(WaveError::Domain(format!("atom weight must be positive, got {weight}")));
            }
            raw.push(Atom { offset, weight });
        }
        if raw.is_empty() {
            return Err(WaveError::Domain("kernel needs at least one atom".into()));
        }
        raw.sort_by(|a, b| a.offset.total_cmp(&b.offset));

        let merge_tol = COALESCE_REL * tau;
        let mut atoms: Vec<Atom> = Vec::with_capacity(raw.len());
        for atom in raw {
            match atoms.last_mut() {
                Some(last) if atom.offset - last.offset <= merge_tol => last.weight += atom.weight,
                _ => atoms.push(atom),
            }
        }
        // an undelayed kernel keeps every atom exactly at zero
        if tau == 0.0 {
            for a in &mut atoms {
                a.offset = 0.0;
            }
        }

        let mass: f64 = atoms.iter().map(|a| a.weight).sum();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(WaveError::Domain(format!("kernel mass must be 1, got {mass}")));
        }
        Ok(Self { atoms, tau })
    }

    /// Dirac mass at `offset`, which must lie in `[-tau, 0]`.
    pub fn point_mass(offset: f64, tau: f64) -> Result<Self> {
        Self::new([(offset, 1.0)], tau)
    }

    /// Dirac mass at zero: no delay.
    pub fn instantaneous() -> Self {
        Self {
            atoms: vec![Atom { offset: 0.0, weight: 1.0 }],
            tau: 0.0,
        }
    }

    /// Midpoint quadrature of the uniform density on `[-tau, 0]`.
    pub fn uniform_quadrature(tau: f64, n_atoms: usize) -> Result<Self> {
        if n_atoms == 0 {
            return Err(WaveError::Domain("uniform quadrature needs at least one atom".into()));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(WaveError::Domain(format!("uniform density needs tau > 0, got {tau}")));
        }
        let width = tau / n_atoms as f64;
        let weight = 1.0 / n_atoms as f64;
        let atoms = (0..n_atoms).map(|k| (-tau + (k as f64 + 0.5) * width, weight));
        Self::new(atoms, tau)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// The declared maximal delay.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Largest delay actually carried by an atom.
    pub fn max_delay(&self) -> f64 {
        -self.atoms[0].offset
    }

    /// `sum_k w_k g(s_k)`.
    pub fn stieltjes(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.weight * g(a.offset)).sum()
    }

    /// Weight of the atom at `s = 0` (zero if absent).
    pub fn instantaneous_weight(&self) -> f64 {
        match self.atoms.last() {
            Some(a) if a.offset == 0.0 => a.weight,
            _ => 0.0,
        }
    }

    /// Separates the instantaneous atom from the strictly delayed part.
    pub fn diagonal_split(&self) -> KernelSplit {
        let instantaneous = self.instantaneous_weight();
        let delayed = self
            .atoms
            .iter()
            .copied()
            .filter(|a| a.offset != 0.0)
            .collect();
        KernelSplit {
            instantaneous,
            delayed,
            tau: self.tau,
        }
    }
}

/// A kernel split into its atom at zero and the remaining sub-probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSplit {
    pub instantaneous: f64,
    pub delayed: Vec<Atom>,
    tau: f64,
}

impl KernelSplit {
    pub fn delayed_mass(&self) -> f64 {
        self.delayed.iter().map(|a| a.weight).sum()
    }

    pub fn is_undelayed(&self) -> bool {
        self.delayed.is_empty()
    }

    /// Integral of `g` against the delayed part only.
    pub fn delayed_integral(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.delayed.iter().map(|a| a.weight * g(a.offset)).sum()
    }

    /// Reassembles the original kernel.
    pub fn merge(&self) -> Result<DelayKernel> {
        let zero = (self.instantaneous > 0.0).then_some((0.0, self.instantaneous));
        let atoms = self
            .delayed
            .iter()
            .map(|a| (a.offset, a.weight))
            .chain(zero);
        DelayKernel::new(atoms, self.tau)
    }
}
