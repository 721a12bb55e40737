//! Lattice model parameters shared by the gauge solvers and the dynamics.

use serde::{Deserialize, Serialize};

use crate::algebra::{Pauli, PauliOperatorSum, PauliString};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// Number of nearest-neighbour bonds on a chain of `l` sites.
pub fn bond_count(l: usize, bc: Boundary) -> usize {
    match bc {
        Boundary::Open => l.saturating_sub(1),
        Boundary::Periodic if l > 2 => l,
        Boundary::Periodic => l.saturating_sub(1),
    }
}

/// Ising chain `Σ_b J_b σ^z_b σ^z_{b+1} + Σ_j (Z_j σ^z_j + X_j σ^x_j)`.
///
/// The same struct carries λ-derivatives of the couplings when used as the
/// `dH₀` argument of the gauge solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinChainParams {
    /// One coupling per bond; bond `b` joins sites `b` and `(b + 1) mod L`.
    pub j: Vec<f64>,
    pub z: Vec<f64>,
    pub x: Vec<f64>,
    pub bc: Boundary,
}

impl SpinChainParams {
    pub fn uniform(l: usize, j: f64, z: f64, x: f64, bc: Boundary) -> Self {
        Self {
            j: vec![j; bond_count(l, bc)],
            z: vec![z; l],
            x: vec![x; l],
            bc,
        }
    }

    pub fn sites(&self) -> usize {
        self.z.len()
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.sites();
        if l == 0 {
            return Err(Error::Dimension("spin chain with zero sites".into()));
        }
        if self.x.len() != l || self.j.len() != bond_count(l, self.bc) {
            return Err(Error::Dimension(format!(
                "spin chain: {} z fields, {} x fields, {} couplings (expected {} bonds)",
                l,
                self.x.len(),
                self.j.len(),
                bond_count(l, self.bc)
            )));
        }
        if self.j.iter().chain(&self.z).chain(&self.x).any(|v| !v.is_finite()) {
            return Err(Error::Contract("non-finite spin-chain coupling".into()));
        }
        Ok(())
    }

    /// Pair of sites joined by bond `b`.
    pub fn bond_sites(&self, b: usize) -> (usize, usize) {
        (b, (b + 1) % self.sites())
    }

    pub fn hamiltonian(&self) -> Result<PauliOperatorSum> {
        self.validate()?;
        let l = self.sites();
        let mut h = PauliOperatorSum::zero(l);
        for (b, &jb) in self.j.iter().enumerate() {
            let (s, t) = self.bond_sites(b);
            h.add_real(PauliString::pair(l, s, Pauli::Z, t, Pauli::Z), jb);
        }
        for site in 0..l {
            h.add_real(PauliString::single(l, site, Pauli::Z), self.z[site]);
            h.add_real(PauliString::single(l, site, Pauli::X), self.x[site]);
        }
        Ok(h)
    }

    /// `self + w · other`, entrywise (for combining couplings and derivatives).
    pub fn axpy(&self, w: f64, other: &Self) -> Self {
        let f = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p + w * q).collect();
        Self {
            j: f(&self.j, &other.j),
            z: f(&self.z, &other.z),
            x: f(&self.x, &other.x),
            bc: self.bc,
        }
    }

    pub fn scaled(&self, w: f64) -> Self {
        let f = |a: &[f64]| a.iter().map(|p| p * w).collect();
        Self {
            j: f(&self.j),
            z: f(&self.z),
            x: f(&self.x),
            bc: self.bc,
        }
    }

    pub fn zeros_like(&self) -> Self {
        self.scaled(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bond_counts() {
        assert_eq!(bond_count(5, Boundary::Open), 4);
        assert_eq!(bond_count(5, Boundary::Periodic), 5);
        assert_eq!(bond_count(2, Boundary::Periodic), 1);
    }

    #[test]
    fn hamiltonian_term_count() {
        let p = SpinChainParams::uniform(4, 1.0, 2.0, 0.8, Boundary::Periodic);
        let h = p.hamiltonian().unwrap();
        assert_eq!(h.num_terms(), 12);
        let bad = SpinChainParams {
            j: vec![1.0],
            ..p
        };
        assert!(bad.validate().is_err());
    }
}
