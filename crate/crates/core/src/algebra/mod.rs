//! Operator algebra: Pauli-string sums and quadratic fermion operators.

pub mod pauli;
pub mod quadratic;

pub use pauli::{hs_inner, pauli_commutator, Pauli, PauliMatrix, PauliOperatorSum, PauliString};
pub use quadratic::{quadratic_commutator, QuadraticFermionOperator};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Either operator family, for entry points that accept both.
#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Pauli(PauliOperatorSum),
    Quadratic(QuadraticFermionOperator),
}

impl Operator {
    pub fn family(&self) -> &'static str {
        match self {
            Operator::Pauli(_) => "pauli",
            Operator::Quadratic(_) => "quadratic",
        }
    }

    pub fn is_hermitian(&self) -> bool {
        match self {
            Operator::Pauli(p) => p.is_hermitian(1e-12),
            Operator::Quadratic(q) => q.is_hermitian(),
        }
    }

    pub fn as_pauli(&self) -> Option<&PauliOperatorSum> {
        match self {
            Operator::Pauli(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_quadratic(&self) -> Option<&QuadraticFermionOperator> {
        match self {
            Operator::Quadratic(q) => Some(q),
            _ => None,
        }
    }

    /// `[self, other]`, rejecting mixed families.
    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        match (self, other) {
            (Operator::Pauli(a), Operator::Pauli(b)) => Ok(Operator::Pauli(pauli_commutator(a, b)?)),
            (Operator::Quadratic(a), Operator::Quadratic(b)) => {
                Ok(Operator::Quadratic(quadratic_commutator(a, b)?))
            }
            _ => Err(mismatch(self, other)),
        }
    }

    /// `self + c · other`.
    pub fn axpy(&self, c: Complex64, other: &Operator) -> Result<Operator> {
        match (self, other) {
            (Operator::Pauli(a), Operator::Pauli(b)) => Ok(Operator::Pauli(a.axpy(c, b)?)),
            (Operator::Quadratic(a), Operator::Quadratic(b)) => Ok(Operator::Quadratic(a.axpy(c, b)?)),
            _ => Err(mismatch(self, other)),
        }
    }

    /// Squared norm under the family's normalization: `2^{-L} Tr[A†A]` for
    /// Pauli sums, the single-particle Frobenius norm for quadratic operators.
    pub fn norm_sq(&self) -> f64 {
        match self {
            Operator::Pauli(p) => p.norm_sq(),
            Operator::Quadratic(q) => q.frobenius_sq(),
        }
    }
}

pub(crate) fn mismatch(a: &Operator, b: &Operator) -> Error {
    Error::FamilyMismatch(format!("{} operator combined with {} operator", a.family(), b.family()))
}

impl From<PauliOperatorSum> for Operator {
    fn from(p: PauliOperatorSum) -> Self {
        Operator::Pauli(p)
    }
}

impl From<QuadraticFermionOperator> for Operator {
    fn from(q: QuadraticFermionOperator) -> Self {
        Operator::Quadratic(q)
    }
}
