//! Variational adiabatic gauge potentials.
//!
//! A trial gauge potential `A*` is scored by the action `S = ‖G‖²` with
//! `G = ∂_λH₀ + i[A*, H₀]`; the solvers here minimize it over restricted
//! operator families (nearest-neighbour currents for fermions, one- and
//! two-site σ^y terms for spins) and provide the exact eigenbasis gauge as
//! an oracle for small systems.

pub mod classical;
pub mod fermion;
pub mod oracle;
pub mod spin;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{hs_inner, pauli_commutator, Operator, PauliOperatorSum};
use crate::error::{Error, Result};
use crate::linalg::solve_spd;

pub use classical::{classical_rotor_alpha, classical_rotor_norm_sq};
pub use fermion::{
    fermion_g, linear_field_alpha_analytic, solve_fermion_ansatz, solve_fermion_ansatz_local, solve_fermion_ansatz_local_with_derivative,
    solve_fermion_ansatz_with_derivative,
};
pub use oracle::{exact_gauge_family, exact_gauge_oracle, OracleOptions};
pub use spin::{
    solve_spin_single_site, solve_spin_two_site, spin_ansatz_basis, spin_ansatz_operator, spin_single_site_alpha,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    FermionNnCurrent,
    SpinSingleSite,
    SpinTwoSite,
    ClassicalSingleSite,
}

/// Coefficients of a restricted gauge potential.
///
/// * `FermionNnCurrent`: `alpha[b]` multiplies `i(c†_{b+1}c_b − c†_b c_{b+1})`.
/// * `SpinSingleSite`: `alpha[j]` multiplies `σ^y_j`.
/// * `SpinTwoSite`: additionally `beta[b]` on `σ^y σ^z + σ^z σ^y` and
///   `gamma[b]` on `σ^y σ^x + σ^x σ^y` across bond `b`.
/// * `ClassicalSingleSite`: a single `alpha` on `S^y_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeAnsatz {
    pub kind: AnsatzKind,
    pub alpha: Vec<f64>,
    pub beta: Option<Vec<f64>>,
    pub gamma: Option<Vec<f64>>,
}

impl GaugeAnsatz {
    pub fn new(kind: AnsatzKind, alpha: Vec<f64>) -> Self {
        Self {
            kind,
            alpha,
            beta: None,
            gamma: None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coefficients().all(f64::is_finite)
    }

    /// All coefficients in a fixed order (α, then β, then γ).
    pub fn coefficients(&self) -> impl Iterator<Item = f64> + '_ {
        self.alpha
            .iter()
            .chain(self.beta.iter().flatten())
            .chain(self.gamma.iter().flatten())
            .copied()
    }

    pub fn negated(&self) -> Self {
        let neg = |v: &Vec<f64>| v.iter().map(|x| -x).collect::<Vec<_>>();
        Self {
            kind: self.kind,
            alpha: neg(&self.alpha),
            beta: self.beta.as_ref().map(neg),
            gamma: self.gamma.as_ref().map(neg),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coefficients().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `dim^{-1} Tr[G²]` (Pauli sums: sum of squared string coefficients).
    PerHilbertDim,
    /// `Tr[g²]` of the single-particle matrix.
    SingleParticleFrobenius,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionValue {
    pub value: f64,
    pub normalization: Normalization,
}

/// `G = ∂_λH₀ + i[A*, H₀]`.
pub fn g_operator(h0: &Operator, dh0: &Operator, ansatz: &Operator) -> Result<Operator> {
    let com = ansatz.commutator(h0)?;
    dh0.axpy(Complex64::new(0.0, 1.0), &com)
}

/// Action `‖∂_λH₀ + i[A*, H₀]‖²` under the family's normalization.
pub fn action_value(h0: &Operator, dh0: &Operator, ansatz: &Operator) -> Result<ActionValue> {
    for (name, op) in [("H0", h0), ("dH0", dh0), ("ansatz", ansatz)] {
        if !op.is_hermitian() {
            return Err(Error::Contract(format!("{name} is not Hermitian")));
        }
    }
    let g = g_operator(h0, dh0, ansatz)?;
    let normalization = match g {
        Operator::Pauli(_) => Normalization::PerHilbertDim,
        Operator::Quadratic(_) => Normalization::SingleParticleFrobenius,
    };
    Ok(ActionValue {
        value: g.norm_sq(),
        normalization,
    })
}

/// Action of a dense trial gauge (e.g. the exact oracle) for dense `H₀`, `∂_λH₀`.
pub fn action_value_dense(
    h0: &DMatrix<Complex64>,
    dh0: &DMatrix<Complex64>,
    ansatz: &DMatrix<Complex64>,
    normalization: Normalization,
) -> ActionValue {
    let com = ansatz * h0 - h0 * ansatz;
    let g = dh0 + com.map(|v| v * Complex64::new(0.0, 1.0));
    let tr: f64 = g.iter().map(|v| v.norm_sqr()).sum();
    let value = match normalization {
        Normalization::PerHilbertDim => tr / h0.nrows() as f64,
        Normalization::SingleParticleFrobenius => tr,
    };
    ActionValue { value, normalization }
}

/// Minimizer of `‖∂_λH₀ + Σ_k c_k i[b_k, H₀]‖²` over a Pauli operator basis.
#[derive(Debug, Clone)]
pub struct PauliFit {
    pub coefficients: Vec<f64>,
    pub action: f64,
    pub rank_deficient: bool,
}

/// Least-squares fit of the gauge coefficients over `basis` via the normal
/// equations `M c = −r`, `M_kl = ⟨O_k, O_l⟩`, `r_k = ⟨O_k, ∂_λH₀⟩`, with
/// `O_k = i[b_k, H₀]`.
pub fn minimize_pauli_action(
    h0: &PauliOperatorSum,
    dh0: &PauliOperatorSum,
    basis: &[PauliOperatorSum],
) -> Result<PauliFit> {
    let i = Complex64::new(0.0, 1.0);
    let ops: Vec<PauliOperatorSum> = basis
        .iter()
        .map(|b| pauli_commutator(b, h0).map(|c| c.scaled(i)))
        .collect::<Result<_>>()?;
    let n = ops.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut r = DVector::<f64>::zeros(n);
    for k in 0..n {
        r[k] = hs_inner(&ops[k], dh0)?;
        for l in k..n {
            let v = hs_inner(&ops[k], &ops[l])?;
            m[(k, l)] = v;
            m[(l, k)] = v;
        }
    }
    let sol = solve_spd(&m, &(-r.clone()));
    let c = sol.x;
    // S(c) = ‖dH‖² + 2 rᵀc + cᵀ M c
    let action = dh0.norm_sq() + 2.0 * r.dot(&c) + c.dot(&(&m * &c));
    Ok(PauliFit {
        coefficients: c.iter().copied().collect(),
        action: action.max(0.0),
        rank_deficient: sol.rank_deficient,
    })
}
