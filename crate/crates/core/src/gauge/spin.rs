//! One- and two-site σ^y ansätze for the mixed-field Ising chain.

use crate::algebra::{Pauli, PauliOperatorSum, PauliString};
use crate::error::{Error, Result};
use crate::model::SpinChainParams;

use super::{minimize_pauli_action, AnsatzKind, GaugeAnsatz};

/// Closed-form single-site coefficient
/// `α_j = ½ (Z_j X'_j − X_j Z'_j) / (Z_j² + X_j² + 2J²)`.
///
/// The `2J²` assumes both neighbours of every site are coupled (periodic
/// chain or bulk site).
pub fn spin_single_site_alpha(x: &[f64], z: &[f64], dx: &[f64], dz: &[f64], j: f64) -> Result<GaugeAnsatz> {
    let l = x.len();
    if z.len() != l || dx.len() != l || dz.len() != l {
        return Err(Error::Dimension("field sequences differ in length".into()));
    }
    let alpha = (0..l)
        .map(|s| {
            let den = z[s] * z[s] + x[s] * x[s] + 2.0 * j * j;
            if den == 0.0 {
                return Err(Error::Degenerate(format!("X = Z = J = 0 at site {s}")));
            }
            Ok(0.5 * (z[s] * dx[s] - x[s] * dz[s]) / den)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GaugeAnsatz::new(AnsatzKind::SpinSingleSite, alpha))
}

/// Operator basis of the ansatz: `σ^y_j` for every site, then (two-site only)
/// `σ^yσ^z + σ^zσ^y` and `σ^yσ^x + σ^xσ^y` for every bond.
pub fn spin_ansatz_basis(params: &SpinChainParams, kind: AnsatzKind) -> Result<Vec<PauliOperatorSum>> {
    params.validate()?;
    let l = params.sites();
    let mut basis: Vec<PauliOperatorSum> = (0..l)
        .map(|s| PauliOperatorSum::from_term(PauliString::single(l, s, Pauli::Y), 1.0))
        .collect();
    match kind {
        AnsatzKind::SpinSingleSite => {}
        AnsatzKind::SpinTwoSite => {
            for other in [Pauli::Z, Pauli::X] {
                for b in 0..params.j.len() {
                    let (s, t) = params.bond_sites(b);
                    let mut op = PauliOperatorSum::zero(l);
                    op.add_real(PauliString::pair(l, s, Pauli::Y, t, other), 1.0);
                    op.add_real(PauliString::pair(l, s, other, t, Pauli::Y), 1.0);
                    basis.push(op);
                }
            }
        }
        k => {
            return Err(Error::FamilyMismatch(format!("{k:?} is not a spin ansatz")));
        }
    }
    Ok(basis)
}

fn solve(params: &SpinChainParams, dparams: &SpinChainParams, kind: AnsatzKind) -> Result<(GaugeAnsatz, bool)> {
    dparams.validate()?;
    if params.sites() != dparams.sites() || params.bc != dparams.bc {
        return Err(Error::Dimension("H0 and dH0 parameters describe different chains".into()));
    }
    let basis = spin_ansatz_basis(params, kind)?;
    let h0 = params.hamiltonian()?;
    let dh0 = dparams.hamiltonian()?;
    let fit = minimize_pauli_action(&h0, &dh0, &basis)?;
    let l = params.sites();
    let nb = params.j.len();
    let c = fit.coefficients;
    let mut ansatz = GaugeAnsatz::new(kind, c[..l].to_vec());
    if kind == AnsatzKind::SpinTwoSite {
        ansatz.beta = Some(c[l..l + nb].to_vec());
        ansatz.gamma = Some(c[l + nb..l + 2 * nb].to_vec());
    }
    Ok((ansatz, fit.rank_deficient))
}

/// Single-site ansatz through the generic normal equations (exact for open
/// chains too, where the closed form's `2J²` does not hold at the edges).
pub fn solve_spin_single_site(params: &SpinChainParams, dparams: &SpinChainParams) -> Result<GaugeAnsatz> {
    solve(params, dparams, AnsatzKind::SpinSingleSite).map(|r| r.0)
}

/// Two-site ansatz coefficients `(α, β, γ)` minimizing the action. A singular
/// Gram matrix yields the minimal-norm solution.
pub fn solve_spin_two_site(params: &SpinChainParams, dparams: &SpinChainParams) -> Result<GaugeAnsatz> {
    solve(params, dparams, AnsatzKind::SpinTwoSite).map(|r| r.0)
}

/// Materializes a spin ansatz as a Pauli sum on the chain described by `params`.
pub fn spin_ansatz_operator(params: &SpinChainParams, ansatz: &GaugeAnsatz) -> Result<PauliOperatorSum> {
    let basis = spin_ansatz_basis(params, ansatz.kind)?;
    let coeffs: Vec<f64> = ansatz.coefficients().collect();
    if coeffs.len() != basis.len() {
        return Err(Error::Dimension(format!(
            "ansatz has {} coefficients, basis {}",
            coeffs.len(),
            basis.len()
        )));
    }
    let mut out = PauliOperatorSum::zero(params.sites());
    for (c, b) in coeffs.iter().zip(&basis) {
        out = out.axpy(num_complex::Complex64::new(*c, 0.0), b)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{hs_inner, pauli_commutator, Operator};
    use crate::gauge::action_value;
    use crate::model::Boundary;
    use num_complex::Complex64;

    fn local_flip(l: usize, lambda: f64) -> (SpinChainParams, SpinChainParams) {
        let mut p = SpinChainParams::uniform(l, 1.0, 2.0, 0.8, Boundary::Periodic);
        p.x[0] += lambda;
        let mut d = p.zeros_like();
        d.x[0] = 1.0;
        (p, d)
    }

    #[test]
    fn closed_form_example_value() {
        let a = spin_single_site_alpha(&[0.8], &[2.0], &[1.0], &[0.0], 1.0).unwrap();
        assert!((a.alpha[0] - 1.0 / 6.64).abs() < 1e-15);
        assert!((a.alpha[0] - 0.150_60).abs() < 1e-5);
    }

    #[test]
    fn rotating_field_without_coupling_gives_half_rate() {
        // X = cos θ, Z = sin θ with θ' = 0.7: α = θ'/2
        let th: f64 = 0.4;
        let a = spin_single_site_alpha(&[th.cos()], &[th.sin()], &[-0.7 * th.sin()], &[0.7 * th.cos()], 0.0).unwrap();
        // Z X' − X Z' = −0.7 (sin² + cos²)
        assert!((a.alpha[0] + 0.35).abs() < 1e-15);
    }

    #[test]
    fn degenerate_input() {
        assert!(matches!(
            spin_single_site_alpha(&[0.0], &[0.0], &[1.0], &[0.0], 0.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn x_only_specialization() {
        let (z, dx, j) = (1.3, 0.6, 0.9);
        let a = spin_single_site_alpha(&[0.0], &[z], &[dx], &[0.0], j).unwrap();
        assert!((a.alpha[0] - z * dx / (2.0 * (z * z + 2.0 * j * j))).abs() < 1e-15);
    }

    #[test]
    fn closed_form_equals_generic_on_periodic_chain() {
        let (p, d) = local_flip(6, 0.3);
        let generic = solve_spin_single_site(&p, &d).unwrap();
        let closed = spin_single_site_alpha(&p.x, &p.z, &d.x, &d.z, 1.0).unwrap();
        for (a, b) in generic.alpha.iter().zip(&closed.alpha) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn printed_g_structure_and_norm() {
        // G for a uniform α reproduces Σ_j[(X'−2Zα)² + 8α²J² + (Z'+2Xα)² + J'²]
        let l = 5;
        let (j, z, x, dj, dz, dx) = (0.7, 1.1, 0.4, 0.2, -0.3, 0.5);
        let p = SpinChainParams::uniform(l, j, z, x, Boundary::Periodic);
        let d = SpinChainParams::uniform(l, dj, dz, dx, Boundary::Periodic);
        let alpha = 0.37;
        let a = spin_ansatz_operator(&p, &GaugeAnsatz::new(AnsatzKind::SpinSingleSite, vec![alpha; l])).unwrap();
        let h = p.hamiltonian().unwrap();
        let g = d
            .hamiltonian()
            .unwrap()
            .axpy(Complex64::new(0.0, 1.0), &pauli_commutator(&a, &h).unwrap())
            .unwrap();
        let xz = PauliString::pair(l, 0, Pauli::X, 1, Pauli::Z);
        let zx = PauliString::pair(l, 0, Pauli::Z, 1, Pauli::X);
        assert!((g.coeff(&xz).re + 2.0 * alpha * j).abs() < 1e-14);
        assert!((g.coeff(&zx).re + 2.0 * alpha * j).abs() < 1e-14);
        assert!((g.coeff(&PauliString::single(l, 2, Pauli::X)).re - (dx - 2.0 * z * alpha)).abs() < 1e-14);
        assert!((g.coeff(&PauliString::single(l, 2, Pauli::Z)).re - (dz + 2.0 * x * alpha)).abs() < 1e-14);
        let printed = l as f64
            * ((dx - 2.0 * z * alpha).powi(2) + 8.0 * alpha * alpha * j * j + (dz + 2.0 * x * alpha).powi(2) + dj * dj);
        assert!((hs_inner(&g, &g).unwrap() - printed).abs() < 1e-12);
        let av = action_value(&Operator::Pauli(h), &Operator::Pauli(d.hamiltonian().unwrap()), &Operator::Pauli(a)).unwrap();
        assert!((av.value - printed).abs() < 1e-12);
    }

    #[test]
    fn commuting_drive_gives_zero_gauge() {
        let p = SpinChainParams::uniform(6, 1.0, 1.5, 0.0, Boundary::Periodic);
        let mut d = p.zeros_like();
        d.z[0] = 1.0;
        let one = solve_spin_single_site(&p, &d).unwrap();
        assert!(one.alpha.iter().all(|a| a.abs() < 1e-12));
        let two = solve_spin_two_site(&p, &d).unwrap();
        assert!(two.max_abs() < 1e-12);
    }

    #[test]
    fn no_longitudinal_field_leaves_only_two_site_terms() {
        let p = SpinChainParams::uniform(6, 1.0, 0.0, 0.7, Boundary::Periodic);
        let d = SpinChainParams::uniform(6, 0.0, 0.0, 1.0, Boundary::Periodic);
        let one = solve_spin_single_site(&p, &d).unwrap();
        assert!(one.max_abs() < 1e-12);
        let two = solve_spin_two_site(&p, &d).unwrap();
        assert!(two.alpha.iter().all(|a| a.abs() < 1e-12));
        let extra = two.beta.iter().flatten().chain(two.gamma.iter().flatten()).fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(extra > 1e-3);
    }

    #[test]
    fn translation_invariant_coefficients() {
        let p = SpinChainParams::uniform(6, 1.0, 0.9, 0.7, Boundary::Periodic);
        let d = SpinChainParams::uniform(6, 0.0, 0.0, 1.0, Boundary::Periodic);
        let a = solve_spin_two_site(&p, &d).unwrap();
        let beta = a.beta.as_ref().unwrap();
        let gamma = a.gamma.as_ref().unwrap();
        for k in 1..6 {
            assert!((a.alpha[k] - a.alpha[0]).abs() < 1e-12);
            assert!((beta[k] - beta[0]).abs() < 1e-12);
            assert!((gamma[k] - gamma[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn local_flip_coefficients_decay() {
        let (p, d) = local_flip(12, 0.0);
        let a = solve_spin_two_site(&p, &d).unwrap();
        let beta = a.beta.unwrap();
        let mag = |k: usize| a.alpha[k].abs();
        assert!(mag(0) > 10.0 * mag(3));
        assert!(mag(3) > mag(5) || mag(5) < 1e-8);
        let bmag = |b: usize| beta[b].abs().max(beta[(12 - 1 - b) % 12].abs());
        assert!(bmag(0) > 10.0 * bmag(4));
    }

    #[test]
    fn sign_reversal_of_drive_negates_coefficients() {
        let (p, d) = local_flip(6, 0.5);
        let a = solve_spin_two_site(&p, &d).unwrap();
        let b = solve_spin_two_site(&p, &d.scaled(-1.0)).unwrap();
        for (x, y) in a.coefficients().zip(b.coefficients()) {
            assert!((x + y).abs() < 1e-12);
        }
    }
}
