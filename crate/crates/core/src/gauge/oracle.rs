//! Exact adiabatic gauge potential from full diagonalization.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::eigh;

/// Largest Hilbert-space dimension accepted for full diagonalization.
pub const MAX_ORACLE_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Gaps below `cutoff` are treated as degenerate. `None` means
    /// `1e-10 × spectral width`.
    pub cutoff: Option<f64>,
    /// Couplings inside a degenerate pair smaller than this are dropped.
    pub coupling_tol: f64,
    /// Diagonalize `∂_λH` inside each degenerate cluster before building the
    /// gauge, instead of reporting a degeneracy error.
    pub rotate_degenerate: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            cutoff: None,
            coupling_tol: 1e-12,
            rotate_degenerate: false,
        }
    }
}

/// `⟨m|A|n⟩ = i⟨m|∂_λH|n⟩ / (E_n − E_m)` for `E_m ≠ E_n`, zero otherwise;
/// returned in the basis of `h`.
pub fn exact_gauge_oracle(h: &DMatrix<Complex64>, dh: &DMatrix<Complex64>, opts: OracleOptions) -> Result<DMatrix<Complex64>> {
    let n = h.nrows();
    if h.ncols() != n || dh.nrows() != n || dh.ncols() != n {
        return Err(Error::Dimension("oracle inputs must be square and equal size".into()));
    }
    if n > MAX_ORACLE_DIM {
        return Err(Error::Resource(format!("oracle dimension {n} exceeds {MAX_ORACLE_DIM}")));
    }
    let (e, mut u) = eigh(h);
    let width = e.last().copied().unwrap_or(0.0) - e.first().copied().unwrap_or(0.0);
    let cutoff = opts.cutoff.unwrap_or(1e-10 * width.max(f64::MIN_POSITIVE));
    let clusters = clusters(&e, cutoff);
    let mut d = u.adjoint() * dh * &u;
    if opts.rotate_degenerate {
        for &(a, b) in &clusters {
            if b - a < 2 {
                continue;
            }
            let block = d.view((a, a), (b - a, b - a)).clone_owned();
            let (_, w) = eigh(&block);
            let cols = u.columns(a, b - a) * &w;
            u.columns_mut(a, b - a).copy_from(&cols);
        }
        d = u.adjoint() * dh * &u;
    }
    let scale = opts.coupling_tol * d.iter().fold(1.0f64, |m, v| m.max(v.norm()));
    let mut ae = DMatrix::<Complex64>::zeros(n, n);
    let mut cluster_of = vec![0usize; n];
    for (k, &(a, b)) in clusters.iter().enumerate() {
        cluster_of[a..b].iter_mut().for_each(|c| *c = k);
    }
    for m in 0..n {
        for k in 0..n {
            if m == k {
                continue;
            }
            if cluster_of[m] == cluster_of[k] {
                if d[(m, k)].norm() >= scale {
                    return Err(Error::Degeneracy {
                        m,
                        n: k,
                        gap: (e[k] - e[m]).abs(),
                        coupling: d[(m, k)].norm(),
                    });
                }
                continue;
            }
            ae[(m, k)] = Complex64::new(0.0, 1.0) * d[(m, k)] / (e[k] - e[m]);
        }
    }
    Ok(&u * ae * u.adjoint())
}

/// Oracle for a parametrized family, with `∂_λH` from a central difference.
pub fn exact_gauge_family<F>(family: F, lambda: f64, dlambda: f64, opts: OracleOptions) -> Result<DMatrix<Complex64>>
where
    F: Fn(f64) -> Result<DMatrix<Complex64>>,
{
    if !(dlambda > 0.0) {
        return Err(Error::Contract("dlambda must be positive".into()));
    }
    let h = family(lambda)?;
    let dh = (family(lambda + dlambda)? - family(lambda - dlambda)?) / Complex64::new(2.0 * dlambda, 0.0);
    exact_gauge_oracle(&h, &dh, opts)
}

/// Contiguous index ranges of eigenvalues chained by gaps below `cutoff`.
fn clusters(e: &[f64], cutoff: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=e.len() {
        if k == e.len() || e[k] - e[k - 1] >= cutoff {
            out.push((start, k));
            start = k;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Operator, Pauli, PauliOperatorSum, PauliString, QuadraticFermionOperator};
    use crate::gauge::{action_value, action_value_dense, solve_spin_two_site, spin::spin_ansatz_operator, Normalization};
    use crate::model::{Boundary, SpinChainParams};

    fn two_level(theta: f64) -> DMatrix<Complex64> {
        let mut h = PauliOperatorSum::zero(1);
        h.add_real(PauliString::single(1, 0, Pauli::X), theta.cos());
        h.add_real(PauliString::single(1, 0, Pauli::Z), theta.sin());
        h.to_dense().unwrap()
    }

    fn offdiag_residual(h: &DMatrix<Complex64>, dh: &DMatrix<Complex64>, a: &DMatrix<Complex64>) -> f64 {
        let (_, u) = eigh(h);
        let g = dh + (a * h - h * a) * Complex64::new(0.0, 1.0);
        let ge = u.adjoint() * g * &u;
        let mut m = 0.0f64;
        for r in 0..ge.nrows() {
            for c in 0..ge.ncols() {
                if r != c {
                    m = m.max(ge[(r, c)].norm());
                }
            }
        }
        m
    }

    #[test]
    fn rotating_spin_is_half_rotation_generator() {
        let rate = 0.8;
        let a = exact_gauge_family(|l| Ok(two_level(rate * l)), 0.3, 1e-5, OracleOptions::default()).unwrap();
        let y = PauliOperatorSum::from_term(PauliString::single(1, 0, Pauli::Y), -0.5 * rate)
            .to_dense()
            .unwrap();
        assert!((a - y).norm() < 1e-9);
    }

    #[test]
    fn defining_property_on_spin_chain() {
        let p = SpinChainParams::uniform(4, 1.0, 0.9, 0.7, Boundary::Open);
        let mut d = p.zeros_like();
        d.x[0] = 1.0;
        d.z[2] = 0.4;
        let h = p.hamiltonian().unwrap().to_dense().unwrap();
        let dh = d.hamiltonian().unwrap().to_dense().unwrap();
        let a = exact_gauge_oracle(&h, &dh, OracleOptions::default()).unwrap();
        assert!((a.adjoint() - &a).norm() < 1e-12);
        assert!(offdiag_residual(&h, &dh, &a) < 1e-10 * dh.norm());
    }

    #[test]
    fn oracle_action_is_diagonal_part_and_minimal() {
        let mut p = SpinChainParams::uniform(4, 1.0, 0.9, 0.7, Boundary::Open);
        p.z[3] = 0.5;
        let mut d = p.zeros_like();
        d.x[1] = 1.0;
        d.j[0] = 0.3;
        let h = p.hamiltonian().unwrap().to_dense().unwrap();
        let dh = d.hamiltonian().unwrap().to_dense().unwrap();
        let a = exact_gauge_oracle(&h, &dh, OracleOptions::default()).unwrap();
        let av = action_value_dense(&h, &dh, &a, Normalization::PerHilbertDim);
        let (_, u) = eigh(&h);
        let de = u.adjoint() * &dh * &u;
        let diag: f64 = (0..16).map(|k| de[(k, k)].norm_sqr()).sum::<f64>() / 16.0;
        assert!((av.value - diag).abs() < 1e-10);
        let two = solve_spin_two_site(&p, &d).unwrap();
        let op = spin_ansatz_operator(&p, &two).unwrap();
        let var = action_value(
            &Operator::Pauli(p.hamiltonian().unwrap()),
            &Operator::Pauli(d.hamiltonian().unwrap()),
            &Operator::Pauli(op),
        )
        .unwrap();
        assert!(var.value - av.value >= -1e-10);
    }

    #[test]
    fn degenerate_pair_with_coupling_is_reported() {
        // H = Z0 + Z1 has a degenerate middle pair coupled by X0X1 + Y0Y1
        let mut h = PauliOperatorSum::zero(2);
        h.add_real(PauliString::single(2, 0, Pauli::Z), 1.0);
        h.add_real(PauliString::single(2, 1, Pauli::Z), 1.0);
        let mut dh = PauliOperatorSum::zero(2);
        dh.add_real(PauliString::pair(2, 0, Pauli::X, 1, Pauli::X), 1.0);
        dh.add_real(PauliString::pair(2, 0, Pauli::Y, 1, Pauli::Y), 1.0);
        let (hd, dd) = (h.to_dense().unwrap(), dh.to_dense().unwrap());
        assert!(matches!(
            exact_gauge_oracle(&hd, &dd, OracleOptions::default()),
            Err(Error::Degeneracy { .. })
        ));
        let rotated = exact_gauge_oracle(
            &hd,
            &dd,
            OracleOptions {
                rotate_degenerate: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(rotated.norm() < 1e-12);
        // a diagonal perturbation of the same spectrum is fine without rotation
        let mut dz = PauliOperatorSum::zero(2);
        dz.add_real(PauliString::single(2, 0, Pauli::Z), 1.0);
        let a = exact_gauge_oracle(&hd, &dz.to_dense().unwrap(), OracleOptions::default()).unwrap();
        assert!(a.norm() < 1e-12);
    }

    #[test]
    fn fermion_linear_field_projection() {
        // single-particle oracle for h = −J hopping + λ j, projected on the nn currents
        let (l, j, lambda) = (4usize, 1.0, 3.0);
        let hsp = |lam: f64| -> Result<DMatrix<Complex64>> {
            let mut m = DMatrix::<f64>::zeros(l, l);
            for s in 0..l {
                m[(s, s)] = lam * (s as f64 - l as f64 / 2.0);
                if s + 1 < l {
                    m[(s, s + 1)] = -j;
                    m[(s + 1, s)] = -j;
                }
            }
            Ok(QuadraticFermionOperator::from_real(&m)?.into_matrix())
        };
        let a = exact_gauge_family(hsp, lambda, 1e-5, OracleOptions::default()).unwrap();
        let mid = a[(2, 1)].im;
        let target = -j / (lambda * lambda);
        assert!((mid - target).abs() < 0.1 * target.abs(), "{mid} vs {target}");
    }

    #[test]
    fn size_cap_and_shape() {
        let h = DMatrix::<Complex64>::zeros(2, 3);
        assert!(matches!(exact_gauge_oracle(&h, &h, OracleOptions::default()), Err(Error::Dimension(_))));
    }
}
