//! Lanczos ground states and Krylov short-time propagation for large sparse
//! Hermitian operators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::algebra::PauliMatrix;
use crate::error::{Error, Result};

use super::eigen::eigh_real;

/// Matrix-free Hermitian operator.
pub trait HermitianOperator: Sync {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]);
}

impl HermitianOperator for PauliMatrix {
    fn dim(&self) -> usize {
        PauliMatrix::dim(self)
    }
    fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        PauliMatrix::apply_into(self, x, out)
    }
}

impl HermitianOperator for DMatrix<Complex64> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        let v = self * DVector::from_column_slice(x);
        out.copy_from_slice(v.as_slice());
    }
}

pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Deterministic dense start vector.
fn start_vector(dim: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|k| {
            let s = ((k as f64 + 1.0) * 0.754_877_666).fract() - 0.5;
            Complex64::new(1.0 + 0.3 * s, 0.0)
        })
        .collect();
    let n = norm(&v);
    v.iter_mut().for_each(|x| *x /= n);
    v
}

/// Lanczos basis with full re-orthogonalization. Returns the basis vectors
/// and the tridiagonal coefficients (α, β); `β[k]` couples vectors k and k+1.
fn lanczos_basis<O: HermitianOperator + ?Sized>(
    op: &O,
    v0: &[Complex64],
    m: usize,
) -> (Vec<Vec<Complex64>>, Vec<f64>, Vec<f64>) {
    let dim = op.dim();
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    let mut alpha = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    let mut v = v0.to_vec();
    let n0 = norm(&v);
    v.iter_mut().for_each(|x| *x /= n0);
    let mut w = vec![Complex64::default(); dim];
    for k in 0..m {
        op.apply_into(&v, &mut w);
        let a = dot(&v, &w).re;
        axpy(&mut w, Complex64::new(-a, 0.0), &v);
        if k > 0 {
            let b: f64 = beta[k - 1];
            axpy(&mut w, Complex64::new(-b, 0.0), &basis[k - 1]);
        }
        basis.push(v.clone());
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                axpy(&mut w, -c, q);
            }
        }
        alpha.push(a);
        let b = norm(&w);
        beta.push(b);
        if b < 1e-13 * (a.abs() + 1.0) || k + 1 == m {
            break;
        }
        v = w.iter().map(|x| x / b).collect();
    }
    (basis, alpha, beta)
}

fn tridiag_dense(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    t
}

/// Result of a Lanczos ground-state search.
#[derive(Debug, Clone)]
pub struct LanczosGround {
    pub energy: f64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
    /// Lowest Ritz gap seen, a lower-quality estimate of the spectral gap.
    pub gap_estimate: f64,
}

/// Lowest eigenpair by restarted Lanczos, iterated until the residual
/// `‖Hψ − Eψ‖` falls below `tol`.
pub fn lanczos_ground<O: HermitianOperator + ?Sized>(op: &O, tol: f64) -> Result<LanczosGround> {
    let dim = op.dim();
    if dim == 0 {
        return Err(Error::Dimension("empty operator".into()));
    }
    let m = dim.min(120);
    let mut v = start_vector(dim);
    let mut best = None;
    for _restart in 0..60 {
        let (basis, alpha, beta) = lanczos_basis(op, &v, m);
        let t = tridiag_dense(&alpha, &beta);
        let (vals, vecs) = eigh_real(&t);
        let mut psi = vec![Complex64::default(); dim];
        for (k, q) in basis.iter().enumerate() {
            axpy(&mut psi, Complex64::new(vecs[(k, 0)], 0.0), q);
        }
        let n = norm(&psi);
        psi.iter_mut().for_each(|x| *x /= n);
        let mut hpsi = vec![Complex64::default(); dim];
        op.apply_into(&psi, &mut hpsi);
        let e = dot(&psi, &hpsi).re;
        axpy(&mut hpsi, Complex64::new(-e, 0.0), &psi);
        let res = norm(&hpsi);
        let gap = if vals.len() > 1 { vals[1] - vals[0] } else { f64::INFINITY };
        let out = LanczosGround {
            energy: e,
            vector: psi.clone(),
            residual: res,
            gap_estimate: gap,
        };
        if res < tol || basis.len() == dim {
            return Ok(out);
        }
        best = Some(out);
        v = psi;
    }
    let b = best.expect("at least one restart");
    Err(Error::Integrator(format!(
        "Lanczos did not converge: residual {:.3e} after restarts",
        b.residual
    )))
}

/// Krylov propagation settings.
#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    pub max_dim: usize,
    pub tol: f64,
    pub max_halvings: u32,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            max_dim: 20,
            tol: 1e-10,
            max_halvings: 12,
        }
    }
}

/// `exp(-i H dt) ψ` via a Lanczos subspace, splitting `dt` when the a-posteriori
/// error estimate exceeds the tolerance.
pub fn krylov_expm<O: HermitianOperator + ?Sized>(
    op: &O,
    psi: &[Complex64],
    dt: f64,
    opts: KrylovOptions,
) -> Result<Vec<Complex64>> {
    krylov_rec(op, psi, dt, opts, 0)
}

fn krylov_rec<O: HermitianOperator + ?Sized>(
    op: &O,
    psi: &[Complex64],
    dt: f64,
    opts: KrylovOptions,
    depth: u32,
) -> Result<Vec<Complex64>> {
    let nrm = norm(psi);
    if nrm == 0.0 {
        return Ok(psi.to_vec());
    }
    let (basis, alpha, beta) = lanczos_basis(op, psi, opts.max_dim.min(op.dim()));
    let m = alpha.len();
    let t = tridiag_dense(&alpha, &beta);
    let (vals, vecs) = eigh_real(&t);
    // y = exp(-i T dt) e_1
    let y: Vec<Complex64> = (0..m)
        .map(|i| {
            (0..m)
                .map(|k| Complex64::from_polar(vecs[(i, k)] * vecs[(0, k)], -vals[k] * dt))
                .sum()
        })
        .collect();
    let breakdown = m < opts.max_dim.min(op.dim()) || m == op.dim();
    let err = if breakdown { 0.0 } else { beta[m - 1] * y[m - 1].norm() };
    if err > opts.tol {
        if depth >= opts.max_halvings {
            return Err(Error::Integrator(format!(
                "Krylov step dt={dt:.3e} did not reach tolerance (estimate {err:.3e})"
            )));
        }
        let half = krylov_rec(op, psi, dt / 2.0, opts, depth + 1)?;
        return krylov_rec(op, &half, dt / 2.0, opts, depth + 1);
    }
    let mut out = vec![Complex64::default(); op.dim()];
    for (k, q) in basis.iter().enumerate() {
        axpy(&mut out, y[k] * nrm, q);
    }
    Ok(out)
}
