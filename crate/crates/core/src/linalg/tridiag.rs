//! Tridiagonal linear solves and tridiagonal Hermitian single-particle matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Solves `A x = rhs` for a real tridiagonal `A` given by its sub-, main- and
/// super-diagonal (Thomas algorithm). Fails on a vanishing pivot.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if rhs.len() != n || (n > 0 && (sub.len() != n - 1 || sup.len() != n - 1)) {
        return Err(Error::Dimension(format!(
            "tridiagonal system: diag {}, sub {}, sup {}, rhs {}",
            n,
            sub.len(),
            sup.len(),
            rhs.len()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = diag
        .iter()
        .chain(sub)
        .chain(sup)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let tiny = 1e-14 * scale.max(f64::MIN_POSITIVE);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv.abs() <= tiny {
        return Err(Error::Singular("zero pivot at row 0".into()));
    }
    if n > 1 {
        c[0] = sup[0] / piv;
    }
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - sub[i - 1] * c[i - 1];
        if piv.abs() <= tiny {
            return Err(Error::Singular(format!("zero pivot at row {i}")));
        }
        if i < n - 1 {
            c[i] = sup[i] / piv;
        }
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / piv;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Hermitian single-particle matrix with nonzero entries only on the main
/// diagonal, the first off-diagonals and (for periodic chains) the corners.
///
/// `off[b]` is the element `h[b+1, b]`; `corner` is `h[0, L-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagHermitian {
    pub diag: Vec<f64>,
    pub off: Vec<Complex64>,
    pub corner: Option<Complex64>,
}

impl TridiagHermitian {
    pub fn new(diag: Vec<f64>, off: Vec<Complex64>, corner: Option<Complex64>) -> Result<Self> {
        if !diag.is_empty() && off.len() + 1 != diag.len() {
            return Err(Error::Dimension(format!(
                "{} diagonal entries need {} off-diagonal entries, got {}",
                diag.len(),
                diag.len() - 1,
                off.len()
            )));
        }
        Ok(Self { diag, off, corner })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Entrywise linear combination `Σ w_k h_k` of matrices with equal shape.
    pub fn combine(parts: &[(f64, &TridiagHermitian)]) -> TridiagHermitian {
        let n = parts[0].1.dim();
        let mut diag = vec![0.0; n];
        let mut off = vec![Complex64::default(); n.saturating_sub(1)];
        let mut corner: Option<Complex64> = None;
        for (w, h) in parts {
            assert_eq!(h.dim(), n);
            for (a, b) in diag.iter_mut().zip(&h.diag) {
                *a += w * b;
            }
            for (a, b) in off.iter_mut().zip(&h.off) {
                *a += b * *w;
            }
            if let Some(c) = h.corner {
                *corner.get_or_insert(Complex64::default()) += c * *w;
            }
        }
        TridiagHermitian { diag, off, corner }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(self.diag[i], 0.0);
        }
        for (b, &v) in self.off.iter().enumerate() {
            m[(b + 1, b)] += v;
            m[(b, b + 1)] += v.conj();
        }
        if let Some(c) = self.corner {
            m[(0, n - 1)] += c;
            m[(n - 1, 0)] += c.conj();
        }
        m
    }

    /// Gershgorin bounds on the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let n = self.dim();
        let mut radius = vec![0.0f64; n];
        for (b, v) in self.off.iter().enumerate() {
            radius[b] += v.norm();
            radius[b + 1] += v.norm();
        }
        if let Some(c) = self.corner {
            radius[0] += c.norm();
            radius[n - 1] += c.norm();
        }
        let lo = (0..n).map(|i| self.diag[i] - radius[i]).fold(f64::INFINITY, f64::min);
        let hi = (0..n).map(|i| self.diag[i] + radius[i]).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Max-row-sum norm, an upper bound on the spectral radius.
    pub fn inf_norm(&self) -> f64 {
        let (lo, hi) = self.spectral_bounds();
        lo.abs().max(hi.abs())
    }

    /// `out = (a·h + b) x` for an `L × N` column-major block `x`.
    pub fn affine_apply(&self, a: f64, b: f64, x: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>) {
        let n = self.dim();
        let cols = x.ncols();
        for col in 0..cols {
            let xs = x.column(col);
            let mut os = out.column_mut(col);
            for i in 0..n {
                let mut acc = xs[i] * (self.diag[i] * a + b);
                if i > 0 {
                    // h[i, i-1] = off[i-1]
                    acc += self.off[i - 1] * xs[i - 1] * a;
                }
                if i + 1 < n {
                    // h[i, i+1] = conj(off[i])
                    acc += self.off[i].conj() * xs[i + 1] * a;
                }
                os[i] = acc;
            }
            if let Some(c) = self.corner {
                os[0] += c * xs[n - 1] * a;
                os[n - 1] += c.conj() * xs[0] * a;
            }
        }
    }

    pub fn apply(&self, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(x.nrows(), x.ncols());
        self.affine_apply(1.0, 0.0, x, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_matches_dense_solve() {
        let sub = [1.0, -0.5, 0.25];
        let diag = [4.0, 3.0, 5.0, 2.5];
        let sup = [0.5, 1.5, -1.0];
        let rhs = [1.0, 2.0, -1.0, 0.5];
        let x = solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
        let mut a = DMatrix::<f64>::zeros(4, 4);
        for i in 0..4 {
            a[(i, i)] = diag[i];
        }
        for i in 0..3 {
            a[(i + 1, i)] = sub[i];
            a[(i, i + 1)] = sup[i];
        }
        let r = &a * nalgebra::DVector::from_column_slice(&x) - nalgebra::DVector::from_column_slice(&rhs);
        assert!(r.norm() < 1e-14);
    }

    #[test]
    fn thomas_detects_singular() {
        let r = solve_tridiagonal(&[0.0], &[0.0, 1.0], &[0.0], &[1.0, 1.0]);
        assert!(matches!(r, Err(Error::Singular(_))));
    }

    #[test]
    fn apply_matches_dense_with_corner() {
        let h = TridiagHermitian::new(
            vec![0.1, -0.4, 0.9, 0.3],
            vec![
                Complex64::new(-1.0, 0.2),
                Complex64::new(-0.7, -0.1),
                Complex64::new(-1.2, 0.0),
            ],
            Some(Complex64::new(0.3, 0.4)),
        )
        .unwrap();
        let x = DMatrix::from_fn(4, 2, |i, j| Complex64::new(i as f64 - j as f64, 0.5 * j as f64 + 0.1));
        let d = h.to_dense();
        assert!(crate::algebra::quadratic::hermitian_deviation(&d) < 1e-15);
        assert!((h.apply(&x) - &d * &x).norm() < 1e-14);
    }
}
