//! Quadratic fermion operators `Σ_{jk} h_{jk} c†_j c_k`, represented by their
//! single-particle matrix. Commutators of quadratic operators stay quadratic,
//! so nothing is expanded to Fock space unless explicitly materialized.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance (max-norm) for the Hermiticity invariant.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Largest Fock sector accepted by [`QuadraticFermionOperator::materialize_sector`].
pub const MAX_SECTOR_DIM: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFermionOperator {
    h: DMatrix<Complex64>,
}

impl QuadraticFermionOperator {
    /// Wraps a single-particle matrix, rejecting non-square or non-Hermitian input.
    pub fn new(h: DMatrix<Complex64>) -> Result<Self> {
        if h.nrows() != h.ncols() {
            return Err(Error::Dimension(format!(
                "single-particle matrix is {}x{}",
                h.nrows(),
                h.ncols()
            )));
        }
        let dev = hermitian_deviation(&h);
        if dev > HERMITIAN_TOL {
            return Err(Error::Contract(format!(
                "single-particle matrix not Hermitian (max deviation {dev:.3e})"
            )));
        }
        Ok(Self { h })
    }

    /// Wraps a matrix without the Hermiticity check (commutators are anti-Hermitian).
    pub fn from_matrix_unchecked(h: DMatrix<Complex64>) -> Self {
        Self { h }
    }

    pub fn from_real(h: &DMatrix<f64>) -> Result<Self> {
        Self::new(h.map(|v| Complex64::new(v, 0.0)))
    }

    /// Nearest-neighbour current operator `i Σ_b α_b (c†_{b+1} c_b − c†_b c_{b+1})`
    /// on an open chain of `alpha.len() + 1` sites.
    pub fn nn_current(alpha: &[f64]) -> Self {
        let l = alpha.len() + 1;
        let mut h = DMatrix::<Complex64>::zeros(l, l);
        for (b, &a) in alpha.iter().enumerate() {
            h[(b + 1, b)] = Complex64::new(0.0, a);
            h[(b, b + 1)] = Complex64::new(0.0, -a);
        }
        Self { h }
    }

    pub fn zero(l: usize) -> Self {
        Self {
            h: DMatrix::zeros(l, l),
        }
    }

    pub fn sites(&self) -> usize {
        self.h.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.h
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.h
    }

    pub fn is_hermitian(&self) -> bool {
        hermitian_deviation(&self.h) <= HERMITIAN_TOL
    }

    /// True for purely imaginary antisymmetric matrices, i.e. operators of
    /// gauge-potential form `i Σ α_{jk}(c†_k c_j − h.c.)`.
    pub fn is_gauge_form(&self) -> bool {
        let n = self.sites();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let v = self.h[(i, j)];
                v.re.abs() <= HERMITIAN_TOL && (v.im + self.h[(j, i)].im).abs() <= HERMITIAN_TOL
            })
        })
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.sites() != other.sites() {
            return Err(Error::Dimension(format!(
                "quadratic operators on {} and {} sites",
                self.sites(),
                other.sites()
            )));
        }
        Ok(())
    }

    pub fn axpy(&self, c: Complex64, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            h: &self.h + other.h.map(|v| v * c),
        })
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            h: self.h.map(|v| v * c),
        }
    }

    /// Squared single-particle Frobenius norm `Tr[h† h]`.
    pub fn frobenius_sq(&self) -> f64 {
        self.h.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Many-body matrix restricted to the `n`-particle sector. Basis states are
    /// occupation bit masks with `n` set bits, in increasing numeric order.
    pub fn materialize_sector(&self, n: usize) -> Result<(Vec<u64>, DMatrix<Complex64>)> {
        let l = self.sites();
        if l > 63 {
            return Err(Error::Resource(format!("{l} sites exceeds the 63-site sector limit")));
        }
        if n > l {
            return Err(Error::Dimension(format!("{n} particles on {l} sites")));
        }
        let basis = sector_basis(l, n);
        if basis.len() > MAX_SECTOR_DIM {
            return Err(Error::Resource(format!(
                "sector dimension {} exceeds {}",
                basis.len(),
                MAX_SECTOR_DIM
            )));
        }
        let index: std::collections::HashMap<u64, usize> =
            basis.iter().enumerate().map(|(k, &b)| (b, k)).collect();
        let dim = basis.len();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (col, &state) in basis.iter().enumerate() {
            for k in 0..l {
                if state & (1 << k) == 0 {
                    continue;
                }
                for j in 0..l {
                    let v = self.h[(j, k)];
                    if v == Complex64::default() {
                        continue;
                    }
                    if j == k {
                        m[(col, col)] += v;
                        continue;
                    }
                    if state & (1 << j) != 0 {
                        continue;
                    }
                    // c†_j c_k: sign from occupied sites strictly between j and k
                    let (lo, hi) = if j < k { (j, k) } else { (k, j) };
                    let between = state & (((1u64 << hi) - 1) & !((1u64 << (lo + 1)) - 1));
                    let sign = if between.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    let target = (state & !(1 << k)) | (1 << j);
                    m[(index[&target], col)] += v * sign;
                }
            }
        }
        Ok((basis, m))
    }
}

/// Occupation masks of `n` particles on `l` sites, ascending.
pub fn sector_basis(l: usize, n: usize) -> Vec<u64> {
    (0..(1u64 << l)).filter(|b| b.count_ones() as usize == n).collect()
}

pub fn hermitian_deviation(h: &DMatrix<Complex64>) -> f64 {
    let n = h.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Commutator of quadratic operators: `[h_a, h_b]` on the single-particle matrices.
pub fn quadratic_commutator(
    a: &QuadraticFermionOperator,
    b: &QuadraticFermionOperator,
) -> Result<QuadraticFermionOperator> {
    a.check(b)?;
    Ok(QuadraticFermionOperator {
        h: &a.h * &b.h - &b.h * &a.h,
    })
}
