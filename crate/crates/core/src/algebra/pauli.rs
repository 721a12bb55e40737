//! Pauli strings and weighted sums of them on an `L`-site chain.
//!
//! A string is stored as a pair of bit masks (`x`, `z`), two bits per site:
//! `I = (0,0)`, `X = (1,0)`, `Z = (0,1)`, `Y = (1,1)`. The operator a string
//! represents is `i^{|x & z|} X^x Z^z`, which makes every string Hermitian and
//! makes `(x, z)` a canonical key, so sums deduplicate deterministically.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest chain length the packed encoding supports.
pub const MAX_SITES: usize = 64;
/// Largest chain length that may be materialized as a many-body matrix.
pub const MAX_MATERIALIZE_SITES: usize = 16;
/// Coefficients smaller than this (in modulus) are dropped after arithmetic.
pub const PRUNE_TOL: f64 = 1e-14;

/// Single-site Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Z => (false, true),
            Pauli::Y => (true, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }
}

/// Tensor product of single-site Paulis on a chain of `len` sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    len: usize,
    x: u64,
    z: u64,
}

fn i_pow(k: i64) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl PauliString {
    pub fn identity(len: usize) -> Self {
        assert!(len <= MAX_SITES, "chain length {len} exceeds {MAX_SITES}");
        Self { len, x: 0, z: 0 }
    }

    pub fn from_masks(len: usize, x: u64, z: u64) -> Self {
        assert!(len <= MAX_SITES, "chain length {len} exceeds {MAX_SITES}");
        let m = mask(len);
        Self {
            len,
            x: x & m,
            z: z & m,
        }
    }

    pub fn from_ops(ops: &[Pauli]) -> Self {
        let mut s = Self::identity(ops.len());
        for (site, &p) in ops.iter().enumerate() {
            s = s.with(site, p);
        }
        s
    }

    /// Single non-identity operator `p` on `site`.
    pub fn single(len: usize, site: usize, p: Pauli) -> Self {
        Self::identity(len).with(site, p)
    }

    /// `p` on site `i` times `q` on site `j` (sites taken modulo `len`).
    pub fn pair(len: usize, i: usize, p: Pauli, j: usize, q: Pauli) -> Self {
        assert_ne!(i % len, j % len, "pair sites must differ");
        Self::identity(len).with(i % len, p).with(j % len, q)
    }

    pub fn with(mut self, site: usize, p: Pauli) -> Self {
        assert!(site < self.len, "site {site} out of range for length {}", self.len);
        let (bx, bz) = p.bits();
        let bit = 1u64 << site;
        self.x = if bx { self.x | bit } else { self.x & !bit };
        self.z = if bz { self.z | bit } else { self.z & !bit };
        self
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn op(&self, site: usize) -> Pauli {
        let bit = 1u64 << site;
        Pauli::from_bits(self.x & bit != 0, self.z & bit != 0)
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Product `self · other = phase · result`.
    pub fn mul(&self, other: &Self) -> (Complex64, PauliString) {
        debug_assert_eq!(self.len, other.len);
        let out = PauliString {
            len: self.len,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        let e = self.y_count() as i64 + other.y_count() as i64 - out.y_count() as i64
            + 2 * (self.z & other.x).count_ones() as i64;
        (i_pow(e), out)
    }

    /// Matrix element `⟨b ^ x| P |b⟩` for computational basis state `b`.
    /// Bit `j` of `b` set means site `j` is spin down (`σ^z = -1`).
    pub fn element(&self, b: u64) -> Complex64 {
        let sign = if (self.z & b).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        i_pow(self.y_count() as i64) * sign
    }
}

fn mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for site in 0..self.len {
            let p = self.op(site);
            if p == Pauli::I {
                continue;
            }
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{:?}{}", p, site)?;
        }
        Ok(())
    }
}

/// Weighted sum of Pauli strings, `Σ_s c_s P_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliOperatorSum {
    len: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliOperatorSum {
    pub fn zero(len: usize) -> Self {
        assert!(len <= MAX_SITES, "chain length {len} exceeds {MAX_SITES}");
        Self {
            len,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(len: usize) -> Self {
        let mut s = Self::zero(len);
        s.add_term(PauliString::identity(len), Complex64::new(1.0, 0.0));
        s
    }

    pub fn from_term(s: PauliString, c: f64) -> Self {
        let mut out = Self::zero(s.len());
        out.add_term(s, Complex64::new(c, 0.0));
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, s: &PauliString) -> Complex64 {
        self.terms.get(s).copied().unwrap_or_default()
    }

    /// Accumulates `c · s`, dropping the entry if it cancels.
    pub fn add_term(&mut self, s: PauliString, c: Complex64) {
        assert_eq!(s.len(), self.len, "string length does not match sum");
        let e = self.terms.entry(s).or_default();
        *e += c;
        if e.norm() < PRUNE_TOL {
            self.terms.remove(&s);
        }
    }

    pub fn add_real(&mut self, s: PauliString, c: f64) {
        self.add_term(s, Complex64::new(c, 0.0));
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len != other.len {
            return Err(Error::Dimension(format!(
                "Pauli sums on {} and {} sites",
                self.len, other.len
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.len);
        for (s, v) in &self.terms {
            out.add_term(*s, v * c);
        }
        out
    }

    pub fn scaled_real(&self, c: f64) -> Self {
        self.scaled(Complex64::new(c, 0.0))
    }

    /// `self + c · other`.
    pub fn axpy(&self, c: Complex64, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        let mut out = self.clone();
        for (s, v) in &other.terms {
            out.add_term(*s, v * c);
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        let mut out = Self::zero(self.len);
        for (sa, ca) in &self.terms {
            for (sb, cb) in &other.terms {
                let (ph, s) = sa.mul(sb);
                out.add_term(s, ph * ca * cb);
            }
        }
        Ok(out)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// Squared Hilbert–Schmidt norm `2^{-L} Tr[A† A]`.
    pub fn norm_sq(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum()
    }

    /// Materializes the dense `2^L × 2^L` matrix.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        self.to_sparse()?.to_dense()
    }

    /// Materializes a sparse representation grouped by bit-flip pattern.
    pub fn to_sparse(&self) -> Result<PauliMatrix> {
        if self.len > MAX_MATERIALIZE_SITES {
            return Err(Error::Resource(format!(
                "materializing {} sites (dimension 2^{}) exceeds the cap of {} sites",
                self.len, self.len, MAX_MATERIALIZE_SITES
            )));
        }
        let dim = 1usize << self.len;
        let mut groups: BTreeMap<u64, Vec<(PauliString, Complex64)>> = BTreeMap::new();
        for (s, c) in &self.terms {
            groups.entry(s.x_mask()).or_default().push((*s, *c));
        }
        let blocks = groups
            .into_iter()
            .map(|(flip, terms)| {
                let diag: Vec<Complex64> = (0..dim as u64)
                    .into_par_iter()
                    .map(|b| terms.iter().map(|(s, c)| c * s.element(b)).sum())
                    .collect();
                (flip, diag)
            })
            .collect();
        Ok(PauliMatrix {
            len: self.len,
            blocks,
        })
    }
}

impl fmt::Display for PauliOperatorSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (s, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.im == 0.0 {
                write!(f, "{}·[{}]", c.re, s)?;
            } else {
                write!(f, "({})·[{}]", c, s)?;
            }
        }
        Ok(())
    }
}

/// Commutator `[a, b] = ab − ba`.
pub fn pauli_commutator(a: &PauliOperatorSum, b: &PauliOperatorSum) -> Result<PauliOperatorSum> {
    a.check_len(b)?;
    let mut out = PauliOperatorSum::zero(a.len);
    for (sa, ca) in &a.terms {
        for (sb, cb) in &b.terms {
            if sa.commutes_with(sb) {
                continue;
            }
            let (ph, s) = sa.mul(sb);
            out.add_term(s, ph * ca * cb * 2.0);
        }
    }
    Ok(out)
}

/// Hilbert–Schmidt inner product `2^{-L} Tr[a b]` of two Hermitian sums.
pub fn hs_inner(a: &PauliOperatorSum, b: &PauliOperatorSum) -> Result<f64> {
    a.check_len(b)?;
    const HERM_TOL: f64 = 1e-12;
    if !a.is_hermitian(HERM_TOL) || !b.is_hermitian(HERM_TOL) {
        return Err(Error::Contract(
            "hs_inner requires Hermitian operands (real coefficients)".into(),
        ));
    }
    let (small, large) = if a.terms.len() <= b.terms.len() {
        (a, b)
    } else {
        (b, a)
    };
    Ok(small
        .terms
        .iter()
        .filter_map(|(s, c)| large.terms.get(s).map(|d| c.re * d.re))
        .sum())
}

/// Many-body matrix of a Pauli sum, stored as one diagonal per bit-flip
/// pattern: `H = Σ_f P_f D_f` with `(P_f ψ)[b ^ f] = ψ[b]`.
#[derive(Debug, Clone)]
pub struct PauliMatrix {
    len: usize,
    blocks: Vec<(u64, Vec<Complex64>)>,
}

impl PauliMatrix {
    pub fn dim(&self) -> usize {
        1 << self.len
    }

    pub fn num_sites(&self) -> usize {
        self.len
    }

    pub fn blocks(&self) -> &[(u64, Vec<Complex64>)] {
        &self.blocks
    }

    /// `out = H ψ`.
    pub fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64]) {
        let dim = self.dim();
        assert_eq!(psi.len(), dim);
        assert_eq!(out.len(), dim);
        const CHUNK: usize = 4096;
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
            let base = ci * CHUNK;
            for (k, o) in chunk.iter_mut().enumerate() {
                let idx = (base + k) as u64;
                let mut acc = Complex64::default();
                for (flip, diag) in &self.blocks {
                    let b = (idx ^ flip) as usize;
                    acc += diag[b] * psi[b];
                }
                *o = acc;
            }
        });
    }

    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); psi.len()];
        self.apply_into(psi, &mut out);
        out
    }

    /// Linear combination `Σ_k w_k M_k` of matrices on the same chain.
    pub fn combine(parts: &[(f64, &PauliMatrix)]) -> PauliMatrix {
        assert!(!parts.is_empty());
        let len = parts[0].1.len;
        let dim = 1usize << len;
        let mut acc: BTreeMap<u64, Vec<Complex64>> = BTreeMap::new();
        for (w, m) in parts {
            assert_eq!(m.len, len);
            for (flip, diag) in &m.blocks {
                let e = acc
                    .entry(*flip)
                    .or_insert_with(|| vec![Complex64::default(); dim]);
                for (a, d) in e.iter_mut().zip(diag) {
                    *a += d * *w;
                }
            }
        }
        PauliMatrix {
            len,
            blocks: acc.into_iter().collect(),
        }
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        let dim = self.dim();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (flip, diag) in &self.blocks {
            for (b, d) in diag.iter().enumerate() {
                m[((b as u64 ^ flip) as usize, b)] += *d;
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn x_z_commutator_is_minus_two_i_y() {
        let x = PauliOperatorSum::from_term(PauliString::single(1, 0, Pauli::X), 1.0);
        let z = PauliOperatorSum::from_term(PauliString::single(1, 0, Pauli::Z), 1.0);
        let com = pauli_commutator(&x, &z).unwrap();
        assert_eq!(com.num_terms(), 1);
        assert_eq!(com.coeff(&PauliString::single(1, 0, Pauli::Y)), c(0.0, -2.0));
    }

    #[test]
    fn y_zz_commutator() {
        let y = PauliOperatorSum::from_term(PauliString::single(2, 0, Pauli::Y), 1.0);
        let zz = PauliOperatorSum::from_term(PauliString::pair(2, 0, Pauli::Z, 1, Pauli::Z), 1.0);
        let com = pauli_commutator(&y, &zz).unwrap();
        assert_eq!(
            com.coeff(&PauliString::pair(2, 0, Pauli::X, 1, Pauli::Z)),
            c(0.0, 2.0)
        );
        assert_eq!(com.num_terms(), 1);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let a = PauliOperatorSum::identity(2);
        let b = PauliOperatorSum::identity(3);
        assert!(matches!(pauli_commutator(&a, &b), Err(Error::Dimension(_))));
        assert!(matches!(hs_inner(&a, &b), Err(Error::Dimension(_))));
    }

    #[test]
    fn hs_inner_orthonormal() {
        let x = PauliOperatorSum::from_term(PauliString::single(3, 0, Pauli::X), 1.0);
        let z = PauliOperatorSum::from_term(PauliString::single(3, 0, Pauli::Z), 1.0);
        assert_eq!(hs_inner(&x, &x).unwrap(), 1.0);
        assert_eq!(hs_inner(&x, &z).unwrap(), 0.0);
    }

    #[test]
    fn hs_inner_rejects_non_hermitian() {
        let x = PauliOperatorSum::from_term(PauliString::single(1, 0, Pauli::X), 1.0);
        let ix = x.scaled(c(0.0, 1.0));
        assert!(matches!(hs_inner(&ix, &x), Err(Error::Contract(_))));
    }

    #[test]
    fn materialize_identity_and_z() {
        let id = PauliOperatorSum::identity(3).to_dense().unwrap();
        assert_eq!(id, DMatrix::identity(8, 8));
        let z = PauliOperatorSum::from_term(PauliString::single(1, 0, Pauli::Z), 1.0)
            .to_dense()
            .unwrap();
        assert_eq!(z[(0, 0)], c(1.0, 0.0));
        assert_eq!(z[(1, 1)], c(-1.0, 0.0));
        assert_eq!(z[(0, 1)], c(0.0, 0.0));
    }

    #[test]
    fn materialize_y_matches_textbook() {
        let y = PauliOperatorSum::from_term(PauliString::single(1, 0, Pauli::Y), 1.0)
            .to_dense()
            .unwrap();
        // σ^y = [[0, -i], [i, 0]]
        assert_eq!(y[(0, 1)], c(0.0, -1.0));
        assert_eq!(y[(1, 0)], c(0.0, 1.0));
    }

    #[test]
    fn materialize_cap() {
        let big = PauliOperatorSum::identity(17);
        assert!(matches!(big.to_sparse(), Err(Error::Resource(_))));
    }

    #[test]
    fn sparse_apply_matches_dense() {
        let mut h = PauliOperatorSum::zero(3);
        h.add_real(PauliString::pair(3, 0, Pauli::Z, 1, Pauli::Z), 0.7);
        h.add_real(PauliString::single(3, 2, Pauli::X), -0.3);
        h.add_real(PauliString::pair(3, 1, Pauli::Y, 2, Pauli::X), 1.1);
        let sp = h.to_sparse().unwrap();
        let d = sp.to_dense().unwrap();
        let psi: Vec<Complex64> = (0..8).map(|k| c(k as f64 * 0.1, 1.0 - k as f64 * 0.2)).collect();
        let out = sp.apply(&psi);
        let v = nalgebra::DVector::from_vec(psi);
        let w = &d * v;
        for k in 0..8 {
            assert!((out[k] - w[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn display_strings() {
        let s = PauliString::pair(4, 1, Pauli::X, 3, Pauli::Y);
        assert_eq!(s.to_string(), "X1 Y3");
        assert_eq!(PauliString::identity(2).to_string(), "I");
    }
}
