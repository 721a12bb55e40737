//! Chebyshev expansion of `exp(-i h t)` for tridiagonal Hermitian `h`.
//!
//! The expansion `e^{-ict} [J_0(rt) + 2 Σ_k (-i)^k J_k(rt) T_k((h-c)/r)]`
//! converges super-exponentially once `k > rt`, so truncating where the
//! Bessel coefficients drop below machine epsilon gives the propagator to
//! round-off accuracy.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::tridiag::TridiagHermitian;

/// Bessel functions `J_0(x) ..= J_kmax(x)` by Miller's backward recurrence.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    if x == 0.0 {
        let mut v = vec![0.0; kmax + 1];
        v[0] = 1.0;
        return v;
    }
    let ax = x.abs();
    let start = (kmax.max(ax.ceil() as usize) + 30 + (ax.sqrt() * 10.0) as usize) | 1;
    let mut vals = vec![0.0f64; start + 2];
    let mut jp1 = 0.0f64;
    let mut j = 1e-300f64;
    vals[start] = j;
    for k in (1..=start).rev() {
        let jm1 = 2.0 * k as f64 / ax * j - jp1;
        jp1 = j;
        j = jm1;
        vals[k - 1] = j;
        if j.abs() > 1e250 {
            for v in vals.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
            j *= 1e-250;
            jp1 *= 1e-250;
        }
    }
    // normalization: J_0 + 2 Σ J_{2k} = 1
    let mut norm = vals[0];
    let mut k = 2;
    while k <= start {
        norm += 2.0 * vals[k];
        k += 2;
    }
    let mut out: Vec<f64> = vals[..=kmax].iter().map(|v| v / norm).collect();
    if x < 0.0 {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// Applies `exp(-i h t)` to the columns of `x`.
pub fn expm_apply(h: &TridiagHermitian, t: f64, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (lo, hi) = h.spectral_bounds();
    let c = 0.5 * (hi + lo);
    let r = (0.5 * (hi - lo)).max(1e-12) * (1.0 + 1e-9);
    let z = r * t;
    let kmax = (z.abs() * 1.5 + 40.0) as usize;
    let bessel = bessel_j_sequence(z, kmax);
    let mut n_terms = kmax;
    for k in (z.abs() as usize + 1)..=kmax {
        if bessel[k].abs() < 1e-17 && (k + 1 > kmax || bessel[k + 1].abs() < 1e-17) {
            n_terms = k;
            break;
        }
    }
    let (a, b) = (1.0 / r, -c / r);
    let rows = x.nrows();
    let cols = x.ncols();
    let mut t_prev = x.clone();
    let mut t_cur = DMatrix::<Complex64>::zeros(rows, cols);
    h.affine_apply(a, b, x, &mut t_cur);
    let mut acc: DMatrix<Complex64> = x.map(|v| v * bessel[0]);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut phase = minus_i;
    acc.zip_apply(&t_cur, |s, v| *s += v * phase * (2.0 * bessel[1]));
    let mut t_next = DMatrix::<Complex64>::zeros(rows, cols);
    for bk in bessel.iter().take(n_terms).skip(2) {
        h.affine_apply(2.0 * a, 2.0 * b, &t_cur, &mut t_next);
        t_next -= &t_prev;
        phase *= minus_i;
        let w = phase * (2.0 * bk);
        acc.zip_apply(&t_next, |s, v| *s += v * w);
        std::mem::swap(&mut t_prev, &mut t_cur);
        std::mem::swap(&mut t_cur, &mut t_next);
    }
    let global = Complex64::from_polar(1.0, -c * t);
    acc.map(|v| v * global)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigen::eigh;

    #[test]
    fn bessel_known_values() {
        let j = bessel_j_sequence(1.0, 3);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j[1] - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((j[2] - 0.114_903_484_931_900_5).abs() < 1e-15);
        let j = bessel_j_sequence(25.0, 2);
        assert!((j[0] - 0.096_266_783_275_958_16).abs() < 1e-14);
        let j = bessel_j_sequence(-2.0, 1);
        assert!((j[1] + 0.576_724_807_756_873_4).abs() < 1e-15);
    }

    #[test]
    fn matches_eigendecomposition() {
        let n = 12;
        let diag: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() * 3.0).collect();
        let off: Vec<Complex64> = (0..n - 1)
            .map(|i| Complex64::new(-1.0, 0.3 * (i as f64).cos()))
            .collect();
        let h = TridiagHermitian::new(diag, off, Some(Complex64::new(0.2, -0.1))).unwrap();
        let dense = h.to_dense();
        let (vals, vecs) = eigh(&dense);
        for &t in &[0.01, 0.7, 5.0] {
            let x = DMatrix::from_fn(n, 3, |i, j| Complex64::new((i + j) as f64, i as f64 * 0.1));
            let got = expm_apply(&h, t, &x);
            let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                n,
                vals.iter().map(|e| Complex64::from_polar(1.0, -e * t)),
            ));
            let want = &vecs * phases * vecs.adjoint() * &x;
            assert!((got - want).norm() / x.norm() < 1e-13);
        }
    }
}
