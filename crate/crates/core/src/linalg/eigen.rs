use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(h: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = SymmetricEigen::new(h.clone());
    sort_pairs(eig.eigenvalues.as_slice(), &eig.eigenvectors)
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
pub fn eigh_real(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(h.clone());
    sort_pairs(eig.eigenvalues.as_slice(), &eig.eigenvectors)
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(h: &DMatrix<Complex64>) -> Vec<f64> {
    let mut v: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn sort_pairs<T: nalgebra::Scalar + Copy>(vals: &[f64], vecs: &DMatrix<T>) -> (Vec<f64>, DMatrix<T>) {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
    let sorted_vals = idx.iter().map(|&i| vals[i]).collect();
    let sorted_vecs = DMatrix::from_fn(vecs.nrows(), vecs.ncols(), |r, c| vecs[(r, idx[c])]);
    (sorted_vals, sorted_vecs)
}

/// `log|det(m)|` via partial-pivot LU; returns `-inf` for singular input.
pub fn log_abs_det(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let lu = m.clone().lu();
    let u = lu.u();
    (0..n).map(|i| u[(i, i)].norm().ln()).sum()
}
