use nalgebra::{DMatrix, DVector};

/// Solution of a symmetric positive semi-definite system.
#[derive(Debug, Clone)]
pub struct NormalSolution {
    pub x: DVector<f64>,
    /// Set when the Gram matrix was numerically singular and the
    /// minimal-norm solution was returned.
    pub rank_deficient: bool,
}

/// Solves `M x = b` for symmetric PSD `M`: Cholesky first, then the
/// minimal-norm pseudo-inverse solution if `M` is (numerically) singular.
pub fn solve_spd(m: &DMatrix<f64>, b: &DVector<f64>) -> NormalSolution {
    let n = m.nrows();
    if n == 0 {
        return NormalSolution {
            x: DVector::zeros(0),
            rank_deficient: false,
        };
    }
    let scale = m.diagonal().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min_diag = m.diagonal().iter().fold(f64::INFINITY, |a, v| a.min(*v));
    if scale > 0.0 && min_diag > 1e-12 * scale {
        if let Some(ch) = m.clone().cholesky() {
            let l = ch.l();
            let min_l = l.diagonal().iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
            // reject near-singular factorizations, fall through to the SVD
            if min_l * min_l > 1e-12 * scale {
                return NormalSolution {
                    x: ch.solve(b),
                    rank_deficient: false,
                };
            }
        }
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, v| a.max(*v));
    let cut = 1e-12 * smax.max(f64::MIN_POSITIVE);
    let u = svd.u.as_ref().expect("svd u");
    let vt = svd.v_t.as_ref().expect("svd v_t");
    let mut x = DVector::zeros(n);
    let mut deficient = false;
    for k in 0..svd.singular_values.len() {
        let s = svd.singular_values[k];
        if s <= cut {
            deficient = true;
            continue;
        }
        let coef = u.column(k).dot(b) / s;
        x += vt.row(k).transpose() * coef;
    }
    NormalSolution {
        x,
        rank_deficient: deficient,
    }
}
