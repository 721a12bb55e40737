//! Nearest-neighbour current ansatz for a tight-binding chain in a potential.
//!
//! With `A* = i Σ_b α_b (c†_{b+1}c_b − c†_b c_{b+1})` on an open chain, the
//! single-particle Frobenius norm of `G` is a quadratic form in `α` whose
//! normal equations are tridiagonal:
//!
//! ```text
//! −3J²(α_{b+1} − 2α_b + α_{b−1}) + (ΔV_b)² α_b = −J Δ(∂_λV)_b,   α_{−1} = α_{L−1} = 0
//! ```
//!
//! In the two boundary rows the next-nearest-neighbour contribution to `G`
//! is missing, so their diagonal is `5J² + ΔV²` instead of `6J² + ΔV²`.
//! This makes the tridiagonal solution the exact minimizer of the action.
//!
//! Far from the potential the bulk rows only see `α''`, so a uniform current
//! is a zero mode pinned by the walls alone. An optional window half-width
//! `W` adds `Σ_b μ_b α_b²` with `μ_b = 3J² σ((|x_b − c| − W)/w)`, a smooth
//! step `σ` of width `w = 2` sites around the centroid `c` of `(∂_λV)²`. The
//! current is then free within `W` of the drive and suppressed beyond it.

use crate::algebra::QuadraticFermionOperator;
use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;

use super::{AnsatzKind, GaugeAnsatz};

fn differences(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Edge width of the locality window, in sites.
const WINDOW_EDGE: f64 = 2.0;

/// Window penalty `μ_b` on each bond and, given `∂²_λV`, its λ-derivative.
fn locality_profile(dv: &[f64], d2v: Option<&[f64]>, j: f64, width: Option<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let nb = dv.len() - 1;
    let Some(w) = width else {
        return Ok((vec![0.0; nb], vec![0.0; nb]));
    };
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::Config(format!("gauge locality width must be positive, got {w}")));
    }
    let norm: f64 = dv.iter().map(|d| d * d).sum();
    if norm == 0.0 {
        return Ok((vec![0.0; nb], vec![0.0; nb]));
    }
    let c = dv.iter().enumerate().map(|(s, d)| s as f64 * d * d).sum::<f64>() / norm;
    let dc = d2v.map_or(0.0, |d2| {
        let m1: f64 = dv.iter().zip(d2).enumerate().map(|(s, (d, e))| 2.0 * s as f64 * d * e).sum();
        let m0: f64 = dv.iter().zip(d2).map(|(d, e)| 2.0 * d * e).sum();
        (m1 - c * m0) / norm
    });
    let scale = 3.0 * j * j;
    Ok((0..nb)
        .map(|b| {
            let x = b as f64 + 0.5 - c;
            let u = (x.abs() - w) / WINDOW_EDGE;
            let mu = scale * 0.5 * (1.0 + u.tanh());
            let dmu = -scale * 0.5 / u.cosh().powi(2) * x.signum() * dc / WINDOW_EDGE;
            (mu, dmu)
        })
        .unzip())
}

fn assemble(v: &[f64], j: f64, mu: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let dv = differences(v);
    let nb = dv.len();
    let j2 = j * j;
    let diag: Vec<f64> = (0..nb)
        .map(|b| {
            let edges = usize::from(b == 0) + usize::from(b + 1 == nb);
            (6.0 - edges as f64) * j2 + dv[b] * dv[b] + mu[b]
        })
        .collect();
    let off = vec![-3.0 * j2; nb.saturating_sub(1)];
    (diag, off, dv)
}

fn check_lengths(v: &[f64], dv: &[f64]) -> Result<()> {
    if v.len() != dv.len() {
        return Err(Error::Dimension(format!(
            "potential has {} sites, derivative {}",
            v.len(),
            dv.len()
        )));
    }
    if v.len() < 2 {
        return Err(Error::Dimension("fermion chain needs at least 2 sites".into()));
    }
    if v.iter().chain(dv).any(|x| !x.is_finite()) {
        return Err(Error::Contract("non-finite potential".into()));
    }
    Ok(())
}

fn solve_masked(diag: &[f64], off: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    // J = 0 decouples the bonds; zero rows with zero rhs are set to zero
    if off.iter().all(|&o| o == 0.0) {
        return diag
            .iter()
            .zip(rhs)
            .enumerate()
            .map(|(b, (&d, &r))| {
                if d == 0.0 {
                    if r == 0.0 {
                        Ok(0.0)
                    } else {
                        Err(Error::Singular(format!(
                            "bond {b}: vanishing hopping and potential step with nonzero drive"
                        )))
                    }
                } else {
                    Ok(r / d)
                }
            })
            .collect();
    }
    solve_tridiagonal(off, diag, off, rhs)
}

/// Optimal nearest-neighbour current coefficients for potential `v` with
/// λ-derivative `dv` and hopping `j`.
pub fn solve_fermion_ansatz(v: &[f64], dv: &[f64], j: f64) -> Result<GaugeAnsatz> {
    solve_fermion_ansatz_local(v, dv, j, None)
}

/// [`solve_fermion_ansatz`] with an optional locality window half-width (in sites).
pub fn solve_fermion_ansatz_local(v: &[f64], dv: &[f64], j: f64, width: Option<f64>) -> Result<GaugeAnsatz> {
    check_lengths(v, dv)?;
    let (mu, _) = locality_profile(dv, None, j, width)?;
    let (diag, off, _) = assemble(v, j, &mu);
    let rhs: Vec<f64> = differences(dv).iter().map(|d| -j * d).collect();
    let alpha = solve_masked(&diag, &off, &rhs)?;
    Ok(GaugeAnsatz::new(AnsatzKind::FermionNnCurrent, alpha))
}

/// Solves for `α` and `∂_λα` by differentiating the normal equations,
/// `M ∂_λα = ∂_λr − (∂_λM) α`, given the second derivative `d2v` of the potential.
pub fn solve_fermion_ansatz_with_derivative(
    v: &[f64],
    dv: &[f64],
    d2v: &[f64],
    j: f64,
) -> Result<(GaugeAnsatz, Vec<f64>)> {
    solve_fermion_ansatz_local_with_derivative(v, dv, d2v, j, None)
}

/// [`solve_fermion_ansatz_with_derivative`] with an optional locality window.
pub fn solve_fermion_ansatz_local_with_derivative(
    v: &[f64],
    dv: &[f64],
    d2v: &[f64],
    j: f64,
    width: Option<f64>,
) -> Result<(GaugeAnsatz, Vec<f64>)> {
    check_lengths(v, dv)?;
    if d2v.len() != v.len() {
        return Err(Error::Dimension("second derivative length mismatch".into()));
    }
    let (mu, dmu) = locality_profile(dv, Some(d2v), j, width)?;
    let (diag, off, step) = assemble(v, j, &mu);
    let dstep = differences(dv);
    let rhs: Vec<f64> = dstep.iter().map(|d| -j * d).collect();
    let alpha = solve_masked(&diag, &off, &rhs)?;
    let d2step = differences(d2v);
    let rhs2: Vec<f64> = (0..alpha.len())
        .map(|b| -j * d2step[b] - (2.0 * step[b] * dstep[b] + dmu[b]) * alpha[b])
        .collect();
    let dalpha = solve_masked(&diag, &off, &rhs2)?;
    Ok((GaugeAnsatz::new(AnsatzKind::FermionNnCurrent, alpha), dalpha))
}

/// Continuum solution for a linear potential `λx` with vanishing boundary
/// currents, sampled at `x_b = b + 1 − L/2` for bond `b` of an `l`-site chain, so the
/// ghost bonds on either side sit at `x = ∓L/2`.
pub fn linear_field_alpha_analytic(lambda: f64, j: f64, l: usize) -> Result<GaugeAnsatz> {
    if lambda == 0.0 {
        return Err(Error::Degenerate("linear field with λ = 0".into()));
    }
    if l < 2 {
        return Err(Error::Dimension("need at least 2 sites".into()));
    }
    let alpha = (0..l - 1)
        .map(|b| {
            let x = b as f64 + 1.0 - l as f64 / 2.0;
            linear_field_alpha_at(lambda, j, l as f64, x)
        })
        .collect();
    Ok(GaugeAnsatz::new(AnsatzKind::FermionNnCurrent, alpha))
}

/// `α(x) = −(J/λ²)(1 − cosh(κx)/cosh(κL/2))`, `κ = λ/(√3 J)`, for `x ∈ [−L/2, L/2]`.
pub fn linear_field_alpha_at(lambda: f64, j: f64, length: f64, x: f64) -> f64 {
    let kappa = (lambda / (3f64.sqrt() * j)).abs();
    // cosh(κx)/cosh(κL/2) without overflow
    let half = kappa * length / 2.0;
    let ratio = ((kappa * x.abs() - half).exp() * (1.0 + (-2.0 * kappa * x.abs()).exp()))
        / (1.0 + (-2.0 * half).exp());
    -(j / (lambda * lambda)) * (1.0 - ratio)
}

/// `G = ∂_λh + i[a, h]` for the single-particle matrices of the bare chain
/// and the current ansatz `alpha`.
pub fn fermion_g(
    h0: &QuadraticFermionOperator,
    dh0: &QuadraticFermionOperator,
    alpha: &[f64],
) -> Result<QuadraticFermionOperator> {
    let a = QuadraticFermionOperator::nn_current(alpha);
    let com = crate::algebra::quadratic_commutator(&a, h0)?;
    dh0.axpy(num_complex::Complex64::new(0.0, 1.0), &com)
}
