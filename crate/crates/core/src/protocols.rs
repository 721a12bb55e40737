//! Drive schedules and counter-diabatic Hamiltonian payloads.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::Operator;
use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RampShape {
    /// `λ₀ + (λ_f − λ₀) sin²((π/2) sin²(πt/2τ))`.
    SineSquared,
    /// Natural cubic spline through `(t, λ)` samples spanning `[0, τ]`.
    Custom { times: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RampSchedule {
    pub lambda0: f64,
    pub lambdaf: f64,
    pub tau: f64,
    pub shape: RampShape,
}

/// `λ(t)` with its first two time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampPoint {
    pub lambda: f64,
    pub rate: f64,
    pub accel: f64,
}

impl RampSchedule {
    pub fn sine_squared(lambda0: f64, lambdaf: f64, tau: f64) -> Self {
        Self {
            lambda0,
            lambdaf,
            tau,
            shape: RampShape::SineSquared,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!("ramp duration must be positive, got {}", self.tau)));
        }
        if !self.lambda0.is_finite() || !self.lambdaf.is_finite() {
            return Err(Error::Config("ramp endpoints must be finite".into()));
        }
        if let RampShape::Custom { times, values } = &self.shape {
            if times.len() != values.len() || times.len() < 2 {
                return Err(Error::Config("custom ramp needs at least two (t, λ) samples".into()));
            }
            if times.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::Config("custom ramp times must increase strictly".into()));
            }
            let tol = 1e-12 * self.tau;
            if (times[0]).abs() > tol || (times[times.len() - 1] - self.tau).abs() > tol {
                return Err(Error::Config("custom ramp samples must span [0, τ]".into()));
            }
        }
        Ok(())
    }

    /// True when `λ̇` and `λ̈` vanish at both ends.
    pub fn is_endpoint_flat(&self) -> bool {
        match self.shape {
            RampShape::SineSquared => true,
            RampShape::Custom { .. } => [0.0, self.tau].iter().all(|&t| {
                ramp_value(t, self)
                    .map(|p| p.rate.abs() < 1e-12 && p.accel.abs() < 1e-12)
                    .unwrap_or(false)
            }),
        }
    }

    /// Peak `|λ̇|` of the sine-squared shape, `|Δλ| π² / (4τ)`.
    pub fn peak_rate(&self) -> f64 {
        match self.shape {
            RampShape::SineSquared => (self.lambdaf - self.lambda0).abs() * PI * PI / (4.0 * self.tau),
            RampShape::Custom { .. } => (0..=256)
                .map(|k| ramp_value(self.tau * k as f64 / 256.0, self).map(|p| p.rate.abs()).unwrap_or(0.0))
                .fold(0.0, f64::max),
        }
    }
}

/// Evaluates the schedule and its analytic derivatives at `t ∈ [0, τ]`.
pub fn ramp_value(t: f64, s: &RampSchedule) -> Result<RampPoint> {
    let slack = 1e-12 * s.tau;
    if !(t >= -slack && t <= s.tau + slack) {
        return Err(Error::Range(format!("t = {t} outside [0, {}]", s.tau)));
    }
    let t = t.clamp(0.0, s.tau);
    match &s.shape {
        RampShape::SineSquared => {
            let d = s.lambdaf - s.lambda0;
            let w = PI / (2.0 * s.tau);
            let u = w * t;
            let sq = u.sin().powi(2);
            let sq1 = (2.0 * u).sin() * w;
            let sq2 = 2.0 * (2.0 * u).cos() * w * w;
            let phi = 0.5 * PI * sq;
            let phi1 = 0.5 * PI * sq1;
            let phi2 = 0.5 * PI * sq2;
            Ok(RampPoint {
                lambda: s.lambda0 + d * phi.sin().powi(2),
                rate: d * (2.0 * phi).sin() * phi1,
                accel: d * (2.0 * (2.0 * phi).cos() * phi1 * phi1 + (2.0 * phi).sin() * phi2),
            })
        }
        RampShape::Custom { times, values } => spline_eval(times, values, t),
    }
}

fn spline_eval(x: &[f64], y: &[f64], t: f64) -> Result<RampPoint> {
    let n = x.len();
    let m = spline_moments(x, y)?;
    let k = match x.partition_point(|&v| v <= t) {
        0 => 0,
        p if p >= n => n - 2,
        p => p - 1,
    };
    let h = x[k + 1] - x[k];
    let a = (x[k + 1] - t) / h;
    let b = (t - x[k]) / h;
    let lambda = a * y[k] + b * y[k + 1] + ((a * a * a - a) * m[k] + (b * b * b - b) * m[k + 1]) * h * h / 6.0;
    let rate = (y[k + 1] - y[k]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m[k] + (3.0 * b * b - 1.0) / 6.0 * h * m[k + 1];
    let accel = a * m[k] + b * m[k + 1];
    Ok(RampPoint { lambda, rate, accel })
}

/// Second-derivative values of the natural cubic spline.
fn spline_moments(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if n < 3 {
        return Ok(vec![0.0; n]);
    }
    let mut sub = Vec::with_capacity(n - 2);
    let mut diag = Vec::with_capacity(n - 2);
    let mut sup = Vec::with_capacity(n - 2);
    let mut rhs = Vec::with_capacity(n - 2);
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        sub.push(h0 / 6.0);
        diag.push((h0 + h1) / 3.0);
        sup.push(h1 / 6.0);
        rhs.push((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    let inner = solve_tridiagonal(&sub[1..], &diag, &sup[..sup.len() - 1], &rhs)?;
    let mut m = vec![0.0; n];
    m[1..n - 1].copy_from_slice(&inner);
    Ok(m)
}

/// Which Hamiltonian drives the evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CdForm {
    #[default]
    Bare,
    ImaginaryCd,
    RealCd,
}

/// `H₀ + λ̇ A*`.
pub fn cd_imaginary(h0: &Operator, ansatz: &Operator, rate: f64) -> Result<Operator> {
    if !ansatz.is_hermitian() {
        return Err(Error::Contract("gauge operator is not Hermitian".into()));
    }
    h0.axpy(Complex64::new(rate, 0.0), ansatz)
}

/// Real tight-binding payload gauge-equivalent to `H₀ + λ̇A*`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealFermionPayload {
    /// `J_b` on bond `(b, b+1)`.
    pub hopping: Vec<f64>,
    /// `U_s` on site `s`.
    pub potential: Vec<f64>,
}

/// Peierls-transformed CD Hamiltonian:
/// `J_b = J √(1 + (λ̇α_b/J)²)` and `U_s = V_s − Σ_{b<s} J(λ̈α_b + λ̇²∂_λα_b)/(J² + (λ̇α_b)²)`,
/// the sum running over the bonds to the left of site `s`.
pub fn fermion_real_cd(
    j: f64,
    v: &[f64],
    alpha: &[f64],
    dalpha: &[f64],
    rate: f64,
    accel: f64,
) -> Result<RealFermionPayload> {
    let l = v.len();
    if alpha.len() + 1 != l || dalpha.len() != alpha.len() {
        return Err(Error::Dimension(format!(
            "{} sites need {} bond coefficients, got α {} and ∂α {}",
            l,
            l.saturating_sub(1),
            alpha.len(),
            dalpha.len()
        )));
    }
    let hopping = alpha.iter().map(|&a| j.hypot(rate * a)).collect();
    let mut potential = Vec::with_capacity(l);
    let mut phase_rate = 0.0;
    potential.push(v[0]);
    for b in 0..alpha.len() {
        let den = j * j + (rate * alpha[b]).powi(2);
        if den > 0.0 {
            phase_rate += j * (accel * alpha[b] + rate * rate * dalpha[b]) / den;
        }
        potential.push(v[b + 1] - phase_rate);
    }
    Ok(RealFermionPayload { hopping, potential })
}

/// `λ_CD(t)` from a linear-field ramp, together with the uniform hopping
/// factor `√(1 + μ̇²)` that the bulk real-CD form divides out.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFieldCdSchedule {
    pub schedule: RampSchedule,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFieldCdPoint {
    pub lambda: f64,
    pub lambda_cd: f64,
    pub hopping_scale: f64,
}

/// `λ_CD = λ(1 − μμ̈/(1 + μ̇²))/√(1 + μ̇²)` with `μ = 1/λ`.
pub fn linear_field_cd_schedule(s: &RampSchedule) -> Result<LinearFieldCdSchedule> {
    s.validate()?;
    let crosses = match &s.shape {
        RampShape::SineSquared => s.lambda0 * s.lambdaf <= 0.0,
        RampShape::Custom { values, .. } => {
            values.iter().any(|v| *v == 0.0) || values.windows(2).any(|w| w[0] * w[1] <= 0.0)
        }
    };
    if crosses {
        return Err(Error::Singular(format!(
            "linear-field schedule reaches λ = 0 between {} and {}",
            s.lambda0, s.lambdaf
        )));
    }
    Ok(LinearFieldCdSchedule { schedule: s.clone() })
}

impl LinearFieldCdSchedule {
    pub fn at(&self, t: f64) -> Result<LinearFieldCdPoint> {
        let p = ramp_value(t, &self.schedule)?;
        if p.lambda == 0.0 {
            return Err(Error::Singular(format!("λ(t) = 0 at t = {t}")));
        }
        let mu = 1.0 / p.lambda;
        let mu1 = -p.rate * mu * mu;
        let mu2 = -p.accel * mu * mu + 2.0 * p.rate * p.rate * mu * mu * mu;
        let q = 1.0 + mu1 * mu1;
        Ok(LinearFieldCdPoint {
            lambda: p.lambda,
            lambda_cd: p.lambda * (1.0 - mu * mu2 / q) / q.sqrt(),
            hopping_scale: q.sqrt(),
        })
    }
}

/// Evolution in the coupling: `i ∂_λ ψ = A*_λ ψ` over `[λ₀, λ_f]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuenchLimit {
    pub lambda0: f64,
    pub lambdaf: f64,
    /// `∫ ‖A*_λ‖ dλ` with the family's norm.
    pub effective_duration: f64,
    pub warning: Option<String>,
}

/// Builds the τ → 0 evolution problem for a gauge family. The integrand
/// `‖A*_λ‖` is sampled on a uniform grid; non-finite or sharply growing
/// endpoint values produce a divergence warning.
pub fn quench_limit_generator<F>(lambda0: f64, lambdaf: f64, family: F) -> Result<QuenchLimit>
where
    F: Fn(f64) -> Result<Operator>,
{
    if !lambda0.is_finite() || !lambdaf.is_finite() || lambda0 == lambdaf {
        return Err(Error::Config("quench limit needs distinct finite endpoints".into()));
    }
    const N: usize = 512;
    let h = (lambdaf - lambda0) / N as f64;
    let mut vals = Vec::with_capacity(N + 1);
    let mut bad = None;
    for k in 0..=N {
        let lam = lambda0 + h * k as f64;
        match family(lam) {
            Ok(op) => {
                let v = op.norm_sq().sqrt();
                if !v.is_finite() && bad.is_none() {
                    bad = Some(lam);
                }
                vals.push(v);
            }
            Err(e) => {
                bad.get_or_insert(lam);
                if !matches!(e, Error::Degenerate(_) | Error::Singular(_)) {
                    return Err(e);
                }
                vals.push(f64::INFINITY);
            }
        }
    }
    let simpson: f64 = (0..N / 2)
        .map(|k| vals[2 * k] + 4.0 * vals[2 * k + 1] + vals[2 * k + 2])
        .sum::<f64>()
        * h.abs()
        / 3.0;
    let mut sorted: Vec<f64> = vals.iter().copied().filter(|v| v.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    let median = sorted.get(sorted.len() / 2).copied().unwrap_or(0.0);
    let edge = vals[0].max(vals[N]);
    let warning = if let Some(lam) = bad {
        Some(format!("gauge norm is not finite at λ = {lam}; the quench-limit evolution is not integrable"))
    } else if median > 0.0 && edge > 1e4 * median {
        Some(format!(
            "gauge norm grows to {edge:.3e} at an endpoint (median {median:.3e}); effective duration diverges there"
        ))
    } else {
        None
    };
    Ok(QuenchLimit {
        lambda0,
        lambdaf,
        effective_duration: if bad.is_some() { f64::INFINITY } else { simpson },
        warning,
    })
}

/// Spin fields after the z-rotation that removes `Y σ^y`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedSpinPayload {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
}

/// `X̃ = √(X² + Y²)`, `Z̃ = Z − ½(XẎ − YẊ)/(X² + Y²)`.
pub fn spin_real_cd(x: &[f64], z: &[f64], y: &[f64], dx_dt: &[f64], dy_dt: &[f64]) -> Result<RotatedSpinPayload> {
    let l = x.len();
    if z.len() != l || y.len() != l || dx_dt.len() != l || dy_dt.len() != l {
        return Err(Error::Dimension("spin payload sequences differ in length".into()));
    }
    let mut xt = Vec::with_capacity(l);
    let mut zt = Vec::with_capacity(l);
    for s in 0..l {
        let r2 = x[s] * x[s] + y[s] * y[s];
        let num = x[s] * dy_dt[s] - y[s] * dx_dt[s];
        if r2 == 0.0 {
            if num != 0.0 || dy_dt[s] != 0.0 {
                return Err(Error::Singular(format!("X = Y = 0 at site {s} with a nonzero rotation rate")));
            }
            xt.push(0.0);
            zt.push(z[s]);
            continue;
        }
        xt.push(r2.sqrt());
        zt.push(z[s] - 0.5 * num / r2);
    }
    Ok(RotatedSpinPayload { x: xt, z: zt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::QuadraticFermionOperator;

    #[test]
    fn sine_squared_endpoints_and_midpoint() {
        let s = RampSchedule::sine_squared(0.3, 2.0, 7.0);
        let p0 = ramp_value(0.0, &s).unwrap();
        assert_eq!((p0.lambda, p0.rate, p0.accel), (0.3, 0.0, 0.0));
        let p1 = ramp_value(7.0, &s).unwrap();
        assert!((p1.lambda - 2.0).abs() < 1e-15 && p1.rate.abs() < 1e-14 && p1.accel.abs() < 1e-13);
        assert!((ramp_value(3.5, &s).unwrap().lambda - 1.15).abs() < 1e-14);
        assert!(matches!(ramp_value(7.1, &s), Err(Error::Range(_))));
        assert!(matches!(ramp_value(-0.1, &s), Err(Error::Range(_))));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = RampSchedule::sine_squared(-1.0, 3.0, 5.0);
        let h = 1e-3;
        // fourth-order central stencil
        let fd = |g: &dyn Fn(f64) -> f64, t: f64| (8.0 * (g(t + h) - g(t - h)) - (g(t + 2.0 * h) - g(t - 2.0 * h))) / (12.0 * h);
        for &t in &[0.4, 1.3, 2.5, 3.9, 4.6] {
            let p = ramp_value(t, &s).unwrap();
            let d1 = fd(&|x| ramp_value(x, &s).unwrap().lambda, t);
            let d2 = fd(&|x| ramp_value(x, &s).unwrap().rate, t);
            assert!((d1 - p.rate).abs() <= 1e-8 * p.rate.abs().max(1e-3), "{d1} {}", p.rate);
            assert!((d2 - p.accel).abs() <= 1e-8 * p.accel.abs().max(1e-3), "{d2} {}", p.accel);
        }
        assert!((s.peak_rate() - ramp_value(2.5, &s).unwrap().rate).abs() < 1e-12);
    }

    #[test]
    fn custom_spline_reproduces_cubic() {
        // natural spline is exact for a straight line
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 0.2).collect();
        let values: Vec<f64> = times.iter().map(|t| 1.0 + 0.5 * t).collect();
        let s = RampSchedule {
            lambda0: 1.0,
            lambdaf: 2.0,
            tau: 2.0,
            shape: RampShape::Custom { times, values },
        };
        s.validate().unwrap();
        let p = ramp_value(1.13, &s).unwrap();
        assert!((p.lambda - 1.565).abs() < 1e-14 && (p.rate - 0.5).abs() < 1e-13 && p.accel.abs() < 1e-12);
        assert!(!s.is_endpoint_flat());
    }

    #[test]
    fn imaginary_cd_limits() {
        let h0 = Operator::Quadratic(QuadraticFermionOperator::from_real(&nalgebra::DMatrix::from_element(3, 3, 1.0)).unwrap());
        let a = Operator::Quadratic(QuadraticFermionOperator::nn_current(&[0.2, -0.4]));
        assert_eq!(cd_imaginary(&h0, &a, 0.0).unwrap(), h0);
        let cd = cd_imaginary(&h0, &a, 2.0).unwrap();
        let m = cd.as_quadratic().unwrap().matrix();
        assert!((m[(1, 0)] - Complex64::new(1.0, 0.4)).norm() < 1e-15);
        assert!(cd.is_hermitian());
    }

    #[test]
    fn real_fermion_payload_identity_and_fast_limit() {
        let v = [0.1, 0.5, -0.2, 0.3];
        let p = fermion_real_cd(1.0, &v, &[0.3, 0.1, -0.2], &[0.5, 0.5, 0.5], 0.0, 0.0).unwrap();
        assert_eq!(p.hopping, vec![1.0; 3]);
        assert_eq!(p.potential, v.to_vec());
        let fast = fermion_real_cd(1.0, &v, &[0.3, 0.1, -0.2], &[0.0; 3], 1e4, 0.0).unwrap();
        assert!((fast.hopping[0] / 3e3 - 1.0).abs() < 1e-6);
        assert!(fermion_real_cd(1.0, &v, &[0.3], &[0.0], 1.0, 0.0).is_err());
    }

    #[test]
    fn linear_field_schedule() {
        let s = RampSchedule::sine_squared(0.1, 1.0, 5.0);
        let cd = linear_field_cd_schedule(&s).unwrap();
        let p0 = cd.at(0.0).unwrap();
        assert_eq!(p0.lambda_cd, p0.lambda);
        let samples: Vec<f64> = (0..=500).map(|k| cd.at(5.0 * k as f64 / 500.0).unwrap().lambda_cd).collect();
        let peak = samples.iter().copied().fold(f64::MIN, f64::max);
        let low = samples.iter().copied().fold(f64::MAX, f64::min);
        assert!(peak > 2.0, "pulse {peak}");
        assert!(low < 0.0, "undershoot {low}");
        let slow = linear_field_cd_schedule(&RampSchedule::sine_squared(0.1, 1.0, 500.0)).unwrap();
        let dev = (0..=1000)
            .map(|k| {
                let p = slow.at(500.0 * k as f64 / 1000.0).unwrap();
                (p.lambda_cd - p.lambda).abs()
            })
            .fold(0.0, f64::max);
        assert!(dev < 1e-2);
        assert!(matches!(
            linear_field_cd_schedule(&RampSchedule::sine_squared(-0.1, 1.0, 5.0)),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn quench_limit_duration_and_divergence() {
        let l = 8;
        let fam = |lam: f64| -> Result<Operator> {
            if lam == 0.0 {
                return Err(Error::Degenerate("λ = 0".into()));
            }
            let a = vec![-1.0 / (lam * lam); l - 1];
            Ok(Operator::Quadratic(QuadraticFermionOperator::nn_current(&a)))
        };
        let q = quench_limit_generator(0.5, 2.0, fam).unwrap();
        let exact = (2.0 * (l - 1) as f64).sqrt() * (1.0 / 0.5 - 1.0 / 2.0);
        assert!((q.effective_duration - exact).abs() < 1e-6 * exact);
        assert!(q.warning.is_none());
        let small = quench_limit_generator(1e-3, 2.0, fam).unwrap();
        assert!(small.warning.is_some());
        let zero = quench_limit_generator(0.0, 2.0, fam).unwrap();
        assert!(zero.warning.is_some() && zero.effective_duration.is_infinite());
    }

    #[test]
    fn spin_rotation_payload() {
        let p = spin_real_cd(&[0.8, 0.5], &[2.0, 1.0], &[0.0, 0.0], &[0.3, 0.1], &[0.0, 0.0]).unwrap();
        assert_eq!(p.x, vec![0.8, 0.5]);
        assert_eq!(p.z, vec![2.0, 1.0]);
        let r = spin_real_cd(&[3.0], &[0.0], &[4.0], &[0.0], &[1.0]).unwrap();
        assert!((r.x[0] - 5.0).abs() < 1e-15);
        assert!((r.z[0] + 0.5 * 3.0 / 25.0).abs() < 1e-15);
        assert!(matches!(spin_real_cd(&[0.0], &[0.0], &[0.0], &[0.0], &[1.0]), Err(Error::Singular(_))));
    }
}
