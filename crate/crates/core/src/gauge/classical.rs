//! Single-site gauge for a classical Heisenberg rotor chain with a local field
//! `X₀(λ) S₀^x + Z₀(λ) S₀^z`.

use crate::error::{Error, Result};

use super::{AnsatzKind, GaugeAnsatz};

/// `α = (Z₀X₀' − X₀Z₀') / (X₀² + Z₀² + (4/3) J²)`.
pub fn classical_rotor_alpha(x0: f64, z0: f64, dx0: f64, dz0: f64, j: f64) -> Result<GaugeAnsatz> {
    let den = x0 * x0 + z0 * z0 + 4.0 / 3.0 * j * j;
    if den == 0.0 || !den.is_finite() {
        return Err(Error::Degenerate("X₀ = Z₀ = J = 0".into()));
    }
    Ok(GaugeAnsatz::new(
        AnsatzKind::ClassicalSingleSite,
        vec![(z0 * dx0 - x0 * dz0) / den],
    ))
}

/// Sphere-averaged `‖G‖² = ⅓(X₀' − αZ₀)² + ⅓(Z₀' + αX₀)² + (4/9)J²α²`.
pub fn classical_rotor_norm_sq(x0: f64, z0: f64, dx0: f64, dz0: f64, j: f64, alpha: f64) -> f64 {
    (dx0 - alpha * z0).powi(2) / 3.0 + (dz0 + alpha * x0).powi(2) / 3.0 + 4.0 / 9.0 * j * j * alpha * alpha
}
