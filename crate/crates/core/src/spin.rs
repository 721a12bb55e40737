//! Many-body dynamics and golden-rule spectroscopy of the mixed-field Ising
//! chain.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{pauli_commutator, Pauli, PauliMatrix, PauliOperatorSum, PauliString};
use crate::error::{Error, Result};
use crate::fermion::{cf4_weights, gauss_nodes, Integrator};
use crate::gauge::{exact_gauge_oracle, solve_spin_single_site, solve_spin_two_site, spin_ansatz_operator, OracleOptions};
use crate::linalg::{dot, eigh, krylov_expm, lanczos_ground, norm, HermitianOperator, KrylovOptions};
use crate::model::SpinChainParams;
use crate::protocols::{ramp_value, spin_real_cd, CdForm, RampSchedule};

/// Largest chain used with dense diagonalization.
pub const MAX_DENSE_SITES: usize = 12;
/// Largest chain driven with the exact-oracle gauge.
pub const MAX_ORACLE_SPIN_SITES: usize = 10;

/// Normalized many-body state on `2^L` amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState {
    pub amplitudes: Vec<Complex64>,
}

impl SpinState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() {
            return Err(Error::Dimension(format!("{} amplitudes is not a power of two", amplitudes.len())));
        }
        let n = norm(&amplitudes);
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::Contract(format!("state norm {n} differs from 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis state; bit `j` of `index` set means site `j` is down.
    pub fn basis(sites: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::default(); 1 << sites];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &SpinState) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension("spin states of different dimension".into()));
        }
        Ok(dot(&self.amplitudes, &other.amplitudes).norm_sqr())
    }
}

/// `Σ_b J σ^z σ^z + Σ_j (Z_j σ^z_j + X_j σ^x_j)` plus an optional extra
/// `σ^x` field on one site.
pub fn build_spin_h(params: &SpinChainParams, extra_local: Option<(usize, f64)>) -> Result<PauliOperatorSum> {
    let mut h = params.hamiltonian()?;
    if let Some((site, field)) = extra_local {
        let l = params.sites();
        if site >= l {
            return Err(Error::Dimension(format!("site {site} outside a chain of {l}")));
        }
        h.add_real(PauliString::single(l, site, Pauli::X), field);
    }
    Ok(h)
}

/// Ground state with its residual; `warning` is set when the lowest gap
/// looks smaller than `1e-10`.
#[derive(Debug, Clone)]
pub struct SpinGround {
    pub energy: f64,
    pub state: SpinState,
    pub residual: f64,
    pub warning: Option<String>,
}

pub fn ground_state(h: &PauliOperatorSum) -> Result<SpinGround> {
    ground_state_of(&SpinMatrix::Sparse(h.to_sparse()?))
}

fn ground_state_of(m: &SpinMatrix) -> Result<SpinGround> {
    let g = lanczos_ground(m, 1e-10)?;
    let warning = (g.gap_estimate < 1e-10).then(|| {
        format!(
            "ground state may be degenerate (gap estimate {:.3e})",
            g.gap_estimate
        )
    });
    let mut v = g.vector;
    // fix the global phase on the largest amplitude
    let k = (0..v.len()).fold(0, |b, i| if v[i].norm() > v[b].norm() * (1.0 + 1e-12) { i } else { b });
    let ph = v[k].conj() / v[k].norm();
    v.iter_mut().for_each(|a| *a *= ph);
    Ok(SpinGround {
        energy: g.energy,
        state: SpinState { amplitudes: v },
        residual: g.residual,
        warning,
    })
}

/// `⟨ψ|H|ψ⟩`.
pub fn expectation(h: &PauliMatrix, psi: &SpinState) -> f64 {
    dot(&psi.amplitudes, &h.apply(&psi.amplitudes)).re
}

/// Symbolic Hamiltonian at one instant.
#[derive(Debug, Clone, PartialEq)]
pub enum SpinOp {
    Pauli(PauliOperatorSum),
    Dense(DMatrix<Complex64>),
}

impl SpinOp {
    fn lincomb(a: f64, x: &SpinOp, b: f64, y: &SpinOp) -> Result<SpinOp> {
        match (x, y) {
            (SpinOp::Pauli(p), SpinOp::Pauli(q)) => {
                Ok(SpinOp::Pauli(p.scaled_real(a).axpy(Complex64::new(b, 0.0), q)?))
            }
            _ => Ok(SpinOp::Dense(
                x.to_dense()? * Complex64::new(a, 0.0) + y.to_dense()? * Complex64::new(b, 0.0),
            )),
        }
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        match self {
            SpinOp::Pauli(p) => p.to_dense(),
            SpinOp::Dense(d) => Ok(d.clone()),
        }
    }

    pub fn materialize(&self) -> Result<SpinMatrix> {
        Ok(match self {
            SpinOp::Pauli(p) => SpinMatrix::Sparse(p.to_sparse()?),
            SpinOp::Dense(d) => SpinMatrix::Dense(d.clone()),
        })
    }
}

/// Matrix form consumed by the Krylov propagator.
#[derive(Debug, Clone)]
pub enum SpinMatrix {
    Sparse(PauliMatrix),
    Dense(DMatrix<Complex64>),
}

impl HermitianOperator for SpinMatrix {
    fn dim(&self) -> usize {
        match self {
            SpinMatrix::Sparse(m) => m.dim(),
            SpinMatrix::Dense(d) => d.nrows(),
        }
    }

    fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        match self {
            SpinMatrix::Sparse(m) => m.apply_into(x, out),
            SpinMatrix::Dense(d) => HermitianOperator::apply_into(d, x, out),
        }
    }
}

/// Source of the time-dependent many-body Hamiltonian.
pub trait SpinDrive: Sync {
    fn operator_at(&self, t: f64) -> Result<SpinOp>;
}

impl<F> SpinDrive for F
where
    F: Fn(f64) -> Result<SpinOp> + Sync,
{
    fn operator_at(&self, t: f64) -> Result<SpinOp> {
        self(t)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SpinEvolveOptions {
    pub dt: f64,
    pub integrator: Integrator,
    pub krylov: KrylovOptions,
    pub norm_tol: f64,
    pub max_halvings: u32,
}

impl SpinEvolveOptions {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            integrator: Integrator::Cf4,
            krylov: KrylovOptions::default(),
            norm_tol: 1e-9,
            max_halvings: 8,
        }
    }
}

fn spin_step<D: SpinDrive + ?Sized>(drive: &D, opts: &SpinEvolveOptions, t: f64, h: f64, psi: Vec<Complex64>) -> Result<Vec<Complex64>> {
    match opts.integrator {
        Integrator::Midpoint => {
            let m = drive.operator_at(t + 0.5 * h)?.materialize()?;
            krylov_expm(&m, &psi, h, opts.krylov)
        }
        Integrator::Cf4 => {
            let (t1, t2) = gauss_nodes(t, h);
            let (h1, h2) = (drive.operator_at(t1)?, drive.operator_at(t2)?);
            let mut out = psi;
            for [w1, w2] in cf4_weights() {
                let m = SpinOp::lincomb(w1, &h1, w2, &h2)?.materialize()?;
                out = krylov_expm(&m, &out, h, opts.krylov)?;
            }
            Ok(out)
        }
    }
}

/// Propagates `psi` from `t0` through the increasing `times`. Each segment
/// uses uniform substeps no larger than `dt`; a segment whose norm drifts
/// beyond `norm_tol` is redone with half the step.
pub fn evolve_state<D: SpinDrive + ?Sized>(
    psi: &SpinState,
    drive: &D,
    t0: f64,
    times: &[f64],
    opts: SpinEvolveOptions,
) -> Result<Vec<SpinState>> {
    let mut out = Vec::with_capacity(times.len());
    evolve_state_with(psi, drive, t0, times, opts, |_, s| {
        out.push(s.clone());
        Ok(())
    })?;
    Ok(out)
}

/// [`evolve_state`] handing each sampled state to `on_sample`.
pub fn evolve_state_with<D, F>(
    psi: &SpinState,
    drive: &D,
    t0: f64,
    times: &[f64],
    opts: SpinEvolveOptions,
    mut on_sample: F,
) -> Result<SpinState>
where
    D: SpinDrive + ?Sized,
    F: FnMut(usize, &SpinState) -> Result<()>,
{
    if !(opts.dt > 0.0) {
        return Err(Error::Config("time step must be positive".into()));
    }
    let mut cur = psi.amplitudes.clone();
    let mut t = t0;
    for (k, &target) in times.iter().enumerate() {
        if target < t {
            return Err(Error::Config(format!("sample times must not decrease ({target} < {t})")));
        }
        let span = target - t;
        let mut steps = ((span / opts.dt).ceil() as usize).max(usize::from(span > 0.0));
        let mut attempt = 0;
        loop {
            let h = if steps > 0 { span / steps as f64 } else { 0.0 };
            let mut trial = cur.clone();
            for k in 0..steps {
                trial = spin_step(drive, &opts, t + h * k as f64, h, trial)?;
            }
            let drift = (norm(&trial) - 1.0).abs();
            if drift <= opts.norm_tol {
                cur = trial;
                break;
            }
            attempt += 1;
            if attempt > opts.max_halvings {
                return Err(Error::Integrator(format!(
                    "norm drift {drift:.3e} at t = {target} after {} halvings",
                    opts.max_halvings
                )));
            }
            steps *= 2;
        }
        t = target;
        let state = SpinState { amplitudes: cur };
        on_sample(k, &state)?;
        cur = state.amplitudes;
    }
    Ok(SpinState { amplitudes: cur })
}

/// Straight-line coupling path `P(λ) = base + λ · slope`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinPath {
    pub base: SpinChainParams,
    pub slope: SpinChainParams,
}

impl SpinPath {
    /// `H₀ + λ σ^x_site`.
    pub fn local_flip(base: SpinChainParams, site: usize) -> Self {
        let mut slope = base.zeros_like();
        slope.x[site] = 1.0;
        Self { base, slope }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.slope.validate()?;
        if self.base.sites() != self.slope.sites() || self.base.bc != self.slope.bc {
            return Err(Error::Dimension("path base and slope describe different chains".into()));
        }
        Ok(())
    }

    pub fn at(&self, lambda: f64) -> SpinChainParams {
        self.base.axpy(lambda, &self.slope)
    }

    pub fn sites(&self) -> usize {
        self.base.sites()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpinAnsatz {
    SingleSite,
    #[default]
    TwoSite,
    ExactOracle,
}

/// Gauge potential `A*_λ` for a path.
pub fn spin_gauge_at(path: &SpinPath, ansatz: SpinAnsatz, lambda: f64) -> Result<SpinOp> {
    let p = path.at(lambda);
    match ansatz {
        SpinAnsatz::SingleSite => {
            let a = solve_spin_single_site(&p, &path.slope)?;
            Ok(SpinOp::Pauli(spin_ansatz_operator(&p, &a)?))
        }
        SpinAnsatz::TwoSite => {
            let a = solve_spin_two_site(&p, &path.slope)?;
            Ok(SpinOp::Pauli(spin_ansatz_operator(&p, &a)?))
        }
        SpinAnsatz::ExactOracle => {
            if p.sites() > MAX_ORACLE_SPIN_SITES {
                return Err(Error::Resource(format!(
                    "exact-oracle spin gauge limited to {MAX_ORACLE_SPIN_SITES} sites"
                )));
            }
            let h = p.hamiltonian()?.to_dense()?;
            let dh = path.slope.hamiltonian()?.to_dense()?;
            Ok(SpinOp::Dense(exact_gauge_oracle(&h, &dh, OracleOptions::default())?))
        }
    }
}

/// Ramp of a spin chain along a path, in one of the CD forms.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinScenario {
    pub path: SpinPath,
    pub schedule: RampSchedule,
    pub form: CdForm,
    pub ansatz: SpinAnsatz,
}

impl SpinScenario {
    pub fn validate(&self) -> Result<()> {
        self.path.validate()?;
        self.schedule.validate()?;
        if self.form == CdForm::RealCd {
            if self.ansatz != SpinAnsatz::SingleSite {
                return Err(Error::Config("the real spin CD form needs the single-site ansatz".into()));
            }
            if !self.schedule.is_endpoint_flat() {
                return Err(Error::Config("the real CD form needs a schedule with flat endpoints".into()));
            }
        }
        if self.ansatz == SpinAnsatz::ExactOracle && self.path.sites() > MAX_ORACLE_SPIN_SITES {
            return Err(Error::Resource(format!(
                "exact-oracle spin gauge limited to {MAX_ORACLE_SPIN_SITES} sites, got {}",
                self.path.sites()
            )));
        }
        Ok(())
    }

    pub fn ground_state(&self, lambda: f64) -> Result<SpinGround> {
        ground_state(&self.path.at(lambda).hamiltonian()?)
    }

    fn alpha_at(&self, lambda: f64) -> Result<Vec<f64>> {
        Ok(solve_spin_single_site(&self.path.at(lambda), &self.path.slope)?.alpha)
    }
}

impl SpinDrive for SpinScenario {
    fn operator_at(&self, t: f64) -> Result<SpinOp> {
        let r = ramp_value(t, &self.schedule)?;
        let p = self.path.at(r.lambda);
        match self.form {
            CdForm::Bare => Ok(SpinOp::Pauli(p.hamiltonian()?)),
            CdForm::ImaginaryCd => {
                let h0 = SpinOp::Pauli(p.hamiltonian()?);
                if r.rate == 0.0 {
                    return Ok(h0);
                }
                let a = spin_gauge_at(&self.path, self.ansatz, r.lambda)?;
                SpinOp::lincomb(1.0, &h0, r.rate, &a)
            }
            CdForm::RealCd => {
                let alpha = self.alpha_at(r.lambda)?;
                let dl = 1e-4 * (self.schedule.lambdaf - self.schedule.lambda0).abs();
                let (ap, am) = (self.alpha_at(r.lambda + dl)?, self.alpha_at(r.lambda - dl)?);
                let l = p.sites();
                let y: Vec<f64> = alpha.iter().map(|a| r.rate * a).collect();
                let dx: Vec<f64> = self.path.slope.x.iter().map(|s| r.rate * s).collect();
                let dy: Vec<f64> = (0..l)
                    .map(|s| r.accel * alpha[s] + r.rate * r.rate * (ap[s] - am[s]) / (2.0 * dl))
                    .collect();
                let payload = spin_real_cd(&p.x, &p.z, &y, &dx, &dy)?;
                let rotated = SpinChainParams {
                    j: p.j.clone(),
                    z: payload.z,
                    x: payload.x,
                    bc: p.bc,
                };
                Ok(SpinOp::Pauli(rotated.hamiltonian()?))
            }
        }
    }
}

/// Sites whose x field has changed sign between `λ₀` and `λ`. The real form
/// keeps `X̃ = √(X² + Y²) > 0`, so past a zero crossing its frame differs from
/// the lab frame by `σ^z` on those sites.
pub fn real_frame_flips(path: &SpinPath, lambda0: f64, lambda: f64) -> u64 {
    let (a, b) = (path.at(lambda0), path.at(lambda));
    (0..path.sites())
        .filter(|&s| a.x[s] * b.x[s] < 0.0)
        .fold(0u64, |m, s| m | (1 << s))
}

impl SpinState {
    /// Applies `∏ σ^z` over the sites in `mask`.
    pub fn with_z_flips(&self, mask: u64) -> SpinState {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(b, a)| if (b as u64 & mask).count_ones() % 2 == 1 { -a } else { *a })
            .collect();
        SpinState { amplitudes }
    }
}

/// Generator of the τ → 0 limit, `i ∂_s ψ = ±A*(λ₀ ± s) ψ` for
/// `s ∈ [0, |λ_f − λ₀|]`.
pub fn quench_limit_drive(path: &SpinPath, ansatz: SpinAnsatz, lambda0: f64, lambdaf: f64) -> impl SpinDrive + '_ {
    let sign = (lambdaf - lambda0).signum();
    move |s: f64| -> Result<SpinOp> {
        match spin_gauge_at(path, ansatz, lambda0 + sign * s)? {
            SpinOp::Pauli(p) => Ok(SpinOp::Pauli(p.scaled_real(sign))),
            SpinOp::Dense(d) => Ok(SpinOp::Dense(d * Complex64::new(sign, 0.0))),
        }
    }
}

/// Full eigen-decomposition of a small chain.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl Spectrum {
    pub fn new(h: &PauliOperatorSum) -> Result<Self> {
        if h.len() > MAX_DENSE_SITES {
            return Err(Error::Resource(format!(
                "dense spectrum limited to {MAX_DENSE_SITES} sites, got {}",
                h.len()
            )));
        }
        let (energies, vectors) = eigh(&h.to_dense()?);
        Ok(Self { energies, vectors })
    }

    /// `U† O U`.
    pub fn to_eigenbasis(&self, op: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        self.vectors.adjoint() * op * &self.vectors
    }

    pub fn state(&self, n: usize) -> SpinState {
        SpinState {
            amplitudes: self.vectors.column(n).iter().copied().collect(),
        }
    }

    /// Mean level spacing over the middle tenth of the spectrum.
    pub fn mid_spacing(&self) -> f64 {
        let d = self.energies.len();
        let (a, b) = (d * 9 / 20, (d * 11 / 20).max(d * 9 / 20 + 1).min(d - 1));
        if b <= a {
            return 0.0;
        }
        (self.energies[b] - self.energies[a]) / (b - a) as f64
    }
}

/// `G = ∂_λH + i[A*, H]` for a Pauli gauge.
pub fn generalized_force(h: &PauliOperatorSum, dh: &PauliOperatorSum, gauge: Option<&PauliOperatorSum>) -> Result<PauliOperatorSum> {
    match gauge {
        None => Ok(dh.clone()),
        Some(a) => dh.axpy(Complex64::new(0.0, 1.0), &pauli_commutator(a, h)?),
    }
}

/// `S ⟨n|C†C|n⟩` with `C = [H, G]`; `n` must be an eigenstate of `h`.
pub fn fluctuation_rate(n: &SpinState, h: &DMatrix<Complex64>, g: &DMatrix<Complex64>, s_ll: f64) -> Result<f64> {
    if h.nrows() != n.dim() || g.nrows() != n.dim() {
        return Err(Error::Dimension("state and operators differ in dimension".into()));
    }
    let v = DVector::from_column_slice(&n.amplitudes);
    let hv = h * &v;
    let e = v.dotc(&hv).re;
    let res = (&hv - &v * Complex64::new(e, 0.0)).norm();
    if res > 1e-8 {
        return Err(Error::Contract(format!("input is not an eigenstate (residual {res:.3e})")));
    }
    let c = h * g - g * h;
    Ok(s_ll * (c * v).norm_squared())
}

/// `S Σ_m (E_m − E_n)² |G_mn|²` for every eigenstate, with `G` in the
/// eigenbasis.
pub fn fluctuation_rates(spec: &Spectrum, g_eig: &DMatrix<Complex64>, s_ll: f64) -> Vec<f64> {
    let e = &spec.energies;
    (0..e.len())
        .into_par_iter()
        .map(|n| s_ll * (0..e.len()).map(|m| (e[m] - e[n]).powi(2) * g_eig[(m, n)].norm_sqr()).sum::<f64>())
        .collect()
}

/// White-noise coupling and the frequency grid of a transition spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub s_ll: f64,
    pub omega_grid: Vec<f64>,
    /// Gaussian width; `None` means 8 × the mid-spectrum level spacing.
    pub broadening: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSpectrum {
    pub gamma: Vec<f64>,
    pub broadening: f64,
    pub warning: Option<String>,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.s_ll >= 0.0 && self.s_ll.is_finite()) {
            return Err(Error::Config("noise power must be finite and nonnegative".into()));
        }
        if self.broadening.is_some_and(|b| !(b > 0.0)) {
            return Err(Error::Config("broadening must be positive".into()));
        }
        Ok(())
    }

    pub fn width(&self, spec: &Spectrum) -> f64 {
        self.broadening.unwrap_or_else(|| 8.0 * spec.mid_spacing())
    }
}

/// `Γ_n(ω) = S Σ_{m≠n} |G_mn|² δ_σ(E_m − E_n − ω)` with an area-normalized
/// Gaussian `δ_σ`.
pub fn transition_spectrum(spec: &Spectrum, n: usize, g_eig: &DMatrix<Complex64>, noise: &NoiseSpec) -> Result<TransitionSpectrum> {
    noise.validate()?;
    let d = spec.energies.len();
    if n >= d || g_eig.nrows() != d {
        return Err(Error::Dimension(format!("eigenstate {n} of a {d}-level spectrum")));
    }
    let sigma = noise.width(spec);
    if !(sigma > 0.0) {
        return Err(Error::Config("broadening resolved to zero".into()));
    }
    let spacing = spec.mid_spacing();
    let warning = (sigma < spacing)
        .then(|| format!("broadening {sigma:.3e} is below the level spacing {spacing:.3e}; output is not smooth"));
    let norm = noise.s_ll / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let lines: Vec<(f64, f64)> = (0..d)
        .filter(|&m| m != n)
        .map(|m| (spec.energies[m] - spec.energies[n], g_eig[(m, n)].norm_sqr()))
        .filter(|l| l.1 > 0.0)
        .collect();
    let gamma = noise
        .omega_grid
        .iter()
        .map(|&w| {
            norm * lines
                .iter()
                .map(|&(de, wt)| wt * (-0.5 * ((de - w) / sigma).powi(2)).exp())
                .sum::<f64>()
        })
        .collect();
    Ok(TransitionSpectrum {
        gamma,
        broadening: sigma,
        warning,
    })
}

/// Canonical inverse temperature matching an energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveBeta {
    pub beta: f64,
    /// The energy lies beyond `⟨H⟩` at `±β_max`; `beta` is clamped there.
    pub capped: bool,
}

fn thermal_mean(e: &[f64], beta: f64) -> (f64, f64) {
    let shift = if beta >= 0.0 { e[0] } else { e[e.len() - 1] };
    let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for &ek in e {
        let w = (-beta * (ek - shift)).exp();
        z += w;
        m1 += w * ek;
        m2 += w * ek * ek;
    }
    let mean = m1 / z;
    (mean, (m2 / z - mean * mean).max(0.0))
}

/// Solves `⟨H⟩_β = E` by safeguarded Newton iteration on `[−β_max, β_max]`
/// with `β_max = 10³ / width`; `spectrum` must be sorted ascending.
pub fn effective_beta(energy: f64, spectrum: &[f64]) -> Result<EffectiveBeta> {
    let (lo, hi) = match (spectrum.first(), spectrum.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        _ => return Err(Error::Dimension("need a nondegenerate spectrum".into())),
    };
    let width = hi - lo;
    if !(energy >= lo - 1e-12 * width && energy <= hi + 1e-12 * width) {
        return Err(Error::Range(format!("energy {energy} outside the spectrum [{lo}, {hi}]")));
    }
    let bmax = 1e3 / width;
    let (e_hot, _) = thermal_mean(spectrum, -bmax);
    let (e_cold, _) = thermal_mean(spectrum, bmax);
    if energy <= e_cold {
        return Ok(EffectiveBeta { beta: bmax, capped: true });
    }
    if energy >= e_hot {
        return Ok(EffectiveBeta { beta: -bmax, capped: true });
    }
    let (mut a, mut b) = (-bmax, bmax);
    let mut beta = 0.0;
    for _ in 0..200 {
        let (m, var) = thermal_mean(spectrum, beta);
        let f = m - energy;
        if f > 0.0 {
            a = beta;
        } else {
            b = beta;
        }
        let newton = if var > 0.0 { beta + f / var } else { f64::NAN };
        let next = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if (next - beta).abs() <= 1e-10 * next.abs().max(1.0 / width) {
            return Ok(EffectiveBeta { beta: next, capped: false });
        }
        beta = next;
    }
    Ok(EffectiveBeta { beta, capped: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Boundary;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single(x: f64, z: f64) -> PauliOperatorSum {
        let mut h = PauliOperatorSum::zero(1);
        h.add_real(PauliString::single(1, 0, Pauli::X), x);
        h.add_real(PauliString::single(1, 0, Pauli::Z), z);
        h
    }

    #[test]
    fn hamiltonian_examples() {
        let p = SpinChainParams::uniform(4, 0.0, 0.7, 0.3, Boundary::Open);
        let g = ground_state(&p.hamiltonian().unwrap()).unwrap();
        assert!((g.energy + 4.0 * (0.49f64 + 0.09).sqrt()).abs() < 1e-10);
        // product state: every reduced site is the single-spin ground state
        let one = Spectrum::new(&single(0.3, 0.7)).unwrap();
        let v0 = one.vectors.column(0);
        let mut prod = vec![Complex64::new(1.0, 0.0)];
        for _ in 0..4 {
            prod = prod.iter().flat_map(|a| v0.iter().map(move |b| a * b)).collect::<Vec<_>>();
        }
        // bit j of the index is site j; the Kronecker order above is symmetric for identical sites
        let prod = SpinState { amplitudes: prod };
        assert!((g.state.fidelity(&prod).unwrap() - 1.0).abs() < 1e-10);
        let l15 = build_spin_h(&SpinChainParams::uniform(15, 1.0, 2.0, 0.8, Boundary::Periodic), Some((0, -1.0))).unwrap();
        assert_eq!(l15.num_terms(), 45);
        assert!((l15.coeff(&PauliString::single(15, 0, Pauli::X)).re + 0.2).abs() < 1e-15);
        let d = SpinChainParams::uniform(5, 1.0, 2.0, 0.8, Boundary::Periodic).hamiltonian().unwrap().to_dense().unwrap();
        assert!((d.adjoint() - &d).norm() < 1e-14 && d.trace().norm() < 1e-12);
    }

    #[test]
    fn single_spin_and_dense_ground_energy() {
        let g = ground_state(&single(0.6, -0.8)).unwrap();
        assert!((g.energy + 1.0).abs() < 1e-12);
        let h = SpinChainParams::uniform(10, 1.0, 0.8, 0.9, Boundary::Periodic).hamiltonian().unwrap();
        let g = ground_state(&h).unwrap();
        let s = Spectrum::new(&h).unwrap();
        assert!((g.energy - s.energies[0]).abs() < 1e-10);
        assert!(g.residual < 1e-10 && g.warning.is_none());
    }

    #[test]
    fn stationary_state_fidelity() {
        let p = SpinChainParams::uniform(8, 1.0, 0.8, 0.9, Boundary::Open);
        let h = p.hamiltonian().unwrap();
        let g = ground_state(&h).unwrap();
        let drive = |_t: f64| Ok(SpinOp::Pauli(h.clone()));
        let out = evolve_state(&g.state, &drive, 0.0, &[5.0], SpinEvolveOptions::new(0.1)).unwrap();
        assert!((out[0].fidelity(&g.state).unwrap() - 1.0).abs() < 1e-9);
        assert!((out[0].norm() - 1.0).abs() < 1e-9);
    }

    fn anneal(l: usize, tau: f64, form: CdForm, ansatz: SpinAnsatz) -> SpinScenario {
        let base = SpinChainParams::uniform(l, 0.0, 0.02, 0.0, Boundary::Periodic);
        let slope = SpinChainParams::uniform(l, -1.0, 0.0, 2.0, Boundary::Periodic);
        SpinScenario {
            path: SpinPath { base, slope },
            schedule: RampSchedule::sine_squared(0.0, 1.0, tau),
            form,
            ansatz,
        }
    }

    #[test]
    fn real_and_imaginary_spin_cd_agree() {
        let mut fid = Vec::new();
        for form in [CdForm::ImaginaryCd, CdForm::RealCd] {
            let sc = anneal(6, 1.5, form, SpinAnsatz::SingleSite);
            let g0 = sc.ground_state(0.0).unwrap();
            let g1 = sc.ground_state(1.0).unwrap();
            let out = evolve_state(&g0.state, &sc, 0.0, &[1.5], SpinEvolveOptions::new(0.005)).unwrap();
            fid.push(out[0].fidelity(&g1.state).unwrap());
        }
        assert!((fid[0] - fid[1]).abs() < 1e-6, "{fid:?}");
    }

    #[test]
    fn real_form_matches_after_field_sign_change() {
        let base = SpinChainParams::uniform(6, 1.0, 2.0, 0.8, Boundary::Periodic);
        let path = SpinPath::local_flip(base, 0);
        let mut states = Vec::new();
        for form in [CdForm::ImaginaryCd, CdForm::RealCd] {
            let sc = SpinScenario {
                path: path.clone(),
                schedule: RampSchedule::sine_squared(0.0, -10.0, 0.5),
                form,
                ansatz: SpinAnsatz::SingleSite,
            };
            let g0 = sc.ground_state(0.0).unwrap();
            let out = evolve_state(&g0.state, &sc, 0.0, &[0.5], SpinEvolveOptions::new(0.002)).unwrap();
            states.push(out[0].clone());
        }
        let mask = real_frame_flips(&path, 0.0, -10.0);
        assert_eq!(mask, 1);
        let aligned = states[1].with_z_flips(mask);
        assert!((aligned.fidelity(&states[0]).unwrap() - 1.0).abs() < 1e-6);
        assert!(states[1].fidelity(&states[0]).unwrap() < 0.99);
    }

    #[test]
    fn exact_oracle_drive_is_transitionless() {
        let p = SpinChainParams {
            j: vec![1.0, 0.7, 1.2],
            z: vec![0.9, 0.8, 1.1, 0.6],
            x: vec![0.5, 0.9, 0.7, 1.0],
            bc: Boundary::Open,
        };
        let sc = SpinScenario {
            path: SpinPath::local_flip(p, 1),
            schedule: RampSchedule::sine_squared(0.0, -1.0, 0.3),
            form: CdForm::ImaginaryCd,
            ansatz: SpinAnsatz::ExactOracle,
        };
        let g0 = sc.ground_state(0.0).unwrap();
        let times: Vec<f64> = (1..=6).map(|k| 0.05 * k as f64).collect();
        let out = evolve_state(&g0.state, &sc, 0.0, &times, SpinEvolveOptions::new(0.002)).unwrap();
        for (t, s) in times.iter().zip(&out) {
            let lam = ramp_value(*t, &sc.schedule).unwrap().lambda;
            let f = s.fidelity(&sc.ground_state(lam).unwrap().state).unwrap();
            assert!(f > 1.0 - 1e-6, "t={t} F={f}");
        }
    }

    #[test]
    fn time_reversed_ramp_has_equal_fidelity() {
        let p = SpinChainParams::uniform(6, 1.0, 2.0, 0.8, Boundary::Periodic);
        let on = SpinScenario {
            path: SpinPath::local_flip(p, 0),
            schedule: RampSchedule::sine_squared(0.0, -3.0, 1.0),
            form: CdForm::Bare,
            ansatz: SpinAnsatz::TwoSite,
        };
        let mut off = on.clone();
        off.schedule = RampSchedule::sine_squared(-3.0, 0.0, 1.0);
        let (g0, g1) = (on.ground_state(0.0).unwrap(), on.ground_state(-3.0).unwrap());
        let opts = SpinEvolveOptions::new(0.01);
        let f_on = evolve_state(&g0.state, &on, 0.0, &[1.0], opts).unwrap()[0].fidelity(&g1.state).unwrap();
        let f_off = evolve_state(&g1.state, &off, 0.0, &[1.0], opts).unwrap()[0].fidelity(&g0.state).unwrap();
        assert!((f_on - f_off).abs() < 1e-8, "{f_on} {f_off}");
    }

    #[test]
    fn cf4_step_doubling() {
        let sc = anneal(6, 2.0, CdForm::ImaginaryCd, SpinAnsatz::TwoSite);
        let g0 = sc.ground_state(0.0).unwrap();
        let g1 = sc.ground_state(1.0).unwrap();
        let run = |dt| {
            evolve_state(&g0.state, &sc, 0.0, &[2.0], SpinEvolveOptions::new(dt)).unwrap()[0]
                .fidelity(&g1.state)
                .unwrap()
        };
        assert!((run(0.01) - run(0.005)).abs() < 1e-8);
    }

    #[test]
    fn rates_and_their_oracles() {
        let p = SpinChainParams {
            j: vec![1.0, 0.8, 1.1, 0.9],
            z: vec![0.8, 0.7, 0.9, 0.6, 0.75],
            x: vec![0.9, 1.0, 0.8, 0.85, 0.95],
            bc: Boundary::Open,
        };
        let h = p.hamiltonian().unwrap();
        let spec = Spectrum::new(&h).unwrap();
        let hd = h.to_dense().unwrap();
        let mut dp = p.zeros_like();
        dp.x[0] = 1.0;
        let dh = dp.hamiltonian().unwrap();
        let g = generalized_force(&h, &dh, None).unwrap().to_dense().unwrap();
        let rates = fluctuation_rates(&spec, &spec.to_eigenbasis(&g), 2.0);
        for n in [0, 7, 31] {
            let r = fluctuation_rate(&spec.state(n), &hd, &g, 2.0).unwrap();
            assert!((r - rates[n]).abs() < 1e-10 * r.max(1.0));
        }
        // commuting G and the exact-oracle G give zero rate
        let zero = fluctuation_rate(&spec.state(3), &hd, &hd, 1.0).unwrap();
        assert!(zero < 1e-20);
        let a = exact_gauge_oracle(&hd, &dh.to_dense().unwrap(), OracleOptions::default()).unwrap();
        let c = Complex64::new(0.0, 1.0);
        let ge = dh.to_dense().unwrap() + (&a * &hd - &hd * &a) * c;
        let orates = fluctuation_rates(&spec, &spec.to_eigenbasis(&ge), 1.0);
        assert!(orates.iter().all(|r| *r < 1e-16), "{:?}", orates.iter().cloned().fold(0.0, f64::max));
        assert!(matches!(
            fluctuation_rate(&SpinState::basis(5, 0), &hd, &g, 1.0),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn transition_spectrum_sum_rules() {
        // two-level system: lines at ±gap with weight |G01|²
        let spec = Spectrum::new(&single(0.0, 1.0)).unwrap();
        let g = single(1.0, 0.0).to_dense().unwrap();
        let ge = spec.to_eigenbasis(&g);
        let grid: Vec<f64> = (0..4001).map(|k| -4.0 + 0.002 * k as f64).collect();
        let noise = NoiseSpec {
            s_ll: 1.0,
            omega_grid: grid.clone(),
            broadening: Some(0.05),
        };
        let ts = transition_spectrum(&spec, 0, &ge, &noise).unwrap();
        let peak = grid.iter().zip(&ts.gamma).fold((0.0, 0.0), |b, (w, g)| if *g > b.1 { (*w, *g) } else { b });
        assert!((peak.0 - 2.0).abs() < 1e-9);
        let area: f64 = ts.gamma.iter().sum::<f64>() * 0.002;
        assert!((area - 1.0).abs() < 1e-6);
        let up = transition_spectrum(&spec, 1, &ge, &noise).unwrap();
        let peak = grid.iter().zip(&up.gamma).fold((0.0, 0.0), |b, (w, g)| if *g > b.1 { (*w, *g) } else { b });
        assert!((peak.0 + 2.0).abs() < 1e-9);
        // many-body: area equals the variance, second moment equals the rate
        let p = SpinChainParams::uniform(6, 1.0, 0.8, 0.9, Boundary::Open);
        let h = p.hamiltonian().unwrap();
        let spec = Spectrum::new(&h).unwrap();
        let mut dp = p.zeros_like();
        dp.x[0] = 1.0;
        let g = dp.hamiltonian().unwrap().to_dense().unwrap();
        let ge = spec.to_eigenbasis(&g);
        let rates = fluctuation_rates(&spec, &ge, 1.0);
        let dw = 0.005;
        let grid: Vec<f64> = (0..6001).map(|k| -15.0 + dw * k as f64).collect();
        let noise = NoiseSpec {
            s_ll: 1.0,
            omega_grid: grid.clone(),
            broadening: None,
        };
        for n in [0, 20, 40] {
            let ts = transition_spectrum(&spec, n, &ge, &noise).unwrap();
            let area: f64 = ts.gamma.iter().sum::<f64>() * dw;
            let var = (0..64).filter(|&m| m != n).map(|m| ge[(m, n)].norm_sqr()).sum::<f64>();
            assert!((area - var).abs() < 1e-6 * var.max(1.0));
            // Gaussian lines add σ² per unit weight to the second moment
            let m2: f64 = grid.iter().zip(&ts.gamma).map(|(w, g)| w * w * g).sum::<f64>() * dw;
            let s2 = ts.broadening * ts.broadening;
            assert!((m2 - s2 * var - rates[n]).abs() < 1e-6 * rates[n], "{m2} {}", rates[n]);
        }
    }

    #[test]
    fn effective_beta_examples() {
        let e = [-2.0, -1.0, 0.5, 1.0, 1.5];
        let mean = e.iter().sum::<f64>() / 5.0;
        let b = effective_beta(mean, &e).unwrap();
        assert!(b.beta.abs() < 1e-10 && !b.capped);
        let g = effective_beta(-2.0, &e).unwrap();
        assert!(g.capped && g.beta > 0.0);
        assert!(matches!(effective_beta(-3.0, &e), Err(Error::Range(_))));
        let target = thermal_mean(&e, 0.7).0;
        assert!((effective_beta(target, &e).unwrap().beta - 0.7).abs() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let mut s: Vec<f64> = (0..30).map(|_| rng.gen_range(-5.0..5.0)).collect();
            s.sort_by(f64::total_cmp);
            let mut prev = f64::INFINITY;
            for k in 1..20 {
                let en = s[0] + (s[29] - s[0]) * k as f64 / 20.0;
                let b = effective_beta(en, &s).unwrap().beta;
                assert!(b < prev);
                prev = b;
            }
        }
    }
}
