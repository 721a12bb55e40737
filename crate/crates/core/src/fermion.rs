//! Noninteracting lattice fermions: potentials, Slater determinants and their
//! exact time evolution.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::QuadraticFermionOperator;
use crate::error::{Error, Result};
use crate::gauge::{exact_gauge_oracle, solve_fermion_ansatz_local, solve_fermion_ansatz_local_with_derivative, OracleOptions};
use crate::linalg::{eigh, eigh_real, expm_apply, log_abs_det, TridiagHermitian};
use crate::model::Boundary;
use crate::protocols::{fermion_real_cd, ramp_value, CdForm, RampSchedule};

/// Gap at the Fermi level below which the ground state is ambiguous.
pub const FERMI_GAP_TOL: f64 = 1e-12;
/// Largest chain handled with the exact-oracle gauge.
pub const MAX_ORACLE_SITES: usize = 64;

/// Site coordinates `x_s = s − L/2`, so the chain spans `[−L/2, L/2 − 1]`.
pub fn site_coords(l: usize) -> Vec<f64> {
    (0..l).map(|s| s as f64 - l as f64 / 2.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Potential {
    /// `λ x`.
    Linear,
    /// `λ / cosh²(x/ξ)`.
    EckartInsert { xi: f64 },
    /// `V₀ / cosh²((x − λ)/ξ)`; λ is the barrier position.
    EckartMove { v0: f64, xi: f64 },
}

/// Potential values with their first and second λ-derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSample {
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    pub d2v: Vec<f64>,
}

impl Potential {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Potential::Linear => Ok(()),
            Potential::EckartInsert { xi } if xi > 0.0 && xi.is_finite() => Ok(()),
            Potential::EckartMove { v0, xi } if xi > 0.0 && xi.is_finite() && v0 > 0.0 && v0.is_finite() => Ok(()),
            p => Err(Error::Config(format!("Eckart parameters must be positive: {p:?}"))),
        }
    }

    pub fn sample(&self, lambda: f64, x: &[f64]) -> PotentialSample {
        let n = x.len();
        let mut out = PotentialSample {
            v: Vec::with_capacity(n),
            dv: Vec::with_capacity(n),
            d2v: Vec::with_capacity(n),
        };
        for &xs in x {
            let (v, dv, d2v) = match *self {
                Potential::Linear => (lambda * xs, xs, 0.0),
                Potential::EckartInsert { xi } => {
                    let s2 = sech(xs / xi).powi(2);
                    (lambda * s2, s2, 0.0)
                }
                Potential::EckartMove { v0, xi } => {
                    let u = (xs - lambda) / xi;
                    let s2 = sech(u).powi(2);
                    let th = u.tanh();
                    (
                        v0 * s2,
                        v0 * 2.0 * s2 * th / xi,
                        v0 * (4.0 * s2 * th * th - 2.0 * s2 * s2) / (xi * xi),
                    )
                }
            };
            out.v.push(v);
            out.dv.push(dv);
            out.d2v.push(d2v);
        }
        out
    }
}

fn sech(u: f64) -> f64 {
    let e = (-u.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// Occupied orbitals as the columns of an `L × N` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaterState {
    pub orbitals: DMatrix<Complex64>,
}

impl SlaterState {
    pub fn new(orbitals: DMatrix<Complex64>) -> Result<Self> {
        if orbitals.ncols() > orbitals.nrows() {
            return Err(Error::Dimension(format!(
                "{} particles on {} sites",
                orbitals.ncols(),
                orbitals.nrows()
            )));
        }
        let s = Self { orbitals };
        let dev = s.gram_deviation();
        if dev > 1e-9 {
            return Err(Error::Contract(format!("orbitals not orthonormal (deviation {dev:.3e})")));
        }
        Ok(s)
    }

    pub fn sites(&self) -> usize {
        self.orbitals.nrows()
    }

    pub fn particles(&self) -> usize {
        self.orbitals.ncols()
    }

    /// `max |Φ†Φ − 1|`.
    pub fn gram_deviation(&self) -> f64 {
        let g = self.orbitals.adjoint() * &self.orbitals;
        let mut m = 0.0f64;
        for r in 0..g.nrows() {
            for c in 0..g.ncols() {
                let want = if r == c { 1.0 } else { 0.0 };
                m = m.max((g[(r, c)] - want).norm());
            }
        }
        m
    }
}

/// Real-hopping chain with an optional imaginary part on each bond:
/// `h[b+1, b] = −J_b + i y_b`, `h[s, s] = U_s`.
pub fn build_tridiag(hopping: &[f64], potential: &[f64], imag_hop: Option<&[f64]>, bc: Boundary) -> Result<TridiagHermitian> {
    let l = potential.len();
    let bonds = crate::model::bond_count(l, bc);
    if hopping.len() != bonds || imag_hop.is_some_and(|y| y.len() != bonds) {
        return Err(Error::Dimension(format!(
            "{l} sites with {bc:?} boundaries need {bonds} bonds, got {} hoppings",
            hopping.len()
        )));
    }
    let elem = |b: usize| Complex64::new(-hopping[b], imag_hop.map_or(0.0, |y| y[b]));
    let off = (0..l.saturating_sub(1)).map(elem).collect();
    let corner = (bonds == l && l > 2).then(|| elem(l - 1));
    TridiagHermitian::new(potential.to_vec(), off, corner)
}

/// Single-particle tight-binding matrix as a quadratic operator.
pub fn build_single_particle_h(
    hopping: &[f64],
    potential: &[f64],
    imag_hop: Option<&[f64]>,
    bc: Boundary,
) -> Result<QuadraticFermionOperator> {
    QuadraticFermionOperator::new(build_tridiag(hopping, potential, imag_hop, bc)?.to_dense())
}

/// Single-particle Hamiltonian in the form the integrator consumes.
#[derive(Debug, Clone, PartialEq)]
pub enum SpHamiltonian {
    Tridiag(TridiagHermitian),
    Dense(DMatrix<Complex64>),
}

impl SpHamiltonian {
    pub fn dim(&self) -> usize {
        match self {
            SpHamiltonian::Tridiag(t) => t.dim(),
            SpHamiltonian::Dense(d) => d.nrows(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match self {
            SpHamiltonian::Tridiag(t) => t.to_dense(),
            SpHamiltonian::Dense(d) => d.clone(),
        }
    }

    fn combine(a: f64, x: &SpHamiltonian, b: f64, y: &SpHamiltonian) -> SpHamiltonian {
        match (x, y) {
            (SpHamiltonian::Tridiag(p), SpHamiltonian::Tridiag(q)) => {
                SpHamiltonian::Tridiag(TridiagHermitian::combine(&[(a, p), (b, q)]))
            }
            _ => SpHamiltonian::Dense(x.to_dense() * Complex64::new(a, 0.0) + y.to_dense() * Complex64::new(b, 0.0)),
        }
    }

    fn scaled(&self, a: f64) -> SpHamiltonian {
        match self {
            SpHamiltonian::Tridiag(t) => SpHamiltonian::Tridiag(TridiagHermitian::combine(&[(a, t)])),
            SpHamiltonian::Dense(d) => SpHamiltonian::Dense(d * Complex64::new(a, 0.0)),
        }
    }

    /// `exp(−i h t) Φ`.
    pub fn propagate(&self, t: f64, phi: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        match self {
            SpHamiltonian::Tridiag(h) => expm_apply(h, t, phi),
            SpHamiltonian::Dense(h) => {
                let (e, u) = eigh(h);
                let mut w = u.adjoint() * phi;
                for (r, &er) in e.iter().enumerate() {
                    let ph = Complex64::from_polar(1.0, -er * t);
                    w.row_mut(r).iter_mut().for_each(|v| *v *= ph);
                }
                u * w
            }
        }
    }
}

/// Source of the time-dependent single-particle Hamiltonian.
pub trait SingleParticleDrive: Sync {
    fn hamiltonian_at(&self, t: f64) -> Result<SpHamiltonian>;
}

impl<F> SingleParticleDrive for F
where
    F: Fn(f64) -> Result<SpHamiltonian> + Sync,
{
    fn hamiltonian_at(&self, t: f64) -> Result<SpHamiltonian> {
        self(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Fourth-order commutator-free Magnus step (two exponentials at the
    /// Gauss nodes).
    #[default]
    Cf4,
    /// `exp(−i h(t + dt/2) dt)`.
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub dt: f64,
    pub integrator: Integrator,
    pub orthonormality_tol: f64,
    pub max_halvings: u32,
}

impl EvolveOptions {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            integrator: Integrator::Cf4,
            orthonormality_tol: 1e-8,
            max_halvings: 8,
        }
    }
}

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Weights of the two CF4 exponentials on `(H(t₁), H(t₂))`, right factor first.
pub(crate) fn cf4_weights() -> [[f64; 2]; 2] {
    let a1 = (3.0 - 2.0 * SQRT3) / 12.0;
    let a2 = (3.0 + 2.0 * SQRT3) / 12.0;
    [[a2, a1], [a1, a2]]
}

/// Gauss nodes `t + (1/2 ∓ √3/6) h`.
pub(crate) fn gauss_nodes(t: f64, h: f64) -> (f64, f64) {
    (t + (0.5 - SQRT3 / 6.0) * h, t + (0.5 + SQRT3 / 6.0) * h)
}

fn step<D: SingleParticleDrive + ?Sized>(
    drive: &D,
    integrator: Integrator,
    t: f64,
    h: f64,
    phi: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    match integrator {
        Integrator::Midpoint => Ok(drive.hamiltonian_at(t + 0.5 * h)?.propagate(h, phi)),
        Integrator::Cf4 => {
            let (t1, t2) = gauss_nodes(t, h);
            let (h1, h2) = (drive.hamiltonian_at(t1)?, drive.hamiltonian_at(t2)?);
            let mut out = phi.clone();
            for [w1, w2] in cf4_weights() {
                out = SpHamiltonian::combine(w1, &h1, w2, &h2).propagate(h, &out);
            }
            Ok(out)
        }
    }
}

/// Propagates `state` from `t0` through the increasing `times`, returning
/// the state at each. Each segment uses uniform substeps no larger than
/// `dt`; a segment whose orbitals lose orthonormality is redone with half
/// the step, up to `max_halvings` times.
pub fn evolve_slater<D: SingleParticleDrive + ?Sized>(
    state: &SlaterState,
    drive: &D,
    t0: f64,
    times: &[f64],
    opts: EvolveOptions,
) -> Result<Vec<SlaterState>> {
    let mut out = Vec::with_capacity(times.len());
    evolve_slater_with(state, drive, t0, times, opts, |_, s| {
        out.push(s.clone());
        Ok(())
    })?;
    Ok(out)
}

/// [`evolve_slater`] handing each sampled state to `on_sample` instead of
/// collecting them.
pub fn evolve_slater_with<D, F>(
    state: &SlaterState,
    drive: &D,
    t0: f64,
    times: &[f64],
    opts: EvolveOptions,
    mut on_sample: F,
) -> Result<SlaterState>
where
    D: SingleParticleDrive + ?Sized,
    F: FnMut(usize, &SlaterState) -> Result<()>,
{
    if !(opts.dt > 0.0) {
        return Err(Error::Config("time step must be positive".into()));
    }
    let mut phi = state.orbitals.clone();
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
            let mut trial = phi.clone();
            for k in 0..steps {
                trial = step(drive, opts.integrator, t + h * k as f64, h, &trial)?;
            }
            let s = SlaterState { orbitals: trial };
            let dev = s.gram_deviation();
            if dev <= opts.orthonormality_tol {
                phi = s.orbitals;
                break;
            }
            attempt += 1;
            if attempt > opts.max_halvings {
                return Err(Error::Integrator(format!(
                    "orthonormality drift {dev:.3e} at t = {target} after {} halvings",
                    opts.max_halvings
                )));
            }
            steps *= 2;
        }
        t = target;
        let state = SlaterState { orbitals: phi };
        on_sample(k, &state)?;
        phi = state.orbitals;
    }
    Ok(SlaterState { orbitals: phi })
}

/// Eigen-decomposition of a single-particle matrix, using the real solver
/// when the matrix is real.
pub fn single_particle_spectrum(h: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    if h.iter().all(|v| v.im == 0.0) {
        let (e, u) = eigh_real(&h.map(|v| v.re));
        (e, u.map(|v| Complex64::new(v, 0.0)))
    } else {
        eigh(h)
    }
}

/// Fixes the phase of each column: the largest-magnitude entry (first on
/// ties) is made real and positive.
fn canonical_phases(u: &mut DMatrix<Complex64>) {
    for mut col in u.column_iter_mut() {
        let mut best = 0;
        for (i, v) in col.iter().enumerate() {
            if v.norm() > col[best].norm() * (1.0 + 1e-12) {
                best = i;
            }
        }
        let p = col[best];
        if p.norm() > 0.0 {
            let ph = p.conj() / p.norm();
            col.iter_mut().for_each(|v| *v *= ph);
        }
    }
}

/// Ground state: the `n` lowest orbitals, with the eigenvalues of `h`.
pub fn ground_state_with_spectrum(h: &QuadraticFermionOperator, n: usize) -> Result<(SlaterState, Vec<f64>)> {
    let l = h.sites();
    if n > l {
        return Err(Error::Dimension(format!("{n} particles on {l} sites")));
    }
    let (e, mut u) = single_particle_spectrum(h.matrix());
    if n > 0 && n < l && e[n] - e[n - 1] < FERMI_GAP_TOL {
        return Err(Error::Degenerate(format!(
            "Fermi level degenerate: orbitals {} and {} differ by {:.3e}",
            n - 1,
            n,
            e[n] - e[n - 1]
        )));
    }
    canonical_phases(&mut u);
    let orbitals = u.columns(0, n).clone_owned();
    Ok((SlaterState { orbitals }, e))
}

pub fn ground_state_slater(h: &QuadraticFermionOperator, n: usize) -> Result<SlaterState> {
    ground_state_with_spectrum(h, n).map(|r| r.0)
}

fn check_pair(a: &SlaterState, b: &SlaterState) -> Result<()> {
    if a.sites() != b.sites() || a.particles() != b.particles() {
        return Err(Error::Dimension(format!(
            "Slater states of shape {}x{} and {}x{}",
            a.sites(),
            a.particles(),
            b.sites(),
            b.particles()
        )));
    }
    Ok(())
}

/// `ln |det(A†B)|²`; `−∞` for orthogonal states.
pub fn slater_log_fidelity(a: &SlaterState, b: &SlaterState) -> Result<f64> {
    check_pair(a, b)?;
    Ok(2.0 * log_abs_det(&(a.orbitals.adjoint() * &b.orbitals)))
}

/// `|det(A†B)|²`.
pub fn slater_fidelity(a: &SlaterState, b: &SlaterState) -> Result<f64> {
    Ok(slater_log_fidelity(a, b)?.exp().clamp(0.0, 1.0))
}

/// `Tr[Φ† h Φ] − Σ_{k<N} ε_k`.
pub fn excess_energy(state: &SlaterState, h: &QuadraticFermionOperator) -> Result<f64> {
    if state.sites() != h.sites() {
        return Err(Error::Dimension("state and Hamiltonian sizes differ".into()));
    }
    let e = single_particle_spectrum(h.matrix()).0;
    Ok(excess_energy_with_spectrum(state, h.matrix(), &e))
}

pub(crate) fn excess_energy_with_spectrum(state: &SlaterState, h: &DMatrix<Complex64>, e: &[f64]) -> f64 {
    let hp = h * &state.orbitals;
    let tr: f64 = state.orbitals.iter().zip(hp.iter()).map(|(a, b)| (a.conj() * b).re).sum();
    tr - e[..state.particles()].iter().sum::<f64>()
}

/// `n_j = Σ_k |Φ_{jk}|²`.
pub fn density_profile(state: &SlaterState) -> Vec<f64> {
    state.orbitals.row_iter().map(|r| r.iter().map(|v| v.norm_sqr()).sum()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FermionGauge {
    /// Variational nearest-neighbour currents.
    #[default]
    NnCurrent,
    /// Exact single-particle gauge from diagonalization (small chains).
    ExactOracle,
}

/// A chain of `l` sites with `n` fermions driven by a ramped potential.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionScenario {
    pub l: usize,
    pub n: usize,
    pub j: f64,
    pub potential: Potential,
    pub schedule: RampSchedule,
    pub form: CdForm,
    pub gauge: FermionGauge,
    pub bc: Boundary,
    /// Window half-width of the nearest-neighbour ansatz; `None` leaves the
    /// uniform-current zero mode pinned only by the walls.
    pub locality: Option<f64>,
}

impl FermionScenario {
    pub fn validate(&self) -> Result<()> {
        if self.l < 2 || self.n > self.l {
            return Err(Error::Config(format!("{} fermions on {} sites", self.n, self.l)));
        }
        if !(self.j.is_finite() && self.j != 0.0) {
            return Err(Error::Config("hopping J must be finite and nonzero".into()));
        }
        self.potential.validate()?;
        self.schedule.validate()?;
        if self.form != CdForm::Bare && self.bc == Boundary::Periodic {
            return Err(Error::Config("CD drives are defined for open chains".into()));
        }
        if self.gauge == FermionGauge::ExactOracle {
            if self.l > MAX_ORACLE_SITES {
                return Err(Error::Resource(format!(
                    "exact-oracle gauge limited to {MAX_ORACLE_SITES} sites, got {}",
                    self.l
                )));
            }
            if self.form == CdForm::RealCd {
                return Err(Error::Config("the real CD form needs the nearest-neighbour ansatz".into()));
            }
        }
        if self.form == CdForm::RealCd && !self.schedule.is_endpoint_flat() {
            return Err(Error::Config("the real CD form needs a schedule with flat endpoints".into()));
        }
        Ok(())
    }

    pub fn coords(&self) -> Vec<f64> {
        site_coords(self.l)
    }

    /// Bare `H₀(λ)`.
    pub fn bare_h(&self, lambda: f64) -> Result<TridiagHermitian> {
        let pot = self.potential.sample(lambda, &self.coords());
        let bonds = crate::model::bond_count(self.l, self.bc);
        build_tridiag(&vec![self.j; bonds], &pot.v, None, self.bc)
    }

    /// Ground state and single-particle spectrum of `H₀(λ)`.
    pub fn ground_state(&self, lambda: f64) -> Result<(SlaterState, Vec<f64>, DMatrix<Complex64>)> {
        let h = self.bare_h(lambda)?.to_dense();
        let (s, e) = ground_state_with_spectrum(&QuadraticFermionOperator::from_matrix_unchecked(h.clone()), self.n)?;
        Ok((s, e, h))
    }

    /// Variational α and ∂_λα at `λ`.
    pub fn gauge_coefficients(&self, lambda: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let pot = self.potential.sample(lambda, &self.coords());
        let (a, da) = solve_fermion_ansatz_local_with_derivative(&pot.v, &pot.dv, &pot.d2v, self.j, self.locality)?;
        Ok((a.alpha, da))
    }

    /// Exact single-particle gauge at `λ`.
    pub fn oracle_gauge(&self, lambda: f64) -> Result<DMatrix<Complex64>> {
        let pot = self.potential.sample(lambda, &self.coords());
        let h = self.bare_h(lambda)?.to_dense();
        let dh = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.l,
            pot.dv.iter().map(|&v| Complex64::new(v, 0.0)),
        ));
        exact_gauge_oracle(&h, &dh, OracleOptions::default())
    }
}

impl SingleParticleDrive for FermionScenario {
    fn hamiltonian_at(&self, t: f64) -> Result<SpHamiltonian> {
        let p = ramp_value(t, &self.schedule)?;
        match (self.form, self.gauge) {
            (CdForm::Bare, _) => Ok(SpHamiltonian::Tridiag(self.bare_h(p.lambda)?)),
            (CdForm::ImaginaryCd, FermionGauge::NnCurrent) => {
                let pot = self.potential.sample(p.lambda, &self.coords());
                let a = solve_fermion_ansatz_local(&pot.v, &pot.dv, self.j, self.locality)?;
                let y: Vec<f64> = a.alpha.iter().map(|x| p.rate * x).collect();
                Ok(SpHamiltonian::Tridiag(build_tridiag(
                    &vec![self.j; self.l - 1],
                    &pot.v,
                    Some(&y),
                    self.bc,
                )?))
            }
            (CdForm::ImaginaryCd, FermionGauge::ExactOracle) => {
                let h = self.bare_h(p.lambda)?.to_dense();
                let a = self.oracle_gauge(p.lambda)?;
                Ok(SpHamiltonian::Dense(h + a * Complex64::new(p.rate, 0.0)))
            }
            (CdForm::RealCd, _) => {
                let pot = self.potential.sample(p.lambda, &self.coords());
                let (a, da) = self.gauge_coefficients(p.lambda)?;
                let payload = fermion_real_cd(self.j, &pot.v, &a, &da, p.rate, p.accel)?;
                Ok(SpHamiltonian::Tridiag(build_tridiag(
                    &payload.hopping,
                    &payload.potential,
                    None,
                    self.bc,
                )?))
            }
        }
    }
}

impl FermionScenario {
    /// `A*_λ` as a single-particle matrix.
    pub fn gauge_h(&self, lambda: f64) -> Result<SpHamiltonian> {
        match self.gauge {
            FermionGauge::NnCurrent => {
                let pot = self.potential.sample(lambda, &self.coords());
                let a = solve_fermion_ansatz_local(&pot.v, &pot.dv, self.j, self.locality)?;
                Ok(SpHamiltonian::Tridiag(build_tridiag(
                    &vec![0.0; self.l - 1],
                    &vec![0.0; self.l],
                    Some(&a.alpha),
                    self.bc,
                )?))
            }
            FermionGauge::ExactOracle => Ok(SpHamiltonian::Dense(self.oracle_gauge(lambda)?)),
        }
    }
}

/// Generator of the τ → 0 limit, `i ∂_s Φ = ±A*(λ₀ ± s) Φ` for
/// `s ∈ [0, |λ_f − λ₀|]`.
pub fn quench_limit_drive(sc: &FermionScenario, lambda0: f64, lambdaf: f64) -> impl SingleParticleDrive + '_ {
    let sign = (lambdaf - lambda0).signum();
    move |s: f64| Ok(sc.gauge_h(lambda0 + sign * s)?.scaled(sign))
}

/// `Tr[Φ† h Φ] − Σ_{k<N} ε_k` for a tridiagonal `h` with known spectrum.
pub fn excess_energy_tridiag(state: &SlaterState, h: &TridiagHermitian, e: &[f64]) -> f64 {
    let hp = h.apply(&state.orbitals);
    let tr: f64 = state.orbitals.iter().zip(hp.iter()).map(|(a, b)| (a.conj() * b).re).sum();
    tr - e[..state.particles()].iter().sum::<f64>()
}

/// Rescales a drive by a constant, e.g. to flip the direction of time.
pub fn scaled_drive<D: SingleParticleDrive + ?Sized>(drive: &D, w: f64) -> impl Fn(f64) -> Result<SpHamiltonian> + Sync + '_ {
    move |t| Ok(drive.hamiltonian_at(t)?.scaled(w))
}
