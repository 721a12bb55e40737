//! Orchestration of scenario runs.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebra::{Operator, Pauli, PauliOperatorSum, PauliString, QuadraticFermionOperator};
use crate::error::{Error, Result};
use crate::fermion::{
    evolve_slater_with, excess_energy_tridiag, ground_state_with_spectrum, quench_limit_drive as fermion_quench_drive,
    slater_log_fidelity, density_profile, site_coords, EvolveOptions, FermionGauge, Integrator, FermionScenario, Potential,
    SlaterState,
};
use crate::gauge::{exact_gauge_oracle, solve_fermion_ansatz_local, OracleOptions};
use crate::linalg::eigvalsh;
use crate::model::SpinChainParams;
use crate::protocols::{linear_field_cd_schedule, quench_limit_generator, ramp_value, CdForm, RampSchedule};
use crate::spin::{
    effective_beta, evolve_state_with, expectation, fluctuation_rates, generalized_force, ground_state,
    quench_limit_drive as spin_quench_drive, real_frame_flips, spin_gauge_at, transition_spectrum, NoiseSpec, Spectrum, SpinAnsatz,
    SpinEvolveOptions, SpinGround, SpinOp, SpinPath, SpinScenario, SpinState,
};

use super::config::{Ansatz, CdMode, NoiseConfig, ScenarioConfig, ScenarioName, Variant};
use super::output::{plot_script, RunRecord, Table};

/// Extra work requested on top of the plain run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Brute-force cross-checks: step doubling of every final value and
    /// dense ground-state energies where affordable.
    pub oracle: bool,
}

/// A table together with the plot layout that renders it.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub table: Table,
    pub figure: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub config: ScenarioConfig,
    pub records: Vec<RunRecord>,
    pub outputs: Vec<Output>,
    pub warnings: Vec<String>,
}

impl RunResult {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.outputs.iter().map(|o| &o.table).find(|t| t.name == name)
    }

    /// Final-time record of a variant at duration `tau`.
    pub fn final_record(&self, label: &str, tau: f64) -> Option<&RunRecord> {
        self.records
            .iter()
            .filter(|r| r.variant == label && (r.tau == tau || r.tau == 0.0 && tau == 0.0))
            .last()
    }
}

impl RunResult {
    /// Writes `<stem>_<table>.csv` for every table, a plot script next to
    /// each figure table and `<stem>_config.json`. Everything is rendered
    /// first, so a schema error leaves the directory untouched.
    pub fn write(&self, dir: &Path, stem: &str, log_fidelity: bool) -> Result<Vec<PathBuf>> {
        let mut files: Vec<(PathBuf, String)> = Vec::new();
        for o in &self.outputs {
            let csv = format!("{stem}_{}.csv", o.table.name);
            if let Some(fig) = o.figure {
                let script = plot_script(&o.table, fig, &csv, log_fidelity)?;
                files.push((dir.join(format!("{stem}_{}.py", o.table.name)), script));
            }
            files.push((dir.join(csv), o.table.to_csv()));
        }
        files.push((dir.join(format!("{stem}_config.json")), self.config.to_json() + "\n"));
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let mut written = Vec::new();
        for (path, text) in files {
            if let Err(e) = fs::write(&path, text) {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(Error::Io(format!("{}: {e}", path.display())));
            }
            written.push(path);
        }
        Ok(written)
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunResult> {
    run_scenario_with(cfg, RunOptions::default())
}

pub fn run_scenario_with(cfg: &ScenarioConfig, opts: RunOptions) -> Result<RunResult> {
    cfg.validate()?;
    if cfg.name.is_noise() {
        return run_noise(cfg);
    }
    let mut res = if cfg.name.is_fermion() {
        run_dynamics(cfg, &FermionSystem::new(cfg)?, opts)?
    } else {
        run_dynamics(cfg, &SpinSystem::new(cfg)?, opts)?
    };
    res.config = cfg.clone();
    Ok(res)
}

/// Observables of one sampled state.
#[derive(Debug, Clone, PartialEq)]
struct Sample {
    ln_f2: f64,
    excess: f64,
    density: Option<Vec<f64>>,
}

/// What the generic driver needs from a fermion or spin model.
trait System: Sync {
    type State: Clone + Send + Sync;
    type Reference: Send + Sync;

    fn reference(&self, lambda: f64) -> Result<Self::Reference>;
    fn initial(&self, r: &Self::Reference) -> Self::State;
    fn observe(&self, s: &Self::State, r: &Self::Reference, density: bool) -> Result<Sample>;
    /// Evolves along `schedule` in the given form, calling back at `times`.
    fn evolve(
        &self,
        v: &Variant,
        schedule: &RampSchedule,
        psi: &Self::State,
        times: &[f64],
        dt: f64,
        on: &mut dyn FnMut(usize, &Self::State) -> Result<()>,
    ) -> Result<()>;
    /// `τ → 0` limit of a CD variant.
    fn quench(&self, v: &Variant, psi: &Self::State, dt: f64) -> Result<Self::State>;
    /// Divergence warning of the quench-limit generator, if any.
    fn quench_warning(&self, v: &Variant) -> Result<Option<String>>;
    /// Disagreement of the reference energy with a brute-force oracle.
    fn oracle_energy_gap(&self, _lambda: f64) -> Result<Option<f64>> {
        Ok(None)
    }
}

fn form_of(mode: CdMode) -> CdForm {
    match mode {
        CdMode::None => CdForm::Bare,
        CdMode::Imaginary | CdMode::QuenchLimit => CdForm::ImaginaryCd,
        CdMode::Real => CdForm::RealCd,
    }
}

struct FermionSystem {
    base: FermionScenario,
    integrator: Integrator,
}

impl FermionSystem {
    fn new(cfg: &ScenarioConfig) -> Result<Self> {
        let potential = match cfg.name {
            ScenarioName::LinearField => Potential::Linear,
            ScenarioName::EckartInsert => Potential::EckartInsert { xi: cfg.field(cfg.xi, "xi")? },
            ScenarioName::EckartMove => Potential::EckartMove {
                v0: cfg.field(cfg.v0, "v0")?,
                xi: cfg.field(cfg.xi, "xi")?,
            },
            _ => return Err(Error::Config("not a fermion scenario".into())),
        };
        Ok(Self {
            base: FermionScenario {
                l: cfg.l,
                n: cfg.particles(),
                j: cfg.j,
                potential,
                schedule: cfg.schedule()?.clone(),
                form: CdForm::Bare,
                gauge: FermionGauge::NnCurrent,
                bc: cfg.boundary(),
                locality: cfg.gauge_locality,
            },
            integrator: cfg.integrator,
        })
    }

    fn variant(&self, v: &Variant, schedule: &RampSchedule) -> FermionScenario {
        FermionScenario {
            schedule: schedule.clone(),
            form: form_of(v.cd_mode),
            gauge: if v.ansatz == Some(Ansatz::ExactOracle) {
                FermionGauge::ExactOracle
            } else {
                FermionGauge::NnCurrent
            },
            ..self.base.clone()
        }
    }
}

struct FermionReference {
    state: SlaterState,
    energies: Vec<f64>,
    h: crate::linalg::TridiagHermitian,
}

impl System for FermionSystem {
    type State = SlaterState;
    type Reference = FermionReference;

    fn reference(&self, lambda: f64) -> Result<FermionReference> {
        let h = self.base.bare_h(lambda)?;
        let (state, energies) = ground_state_with_spectrum(&QuadraticFermionOperator::from_matrix_unchecked(h.to_dense()), self.base.n)?;
        Ok(FermionReference { state, energies, h })
    }

    fn initial(&self, r: &FermionReference) -> SlaterState {
        r.state.clone()
    }

    fn observe(&self, s: &SlaterState, r: &FermionReference, density: bool) -> Result<Sample> {
        Ok(Sample {
            ln_f2: slater_log_fidelity(&r.state, s)?,
            excess: excess_energy_tridiag(s, &r.h, &r.energies),
            density: density.then(|| density_profile(s)),
        })
    }

    fn evolve(
        &self,
        v: &Variant,
        schedule: &RampSchedule,
        psi: &SlaterState,
        times: &[f64],
        dt: f64,
        on: &mut dyn FnMut(usize, &SlaterState) -> Result<()>,
    ) -> Result<()> {
        let sc = self.variant(v, schedule);
        sc.validate()?;
        let mut o = EvolveOptions::new(dt);
        o.integrator = self.integrator;
        evolve_slater_with(psi, &sc, 0.0, times, o, |k, s| on(k, s)).map(|_| ())
    }

    fn quench(&self, v: &Variant, psi: &SlaterState, dt: f64) -> Result<SlaterState> {
        let sc = self.variant(v, &self.base.schedule);
        let (l0, lf) = (sc.schedule.lambda0, sc.schedule.lambdaf);
        let drive = fermion_quench_drive(&sc, l0, lf);
        let mut o = EvolveOptions::new(dt);
        o.integrator = self.integrator;
        evolve_slater_with(psi, &drive, 0.0, &[(lf - l0).abs()], o, |_, _| Ok(()))
    }

    fn quench_warning(&self, v: &Variant) -> Result<Option<String>> {
        let sc = self.variant(v, &self.base.schedule);
        if sc.gauge == FermionGauge::ExactOracle {
            return Ok(None);
        }
        let x = site_coords(sc.l);
        let q = quench_limit_generator(sc.schedule.lambda0, sc.schedule.lambdaf, |lam| {
            let pot = sc.potential.sample(lam, &x);
            let a = solve_fermion_ansatz_local(&pot.v, &pot.dv, sc.j, sc.locality)?;
            Ok(Operator::Quadratic(QuadraticFermionOperator::nn_current(&a.alpha)))
        })?;
        Ok(q.warning)
    }

    fn oracle_energy_gap(&self, lambda: f64) -> Result<Option<f64>> {
        let (l, n) = (self.base.l, self.base.n);
        if binomial(l, n) > 3000.0 {
            return Ok(None);
        }
        let h = QuadraticFermionOperator::from_matrix_unchecked(self.base.bare_h(lambda)?.to_dense());
        let (_, many) = h.materialize_sector(n)?;
        let e_many = eigvalsh(&many)[0];
        let r = self.reference(lambda)?;
        Ok(Some((e_many - r.energies[..n].iter().sum::<f64>()).abs()))
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k.min(n - k)).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}


struct SpinSystem {
    path: SpinPath,
    schedule: RampSchedule,
    integrator: Integrator,
}

impl SpinSystem {
    fn new(cfg: &ScenarioConfig) -> Result<Self> {
        let (l, bc) = (cfg.l, cfg.boundary());
        let (z, x) = (cfg.field(cfg.z, "z")?, cfg.field(cfg.x, "x")?);
        let path = match cfg.name {
            ScenarioName::SpinLocalFlip => SpinPath::local_flip(SpinChainParams::uniform(l, cfg.j, z, x, bc), 0),
            ScenarioName::SpinAnneal => SpinPath {
                base: SpinChainParams::uniform(l, 0.0, z, 0.0, bc),
                slope: SpinChainParams::uniform(l, cfg.j, 0.0, x, bc),
            },
            _ => return Err(Error::Config("not a spin dynamics scenario".into())),
        };
        Ok(Self {
            path,
            schedule: cfg.schedule()?.clone(),
            integrator: cfg.integrator,
        })
    }

    fn ansatz(v: &Variant) -> SpinAnsatz {
        match v.ansatz {
            Some(Ansatz::SingleSite) => SpinAnsatz::SingleSite,
            Some(Ansatz::ExactOracle) => SpinAnsatz::ExactOracle,
            _ => SpinAnsatz::TwoSite,
        }
    }
}

struct SpinReference {
    ground: SpinGround,
    h: crate::algebra::PauliMatrix,
}

impl System for SpinSystem {
    type State = SpinState;
    type Reference = SpinReference;

    fn reference(&self, lambda: f64) -> Result<SpinReference> {
        let op = self.path.at(lambda).hamiltonian()?;
        Ok(SpinReference {
            ground: ground_state(&op)?,
            h: op.to_sparse()?,
        })
    }

    fn initial(&self, r: &SpinReference) -> SpinState {
        r.ground.state.clone()
    }

    fn observe(&self, s: &SpinState, r: &SpinReference, _density: bool) -> Result<Sample> {
        Ok(Sample {
            ln_f2: s.fidelity(&r.ground.state)?.ln(),
            excess: expectation(&r.h, s) - r.ground.energy,
            density: None,
        })
    }

    fn evolve(
        &self,
        v: &Variant,
        schedule: &RampSchedule,
        psi: &SpinState,
        times: &[f64],
        dt: f64,
        on: &mut dyn FnMut(usize, &SpinState) -> Result<()>,
    ) -> Result<()> {
        let sc = SpinScenario {
            path: self.path.clone(),
            schedule: schedule.clone(),
            form: form_of(v.cd_mode),
            ansatz: Self::ansatz(v),
        };
        sc.validate()?;
        let mut o = SpinEvolveOptions::new(dt);
        o.integrator = self.integrator;
        let real = sc.form == CdForm::RealCd;
        evolve_state_with(psi, &sc, 0.0, times, o, |k, s| {
            if !real {
                return on(k, s);
            }
            let lam = ramp_value(times[k], schedule)?.lambda;
            on(k, &s.with_z_flips(real_frame_flips(&self.path, schedule.lambda0, lam)))
        })
        .map(|_| ())
    }

    fn quench(&self, v: &Variant, psi: &SpinState, dt: f64) -> Result<SpinState> {
        let (l0, lf) = (self.schedule.lambda0, self.schedule.lambdaf);
        let drive = spin_quench_drive(&self.path, Self::ansatz(v), l0, lf);
        let mut o = SpinEvolveOptions::new(dt);
        o.integrator = self.integrator;
        evolve_state_with(psi, &drive, 0.0, &[(lf - l0).abs()], o, |_, _| Ok(()))
    }

    fn quench_warning(&self, v: &Variant) -> Result<Option<String>> {
        let ansatz = Self::ansatz(v);
        if ansatz == SpinAnsatz::ExactOracle {
            return Ok(None);
        }
        let q = quench_limit_generator(self.schedule.lambda0, self.schedule.lambdaf, |lam| {
            match spin_gauge_at(&self.path, ansatz, lam)? {
                SpinOp::Pauli(p) => Ok(Operator::Pauli(p)),
                SpinOp::Dense(_) => Err(Error::FamilyMismatch("dense gauge".into())),
            }
        })?;
        Ok(q.warning)
    }

    fn oracle_energy_gap(&self, lambda: f64) -> Result<Option<f64>> {
        if self.path.sites() > crate::spin::MAX_DENSE_SITES {
            return Ok(None);
        }
        let op = self.path.at(lambda).hamiltonian()?;
        let dense = Spectrum::new(&op)?.energies[0];
        Ok(Some((dense - ground_state(&op)?.energy).abs()))
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 })
        .collect()
}

struct Job<'a> {
    variant: &'a Variant,
    tau: f64,
}

#[derive(Clone)]
struct JobOut {
    records: Vec<RunRecord>,
}

fn run_job<S: System>(
    sys: &S,
    cfg: &ScenarioConfig,
    job: &Job,
    dt: f64,
    init: &S::State,
    fin: &S::Reference,
    trace: Option<&[(f64, RampPointLite, S::Reference)]>,
) -> Result<JobOut> {
    let v = job.variant;
    let label = v.label();
    let s0 = cfg.schedule()?;
    let lf = s0.lambdaf;
    let mk = |tau: f64, time: f64, lambda: f64, rate: f64, smp: Sample| RunRecord {
        variant: label.clone(),
        tau,
        time,
        lambda,
        lambda_dot: rate,
        f2: smp.ln_f2.exp().clamp(0.0, 1.0),
        ln_f2: smp.ln_f2.min(0.0),
        excess_energy: smp.excess,
        density: smp.density,
    };
    if v.cd_mode == CdMode::QuenchLimit || job.tau == 0.0 {
        let end = if v.cd_mode == CdMode::None {
            init.clone()
        } else {
            sys.quench(v, init, dt)?
        };
        let smp = sys.observe(&end, fin, false)?;
        return Ok(JobOut {
            records: vec![mk(0.0, 0.0, lf, f64::NAN, smp)],
        });
    }
    let mut schedule = s0.clone();
    schedule.tau = job.tau;
    match trace {
        None => {
            let mut last = None;
            sys.evolve(v, &schedule, init, &[job.tau], dt, &mut |_, s| {
                last = Some(sys.observe(s, fin, false)?);
                Ok(())
            })?;
            let smp = last.expect("one sample");
            Ok(JobOut {
                records: vec![mk(job.tau, job.tau, lf, 0.0, smp)],
            })
        }
        Some(points) => {
            let times: Vec<f64> = points.iter().map(|p| p.0).collect();
            let mut records = Vec::with_capacity(times.len());
            // the first sample is the initial state itself
            let first = sys.observe(init, &points[0].2, cfg.density)?;
            records.push(mk(job.tau, times[0], points[0].1.lambda, points[0].1.rate, first));
            sys.evolve(v, &schedule, init, &times[1..], dt, &mut |k, s| {
                let p = &points[k + 1];
                let smp = sys.observe(s, &p.2, cfg.density)?;
                records.push(mk(job.tau, p.0, p.1.lambda, p.1.rate, smp));
                Ok(())
            })?;
            Ok(JobOut { records })
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct RampPointLite {
    lambda: f64,
    rate: f64,
}

fn run_dynamics<S: System>(cfg: &ScenarioConfig, sys: &S, opts: RunOptions) -> Result<RunResult> {
    let s0 = cfg.schedule()?;
    let init_ref = sys.reference(s0.lambda0)?;
    let init = sys.initial(&init_ref);
    let fin = sys.reference(s0.lambdaf)?;
    let mut warnings = Vec::new();
    for v in &cfg.variants {
        if v.cd_mode == CdMode::QuenchLimit || cfg.taus.contains(&0.0) && v.cd_mode != CdMode::None {
            if let Some(w) = sys.quench_warning(v)? {
                warnings.push(format!("{}: {w}", v.label()));
            }
        }
    }
    let sweep = !cfg.taus.is_empty();
    let trace_points: Option<Vec<(f64, RampPointLite, S::Reference)>> = if sweep {
        None
    } else {
        let times = linspace(0.0, s0.tau, cfg.samples);
        let pts = times
            .par_iter()
            .map(|&t| {
                let p = ramp_value(t, s0)?;
                Ok((t, RampPointLite { lambda: p.lambda, rate: p.rate }, sys.reference(p.lambda)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Some(pts)
    };
    let taus: Vec<f64> = if sweep { cfg.taus.clone() } else { vec![s0.tau] };
    let mut jobs = Vec::new();
    for &tau in &taus {
        for v in &cfg.variants {
            if v.cd_mode == CdMode::QuenchLimit && jobs.iter().any(|j: &Job| std::ptr::eq(j.variant, v)) {
                continue;
            }
            jobs.push(Job { variant: v, tau });
        }
    }
    let run_all = |dt: f64| -> Result<Vec<JobOut>> {
        jobs.par_iter()
            .map(|job| {
                let trace = if job.variant.cd_mode == CdMode::QuenchLimit {
                    None
                } else {
                    trace_points.as_deref()
                };
                run_job(sys, cfg, job, dt, &init, &fin, trace)
            })
            .collect()
    };
    let outs = run_all(cfg.dt)?;
    let records: Vec<RunRecord> = outs.into_iter().flat_map(|o| o.records).collect();
    let mut outputs = build_dynamic_tables(cfg, &records, &taus, sweep)?;
    if opts.oracle {
        let fine: Vec<RunRecord> = run_all(cfg.dt / 2.0)?.into_iter().flat_map(|o| o.records).collect();
        let mut t = Table::new("oracle", vec!["tau".into(), "time".into(), "variant".into(), "abs_dF2".into(), "abs_dlnF2".into()]);
        let labels: Vec<String> = cfg.variants.iter().map(Variant::label).collect();
        for (a, b) in records.iter().zip(&fine) {
            let vi = labels.iter().position(|l| *l == a.variant).unwrap_or(0) as f64;
            t.rows.push(vec![a.tau, a.time, vi, (a.f2 - b.f2).abs(), (a.ln_f2 - b.ln_f2).abs()]);
        }
        for lam in [s0.lambda0, s0.lambdaf] {
            if let Some(gap) = sys.oracle_energy_gap(lam)? {
                if gap > 1e-8 {
                    warnings.push(format!("ground energy at λ={lam} differs from the brute-force oracle by {gap:.3e}"));
                }
            }
        }
        outputs.push(Output { table: t, figure: None });
    }
    Ok(RunResult {
        config: cfg.clone(),
        records,
        outputs,
        warnings,
    })
}

fn build_dynamic_tables(cfg: &ScenarioConfig, records: &[RunRecord], taus: &[f64], sweep: bool) -> Result<Vec<Output>> {
    let labels: Vec<String> = cfg.variants.iter().map(Variant::label).collect();
    let quench: Vec<bool> = cfg.variants.iter().map(|v| v.cd_mode == CdMode::QuenchLimit).collect();
    let per_variant = |prefix: &str, which: &[bool]| -> Vec<String> {
        labels
            .iter()
            .zip(which)
            .filter(|(_, w)| **w)
            .map(|(l, _)| format!("{prefix}{l}"))
            .collect()
    };
    let all = vec![true; labels.len()];
    let mut outputs = Vec::new();
    // final values per duration
    let mut cols = vec!["tau".to_string()];
    for p in ["F2_", "log10F2_", "dE_"] {
        cols.extend(per_variant(p, &all));
    }
    let mut fin = Table::new("final", cols);
    for &tau in taus {
        let mut row = vec![tau];
        let mut f2 = Vec::new();
        let mut lf = Vec::new();
        let mut de = Vec::new();
        for (l, q) in labels.iter().zip(&quench) {
            let key = if *q || tau == 0.0 { 0.0 } else { tau };
            let r = records
                .iter()
                .filter(|r| r.variant == *l && r.tau == key)
                .last()
                .ok_or_else(|| Error::Schema(format!("missing record {l} at τ={tau}")))?;
            f2.push(r.f2);
            lf.push(r.log10_f2());
            de.push(r.excess_energy);
        }
        row.extend(f2);
        row.extend(lf);
        row.extend(de);
        fin.rows.push(row);
    }
    let fin_fig = if sweep { Some("sweep") } else { None };
    if !sweep {
        let traced: Vec<bool> = quench.iter().map(|q| !q).collect();
        let mut cols = vec!["t".to_string(), "lambda".into(), "lambda_dot".into()];
        let linear = cfg.name == ScenarioName::LinearField;
        if linear {
            cols.push("lambda_cd".into());
        }
        for p in ["F2_", "log10F2_", "dE_"] {
            cols.extend(per_variant(p, &traced));
        }
        let mut tr = Table::new("trace", cols);
        let traced_labels: Vec<&String> = labels.iter().zip(&traced).filter(|(_, t)| **t).map(|(l, _)| l).collect();
        let first = traced_labels.first().map(|l| l.as_str());
        let base: Vec<&RunRecord> = records.iter().filter(|r| Some(r.variant.as_str()) == first).collect();
        let cd_sched = if linear { Some(linear_field_cd_schedule(cfg.schedule()?)?) } else { None };
        let mut dens_cols = vec!["t".to_string(), "x".into()];
        let mut dens = None;
        if cfg.density && cfg.name.is_fermion() {
            dens_cols.push("n_gs".into());
            dens_cols.extend(traced_labels.iter().map(|l| format!("n_{l}")));
            dens = Some(Table::new("density", dens_cols));
        }
        let x = site_coords(cfg.l);
        for (k, b) in base.iter().enumerate() {
            let mut row = vec![b.time, b.lambda, b.lambda_dot];
            if let Some(cs) = &cd_sched {
                row.push(cs.at(b.time)?.lambda_cd);
            }
            let rows_k: Vec<&RunRecord> = traced_labels
                .iter()
                .map(|l| records.iter().filter(|r| r.variant == **l).nth(k).expect("aligned traces"))
                .collect();
            row.extend(rows_k.iter().map(|r| r.f2));
            row.extend(rows_k.iter().map(|r| r.log10_f2()));
            row.extend(rows_k.iter().map(|r| r.excess_energy));
            tr.rows.push(row);
            if let Some(d) = dens.as_mut() {
                let gs = instantaneous_density(cfg, b.lambda)?;
                for s in 0..cfg.l {
                    let mut r = vec![b.time, x[s], gs[s]];
                    r.extend(rows_k.iter().map(|rr| rr.density.as_ref().map_or(f64::NAN, |d| d[s])));
                    d.rows.push(r);
                }
            }
        }
        outputs.push(Output {
            table: tr.clone(),
            figure: Some("fidelity_trace"),
        });
        if linear {
            let mut p = tr;
            p.name = "protocol".into();
            outputs.push(Output {
                table: p,
                figure: Some("protocol"),
            });
        }
        if let Some(d) = dens {
            outputs.push(Output {
                table: d,
                figure: Some("density"),
            });
        }
    }
    outputs.push(Output { table: fin, figure: fin_fig });
    Ok(outputs)
}

fn instantaneous_density(cfg: &ScenarioConfig, lambda: f64) -> Result<Vec<f64>> {
    let sys = FermionSystem::new(cfg)?;
    Ok(density_profile(&sys.reference(lambda)?.state))
}

fn run_noise(cfg: &ScenarioConfig) -> Result<RunResult> {
    let (l, bc) = (cfg.l, cfg.boundary());
    let noise = cfg.noise.clone().unwrap_or_default();
    let params = SpinChainParams::uniform(l, cfg.j, cfg.field(cfg.z, "z")?, cfg.field(cfg.x, "x")?, bc);
    let h = params.hamiltonian()?;
    let mut dparams = params.zeros_like();
    dparams.x[noise.site] = 1.0;
    let dh = PauliOperatorSum::from_term(PauliString::single(l, noise.site, Pauli::X), 1.0);
    let spec = Spectrum::new(&h)?;
    let path = SpinPath {
        base: params.clone(),
        slope: dparams,
    };
    let variants: Vec<Variant> = if cfg.variants.is_empty() {
        vec![Variant::new(CdMode::None, None)]
    } else {
        cfg.variants.clone()
    };
    let g_eig: Vec<_> = variants
        .iter()
        .map(|v| -> Result<_> {
            let g = match (v.cd_mode, v.ansatz) {
                (CdMode::None, _) => dh.to_dense()?,
                (_, Some(Ansatz::ExactOracle)) => {
                    let hd = h.to_dense()?;
                    let dd = dh.to_dense()?;
                    let a = exact_gauge_oracle(&hd, &dd, OracleOptions::default())?;
                    dd + (&a * &hd - &hd * &a) * Complex64::new(0.0, 1.0)
                }
                (_, a) => {
                    let ansatz = if a == Some(Ansatz::SingleSite) { SpinAnsatz::SingleSite } else { SpinAnsatz::TwoSite };
                    match spin_gauge_at(&path, ansatz, 0.0)? {
                        SpinOp::Pauli(p) => generalized_force(&h, &dh, Some(&p))?.to_dense()?,
                        SpinOp::Dense(_) => unreachable!("variational gauge is a Pauli sum"),
                    }
                }
            };
            Ok(spec.to_eigenbasis(&g))
        })
        .collect::<Result<_>>()?;
    let labels: Vec<String> = variants.iter().map(Variant::label).collect();
    let betas: Vec<f64> = spec
        .energies
        .par_iter()
        .map(|&e| effective_beta(e, &spec.energies).map(|b| b.beta))
        .collect::<Result<_>>()?;
    let mut warnings = Vec::new();
    let mut outputs = Vec::new();
    if cfg.name == ScenarioName::SpinNoiseRates {
        let rates: Vec<Vec<f64>> = g_eig.iter().map(|g| fluctuation_rates(&spec, g, 1.0)).collect();
        let mut cols = vec!["n".to_string(), "energy".into(), "beta".into()];
        cols.extend(labels.iter().map(|l| format!("rate_{l}")));
        let mut t = Table::new("rates", cols);
        for n in 0..spec.energies.len() {
            let mut row = vec![n as f64, spec.energies[n], betas[n]];
            row.extend(rates.iter().map(|r| r[n]));
            t.rows.push(row);
        }
        outputs.push(Output {
            table: t,
            figure: Some("noise_rates"),
        });
        let mut m = Table::new("mean_rates", labels.iter().map(|l| format!("rate_{l}")).collect());
        m.rows.push(rates.iter().map(|r| r.iter().sum::<f64>() / r.len() as f64).collect());
        outputs.push(Output { table: m, figure: None });
    } else {
        let (ns, t) = transition_table(&spec, &betas, &g_eig, &labels, &noise)?;
        if ns == 0 {
            warnings.push(format!(
                "no eigenstates with |β − {}| < {}",
                noise.beta_target, noise.beta_window
            ));
        }
        outputs.push(Output {
            table: t,
            figure: Some("transition_spectrum"),
        });
        let mut w = Table::new("window", vec!["states".into(), "broadening".into()]);
        w.rows.push(vec![ns as f64, NoiseSpec::from(&noise).width(&spec)]);
        outputs.push(Output { table: w, figure: None });
    }
    Ok(RunResult {
        config: cfg.clone(),
        records: Vec::new(),
        outputs,
        warnings,
    })
}

impl From<&NoiseConfig> for NoiseSpec {
    fn from(n: &NoiseConfig) -> Self {
        let k = n.omega_points;
        NoiseSpec {
            s_ll: 1.0,
            omega_grid: (0..k)
                .map(|i| n.omega_min + (n.omega_max - n.omega_min) * i as f64 / (k - 1) as f64)
                .collect(),
            broadening: n.broadening,
        }
    }
}

/// Mean normalized `Γ_n(ω)` over eigenstates in the β window.
fn transition_table(
    spec: &Spectrum,
    betas: &[f64],
    g_eig: &[nalgebra::DMatrix<Complex64>],
    labels: &[String],
    noise: &NoiseConfig,
) -> Result<(usize, Table)> {
    let ns = NoiseSpec::from(noise);
    let states: Vec<usize> = (0..betas.len())
        .filter(|&n| (betas[n] - noise.beta_target).abs() < noise.beta_window)
        .collect();
    let mut cols = vec!["omega".to_string()];
    cols.extend(labels.iter().map(|l| format!("gamma_{l}")));
    let mut t = Table::new("spectrum", cols);
    let mut curves = Vec::new();
    for g in g_eig {
        let sums = states
            .par_iter()
            .map(|&n| transition_spectrum(spec, n, g, &ns).map(|s| s.gamma))
            .collect::<Result<Vec<_>>>()?;
        let mut mean = vec![0.0; ns.omega_grid.len()];
        for s in &sums {
            for (m, v) in mean.iter_mut().zip(s) {
                *m += v / states.len().max(1) as f64;
            }
        }
        curves.push(mean);
    }
    for (k, w) in ns.omega_grid.iter().enumerate() {
        let mut row = vec![*w];
        row.extend(curves.iter().map(|c| c[k]));
        t.rows.push(row);
    }
    Ok((states.len(), t))
}

/// Initial-state helper for callers that drive spins directly.
pub fn spin_initial(cfg: &ScenarioConfig) -> Result<SpinState> {
    let sys = SpinSystem::new(cfg)?;
    Ok(sys.reference(cfg.schedule()?.lambda0)?.ground.state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::config::preset;

    fn small_insert() -> ScenarioConfig {
        let mut c = preset("eckart_insert").unwrap();
        c.l = 16;
        c.xi = Some(2.0);
        c.schedule.as_mut().unwrap().tau = 2.0;
        c.samples = 11;
        c
    }

    #[test]
    fn insertion_trace_schema_and_bounds() {
        let r = run_scenario(&small_insert()).unwrap();
        let t = r.table("trace").unwrap();
        for c in ["t", "lambda", "F2_naive", "F2_cd_imag", "F2_cd_real"] {
            assert!(t.column(c).is_some(), "missing {c}");
        }
        assert_eq!(t.rows.len(), 11);
        assert!(r.records.iter().all(|r| (0.0..=1.0).contains(&r.f2) && r.ln_f2.is_finite() && r.ln_f2 <= 0.0));
        let fin = r.table("final").unwrap();
        assert_eq!(fin.rows.len(), 1);
        let (a, b) = (r.final_record("cd_imag", 2.0).unwrap(), r.final_record("cd_real", 2.0).unwrap());
        assert!((a.f2 - b.f2).abs() < 1e-6);
    }

    #[test]
    fn identical_configs_give_identical_csv() {
        let c = small_insert();
        let (a, b) = (run_scenario(&c).unwrap(), run_scenario(&c).unwrap());
        for (x, y) in a.outputs.iter().zip(&b.outputs) {
            assert_eq!(x.table.to_csv(), y.table.to_csv());
        }
    }

    #[test]
    fn sudden_quench_row_is_the_bare_overlap() {
        let mut c = preset("spin_local_flip@L10").unwrap();
        c.l = 6;
        c.taus = vec![0.0, 0.5];
        let r = run_scenario(&c).unwrap();
        let sys = SpinSystem::new(&c).unwrap();
        let g0 = sys.reference(0.0).unwrap().ground.state;
        let gf = sys.reference(-10.0).unwrap().ground.state;
        let naive = r.final_record("naive", 0.0).unwrap();
        assert!((naive.f2 - g0.fidelity(&gf).unwrap()).abs() < 1e-12);
        assert_eq!(r.table("final").unwrap().rows.len(), 2);
        for label in ["cd_single", "cd_two"] {
            assert!(r.final_record(label, 0.0).unwrap().f2 > naive.f2);
        }
    }

    #[test]
    fn density_table_is_long_format() {
        let mut c = preset("eckart_move@L256").unwrap();
        c.l = 32;
        c.schedule = Some(RampSchedule::sine_squared(-4.0, 4.0, 4.0));
        c.xi = Some(2.0);
        c.samples = 5;
        let r = run_scenario(&c).unwrap();
        let d = r.table("density").unwrap();
        assert_eq!(d.rows.len(), 5 * 32);
        let total: f64 = d.rows[..32].iter().map(|row| row[d.column("n_naive").unwrap()]).sum();
        assert!((total - 16.0).abs() < 1e-9);
    }

    #[test]
    fn noise_tables_cover_the_spectrum() {
        let mut c = preset("spin_noise_rates@L10").unwrap();
        c.l = 6;
        let r = run_scenario(&c).unwrap();
        let t = r.table("rates").unwrap();
        assert_eq!(t.rows.len(), 64);
        let m = &r.table("mean_rates").unwrap().rows[0];
        assert!(m[2] <= m[1] && m[1] <= m[0], "{m:?}");
    }

    #[test]
    fn write_emits_tables_scripts_and_config() {
        let dir = tempfile::tempdir().unwrap();
        let r = run_scenario(&small_insert()).unwrap();
        let files = r.write(dir.path(), "ins", false).unwrap();
        let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        for n in ["ins_trace.csv", "ins_trace.py", "ins_final.csv", "ins_config.json"] {
            assert!(names.contains(&n.to_string()), "{names:?}");
        }
        let back = ScenarioConfig::from_json(&std::fs::read_to_string(dir.path().join("ins_config.json")).unwrap()).unwrap();
        assert_eq!(back, r.config);
    }
}
