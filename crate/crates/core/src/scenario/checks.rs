//! Fast oracle and property checks behind the `check` subcommand.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{pauli_commutator, Operator, Pauli, PauliOperatorSum, PauliString, QuadraticFermionOperator};
use crate::error::Result;
use crate::fermion::build_single_particle_h;
use crate::gauge::{
    action_value, action_value_dense, exact_gauge_oracle, solve_fermion_ansatz, solve_spin_single_site,
    solve_spin_two_site, spin_ansatz_operator, Normalization, OracleOptions,
};
use crate::model::{Boundary, SpinChainParams};
use crate::spin::{transition_spectrum, NoiseSpec, Spectrum};

use super::config::{preset, preset_names, CdMode, ScenarioConfig, Variant};
use super::run::{run_scenario, run_scenario_with, RunOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn(&mut ChaCha8Rng) -> Result<(bool, String)>;

const CHECKS: &[(&str, Check)] = &[
    ("config_round_trip", config_round_trip),
    ("pauli_commutator_vs_dense", pauli_commutator_vs_dense),
    ("fermion_ansatz_is_minimum", fermion_ansatz_is_minimum),
    ("spin_action_ordering", spin_action_ordering),
    ("exact_cd_transitionless", exact_cd_transitionless),
    ("real_imaginary_equivalence", real_imaginary_equivalence),
    ("step_doubling", step_doubling),
    ("transition_sum_rule", transition_sum_rule),
];

/// Runs every check with randomness drawn from `seed`. A check that errors
/// counts as failed.
pub fn run_checks(seed: u64) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CHECKS
        .iter()
        .map(|(name, f)| match f(&mut rng) {
            Ok((passed, detail)) => CheckOutcome { name, passed, detail },
            Err(e) => CheckOutcome {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        })
        .collect()
}

fn config_round_trip(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut bad = Vec::new();
    for name in preset_names() {
        let c = preset(name)?;
        if ScenarioConfig::from_json(&c.to_json())? != c {
            bad.push(name);
        }
    }
    Ok((bad.is_empty(), format!("{} presets, mismatches {bad:?}", preset_names().len())))
}

fn random_pauli_sum(rng: &mut ChaCha8Rng, l: usize, terms: usize) -> PauliOperatorSum {
    let mut s = PauliOperatorSum::zero(l);
    for _ in 0..terms {
        let ops: Vec<Pauli> = (0..l)
            .map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..4)])
            .collect();
        s.add_real(PauliString::from_ops(&ops), rng.gen_range(-1.0..1.0));
    }
    s
}

fn pauli_commutator_vs_dense(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let a = random_pauli_sum(rng, 4, 6);
        let b = random_pauli_sum(rng, 4, 6);
        let sym = pauli_commutator(&a, &b)?.to_dense()?;
        let (da, db) = (a.to_dense()?, b.to_dense()?);
        let dense = &da * &db - &db * &da;
        worst = worst.max((sym - dense).norm());
    }
    Ok((worst < 1e-12, format!("max deviation {worst:.2e}")))
}

fn fermion_action(v: &[f64], dv: &[f64], alpha: &[f64]) -> Result<f64> {
    let l = v.len();
    let h0 = build_single_particle_h(&vec![1.0; l - 1], v, None, Boundary::Open)?;
    let dh = QuadraticFermionOperator::new(DMatrix::from_fn(l, l, |r, c| {
        Complex64::new(if r == c { dv[r] } else { 0.0 }, 0.0)
    }))?;
    let a = QuadraticFermionOperator::nn_current(alpha);
    Ok(action_value(&Operator::Quadratic(h0), &Operator::Quadratic(dh), &Operator::Quadratic(a))?.value)
}

fn fermion_ansatz_is_minimum(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let l = 16;
    let mut worst = f64::INFINITY;
    for _ in 0..10 {
        let v: Vec<f64> = (0..l).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dv: Vec<f64> = (0..l).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let alpha = solve_fermion_ansatz(&v, &dv, 1.0)?.alpha;
        let best = fermion_action(&v, &dv, &alpha)?;
        for k in 0..alpha.len() {
            for d in [-1e-3, 1e-3] {
                let mut p = alpha.clone();
                p[k] += d;
                worst = worst.min(fermion_action(&v, &dv, &p)? - best);
            }
        }
    }
    Ok((worst > 0.0, format!("smallest action increase under perturbation {worst:.2e}")))
}

fn spin_action_ordering(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = f64::INFINITY;
    for _ in 0..10 {
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(0.3..1.5)).collect() };
        let p = SpinChainParams {
            j: draw(3),
            z: draw(4),
            x: draw(4),
            bc: Boundary::Open,
        };
        let dp = SpinChainParams {
            j: draw(3),
            z: draw(4),
            x: draw(4),
            bc: Boundary::Open,
        };
        let (h, dh) = (p.hamiltonian()?.to_dense()?, dp.hamiltonian()?.to_dense()?);
        let act = |a: &DMatrix<Complex64>| action_value_dense(&h, &dh, a, Normalization::PerHilbertDim).value;
        let oracle = act(&exact_gauge_oracle(&h, &dh, OracleOptions::default())?);
        let two = act(&spin_ansatz_operator(&p, &solve_spin_two_site(&p, &dp)?)?.to_dense()?);
        let single = act(&spin_ansatz_operator(&p, &solve_spin_single_site(&p, &dp)?)?.to_dense()?);
        let zero = act(&DMatrix::zeros(16, 16));
        worst = worst.min(two - oracle).min(single - two).min(zero - single);
    }
    Ok((worst >= -1e-10, format!("smallest gap {worst:.2e}")))
}

fn exact_cd_transitionless(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let r = run_scenario(&preset("exact_cd_small")?)?;
    let trace = r
        .table("trace")
        .ok_or_else(|| crate::Error::Schema("trace table missing".into()))?;
    let min = trace.values("F2_cd_oracle")?.into_iter().fold(1.0, f64::min);
    Ok((min >= 1.0 - 1e-6, format!("minimum oracle-CD fidelity {min:.12}")))
}

fn small_insertion() -> Result<ScenarioConfig> {
    let mut c = preset("eckart_insert")?;
    c.l = 32;
    c.xi = Some(3.0);
    c.schedule.as_mut().expect("preset schedule").tau = 3.0;
    c.dt = 0.01;
    c.taus = vec![3.0];
    Ok(c)
}

fn real_imaginary_equivalence(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let r = run_scenario(&small_insertion()?)?;
    let (a, b) = (r.final_record("cd_imag", 3.0), r.final_record("cd_real", 3.0));
    let d = match (a, b) {
        (Some(a), Some(b)) => (a.f2 - b.f2).abs(),
        _ => f64::INFINITY,
    };
    Ok((d < 1e-6, format!("|F²_real − F²_imag| = {d:.2e}")))
}

fn step_doubling(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut c = small_insertion()?;
    c.variants = vec![Variant::new(CdMode::None, None), Variant::new(CdMode::Imaginary, None)];
    let r = run_scenario_with(&c, RunOptions { oracle: true })?;
    let t = r
        .table("oracle")
        .ok_or_else(|| crate::Error::Schema("oracle table missing".into()))?;
    let worst = t.values("abs_dF2")?.into_iter().fold(0.0, f64::max);
    Ok((worst < 1e-8, format!("max |ΔF²| between dt and dt/2: {worst:.2e}")))
}

fn transition_sum_rule(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let p = SpinChainParams::uniform(6, 1.0, 0.8, 0.9, Boundary::Periodic);
    let spec = Spectrum::new(&p.hamiltonian()?)?;
    let g = spec.to_eigenbasis(&PauliOperatorSum::from_term(PauliString::single(6, 0, Pauli::X), 1.0).to_dense()?);
    let noise = NoiseSpec {
        s_ll: 1.0,
        omega_grid: (0..2001).map(|k| -20.0 + 0.02 * k as f64).collect(),
        broadening: None,
    };
    let mut worst = 0.0f64;
    for n in (0..spec.energies.len()).step_by(7) {
        let s = transition_spectrum(&spec, n, &g, &noise)?;
        let area: f64 = s.gamma.iter().sum::<f64>() * 0.02;
        let var: f64 = (0..spec.energies.len()).filter(|&m| m != n).map(|m| g[(m, n)].norm_sqr()).sum();
        worst = worst.max((area - var).abs() / var);
    }
    Ok((worst < 1e-2, format!("max relative sum-rule error {worst:.2e}")))
}
