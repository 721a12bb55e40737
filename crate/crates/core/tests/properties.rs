use approx::assert_relative_eq;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use localcd::algebra::{pauli_commutator, Pauli, PauliOperatorSum, PauliString, QuadraticFermionOperator};
use localcd::fermion::{build_single_particle_h, build_tridiag, ground_state_slater, slater_fidelity};
use localcd::gauge::{fermion_g, solve_fermion_ansatz, solve_fermion_ansatz_local};
use localcd::linalg::{expm_apply, solve_tridiagonal};
use localcd::model::Boundary;
use localcd::protocols::{ramp_value, RampSchedule};
use localcd::scenario::{preset, preset_names, ScenarioConfig, Table};
use localcd::spin::effective_beta;

fn pauli() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn pauli_sum(l: usize) -> impl Strategy<Value = PauliOperatorSum> {
    prop::collection::vec((prop::collection::vec(pauli(), l), -1.0..1.0f64), 1..6).prop_map(move |terms| {
        let mut s = PauliOperatorSum::zero(l);
        for (ops, c) in terms {
            s.add_real(PauliString::from_ops(&ops), c);
        }
        s
    })
}

fn dense_close(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).norm()
}

fn chain_action(v: &[f64], dv: &[f64], alpha: &[f64]) -> f64 {
    let h = build_single_particle_h(&vec![1.0; v.len() - 1], v, None, Boundary::Open).unwrap();
    let dh = QuadraticFermionOperator::from_real(&DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(dv))).unwrap();
    fermion_g(&h, &dh, alpha).unwrap().frobenius_sq()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn commutator_matches_dense(a in pauli_sum(3), b in pauli_sum(3)) {
        let sym = pauli_commutator(&a, &b).unwrap().to_dense().unwrap();
        let (da, db) = (a.to_dense().unwrap(), b.to_dense().unwrap());
        prop_assert!(dense_close(&sym, &(&da * &db - &db * &da)) < 1e-12);
    }

    #[test]
    fn commutator_is_antisymmetric(a in pauli_sum(4), b in pauli_sum(4)) {
        let ab = pauli_commutator(&a, &b).unwrap();
        let ba = pauli_commutator(&b, &a).unwrap();
        prop_assert!(ab.add(&ba).unwrap().norm_sq() < 1e-24);
    }

    #[test]
    fn product_matches_dense(a in pauli_sum(3), b in pauli_sum(3)) {
        let p = a.mul(&b).unwrap().to_dense().unwrap();
        prop_assert!(dense_close(&p, &(a.to_dense().unwrap() * b.to_dense().unwrap())) < 1e-12);
    }

    #[test]
    fn tridiagonal_solve_has_small_residual(
        diag in prop::collection::vec(4.0..8.0f64, 2..40),
        seed in prop::collection::vec(-1.0..1.0f64, 80),
    ) {
        let n = diag.len();
        let (sub, sup, rhs) = (&seed[..n - 1], &seed[40..39 + n], &seed[..n]);
        let x = solve_tridiagonal(sub, &diag, sup, rhs).unwrap();
        for i in 0..n {
            let mut r = diag[i] * x[i] - rhs[i];
            if i > 0 { r += sub[i - 1] * x[i - 1]; }
            if i + 1 < n { r += sup[i] * x[i + 1]; }
            prop_assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn fermion_ansatz_minimizes_the_action(
        v in prop::collection::vec(-2.0..2.0f64, 4..24),
        kick in prop::collection::vec(-0.05..0.05f64, 24),
        phase in 0.0..6.0f64,
    ) {
        let l = v.len();
        let dv: Vec<f64> = (0..l).map(|s| (s as f64 * 0.7 + phase).sin()).collect();
        let alpha = solve_fermion_ansatz(&v, &dv, 1.0).unwrap().alpha;
        let moved: Vec<f64> = alpha.iter().zip(&kick).map(|(a, k)| a + k).collect();
        prop_assert!(chain_action(&v, &dv, &alpha) <= chain_action(&v, &dv, &moved) + 1e-12);
        prop_assert!(chain_action(&v, &dv, &alpha) <= chain_action(&v, &dv, &vec![0.0; l - 1]) + 1e-12);
    }

    #[test]
    fn fermion_ansatz_is_linear_in_the_drive(
        v in prop::collection::vec(-2.0..2.0f64, 4..24),
        c in -3.0..3.0f64,
        length in prop::option::of(2.0..20.0f64),
    ) {
        let dv: Vec<f64> = (0..v.len()).map(|s| (s as f64 * 0.3).cos()).collect();
        let scaled: Vec<f64> = dv.iter().map(|d| c * d).collect();
        let a = solve_fermion_ansatz_local(&v, &dv, 1.0, length).unwrap().alpha;
        let b = solve_fermion_ansatz_local(&v, &scaled, 1.0, length).unwrap().alpha;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((c * x - y).abs() < 1e-10 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn slater_fidelity_is_a_symmetric_probability(
        v in prop::collection::vec(-2.0..2.0f64, 8),
        w in prop::collection::vec(-2.0..2.0f64, 8),
    ) {
        let gs = |p: &[f64]| {
            let h = build_single_particle_h(&[1.0; 7], p, None, Boundary::Open).unwrap();
            ground_state_slater(&h, 3)
        };
        if let (Ok(a), Ok(b)) = (gs(&v), gs(&w)) {
            let f = slater_fidelity(&a, &b).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
            prop_assert!((f - slater_fidelity(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!((slater_fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn chebyshev_propagation_is_unitary(
        v in prop::collection::vec(-2.0..2.0f64, 12),
        t in 0.0..20.0f64,
    ) {
        let h = build_tridiag(&[1.0; 11], &v, None, Boundary::Open).unwrap();
        let x = DMatrix::<Complex64>::identity(12, 3);
        let y = expm_apply(&h, t, &x);
        let gram = y.adjoint() * &y;
        prop_assert!(dense_close(&gram, &DMatrix::identity(3, 3)) < 1e-10);
    }

    #[test]
    fn sine_squared_ramp_is_flat_at_both_ends(l0 in -5.0..5.0f64, lf in -5.0..5.0f64, tau in 0.1..50.0f64) {
        let s = RampSchedule::sine_squared(l0, lf, tau);
        prop_assert!(s.is_endpoint_flat());
        let (a, b) = (ramp_value(0.0, &s).unwrap(), ramp_value(tau, &s).unwrap());
        prop_assert!((a.lambda - l0).abs() < 1e-12 && (b.lambda - lf).abs() < 1e-12);
        prop_assert!(a.rate.abs() < 1e-12 && b.rate.abs() < 1e-9 * (1.0 + (lf - l0).abs() / tau));
        let mid = ramp_value(tau / 2.0, &s).unwrap();
        prop_assert!((mid.lambda - (l0 + lf) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn effective_beta_decreases_with_energy(
        mut e in prop::collection::vec(-5.0..5.0f64, 3..30),
        u in 0.05..0.45f64,
    ) {
        e.sort_by(f64::total_cmp);
        prop_assume!(e[e.len() - 1] - e[0] > 0.1);
        let at = |q: f64| e[0] + q * (e[e.len() - 1] - e[0]);
        let (lo, hi) = (effective_beta(at(u), &e).unwrap(), effective_beta(at(u + 0.5), &e).unwrap());
        prop_assert!(lo.beta >= hi.beta);
    }

    #[test]
    fn csv_round_trips(rows in prop::collection::vec(prop::collection::vec(-1e6..1e6f64, 3), 0..20)) {
        let mut t = Table::new("t", vec!["a".into(), "b".into(), "c".into()]);
        t.rows = rows;
        let back = Table::from_csv("t", &t.to_csv()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn configs_round_trip(k in 0usize..17, l in 2usize..12, dt in 1e-4..0.1f64) {
        let names = preset_names();
        let mut c = preset(names[k % names.len()]).unwrap();
        c.l = l;
        c.dt = dt;
        let back = ScenarioConfig::from_json(&c.to_json()).unwrap();
        prop_assert_eq!(back, c);
    }
}

#[test]
fn effective_beta_reproduces_the_thermal_mean() {
    let e: Vec<f64> = (0..20).map(|k| (k as f64 * 0.37).sin() * 3.0 + k as f64 * 0.2).collect();
    let mut e = e;
    e.sort_by(f64::total_cmp);
    let beta = 0.7;
    let z: f64 = e.iter().map(|x| (-beta * x).exp()).sum();
    let mean = e.iter().map(|x| x * (-beta * x).exp()).sum::<f64>() / z;
    assert_relative_eq!(effective_beta(mean, &e).unwrap().beta, beta, max_relative = 1e-8);
}
