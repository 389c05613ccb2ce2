//! Invariants checked over generated inputs.

use mqc::compiler::{absorb_frame, compile, run, verify, Absorbed, Gate, GateCircuit, GateKind, Mode};
use mqc::formats::{circuit_from_json, circuit_to_json, program_from_json, program_to_json};
use mqc::linalg::{equal_up_to_phase, max_abs_diff, unitarity_deviation, Matrix, UnitaryMatrix};
use mqc::measure::{measure, outcome_probabilities, post_select, split, MeasurementSpec};
use mqc::msets::{build_set, rotated_bell_observables, SetName};
use mqc::pauli::PauliString;
use mqc::program::FramePolicy;
use mqc::state::{apply_gate, equal_up_to_global_phase, extract_factor, fidelity, make_bell_state, tensor, PureState};
use mqc::stats::THREE_SIGMA_P;
use mqc::tableau::StabilizerTableau;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn spec_for(kind: usize, r: &mut ChaCha8Rng) -> (MeasurementSpec, Vec<usize>) {
    match kind {
        0 => (MeasurementSpec::bell(), vec![0, 2]),
        1 => (MeasurementSpec::rotated_bell(&UnitaryMatrix::random(1, r)), vec![2, 1]),
        2 => {
            let p = common::random_hermitian_pauli(3, r);
            (MeasurementSpec::observable(p).unwrap(), vec![0, 1, 2])
        }
        _ => {
            let xx = PauliString::from_indices(&[1, 1]).to_matrix();
            let id = Matrix::identity(4, 4);
            let half = mqc::linalg::c(0.5, 0.0);
            let ps = vec![(&id + &xx) * half, (&id - &xx) * half];
            (MeasurementSpec::projectors(ps).unwrap(), vec![1, 2])
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn probabilities_sum_to_one(seed in any::<u64>(), kind in 0usize..4) {
        let mut r = rng(seed);
        let psi = PureState::random(3, &mut r);
        let (spec, targets) = spec_for(kind, &mut r);
        let total: f64 = outcome_probabilities(&psi, &spec, &targets).unwrap().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sampled_and_forced_outcomes_agree(seed in any::<u64>(), kind in 0usize..4) {
        let mut r = rng(seed);
        let psi = PureState::random(3, &mut r);
        let (spec, targets) = spec_for(kind, &mut r);
        let (k, pr, post) = measure(&psi, &spec, &targets, &mut r).unwrap();
        let (pr2, post2) = post_select(&psi, &spec, &targets, k).unwrap();
        prop_assert!((pr - pr2).abs() < 1e-15);
        prop_assert_eq!(post.amplitudes(), post2.amplitudes());
    }

    #[test]
    fn rotated_bell_measurement_applies_sigma_u(seed in any::<u64>()) {
        let mut r = rng(seed);
        let u = UnitaryMatrix::random(1, &mut r);
        let psi = PureState::random(1, &mut r);
        let start = tensor(&psi, &make_bell_state(0).unwrap()).unwrap();
        let upsi = apply_gate(&psi, &u, &[0]).unwrap();
        for (j, (pr, post)) in split(&start, &MeasurementSpec::rotated_bell(&u), &[0, 1]).unwrap().into_iter().enumerate() {
            prop_assert!((pr - 0.25).abs() < 1e-10);
            let out = extract_factor(&post.unwrap(), &[2], 1e-10).unwrap();
            let want = PauliString::from_indices(&[j]).apply_to(&upsi, &[0]).unwrap();
            prop_assert!(equal_up_to_global_phase(&out, &want, 1e-10).unwrap());
        }
    }

    #[test]
    fn random_unitaries_preserve_norm(seed in any::<u64>(), arity in 1usize..4) {
        let mut r = rng(seed);
        let u = UnitaryMatrix::random(arity, &mut r);
        prop_assert!(unitarity_deviation(u.matrix()) < 1e-10);
        let psi = PureState::random(4, &mut r);
        let targets: Vec<usize> = (0..arity).map(|i| (i * 3 + 1) % 4).collect();
        let out = apply_gate(&psi, &u, &targets).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn engines_agree_up_to_eight_qubits(seed in any::<u64>()) {
        let (mismatches, worst) = common::agree_once(seed, 8).unwrap();
        prop_assert_eq!(mismatches, 0);
        prop_assert!(worst < 1e-10, "{}", worst);
    }

    #[test]
    fn rotated_bell_observables_share_the_basis(seed in any::<u64>()) {
        let u = UnitaryMatrix::random(1, &mut rng(seed));
        let (a, b) = rotated_bell_observables(&u).unwrap();
        prop_assert!(max_abs_diff(&(&a * &b), &(&b * &a)) < 1e-10);
        let spec = MeasurementSpec::rotated_bell(&u);
        for j in 0..4 {
            let proj = spec.projector(j);
            // Each basis projector is a joint eigenprojector of both observables.
            for o in [&a, &b] {
                let op = o * &proj;
                prop_assert!(max_abs_diff(&op, &proj) < 1e-10 || max_abs_diff(&op, &(-&proj)) < 1e-10);
            }
        }
    }

    #[test]
    fn clifford_absorption_commutes(seed in any::<u64>(), letters in proptest::collection::vec(0usize..4, 2)) {
        let mut r = rng(seed);
        let frame = PauliString::from_indices(&letters);
        let g = common::random_clifford(2, &mut r);
        let u = g.unitary();
        let u = if u.arity() == 1 { u.tensor(&UnitaryMatrix::identity(1)) } else { u };
        let u = if g.targets() == vec![1, 0] {
            let s = UnitaryMatrix::swap();
            s.compose(&u).unwrap().compose(&s).unwrap()
        } else if g.targets() == vec![1] {
            let s = UnitaryMatrix::swap();
            s.compose(&u).unwrap().compose(&s).unwrap()
        } else {
            u
        };
        match absorb_frame(&frame, &u).unwrap() {
            Absorbed::Gate { gate, frame: f2 } => {
                let lhs = gate.matrix() * frame.to_matrix();
                let rhs = f2.to_matrix() * gate.matrix();
                prop_assert!(equal_up_to_phase(&lhs, &rhs, 1e-10));
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn non_clifford_absorption_requests_the_product(seed in any::<u64>(), l in 1usize..4) {
        let u = UnitaryMatrix::random(1, &mut rng(seed));
        let frame = PauliString::from_indices(&[l]);
        match absorb_frame(&frame, &u).unwrap() {
            Absorbed::Measurement { basis, frame: f2 } => {
                prop_assert!(f2.is_identity_mod_phase());
                prop_assert!(max_abs_diff(basis.matrix(), &(u.matrix() * frame.to_matrix())) < 1e-12);
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }
}

const KINDS: [GateKind; 7] = [GateKind::H, GateKind::P, GateKind::T, GateKind::X, GateKind::Z, GateKind::Cnot, GateKind::Swap];

fn with_random_u1(mut c: GateCircuit, r: &mut ChaCha8Rng) -> GateCircuit {
    let q = r.gen_range(0..c.num_qubits);
    c.push(Gate::unitary(UnitaryMatrix::random(1, r), &[q]).unwrap()).unwrap();
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn modes_agree_on_random_circuits(seed in any::<u64>(), len in 0usize..5) {
        let mut r = rng(seed);
        let c = common::random_circuit(2, len, &KINDS, &mut r);
        for mode in [Mode::FourQubit, Mode::TwoQubitContinuous, Mode::TwoQubitDiscrete(build_set(SetName::S3, None, None).unwrap())] {
            let rep = verify(&c, &mode, 20, seed, None).unwrap();
            prop_assert!(rep.max_infidelity < 1e-9, "{}: {}", mode, rep.max_infidelity);
        }
        let c = with_random_u1(c, &mut r);
        for mode in [Mode::FourQubit, Mode::TwoQubitContinuous] {
            let rep = verify(&c, &mode, 20, seed, None).unwrap();
            prop_assert!(rep.max_infidelity < 1e-9, "{}: {}", mode, rep.max_infidelity);
        }
    }

    #[test]
    fn eager_policy_equals_deferred_then_flush(seed in any::<u64>(), len in 1usize..5, m in 0usize..3) {
        let mut r = rng(seed);
        let c = common::random_circuit(3, len, &KINDS, &mut r);
        let mode = [Mode::FourQubit, Mode::TwoQubitContinuous, Mode::TwoQubitDiscrete(build_set(SetName::S3, None, None).unwrap())][m].clone();
        let prog = compile(&c, &mode).unwrap();
        let eager = run(&prog, seed, Some(FramePolicy::Eager)).unwrap();
        let deferred = run(&prog, seed, Some(FramePolicy::Deferred)).unwrap();
        prop_assert!(eager.frame.is_identity_mod_phase());
        let f = fidelity(&eager.state, &deferred.flushed().unwrap()).unwrap();
        prop_assert!(f > 1.0 - 1e-10, "{}", f);
    }

    #[test]
    fn executions_are_seed_deterministic(seed in any::<u64>(), len in 1usize..5) {
        let mut r = rng(seed);
        let c = with_random_u1(common::random_circuit(2, len, &KINDS, &mut r), &mut r);
        let prog = compile(&c, &Mode::TwoQubitContinuous).unwrap();
        let a = run(&prog, seed, None).unwrap();
        let b = run(&prog, seed, None).unwrap();
        prop_assert_eq!(a.trace, b.trace);
        prop_assert_eq!(a.state.amplitudes(), b.state.amplitudes());
    }

    #[test]
    fn compiled_programs_are_measurement_only_and_round_trip(seed in any::<u64>(), len in 0usize..5) {
        let mut r = rng(seed);
        let c = with_random_u1(common::random_circuit(2, len, &KINDS, &mut r), &mut r);
        let text = circuit_to_json(&c).unwrap();
        prop_assert_eq!(&circuit_from_json(&text).unwrap(), &c);
        for mode in [Mode::FourQubit, Mode::TwoQubitContinuous] {
            let prog = compile(&c, &mode).unwrap();
            prop_assert!(prog.is_measurement_only());
            let json = program_to_json(&prog).unwrap();
            prop_assert_eq!(program_to_json(&program_from_json(&json).unwrap()).unwrap(), json);
        }
    }
}

/// Outcome counts of `n` seeded runs lie within three binomial standard
/// deviations of `n * p` for every outcome.
fn within_three_sigma(counts: &[usize], p: f64) -> bool {
    let n: usize = counts.iter().sum();
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    counts.iter().all(|&k| (k as f64 - n as f64 * p).abs() <= 3.0 * sd)
}

#[test]
fn bell_outcomes_on_half_entangled_input_are_uniform() {
    let psi = tensor(&PureState::random(1, &mut rng(1)), &make_bell_state(0).unwrap()).unwrap();
    let mut counts = [0usize; 4];
    let mut r = rng(2);
    for _ in 0..10_000 {
        counts[measure(&psi, &MeasurementSpec::bell(), &[0, 1], &mut r).unwrap().0] += 1;
    }
    assert!(within_three_sigma(&counts, 0.25), "{counts:?}");
}

#[test]
fn anticommuting_tableau_outcomes_are_fair() {
    let t = StabilizerTableau::from_strs(&["XX", "ZZ"]).unwrap();
    let m: PauliString = "ZI".parse().unwrap();
    let mut r = rng(3);
    let mut counts = [0usize; 2];
    for _ in 0..10_000 {
        let res = t.measure(&m, None, &mut r).unwrap();
        assert!(!res.deterministic);
        counts[usize::from(res.outcome == -1)] += 1;
    }
    assert!(within_three_sigma(&counts, 0.5), "{counts:?}");
    assert!(THREE_SIGMA_P < 0.003);
}
