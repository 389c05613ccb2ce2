//! Worked examples with known answers, one group per module.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use mqc::clifford::{clifford_membership, conjugate_by_clifford, CliffordGate};
use mqc::compiler::{absorb_frame, compile, verify, verify_exhaustive, Absorbed, GateCircuit, GateKind, Mode};
use mqc::exec::enumerate_branches;
use mqc::gadgets::{
    acn_state, gadget_1a, gadget_1b, gadget_2a, gadget_2b, gadget_pauli_recursive, gadget_teleport, prepare_acn,
    prepare_acn_stabilizer, CorrectionRule,
};
use mqc::linalg::{c, equal_up_to_phase, kron, max_abs_diff, sigma, UnitaryMatrix};
use mqc::measure::{measure, outcome_probabilities, post_select, MeasurementSpec};
use mqc::msets::{
    augment_for_absorption, build_set, circuit_a, circuit_b, clifford_closure_check, rotated_bell_observables,
    verify_u_squared, Observable, SetName, SpecialU,
};
use mqc::pauli::{pauli_commutes, pauli_mul, PauliString};
use mqc::program::Descriptor;
use mqc::state::{apply_gate, equal_up_to_global_phase, fidelity, make_bell_state, tensor, PureState};
use mqc::tableau::{stabilizer_equal, tableau_to_state, StabilizerTableau};
use mqc::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn p(s: &str) -> PauliString {
    s.parse().unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn amps_close(s: &PureState, want: &[(f64, f64)]) {
    for (a, &(re, im)) in s.amplitudes().iter().zip(want) {
        assert!((a - c(re, im)).norm() < 1e-12, "{a} vs {re}+{im}i");
    }
}

// ---------------------------------------------------------------------------
// states and measurements

#[test]
fn bell_states_have_listed_signs() {
    let h = FRAC_1_SQRT_2;
    amps_close(&make_bell_state(0).unwrap(), &[(h, 0.0), (0.0, 0.0), (0.0, 0.0), (h, 0.0)]);
    amps_close(&make_bell_state(2).unwrap(), &[(0.0, 0.0), (h, 0.0), (-h, 0.0), (0.0, 0.0)]);
    amps_close(&make_bell_state(3).unwrap(), &[(h, 0.0), (0.0, 0.0), (0.0, 0.0), (-h, 0.0)]);
    assert!(make_bell_state(4).is_err());
}

#[test]
fn gate_application_examples() {
    let psi = PureState::random(2, &mut rng(0));
    let same = apply_gate(&psi, &UnitaryMatrix::identity(2), &[0, 1]).unwrap();
    assert!(fidelity(&same, &psi).unwrap() > 1.0 - 1e-12);
    let plus = apply_gate(&PureState::zero(1).unwrap(), &UnitaryMatrix::h(), &[0]).unwrap();
    assert!(fidelity(&plus, &PureState::plus()).unwrap() > 1.0 - 1e-12);
    let start = tensor(&PureState::plus(), &PureState::zero(1).unwrap()).unwrap();
    let bell = apply_gate(&start, &UnitaryMatrix::cnot(), &[0, 1]).unwrap();
    assert!(fidelity(&bell, &make_bell_state(0).unwrap()).unwrap() > 1.0 - 1e-12);
    assert!(apply_gate(&psi, &UnitaryMatrix::cnot(), &[1, 1]).is_err());
    assert!(apply_gate(&psi, &UnitaryMatrix::h(), &[0, 1]).is_err());
}

#[test]
fn teleportation_identity_in_the_engine() {
    let zero = PureState::zero(1).unwrap();
    let s = tensor(&zero, &make_bell_state(0).unwrap()).unwrap();
    let probs = outcome_probabilities(&s, &MeasurementSpec::bell(), &[0, 1]).unwrap();
    for (j, pr) in probs.iter().enumerate() {
        assert!((pr - 0.25).abs() < 1e-12);
        let (_, post) = post_select(&s, &MeasurementSpec::bell(), &[0, 1], j).unwrap();
        let q3 = mqc::state::extract_factor(&post, &[2], 1e-10).unwrap();
        let w3 = PauliString::from_indices(&[j]).apply_to(&zero, &[0]).unwrap();
        assert!(equal_up_to_global_phase(&q3, &w3, 1e-10).unwrap(), "{j}");
    }
    let psi = PureState::random(1, &mut rng(1));
    let s = tensor(&psi, &make_bell_state(0).unwrap()).unwrap();
    let (pr, post) = post_select(&s, &MeasurementSpec::bell(), &[0, 1], 0).unwrap();
    assert!((pr - 0.25).abs() < 1e-12);
    let out = mqc::state::extract_factor(&post, &[2], 1e-10).unwrap();
    assert!(equal_up_to_global_phase(&out, &psi, 1e-10).unwrap());
}

#[test]
fn z_on_zero_is_certain() {
    let z = MeasurementSpec::observable(p("Z")).unwrap();
    let (k, pr, post) = measure(&PureState::zero(1).unwrap(), &z, &[0], &mut rng(2)).unwrap();
    assert_eq!((k, pr), (0, 1.0));
    assert!(fidelity(&post, &PureState::zero(1).unwrap()).unwrap() > 1.0 - 1e-12);
    let one = PureState::basis(1, 1).unwrap();
    assert!(matches!(post_select(&one, &z, &[0], 0), Err(Error::ImpossibleBranch(_))));
}

#[test]
fn incomplete_parity_measurement_is_even() {
    let step_one = tensor(
        &tensor(&PureState::plus(), &PureState::zero(1).unwrap()).unwrap(),
        &make_bell_state(0).unwrap(),
    )
    .unwrap();
    let xx = MeasurementSpec::observable(p("XX")).unwrap();
    let probs = outcome_probabilities(&step_one, &xx, &[1, 2]).unwrap();
    assert!((probs[0] - 0.5).abs() < 1e-12 && (probs[1] - 0.5).abs() < 1e-12);
    let (_, s) = post_select(&step_one, &xx, &[1, 2], 0).unwrap();
    let (_, s) = post_select(&s, &MeasurementSpec::observable(p("ZZ")).unwrap(), &[0, 2], 0).unwrap();
    assert!(fidelity(&s, &acn_state()).unwrap() > 1.0 - 1e-12);
}

#[test]
fn fidelity_and_phase_examples() {
    let psi = PureState::random(2, &mut rng(3));
    assert!((fidelity(&psi, &psi).unwrap() - 1.0).abs() < 1e-12);
    let (zero, one) = (PureState::zero(1).unwrap(), PureState::basis(1, 1).unwrap());
    assert!(fidelity(&zero, &one).unwrap() < 1e-15);
    let phased = PureState::new(psi.amplitudes().iter().map(|a| a * c(0.0, PI / 7.0).exp()).collect()).unwrap();
    assert!(equal_up_to_global_phase(&psi, &phased, 1e-10).unwrap());
    let y0 = p("Y").apply_to(&zero, &[0]).unwrap();
    assert!(equal_up_to_global_phase(&y0, &one, 1e-10).unwrap());
    assert!(!equal_up_to_global_phase(&PureState::plus(), &zero, 1e-10).unwrap());
    assert!(fidelity(&psi, &zero).is_err());
}

#[test]
fn double_bell_pair_is_a_product() {
    let b = make_bell_state(0).unwrap();
    let bb = tensor(&b, &b).unwrap();
    let t = StabilizerTableau::from_strs(&["XXII", "ZZII", "IIXX", "IIZZ"]).unwrap();
    assert!(fidelity(&bb, &tableau_to_state(&t).unwrap()).unwrap() > 1.0 - 1e-12);
}

// ---------------------------------------------------------------------------
// Pauli and Clifford algebra, tableaus

#[test]
fn pauli_products() {
    assert_eq!(pauli_mul(&p("X"), &p("Z")).unwrap(), p("-iY"));
    for s in ["X", "Y", "Z", "XYZ", "-ZZ"] {
        assert!(pauli_mul(&p(s), &p(s)).unwrap().is_identity_mod_phase());
        assert_eq!(pauli_mul(&p(s), &p(s)).unwrap().sign(), Some(1));
    }
    assert_eq!(pauli_mul(&p("XI"), &p("IX")).unwrap(), p("XX"));
    assert!(pauli_mul(&p("X"), &p("XX")).is_err());
}

#[test]
fn commutation_examples() {
    assert!(pauli_commutes(&p("XX"), &p("ZZ")).unwrap());
    assert!(!pauli_commutes(&p("X"), &p("Z")).unwrap());
    assert!(!pauli_commutes(&p("IXXI"), &p("IZII")).unwrap());
}

#[test]
fn clifford_conjugation_examples() {
    let cn = CliffordGate::Cnot { control: 0, target: 1 };
    assert_eq!(conjugate_by_clifford(&p("XI"), &cn).unwrap(), p("XX"));
    assert_eq!(conjugate_by_clifford(&p("IZ"), &cn).unwrap(), p("ZZ"));
    assert_eq!(conjugate_by_clifford(&p("X"), &CliffordGate::H(0)).unwrap(), p("Z"));
    assert!(conjugate_by_clifford(&p("X"), &CliffordGate::H(3)).is_err());
}

#[test]
fn tableau_evolution_examples() {
    let t = |g: &[&str]| StabilizerTableau::from_strs(g).unwrap();
    let [start, mid, end] = prepare_acn_stabilizer().unwrap();
    assert_eq!(start, t(&["XIII", "IZII", "IIXX", "IIZZ"]));
    assert_eq!(mid, t(&["XIII", "IXXI", "IIXX", "IZZZ"]));
    assert_eq!(end, t(&["ZIZI", "XXXI", "XIXX", "IZZZ"]));
    assert!(stabilizer_equal(&end, &t(&["XIXX", "ZIZI", "IXIX", "IZZZ"])));
    let from_gens = tableau_to_state(&t(&["XIXX", "ZIZI", "IXIX", "IZZZ"])).unwrap();
    assert!(fidelity(&from_gens, &acn_state()).unwrap() > 1.0 - 1e-10);
    let r = t(&["Z"]).measure(&p("Z"), None, &mut rng(0)).unwrap();
    assert_eq!((r.outcome, r.deterministic), (1, true));
    assert!(fidelity(&tableau_to_state(&t(&["Z"])).unwrap(), &PureState::zero(1).unwrap()).unwrap() > 1.0 - 1e-12);
    assert!(fidelity(&tableau_to_state(&t(&["XX", "ZZ"])).unwrap(), &make_bell_state(0).unwrap()).unwrap() > 1.0 - 1e-12);
    assert!(stabilizer_equal(&t(&["XX", "ZZ"]), &t(&["XX", "-YY"])));
    assert!(!stabilizer_equal(&t(&["Z"]), &t(&["-Z"])));
}

#[test]
fn clifford_membership_examples() {
    assert!(clifford_membership(&UnitaryMatrix::cnot(), 1e-10).unwrap());
    assert!(!clifford_membership(&UnitaryMatrix::rz(FRAC_PI_4), 1e-10).unwrap());
    assert!(clifford_membership(&UnitaryMatrix::identity(2), 1e-10).unwrap());
}

// ---------------------------------------------------------------------------
// gadgets

#[test]
fn teleport_outcomes_are_uniform() {
    let frag = gadget_teleport();
    let psi = PureState::random(1, &mut rng(4));
    let mut by_core = [0.0; 4];
    for b in enumerate_branches(&frag.program, Some(&psi), 0).unwrap() {
        by_core[*b.outcomes.last().unwrap()] += b.probability;
        assert!(fidelity(&b.result.flushed().unwrap(), &psi).unwrap() > 1.0 - 1e-10);
    }
    for pr in by_core {
        assert!((pr - 0.25).abs() < 1e-10);
    }
}

#[test]
fn method_1a_examples() {
    let frag = gadget_1a(&UnitaryMatrix::h()).unwrap();
    for b in enumerate_branches(&frag.program, Some(&PureState::zero(1).unwrap()), 0).unwrap() {
        assert!(fidelity(&b.result.flushed().unwrap(), &PureState::plus()).unwrap() > 1.0 - 1e-10);
    }
    let z = gadget_1a(&UnitaryMatrix::z()).unwrap();
    let CorrectionRule::Pauli { table, .. } = z.correction else {
        panic!("Z corrections are Pauli");
    };
    assert!(table.iter().all(|t| t.weight() <= 1));
}

#[test]
fn method_1b_examples() {
    let psi = PureState::random(1, &mut rng(5));
    let want = apply_gate(&psi, &UnitaryMatrix::h(), &[0]).unwrap();
    let frag = gadget_1b(&UnitaryMatrix::h()).unwrap();
    assert!(matches!(frag.correction, CorrectionRule::Pauli { .. }));
    let branches = enumerate_branches(&frag.program, Some(&psi), 0).unwrap();
    // Every Bell-pair outcome k is covered, so non-zero k is relabeled too.
    assert_eq!(branches.len(), 16);
    for b in branches {
        assert!(fidelity(&b.result.flushed().unwrap(), &want).unwrap() > 1.0 - 1e-10);
    }
    // u = Z: the rotated Bell basis is the Bell basis relabeled.
    let spec = MeasurementSpec::rotated_bell(&UnitaryMatrix::z());
    for j in 0..4 {
        let v = spec.projector(j);
        let hits = (0..4)
            .filter(|&k| max_abs_diff(&v, &MeasurementSpec::bell().projector(k)) < 1e-12)
            .count();
        assert_eq!(hits, 1);
    }
}

#[test]
fn method_2a_examples() {
    let cn = gadget_2a(&UnitaryMatrix::cnot()).unwrap();
    match &cn.correction {
        CorrectionRule::Pauli { table, .. } => assert_eq!(table.len(), 16),
        other => panic!("{other:?}"),
    }
    let input = tensor(&PureState::plus(), &PureState::zero(1).unwrap()).unwrap();
    for b in enumerate_branches(&cn.program, Some(&input), 0).unwrap() {
        assert!(fidelity(&b.result.flushed().unwrap(), &make_bell_state(0).unwrap()).unwrap() > 1.0 - 1e-10);
    }
    let id = gadget_2a(&UnitaryMatrix::identity(2)).unwrap();
    let psi = PureState::random(2, &mut rng(6));
    for b in enumerate_branches(&id.program, Some(&psi), 0).unwrap() {
        assert!(fidelity(&b.result.flushed().unwrap(), &psi).unwrap() > 1.0 - 1e-10);
    }
}

#[test]
fn method_2b_examples() {
    let mut r = rng(7);
    let u = UnitaryMatrix::random(2, &mut r);
    let psi = PureState::random(2, &mut r);
    let frag = gadget_2b(&u).unwrap();
    assert!(matches!(frag.correction, CorrectionRule::Pauli { .. }));
    let want = apply_gate(&psi, &u, &[0, 1]).unwrap();
    let core = frag.core_measurements[0].register;
    let mut by_core = [0.0; 16];
    for b in enumerate_branches(&frag.program, Some(&psi), 0).unwrap() {
        let pos = frag.program.measurements().iter().position(|m| m.register == core).unwrap();
        by_core[b.outcomes[pos]] += b.probability;
        assert!(fidelity(&b.result.flushed().unwrap(), &want).unwrap() > 1.0 - 1e-10);
    }
    for pr in by_core {
        assert!((pr - 1.0 / 16.0).abs() < 1e-10);
    }
    let swap = gadget_2b(&UnitaryMatrix::swap()).unwrap();
    let swapped = psi.permute(&[1, 0]).unwrap();
    for b in enumerate_branches(&swap.program, Some(&psi), 0).unwrap() {
        assert!(fidelity(&b.result.flushed().unwrap(), &swapped).unwrap() > 1.0 - 1e-10);
    }
}

#[test]
fn identity_pauli_gadget_returns_input() {
    let psi = PureState::random(1, &mut rng(8));
    let run = gadget_pauli_recursive(0, &psi, &mut rng(9), 64).unwrap();
    assert!(fidelity(&run.output, &psi).unwrap() > 1.0 - 1e-10);
}

#[test]
fn acn_examples() {
    let prep = prepare_acn(&mut rng(10), true).unwrap();
    assert!(fidelity(&prep.state, &acn_state()).unwrap() > 1.0 - 1e-12);
    for seed in 0..40 {
        let b = prepare_acn(&mut rng(seed), false).unwrap();
        let (k, l) = b.classification;
        let want = PauliString::from_indices(&[k, l, 0, 0]).apply_to(&acn_state(), &[0, 1, 2, 3]).unwrap();
        assert!(fidelity(&b.state, &want).unwrap() > 1.0 - 1e-10);
    }
}

// ---------------------------------------------------------------------------
// measurement sets

#[test]
fn rotated_bell_observable_examples() {
    let (a, b) = rotated_bell_observables(&UnitaryMatrix::identity(1)).unwrap();
    assert!(max_abs_diff(&a, &p("XX").to_matrix()) < 1e-12);
    assert!(max_abs_diff(&b, &p("ZZ").to_matrix()) < 1e-12);
    let (a, b) = rotated_bell_observables(&UnitaryMatrix::h()).unwrap();
    assert!(max_abs_diff(&a, &p("ZX").to_matrix()) < 1e-12);
    assert!(max_abs_diff(&b, &p("XZ").to_matrix()) < 1e-12);
    let (a, _) = rotated_bell_observables(&UnitaryMatrix::phase()).unwrap();
    assert!(equal_up_to_phase(&a, &p("YX").to_matrix(), 1e-12));
    let s0 = build_set(SetName::S0, None, Some(&UnitaryMatrix::t())).unwrap();
    assert!(s0.contains(&p("XZ").to_matrix(), 1e-10));
    assert!(s0.contains(&a, 1e-10));
}

#[test]
fn set_examples() {
    let s3 = build_set(SetName::S3, None, None).unwrap();
    let want: Vec<_> = ["Z", "XX", "ZZ", "XZ"].iter().map(|s| p(s).to_matrix()).collect();
    for m in &want {
        assert!(s3.contains(m, 1e-10));
    }
    let last = kron(&((sigma(1) + sigma(2)) * c(FRAC_1_SQRT_2, 0.0)), &sigma(1));
    assert!(s3.contains(&last, 1e-10));
    assert_eq!(s3.observables.len(), 5);
    let s1 = build_set(SetName::S1, Some(FRAC_PI_4), None).unwrap();
    let zy = kron(&((sigma(3) + sigma(2)) * c(FRAC_1_SQRT_2, 0.0)), &sigma(3));
    assert!(max_abs_diff(&s1.observables.last().unwrap().matrix(), &zy) < 1e-12);
    assert!(matches!(build_set(SetName::S1, Some(PI / 2.0), None), Err(Error::DisallowedTheta(_))));
    assert!(build_set(SetName::S0, None, Some(&UnitaryMatrix::h())).is_err());
}

#[test]
fn absorption_examples() {
    let s3 = build_set(SetName::S3, None, None).unwrap();
    let aug = augment_for_absorption(&s3, &p("X")).unwrap();
    let w = UnitaryMatrix::rz(FRAC_PI_4).matrix() * sigma(1);
    let u2 = UnitaryMatrix::new(w).unwrap();
    let (a, b) = rotated_bell_observables(&u2).unwrap();
    assert!(aug.contains(&a, 1e-10) && aug.contains(&b, 1e-10));
    assert!(aug.observables.len() > s3.observables.len());
    let same = augment_for_absorption(&s3, &p("I")).unwrap();
    assert_eq!(same.observables.len(), s3.observables.len());
    match absorb_frame(&p("X"), &UnitaryMatrix::h()).unwrap() {
        Absorbed::Gate { frame, .. } => assert!(frame.eq_mod_phase(&p("Z"))),
        other => panic!("{other:?}"),
    }
    assert!(augment_for_absorption(&s3, &p("XX")).is_err());
}

#[test]
fn observables_are_involutions() {
    let sets = [
        build_set(SetName::S0, None, Some(&UnitaryMatrix::t())).unwrap(),
        build_set(SetName::S1, Some(0.3), None).unwrap(),
        build_set(SetName::S2, Some(1.1), None).unwrap(),
        build_set(SetName::S3, None, None).unwrap().absorption_closure().unwrap(),
    ];
    for set in &sets {
        for o in &set.observables {
            let m = o.matrix();
            let d = m.nrows();
            assert!(max_abs_diff(&(&m * &m), &mqc::linalg::Matrix::identity(d, d)) < 1e-10, "{o}");
            assert!(m.trace().norm() < 1e-10, "{o}");
            let back: Observable = o.to_string().parse().unwrap();
            assert!(max_abs_diff(&back.matrix(), &m) < 1e-12);
        }
    }
}

#[test]
fn circuit_a_and_b_examples() {
    let mut r = rng(11);
    let psi = PureState::random(2, &mut r);
    let su = SpecialU::new(1.0, 0.5).unwrap();
    let u = su.unitary();
    let ua = apply_gate(&psi, u, &[0, 1]).unwrap();
    let a = circuit_a(u).unwrap();
    let branches = enumerate_branches(&a.program, Some(&psi), 0).unwrap();
    assert_eq!(branches.len(), 16 * 16);
    for b in &branches {
        let with_byproduct = b.result.frame.apply_to(&ua, &[0, 1]).unwrap();
        assert!(fidelity(&b.result.state, &with_byproduct).unwrap() > 1.0 - 1e-10);
    }
    // B leaves its byproduct in front of U^T, where no frame can hold it.
    let fb = circuit_b(u).unwrap();
    let core = fb.core_measurements[0].register;
    let pos = fb.program.measurements().iter().position(|m| m.register == core).unwrap();
    for b in enumerate_branches(&fb.program, Some(&psi), 0).unwrap() {
        let pj = PauliString::two_qubit(b.outcomes[pos]).apply_to(&psi, &[0, 1]).unwrap();
        let want = apply_gate(&pj, &u.transpose(), &[0, 1]).unwrap();
        assert!(fidelity(&b.result.flushed().unwrap(), &want).unwrap() > 1.0 - 1e-10);
    }
    for b in enumerate_branches(&circuit_a(&UnitaryMatrix::identity(2)).unwrap().program, Some(&psi), 0).unwrap() {
        assert!(fidelity(&b.result.flushed().unwrap(), &psi).unwrap() > 1.0 - 1e-10);
    }
}

#[test]
fn u_squared_examples() {
    let (prod, ok) = verify_u_squared(&SpecialU::new(0.0, 0.7).unwrap());
    assert!(ok && max_abs_diff(&prod, &mqc::linalg::Matrix::identity(4, 4)) < 1e-12);
    assert!(verify_u_squared(&SpecialU::new(1.0, 0.5).unwrap()).1);
    assert!(verify_u_squared(&SpecialU::default()).1);
}

#[test]
fn closure_examples() {
    let mut r = rng(12);
    assert!(clifford_closure_check(&UnitaryMatrix::cnot(), 4, 100, &mut r).unwrap());
    assert!(clifford_closure_check(&UnitaryMatrix::identity(2), 4, 10, &mut r).unwrap());
    let su = SpecialU::new(1.0, 0.5).unwrap();
    assert!(matches!(clifford_closure_check(su.unitary(), 4, 10, &mut r), Err(Error::NotClifford)));
}

// ---------------------------------------------------------------------------
// compiler

fn circuit(n: usize, gates: &[(GateKind, &[usize])]) -> GateCircuit {
    let mut c = GateCircuit::new(n);
    for (k, t) in gates {
        c.gate(*k, t).unwrap();
    }
    c
}

#[test]
fn hadamard_in_s3_uses_only_set_observables() {
    let set = build_set(SetName::S3, None, None).unwrap();
    let closure = set.absorption_closure().unwrap();
    let prog = compile(&circuit(1, &[(GateKind::H, &[0])]), &Mode::TwoQubitDiscrete(set)).unwrap();
    assert!(prog.is_measurement_only());
    for m in prog.measurements() {
        assert!(mqc::compiler::descriptor_in_set(&m.spec, &closure), "{:?}", m.spec);
    }
}

#[test]
fn continuous_cnot_contains_the_ancilla_factory() {
    let prog = compile(&circuit(2, &[(GateKind::Cnot, &[0, 1])]), &Mode::TwoQubitContinuous).unwrap();
    let ms = prog.measurements();
    let parity = |s: &str| ms.iter().any(|m| matches!(&m.spec, Descriptor::Pauli(q) if *q == p(s)));
    assert!(parity("XX") && parity("ZZ"));
    let bells = ms.iter().filter(|m| matches!(m.spec, Descriptor::Bell)).count();
    assert!(bells >= 2, "{bells}");
}

#[test]
fn empty_circuit_gives_zero_state() {
    for mode in [Mode::FourQubit, Mode::TwoQubitContinuous] {
        let c = GateCircuit::new(2);
        let prog = compile(&c, &mode).unwrap();
        assert!(prog.measurements().iter().all(|m| matches!(&m.spec, Descriptor::Pauli(q) if *q == p("Z"))));
        let r = verify(&c, &mode, 5, 0, None).unwrap();
        assert!(r.max_infidelity < 1e-12, "{}", r.max_infidelity);
    }
}

#[test]
fn t_gate_in_four_qubit_mode_is_one_wide_measurement() {
    let prog = compile(&circuit(1, &[(GateKind::T, &[0])]), &Mode::FourQubit).unwrap();
    let wide = prog.measurements().iter().filter(|m| m.targets.len() == 4).count();
    assert_eq!(wide, 1);
}

#[test]
fn seeds_with_different_traces_agree() {
    let c = circuit(2, &[(GateKind::H, &[0]), (GateKind::T, &[0]), (GateKind::Cnot, &[0, 1]), (GateKind::H, &[1])]);
    let want = c.simulate().unwrap();
    let prog = compile(&c, &Mode::TwoQubitContinuous).unwrap();
    let a = mqc::compiler::run(&prog, 1, None).unwrap();
    let b = mqc::compiler::run(&prog, 2, None).unwrap();
    assert_ne!(a.trace.outcome_values(), b.trace.outcome_values());
    for r in [a, b] {
        assert!(fidelity(&r.flushed().unwrap(), &want).unwrap() > 1.0 - 1e-10);
    }
}

#[test]
fn four_qubit_single_gates_are_exhaustively_sound() {
    for (k, t) in [(GateKind::H, &[0usize][..]), (GateKind::T, &[0]), (GateKind::Cnot, &[0, 1])] {
        let (worst, n) = verify_exhaustive(&circuit(2, &[(k, t)]), &Mode::FourQubit, 0).unwrap();
        assert!(worst < 1e-10 && n >= 16, "{k}: {worst} over {n}");
    }
}

#[test]
fn discrete_s3_random_verification() {
    let c = circuit(2, &[(GateKind::H, &[0]), (GateKind::T, &[0]), (GateKind::Cnot, &[0, 1]), (GateKind::H, &[1])]);
    let r = verify(&c, &Mode::TwoQubitDiscrete(build_set(SetName::S3, None, None).unwrap()), 200, 3, None).unwrap();
    assert!(r.max_infidelity < 1e-9, "{}", r.max_infidelity);
}
