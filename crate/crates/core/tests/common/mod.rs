//! Shared helpers for the integration targets.
#![allow(dead_code)]

use mqc::clifford::CliffordGate;
use mqc::compiler::{GateCircuit, GateKind};
use mqc::measure::{outcome_probabilities, post_select, MeasurementSpec};
use mqc::pauli::PauliString;
use mqc::state::{apply_gate, fidelity, PureState};
use mqc::tableau::StabilizerTableau;
use mqc::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_clifford<R: Rng>(n: usize, rng: &mut R) -> CliffordGate {
    let q = rng.gen_range(0..n);
    let other = if n > 1 {
        let r = rng.gen_range(0..n - 1);
        r + usize::from(r >= q)
    } else {
        q
    };
    match rng.gen_range(0..7) {
        0 => CliffordGate::H(q),
        1 => CliffordGate::P(q),
        2 => CliffordGate::X(q),
        3 => CliffordGate::Y(q),
        4 => CliffordGate::Z(q),
        5 if n > 1 => CliffordGate::Cnot {
            control: q,
            target: other,
        },
        6 if n > 1 => CliffordGate::Swap(q, other),
        _ => CliffordGate::H(q),
    }
}

/// A signed, non-identity Hermitian Pauli.
pub fn random_hermitian_pauli<R: Rng>(n: usize, rng: &mut R) -> PauliString {
    loop {
        let letters: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        let p = PauliString::from_indices(&letters);
        if !p.is_identity_mod_phase() {
            return if rng.gen_bool(0.5) { p } else { p.negated() };
        }
    }
}

/// Runs one random Clifford and Pauli-measurement sequence on both the
/// tableau and the dense engine, forcing random outcomes where the outcome
/// is not determined. Returns the number of determinism or outcome
/// mismatches and the worst state infidelity seen.
pub fn agree_once(seed: u64, max_qubits: usize) -> Result<(usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_qubits);
    let all: Vec<usize> = (0..n).collect();
    let mut tab = StabilizerTableau::zero(n);
    let mut dense = PureState::zero(n)?;
    let (mut mismatches, mut worst) = (0usize, 0.0f64);
    for _ in 0..rng.gen_range(5..40) {
        if rng.gen_bool(0.6) {
            let g = random_clifford(n, &mut rng);
            tab = tab.apply_clifford(&g)?;
            dense = apply_gate(&dense, &g.unitary(), &g.targets())?;
            continue;
        }
        let m = random_hermitian_pauli(n, &mut rng);
        let spec = MeasurementSpec::observable(m.clone())?;
        let probs = outcome_probabilities(&dense, &spec, &all)?;
        let dense_det = probs.iter().any(|&p| p < 1e-12);
        let forced: i8 = if rng.gen_bool(0.5) { 1 } else { -1 };
        let r = tab.measure(&m, (!dense_det).then_some(forced), &mut rng)?;
        // Outcome 0 of an observable is its +1 eigenspace.
        let idx = if r.outcome == 1 { 0 } else { 1 };
        if r.deterministic != dense_det || (dense_det && probs[idx] < 0.5) || (!dense_det && r.outcome != forced) {
            mismatches += 1;
        }
        dense = post_select(&dense, &spec, &all, idx)?.1;
        tab = r.tableau;
        worst = worst.max(1.0 - fidelity(&tab.to_state()?, &dense)?);
    }
    worst = worst.max(1.0 - fidelity(&tab.to_state()?, &dense)?);
    Ok((mismatches, worst))
}

/// Random circuit on `n` qubits over the named gates.
pub fn random_circuit<R: Rng>(n: usize, len: usize, kinds: &[GateKind], rng: &mut R) -> GateCircuit {
    let mut c = GateCircuit::new(n);
    for _ in 0..len {
        let k = kinds[rng.gen_range(0..kinds.len())];
        let a = rng.gen_range(0..n);
        let t: Vec<usize> = if k.arity() == 2 {
            let b = (a + rng.gen_range(1..n)) % n;
            vec![a, b]
        } else {
            vec![a]
        };
        c.gate(k, &t).expect("valid gate");
    }
    c
}
