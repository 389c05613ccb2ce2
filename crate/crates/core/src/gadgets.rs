//! Indirect gate constructions: teleportation, the four ancilla-based
//! methods, the recursive Pauli gadget and the `|a_cn>` ancilla.
//!
//! Every gadget is emitted into a [`Builder`] so the compiler can inline it;
//! the `gadget_*` functions wrap a single gadget as a standalone fragment.

use rand::Rng;

use crate::clifford::CliffordMap;
use crate::error::{Error, Result};
use crate::exec::Machine;
use crate::linalg::{c, UnitaryMatrix, STRUCT_TOL};
use crate::measure::{measure, post_select, MeasurementSpec};
use crate::pauli::PauliString;
use crate::program::{
    Adapt, Builder, Descriptor, FrameOp, GateSpec, Key, MeasurementInstruction, Program, Register, Wire,
};
use crate::state::{fidelity, PureState};
use crate::tableau::{StabilizerTableau, TableauMeasurement};

/// What the program does with the outcome-dependent byproduct.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrectionRule {
    /// `table[key]` goes into the Pauli frame on `wires`.
    Pauli {
        key: Key,
        wires: Vec<Wire>,
        table: Vec<PauliString>,
    },
    /// `gates[key]` is applied by a further rotated-Bell gadget.
    Measurement { key: Key, gates: Vec<UnitaryMatrix> },
    /// The byproduct stays in the frame as recorded by the core measurement.
    None,
}

impl CorrectionRule {
    /// Number of outcome tuples covered.
    pub fn len(&self) -> usize {
        match self {
            Self::Pauli { table, .. } => table.len(),
            Self::Measurement { gates, .. } => gates.len(),
            Self::None => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Registers and wires produced by emitting a gadget.
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    pub outputs: Vec<Wire>,
    pub prep: Vec<Register>,
    pub core: Vec<Register>,
    pub correction: CorrectionRule,
}

#[derive(Debug, Clone)]
pub struct GadgetFragment {
    pub name: String,
    /// Complete program: ancilla preparation, core measurements, correction.
    pub program: Program,
    pub ancilla_prep: Vec<MeasurementInstruction>,
    pub core_measurements: Vec<MeasurementInstruction>,
    pub correction: CorrectionRule,
    /// Physical qubits measured out and released.
    pub qubits_consumed: usize,
    /// Logical qubit `i` ends on `qubits_produced[i]`.
    pub qubits_produced: Vec<Wire>,
}

impl GadgetFragment {
    pub(crate) fn wrap(name: &str, b: Builder, inputs: Vec<Wire>, e: Emitted) -> Self {
        let program = b.finish(inputs, e.outputs.clone());
        let pick = |regs: &[Register]| -> Vec<MeasurementInstruction> {
            program
                .measurements()
                .into_iter()
                .filter(|m| regs.contains(&m.register))
                .cloned()
                .collect()
        };
        let ancilla_prep = pick(&e.prep);
        let core_measurements = pick(&e.core);
        let allocated: usize = program
            .ops
            .iter()
            .map(|op| match op {
                crate::program::Op::Alloc(ws) => ws.len(),
                _ => 0,
            })
            .sum();
        Self {
            name: name.into(),
            qubits_consumed: program.inputs.len() + allocated - e.outputs.len(),
            qubits_produced: e.outputs,
            ancilla_prep,
            core_measurements,
            correction: e.correction,
            program,
        }
    }
}

fn paulis1() -> Vec<PauliString> {
    (0..4).map(|j| PauliString::from_indices(&[j])).collect()
}

fn paulis2() -> Vec<PauliString> {
    (0..16).map(PauliString::two_qubit).collect()
}

fn check_arity(u: &UnitaryMatrix, arity: usize) -> Result<()> {
    if u.arity() != arity {
        return Err(Error::DimensionMismatch {
            expected: arity,
            found: u.arity(),
        });
    }
    Ok(())
}

/// How a two-qubit rotated Bell measurement is realised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Style {
    /// One measurement in the rotated Bell basis.
    #[default]
    Direct,
    /// The commuting pair `(W^ X W)⊗X` then `(W^ Z W)⊗Z`.
    Observables,
}

/// Outcome of a pairwise measurement: `to_j[key index]` is the Bell index.
#[derive(Debug, Clone, PartialEq)]
pub struct PairOutcome {
    pub key: Key,
    pub to_j: Vec<usize>,
    pub registers: Vec<Register>,
}

impl PairOutcome {
    /// `f(j)` tabulated over the key.
    pub fn table(&self, f: impl Fn(usize) -> PauliString) -> Vec<PauliString> {
        self.to_j.iter().map(|&j| f(j)).collect()
    }
}

/// Measures `targets` in the basis `(W^dagger ⊗ I)|Phi_j>` (plain Bell
/// basis when `gate` is `None`).
pub fn measure_pair(
    b: &mut Builder,
    gate: Option<&GateSpec>,
    targets: [Wire; 2],
    adapt: Adapt,
    style: Style,
) -> PairOutcome {
    match style {
        Style::Direct => {
            let d = gate.map_or(Descriptor::Bell, |g| Descriptor::RotatedBell(g.clone()));
            let r = b.measure(d, &targets, adapt);
            PairOutcome {
                key: Key::single(r, 4),
                to_j: vec![0, 1, 2, 3],
                registers: vec![r],
            }
        }
        Style::Observables => {
            let obs = |axis: usize| match gate {
                None => Descriptor::Pauli(PauliString::from_indices(&[axis, axis])),
                Some(g) => Descriptor::RotatedObservable {
                    gate: g.clone(),
                    axis,
                    partner: axis,
                },
            };
            let rx = b.measure(obs(1), &targets, adapt);
            let rz = b.measure(obs(3), &targets, adapt);
            // (xx, zz) = (+,+) Phi_0, (+,-) Phi_1, (-,-) Phi_2, (-,+) Phi_3
            PairOutcome {
                key: Key {
                    registers: vec![rx, rz],
                    radix: vec![2, 2],
                },
                to_j: vec![0, 1, 3, 2],
                registers: vec![rx, rz],
            }
        }
    }
}

/// A fresh Bell pair `|Phi_0>` up to the frame on its second half.
pub fn emit_bell_pair(b: &mut Builder) -> (Wire, Wire, Register) {
    let (w1, w2, regs) = emit_bell_pair_styled(b, Style::Direct);
    (w1, w2, regs[0])
}

pub fn emit_bell_pair_styled(b: &mut Builder, style: Style) -> (Wire, Wire, Vec<Register>) {
    let w = b.alloc(2);
    let o = measure_pair(b, None, [w[0], w[1]], Adapt::Absorb, style);
    b.frame(FrameOp::Table {
        key: o.key.clone(),
        wires: w[1..].to_vec(),
        table: o.table(|j| PauliString::from_indices(&[j])),
    });
    (w[0], w[1], o.registers)
}

/// Clifford images `u p u^dagger` of every `p`, or `None` for non-Clifford `u`.
pub fn clifford_images(u: &UnitaryMatrix, ps: &[PauliString]) -> Option<Vec<PauliString>> {
    let map = CliffordMap::from_unitary(u.matrix(), STRUCT_TOL)?;
    ps.iter().map(|p| map.conjugate(p).ok()).collect()
}

/// Method 1b: rotated Bell measurement of the input against one half of a
/// Bell pair. With `Adapt::Fixed` the gate must be Clifford and the input
/// frame is conjugated through it.
pub fn emit_1b(b: &mut Builder, gate: &GateSpec, input: Wire, adapt: Adapt) -> Result<Emitted> {
    emit_1b_styled(b, gate, input, adapt, Style::Direct)
}

pub fn emit_1b_styled(b: &mut Builder, gate: &GateSpec, input: Wire, adapt: Adapt, style: Style) -> Result<Emitted> {
    check_arity(&gate.unitary, 1)?;
    let map = match adapt {
        Adapt::Fixed => Some(CliffordMap::from_unitary(gate.unitary.matrix(), STRUCT_TOL).ok_or(Error::NotClifford)?),
        Adapt::Absorb => None,
    };
    let (a1, a2, prep) = emit_bell_pair_styled(b, style);
    let o = measure_pair(b, Some(gate), [input, a1], adapt, style);
    let table = o.table(|j| PauliString::from_indices(&[j]));
    b.frame(FrameOp::Table {
        key: o.key.clone(),
        wires: vec![a2],
        table: table.clone(),
    });
    if let Some(map) = map {
        b.transfer(&[input], &[a2], map);
    }
    b.release(&[input, a1]);
    Ok(Emitted {
        outputs: vec![a2],
        prep,
        core: o.registers,
        correction: CorrectionRule::Pauli {
            key: o.key,
            wires: vec![a2],
            table,
        },
    })
}

/// Method 2b: one 4-qubit rotated Bell measurement against two Bell pairs.
pub fn emit_2b(b: &mut Builder, gate: &GateSpec, inputs: [Wire; 2], adapt: Adapt) -> Result<Emitted> {
    check_arity(&gate.unitary, 2)?;
    let (p1, p3, k1) = emit_bell_pair(b);
    let (p2, p4, k2) = emit_bell_pair(b);
    let j = b.measure(Descriptor::RotatedBell(gate.clone()), &[inputs[0], inputs[1], p1, p2], adapt);
    b.table(j, &[p3, p4], paulis2());
    if adapt == Adapt::Fixed {
        let map = CliffordMap::from_unitary(gate.unitary.matrix(), STRUCT_TOL).ok_or(Error::NotClifford)?;
        b.transfer(&inputs, &[p3, p4], map);
    }
    b.release(&[inputs[0], inputs[1], p1, p2]);
    Ok(Emitted {
        outputs: vec![p3, p4],
        prep: vec![k1, k2],
        core: vec![j],
        correction: CorrectionRule::Pauli {
            key: Key::single(j, 16),
            wires: vec![p3, p4],
            table: paulis2(),
        },
    })
}

/// Applies the correction `gates[key]` with method 1b or 2b, selected by
/// the outcome.
fn emit_gate_correction(b: &mut Builder, key: Key, gates: &[GateSpec], wires: &[Wire]) -> Result<Vec<Wire>> {
    let outs = b.select(key, |b, i| {
        let e = match wires {
            [w] => emit_1b(b, &gates[i], *w, Adapt::Absorb)?,
            [w0, w1] => emit_2b(b, &gates[i], [*w0, *w1], Adapt::Absorb)?,
            _ => return Err(Error::Unsupported("corrections beyond two qubits".into())),
        };
        Ok(e.outputs)
    })?;
    if outs.iter().any(|o| o != &outs[0]) {
        return Err(Error::Invariant("correction branches disagree on outputs".into()));
    }
    Ok(outs[0].clone())
}

/// Method 1a: Bell measurement against the ancilla `(I ⊗ U)|Phi_0>`, itself
/// prepared by one rotated Bell measurement on fresh qubits. The byproduct
/// `U sigma_j U^dagger` is a Pauli frame update for Clifford `U` and a
/// further 1b gadget otherwise.
pub fn emit_1a(b: &mut Builder, gate: &GateSpec, input: Wire) -> Result<Emitted> {
    check_arity(&gate.unitary, 1)?;
    let a = b.alloc(2);
    let dagger = GateSpec::new(format!("{}†", gate.label), gate.unitary.adjoint());
    let k = b.measure(Descriptor::RotatedBell(dagger), &[a[1], a[0]], Adapt::Absorb);
    b.table(k, &a[..1], paulis1());
    let j = b.measure(Descriptor::Bell, &[input, a[0]], Adapt::Absorb);
    b.release(&[input, a[0]]);
    correct(b, gate, Key::single(j, 4), &paulis1(), vec![a[1]], vec![k], vec![j])
}

/// Method 2a: two Bell measurements against `(I ⊗ I ⊗ U)|Phi_0>_{13}|Phi_0>_{24}`.
pub fn emit_2a(b: &mut Builder, gate: &GateSpec, inputs: [Wire; 2]) -> Result<Emitted> {
    check_arity(&gate.unitary, 2)?;
    let a = b.alloc(4);
    let dagger = GateSpec::new(format!("{}†", gate.label), gate.unitary.adjoint());
    let k = b.measure(Descriptor::RotatedBell(dagger), &[a[2], a[3], a[0], a[1]], Adapt::Absorb);
    b.table(k, &a[..2], paulis2());
    emit_2a_core(b, gate, inputs, [a[0], a[1], a[2], a[3]], vec![k])
}

/// The measurement half of method 2a given a prepared ancilla.
pub fn emit_2a_core(
    b: &mut Builder,
    gate: &GateSpec,
    inputs: [Wire; 2],
    anc: [Wire; 4],
    prep: Vec<Register>,
) -> Result<Emitted> {
    emit_2a_core_styled(b, gate, inputs, anc, prep, Style::Direct)
}

pub fn emit_2a_core_styled(
    b: &mut Builder,
    gate: &GateSpec,
    inputs: [Wire; 2],
    anc: [Wire; 4],
    prep: Vec<Register>,
    style: Style,
) -> Result<Emitted> {
    let o1 = measure_pair(b, None, [inputs[0], anc[0]], Adapt::Absorb, style);
    let o2 = measure_pair(b, None, [inputs[1], anc[1]], Adapt::Absorb, style);
    b.release(&[inputs[0], inputs[1], anc[0], anc[1]]);
    let n2 = o2.to_j.len();
    let ps: Vec<PauliString> = (0..o1.to_j.len() * n2)
        .map(|i| PauliString::two_qubit(4 * o1.to_j[i / n2] + o2.to_j[i % n2]))
        .collect();
    let key = Key {
        registers: [o1.key.registers.clone(), o2.key.registers.clone()].concat(),
        radix: [o1.key.radix.clone(), o2.key.radix.clone()].concat(),
    };
    let core = [o1.registers, o2.registers].concat();
    correct(b, gate, key, &ps, vec![anc[2], anc[3]], prep, core)
}

fn correct(
    b: &mut Builder,
    gate: &GateSpec,
    key: Key,
    ps: &[PauliString],
    outputs: Vec<Wire>,
    prep: Vec<Register>,
    core: Vec<Register>,
) -> Result<Emitted> {
    if let Some(table) = clifford_images(&gate.unitary, ps) {
        b.frame(FrameOp::Table {
            key: key.clone(),
            wires: outputs.clone(),
            table: table.clone(),
        });
        return Ok(Emitted {
            outputs: outputs.clone(),
            prep,
            core,
            correction: CorrectionRule::Pauli {
                key,
                wires: outputs,
                table,
            },
        });
    }
    let u = gate.unitary.matrix();
    let gates = ps
        .iter()
        .map(|p| UnitaryMatrix::new(u * p.to_matrix() * u.adjoint()))
        .collect::<Result<Vec<_>>>()?;
    let specs: Vec<GateSpec> = ps
        .iter()
        .zip(&gates)
        .map(|(p, g)| GateSpec::new(format!("{0}{1}{0}†", gate.label, p), g.clone()))
        .collect();
    let outputs = emit_gate_correction(b, key.clone(), &specs, &outputs)?;
    Ok(Emitted {
        outputs,
        prep,
        core,
        correction: CorrectionRule::Measurement { key, gates },
    })
}

pub(crate) fn standalone(name: &str, n: usize, f: impl FnOnce(&mut Builder, Vec<Wire>) -> Result<Emitted>) -> Result<GadgetFragment> {
    let mut b = Builder::new();
    let inputs: Vec<Wire> = (0..n).map(|_| b.wire()).collect();
    let e = f(&mut b, inputs.clone())?;
    Ok(GadgetFragment::wrap(name, b, inputs, e))
}

/// Teleportation: Bell measurement against a fresh Bell pair, correction `sigma_j`.
pub fn gadget_teleport() -> GadgetFragment {
    standalone("teleport", 1, |b, w| {
        let (a1, a2, k) = emit_bell_pair(b);
        let j = b.measure(Descriptor::Bell, &[w[0], a1], Adapt::Absorb);
        b.table(j, &[a2], paulis1());
        b.release(&[w[0], a1]);
        Ok(Emitted {
            outputs: vec![a2],
            prep: vec![k],
            core: vec![j],
            correction: CorrectionRule::Pauli {
                key: Key::single(j, 4),
                wires: vec![a2],
                table: paulis1(),
            },
        })
    })
    .expect("teleportation is always constructible")
}

pub fn gadget_1a(u: &UnitaryMatrix) -> Result<GadgetFragment> {
    let g = GateSpec::new("U", u.clone());
    standalone("1a", 1, |b, w| emit_1a(b, &g, w[0]))
}

pub fn gadget_1b(u: &UnitaryMatrix) -> Result<GadgetFragment> {
    let g = GateSpec::new("U", u.clone());
    standalone("1b", 1, |b, w| emit_1b(b, &g, w[0], Adapt::Absorb))
}

pub fn gadget_2a(u: &UnitaryMatrix) -> Result<GadgetFragment> {
    let g = GateSpec::new("U", u.clone());
    standalone("2a", 2, |b, w| emit_2a(b, &g, [w[0], w[1]]))
}

pub fn gadget_2b(u: &UnitaryMatrix) -> Result<GadgetFragment> {
    let g = GateSpec::new("U", u.clone());
    standalone("2b", 2, |b, w| emit_2b(b, &g, [w[0], w[1]], Adapt::Absorb))
}

/// One run of the recursive Pauli gadget.
#[derive(Debug, Clone)]
pub struct PauliGadgetRun {
    pub rounds: usize,
    pub bell_measurements: usize,
    /// `sigma_l` applied to the input, up to global phase.
    pub output: PureState,
}

/// Applies `sigma_l` to a 1-qubit `input` with Bell measurements only,
/// repeating the two-measurement round until an outcome needs no
/// correction. Fails with `MaxRoundsExceeded` after `max_rounds`.
pub fn gadget_pauli_recursive<R: Rng + ?Sized>(
    l: usize,
    input: &PureState,
    rng: &mut R,
    max_rounds: usize,
) -> Result<PauliGadgetRun> {
    if l > 3 {
        return Err(Error::OutOfRange { index: l, limit: 4 });
    }
    if max_rounds == 0 {
        return Err(Error::InvalidSpec("max_rounds must be at least 1".into()));
    }
    check_arity_state(input, 1)?;
    let mut m = Machine::new(rng.gen());
    m.set_state(vec![Wire(0)], input.clone());
    let (rounds, bells) = m.pauli_gadget(Wire(0), l, max_rounds)?;
    Ok(PauliGadgetRun {
        rounds,
        bell_measurements: bells,
        output: m.state_of(&[Wire(0)])?,
    })
}

fn check_arity_state(s: &PureState, n: usize) -> Result<()> {
    if s.num_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: s.num_qubits(),
        });
    }
    Ok(())
}

/// `(|0000> + |0101> + |1011> + |1110>)/2`.
pub fn acn_state() -> PureState {
    let mut amps = vec![c(0.0, 0.0); 16];
    for i in [0b0000, 0b0101, 0b1011, 0b1110] {
        amps[i] = c(0.5, 0.0);
    }
    PureState::new(amps).expect("normalized")
}

/// Step-one state `|+>|0>|Phi_0>`.
fn acn_step_one() -> PureState {
    let mut amps = vec![c(0.0, 0.0); 16];
    for i in [0b0000, 0b0011, 0b1000, 0b1011] {
        amps[i] = c(0.5, 0.0);
    }
    PureState::new(amps).expect("normalized")
}

/// The parity measurements of the preparation: `IXXI` then `ZIZI`.
fn acn_measurements() -> (MeasurementSpec, MeasurementSpec) {
    let p = |s: &str| MeasurementSpec::observable(s.parse().expect("literal")).expect("hermitian");
    (p("IXXI"), p("ZIZI"))
}

/// `(k, l)` with `branch = (sigma_k ⊗ sigma_l ⊗ I ⊗ I)|a_cn>`, found by
/// matching against all 16 candidates.
pub fn classify_acn_branch(state: &PureState) -> Result<(usize, usize)> {
    check_arity_state(state, 4)?;
    let target = acn_state();
    let mut hits = Vec::new();
    for k in 0..4 {
        for l in 0..4 {
            let cand = PauliString::from_indices(&[k, l, 0, 0]).apply_to(&target, &[0, 1, 2, 3])?;
            if fidelity(&cand, state)? > 1.0 - 1e-10 {
                hits.push((k, l));
            }
        }
    }
    match hits.as_slice() {
        [one] => Ok(*one),
        [] => Err(Error::Invariant("branch is not a Pauli image of a_cn".into())),
        _ => Err(Error::Invariant("ambiguous a_cn classification".into())),
    }
}

/// Classification of the four `(IXXI, ZIZI)` outcome pairs, indexed
/// `[xx][zz]` with 0 for `+1`.
pub fn acn_branch_table() -> Result<[[(usize, usize); 2]; 2]> {
    let (xx, zz) = acn_measurements();
    let start = acn_step_one();
    let mut out = [[(0, 0); 2]; 2];
    for (m, row) in out.iter_mut().enumerate() {
        let (_, s1) = post_select(&start, &xx, &[0, 1, 2, 3], m)?;
        for (p, cell) in row.iter_mut().enumerate() {
            let (_, s2) = post_select(&s1, &zz, &[0, 1, 2, 3], p)?;
            *cell = classify_acn_branch(&s2)?;
        }
    }
    Ok(out)
}

/// Probabilities of the four `(IXXI, ZIZI)` branches from the step-one state.
pub fn acn_branch_probabilities() -> Result<[[f64; 2]; 2]> {
    let (xx, zz) = acn_measurements();
    let start = acn_step_one();
    let mut out = [[0.0; 2]; 2];
    for (m, row) in out.iter_mut().enumerate() {
        let (p1, s1) = post_select(&start, &xx, &[0, 1, 2, 3], m)?;
        for (p, cell) in row.iter_mut().enumerate() {
            *cell = p1 * post_select(&s1, &zz, &[0, 1, 2, 3], p)?.0;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct AcnPreparation {
    /// State after the parity measurements, before any fix-up.
    pub state: PureState,
    /// `IXXI` outcome, 0 for `+1`.
    pub xx: usize,
    /// `ZIZI` outcome, 0 for even parity.
    pub zz: usize,
    /// `state = (sigma_k ⊗ sigma_l ⊗ I ⊗ I)|a_cn>`.
    pub classification: (usize, usize),
    /// Every measurement outcome in order: Z, Z, X, Bell, IXXI, ZIZI.
    pub outcomes: Vec<usize>,
}

/// Prepares `|a_cn>` on four fresh qubits with 1- and 2-qubit measurements:
/// Z on qubits 1 and 2, X on qubit 1 and a Bell measurement on 3,4 (with
/// Pauli fix-ups), then `IXXI` and `ZIZI`. With `post_select` the last two
/// outcomes are forced to `+1`.
pub fn prepare_acn<R: Rng + ?Sized>(rng: &mut R, post_select_flag: bool) -> Result<AcnPreparation> {
    let mut state = PureState::random(4, rng);
    let mut outcomes = Vec::new();
    let fix = |state: &mut PureState, p: &str, q: &[usize]| -> Result<()> {
        *state = p.parse::<PauliString>()?.apply_to(state, q)?;
        Ok(())
    };
    let z = MeasurementSpec::observable("Z".parse()?)?;
    let x = MeasurementSpec::observable("X".parse()?)?;
    for q in [0, 1] {
        let (r, _, post) = measure(&state, &z, &[q], rng)?;
        state = post;
        if r == 1 {
            fix(&mut state, "X", &[q])?;
        }
        outcomes.push(r);
    }
    let (r, _, post) = measure(&state, &x, &[0], rng)?;
    state = post;
    if r == 1 {
        fix(&mut state, "Z", &[0])?;
    }
    outcomes.push(r);
    let (k, _, post) = measure(&state, &MeasurementSpec::bell(), &[2, 3], rng)?;
    state = PauliString::from_indices(&[k]).apply_to(&post, &[3])?;
    outcomes.push(k);
    let (xx, zz) = acn_measurements();
    let all = [0, 1, 2, 3];
    let (m, p) = if post_select_flag {
        state = post_select(&state, &xx, &all, 0)?.1;
        state = post_select(&state, &zz, &all, 0)?.1;
        (0, 0)
    } else {
        let (m, _, s) = measure(&state, &xx, &all, rng)?;
        let (p, _, s) = measure(&s, &zz, &all, rng)?;
        state = s;
        (m, p)
    };
    outcomes.extend([m, p]);
    Ok(AcnPreparation {
        classification: classify_acn_branch(&state)?,
        state,
        xx: m,
        zz: p,
        outcomes,
    })
}

/// Emits the `|a_cn>` preparation into a program. The four returned wires
/// hold `|a_cn>` up to the Pauli frame; the branch classification is a
/// frame update keyed by the two parity outcomes.
pub fn emit_acn(b: &mut Builder) -> Result<([Wire; 4], Vec<Register>)> {
    emit_acn_styled(b, Style::Direct)
}

/// As [`emit_acn`]; with `Style::Observables` the `|+>` is made by a
/// Hadamard 1b gadget on `|0>` and every two-qubit measurement is a Pauli
/// pair.
pub fn emit_acn_styled(b: &mut Builder, style: Style) -> Result<([Wire; 4], Vec<Register>)> {
    let mut w = b.alloc(4);
    let mut regs = Vec::new();
    let zx = |s: &str| Descriptor::Pauli(s.parse().expect("literal"));
    let flip = |s: &str| vec![PauliString::identity(1), s.parse().expect("literal")];
    for q in [0, 1] {
        let r = b.measure(zx("Z"), &w[q..q + 1], Adapt::Absorb);
        b.table(r, &w[q..q + 1], flip("X"));
        regs.push(r);
    }
    match style {
        Style::Direct => {
            let r = b.measure(zx("X"), &w[..1], Adapt::Absorb);
            b.table(r, &w[..1], flip("Z"));
            regs.push(r);
        }
        Style::Observables => {
            let h = GateSpec::new("H", UnitaryMatrix::h());
            let e = emit_1b_styled(b, &h, w[0], Adapt::Fixed, style)?;
            regs.extend(e.prep.iter().chain(&e.core));
            w[0] = e.outputs[0];
        }
    }
    let o = measure_pair(b, None, [w[2], w[3]], Adapt::Absorb, style);
    b.frame(FrameOp::Table {
        key: o.key.clone(),
        wires: w[3..].to_vec(),
        table: o.table(|j| PauliString::from_indices(&[j])),
    });
    regs.extend(&o.registers);
    let m = b.measure(zx("XX"), &w[1..3], Adapt::Absorb);
    let p = b.measure(zx("ZZ"), &[w[0], w[2]], Adapt::Absorb);
    regs.extend([m, p]);
    let classes = acn_branch_table()?;
    let table = (0..4)
        .map(|i| {
            let (k, l) = classes[i / 2][i % 2];
            PauliString::from_indices(&[k, l])
        })
        .collect();
    b.frame(FrameOp::Table {
        key: Key {
            registers: vec![m, p],
            radix: vec![2, 2],
        },
        wires: w[..2].to_vec(),
        table,
    });
    Ok(([w[0], w[1], w[2], w[3]], regs))
}

/// The stabilizer picture of the preparation: the step-one tableau, after
/// `IXXI`, after `ZIZI`, both with `+1` outcomes.
pub fn prepare_acn_stabilizer() -> Result<[StabilizerTableau; 3]> {
    let start = StabilizerTableau::from_strs(&["XIII", "IZII", "IIXX", "IIZZ"])?;
    let mut rng = rand::rngs::mock::StepRng::new(0, 0);
    let step = |t: &StabilizerTableau, m: &str, rng: &mut rand::rngs::mock::StepRng| -> Result<StabilizerTableau> {
        let TableauMeasurement { tableau, .. } = t.measure(&m.parse()?, Some(1), rng)?;
        Ok(tableau)
    };
    let mid = step(&start, "IXXI", &mut rng)?;
    let end = step(&mid, "ZIZI", &mut rng)?;
    Ok([start, mid, end])
}
