//! The measurement-program IR.
//!
//! Programs talk about virtual wires. A wire is bound to a physical qubit by
//! `Alloc` and freed by `Release`; loops rename carried wires between
//! iterations. Nothing here is a unitary: the only quantum operation is
//! `Measure`, and everything else updates classical state (registers, the
//! Pauli frame, walk accumulators).

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::clifford::CliffordMap;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, UnitaryMatrix};
use crate::measure::MeasurementSpec;
use crate::pauli::PauliString;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Wire(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Register(pub usize);

impl fmt::Display for Wire {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.0)
    }
}

impl fmt::Display for Register {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FramePolicy {
    /// Pauli corrections are applied as soon as they appear, by the
    /// recursive Bell-measurement gadget.
    Eager,
    /// Corrections accumulate in the frame and are reported at the end.
    #[default]
    Deferred,
}

/// A gate named for display, with its matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    pub label: String,
    pub unitary: UnitaryMatrix,
}

impl GateSpec {
    pub fn new(label: impl Into<String>, unitary: UnitaryMatrix) -> Self {
        Self {
            label: label.into(),
            unitary,
        }
    }

    pub fn arity(&self) -> usize {
        self.unitary.arity()
    }
}

/// What a measurement instruction measures.
#[derive(Debug, Clone, PartialEq)]
pub enum Descriptor {
    /// A Hermitian Pauli observable; outcome 0 is `+1`.
    Pauli(PauliString),
    /// The Bell basis; outcome `j` is `Phi_j`.
    Bell,
    /// `{(W^dagger ⊗ I)(Phi_{j_1} ⊗ ...)}`, targets `[first halves.., second halves..]`.
    RotatedBell(GateSpec),
    /// `(W^dagger sigma_axis W) ⊗ sigma_partner` on two qubits.
    RotatedObservable {
        gate: GateSpec,
        axis: usize,
        partner: usize,
    },
    /// Arbitrary complete set of orthogonal projectors.
    Projectors(Vec<Matrix>),
}

impl Descriptor {
    pub fn rotated_bell(label: &str, u: UnitaryMatrix) -> Self {
        Self::RotatedBell(GateSpec::new(label, u))
    }

    pub fn arity(&self) -> usize {
        match self {
            Self::Pauli(p) => p.num_qubits(),
            Self::Bell | Self::RotatedObservable { .. } => 2,
            Self::RotatedBell(g) => 2 * g.arity(),
            Self::Projectors(ps) => ps.first().map_or(0, |p| p.nrows().trailing_zeros() as usize),
        }
    }

    pub fn num_outcomes(&self) -> usize {
        match self {
            Self::Pauli(_) | Self::RotatedObservable { .. } => 2,
            Self::Bell => 4,
            Self::RotatedBell(g) => 1 << (2 * g.arity()),
            Self::Projectors(ps) => ps.len(),
        }
    }

    /// The dense measurement.
    pub fn spec(&self) -> Result<MeasurementSpec> {
        Ok(match self {
            Self::Pauli(p) => MeasurementSpec::observable(p.clone())?,
            Self::Bell => MeasurementSpec::bell(),
            Self::RotatedBell(g) => MeasurementSpec::rotated_bell(&g.unitary),
            Self::RotatedObservable { gate, axis, partner } => {
                let o = self.observable_matrix(gate, *axis, *partner)?;
                let id = Matrix::identity(4, 4);
                let half = crate::linalg::c(0.5, 0.0);
                MeasurementSpec::Projectors(vec![(&id + &o) * half, (&id - &o) * half])
            }
            Self::Projectors(ps) => MeasurementSpec::projectors(ps.clone())?,
        })
    }

    fn observable_matrix(&self, gate: &GateSpec, axis: usize, partner: usize) -> Result<Matrix> {
        if gate.arity() != 1 || !(1..4).contains(&axis) || !(1..4).contains(&partner) {
            return Err(Error::InvalidSpec(format!("bad rotated observable {self}")));
        }
        let w = gate.unitary.matrix();
        let first = w.adjoint() * crate::linalg::sigma(axis) * w;
        Ok(crate::linalg::kron(&first, &crate::linalg::sigma(partner)))
    }

    /// The two-qubit observable of a `RotatedObservable`, densified.
    pub fn observable(&self) -> Option<Matrix> {
        match self {
            Self::RotatedObservable { gate, axis, partner } => self.observable_matrix(gate, *axis, *partner).ok(),
            Self::Pauli(p) => Some(p.to_matrix()),
            _ => None,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match self {
            Self::Pauli(p) if !p.is_hermitian() => Err(Error::NotHermitian(p.to_string())),
            Self::RotatedObservable { gate, axis, partner } => self.observable_matrix(gate, *axis, *partner).map(|_| ()),
            Self::Projectors(_) => self.spec().map(|_| ()),
            _ => Ok(()),
        }
    }
}

const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Pauli(p) => write!(f, "{p}"),
            Self::Bell => write!(f, "bell"),
            Self::RotatedBell(g) => write!(f, "bell[{}]", g.label),
            Self::RotatedObservable { gate, axis, partner } => {
                write!(f, "({0}^ {1} {0})⊗{2}", gate.label, LETTERS[*axis], LETTERS[*partner])
            }
            Self::Projectors(ps) => write!(f, "projectors[{}]", ps.len()),
        }
    }
}

/// How the Pauli frame on the targets interacts with a measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Adapt {
    /// The frame is pushed into the measurement: the executor measures
    /// `F Pi_r F^dagger` and the register holds the frame-free outcome `r`.
    /// For Pauli-type measurements this is only a relabeling; for rotated
    /// bases it premultiplies the rotation by the frame.
    #[default]
    Absorb,
    /// The measurement is performed exactly as written; the frames on the
    /// targets must be moved by a following `Transfer`.
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementInstruction {
    pub spec: Descriptor,
    pub targets: Vec<Wire>,
    pub register: Register,
    pub adapt: Adapt,
}

/// Mixed-radix index over register values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Key {
    pub registers: Vec<Register>,
    pub radix: Vec<usize>,
}

impl Key {
    pub fn single(r: Register, radix: usize) -> Self {
        Self {
            registers: vec![r],
            radix: vec![radix],
        }
    }

    pub fn size(&self) -> usize {
        self.radix.iter().product()
    }

    /// `sum_i v_i prod_{k>i} radix_k`.
    pub fn index(&self, values: &[usize]) -> usize {
        values.iter().zip(&self.radix).fold(0, |acc, (v, r)| acc * r + v)
    }
}

/// Classical bookkeeping driven by outcomes.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameOp {
    /// Unconditional: the ideal state is multiplied by `pauli` on `wires`.
    Pauli { wires: Vec<Wire>, pauli: PauliString },
    /// Conditional Pauli byproduct: `table[key]` on `wires`.
    Table {
        key: Key,
        wires: Vec<Wire>,
        table: Vec<PauliString>,
    },
    /// Moves the frame on `from` through a Clifford onto `to`.
    Transfer {
        from: Vec<Wire>,
        to: Vec<Wire>,
        map: CliffordMap,
    },
    /// Fails the run unless the frame on `wires` is trivial.
    RequireClear { wires: Vec<Wire> },
    /// Resets walk accumulator `acc` to the `width`-qubit identity.
    AccReset { acc: usize, width: usize },
    /// Left-multiplies accumulator `acc` by `table[key]`.
    AccMul {
        acc: usize,
        key: Key,
        table: Vec<PauliString>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Until {
    /// Frame on the wires is the identity up to phase.
    FrameIdentity(Vec<Wire>),
    /// Accumulator equals `target` up to phase.
    Accumulator { acc: usize, target: PauliString },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopOp {
    pub label: String,
    pub body: Vec<Op>,
    /// `(current, next)`: after each pass `current` is rebound to `next`.
    pub carry: Vec<(Wire, Wire)>,
    pub until: Until,
    /// Test the condition before the first pass (`while`) or only after
    /// each pass (`do ... while`).
    pub check_first: bool,
    pub max_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Alloc(Vec<Wire>),
    Release(Vec<Wire>),
    Measure(MeasurementInstruction),
    Frame(FrameOp),
    /// Runs `branches[key]`.
    Select { key: Key, branches: Vec<Vec<Op>> },
    Loop(LoopOp),
}

/// A measurement-only program.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    /// Wires bound to the caller's input state, in its qubit order.
    pub inputs: Vec<Wire>,
    pub ops: Vec<Op>,
    /// Logical qubit `i` ends on `outputs[i]`.
    pub outputs: Vec<Wire>,
    pub frame_policy: FramePolicy,
}

impl Program {
    /// Structural checks: wires live when used, registers written before
    /// read, table sizes, and loop carry discipline.
    pub fn validate(&self) -> Result<()> {
        let mut v = Validator {
            live: self.inputs.iter().copied().collect(),
            written: BTreeSet::new(),
            accs: BTreeSet::new(),
            peak: 0,
        };
        if v.live.len() != self.inputs.len() {
            return Err(Error::InvalidSpec("duplicate input wire".into()));
        }
        v.peak = v.live.len();
        v.block(&self.ops)?;
        for w in &self.outputs {
            if !v.live.contains(w) {
                return Err(Error::InvalidSpec(format!("output {w} is not live at the end")));
            }
        }
        Ok(())
    }

    /// Largest number of simultaneously live wires, walking loops once.
    pub fn num_physical_qubits(&self) -> usize {
        let mut v = Validator {
            live: self.inputs.iter().copied().collect(),
            written: BTreeSet::new(),
            accs: BTreeSet::new(),
            peak: self.inputs.len(),
        };
        let _ = v.block(&self.ops);
        v.peak
    }

    /// Every measurement instruction in program order, loop bodies and
    /// select branches included once.
    pub fn measurements(&self) -> Vec<&MeasurementInstruction> {
        fn walk<'a>(ops: &'a [Op], out: &mut Vec<&'a MeasurementInstruction>) {
            for op in ops {
                match op {
                    Op::Measure(m) => out.push(m),
                    Op::Select { branches, .. } => branches.iter().for_each(|b| walk(b, out)),
                    Op::Loop(l) => walk(&l.body, out),
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.ops, &mut out);
        out
    }

    /// True when every quantum instruction is a measurement. The IR has no
    /// unitary instruction, so this checks that every measurement is a
    /// valid projective measurement.
    pub fn is_measurement_only(&self) -> bool {
        self.measurements().iter().all(|m| m.spec.validate().is_ok())
    }
}

struct Validator {
    live: BTreeSet<Wire>,
    written: BTreeSet<Register>,
    accs: BTreeSet<usize>,
    peak: usize,
}

impl Validator {
    fn need_live(&self, wires: &[Wire]) -> Result<()> {
        let mut seen = BTreeSet::new();
        for w in wires {
            if !self.live.contains(w) {
                return Err(Error::InvalidSpec(format!("wire {w} used while not live")));
            }
            if !seen.insert(*w) {
                return Err(Error::DuplicateTarget(w.0));
            }
        }
        Ok(())
    }

    fn need_key(&self, key: &Key, len: usize) -> Result<()> {
        if key.registers.len() != key.radix.len() {
            return Err(Error::InvalidSpec("key radix length mismatch".into()));
        }
        for r in &key.registers {
            if !self.written.contains(r) {
                return Err(Error::UnwrittenRegister(r.0));
            }
        }
        if key.size() != len {
            return Err(Error::InvalidSpec(format!("table of {len} entries for key of size {}", key.size())));
        }
        Ok(())
    }

    fn block(&mut self, ops: &[Op]) -> Result<()> {
        for op in ops {
            self.op(op)?;
        }
        Ok(())
    }

    fn op(&mut self, op: &Op) -> Result<()> {
        match op {
            Op::Alloc(ws) => {
                for w in ws {
                    if !self.live.insert(*w) {
                        return Err(Error::InvalidSpec(format!("wire {w} allocated twice")));
                    }
                }
                self.peak = self.peak.max(self.live.len());
            }
            Op::Release(ws) => {
                self.need_live(ws)?;
                for w in ws {
                    self.live.remove(w);
                }
            }
            Op::Measure(m) => {
                self.need_live(&m.targets)?;
                m.spec.validate()?;
                if m.spec.arity() != m.targets.len() {
                    return Err(Error::ArityMismatch {
                        arity: m.spec.arity(),
                        targets: m.targets.len(),
                    });
                }
                self.written.insert(m.register);
            }
            Op::Frame(f) => self.frame(f)?,
            Op::Select { key, branches } => {
                self.need_key(key, branches.len())?;
                let mut outcomes = Vec::new();
                for b in branches {
                    let mut sub = Validator {
                        live: self.live.clone(),
                        written: self.written.clone(),
                        accs: self.accs.clone(),
                        peak: self.peak,
                    };
                    sub.block(b)?;
                    outcomes.push(sub);
                }
                if let Some(first) = outcomes.first() {
                    if outcomes.iter().any(|o| o.live != first.live) {
                        return Err(Error::InvalidSpec("select branches leave different wires live".into()));
                    }
                    self.live = first.live.clone();
                    self.written = outcomes
                        .iter()
                        .skip(1)
                        .fold(first.written.clone(), |acc, o| acc.intersection(&o.written).copied().collect());
                    self.peak = outcomes.iter().map(|o| o.peak).max().unwrap_or(self.peak);
                }
            }
            Op::Loop(l) => {
                if l.max_iters == 0 {
                    return Err(Error::InvalidSpec("loop with max_iters = 0".into()));
                }
                let cur: Vec<Wire> = l.carry.iter().map(|c| c.0).collect();
                self.need_live(&cur)?;
                let mut sub = Validator {
                    live: self.live.clone(),
                    written: self.written.clone(),
                    accs: self.accs.clone(),
                    peak: self.peak,
                };
                match &l.until {
                    Until::FrameIdentity(ws) => sub.need_live(ws)?,
                    Until::Accumulator { acc, .. } => {
                        if !self.accs.contains(acc) {
                            return Err(Error::InvalidSpec(format!("accumulator {acc} used before reset")));
                        }
                    }
                }
                sub.block(&l.body)?;
                let mut end = sub.live.clone();
                for (c, n) in &l.carry {
                    if !end.remove(n) {
                        return Err(Error::InvalidSpec(format!("carried wire {n} not live after loop body")));
                    }
                    end.insert(*c);
                }
                if end != self.live {
                    return Err(Error::InvalidSpec(format!("loop `{}` leaks or loses wires", l.label)));
                }
                self.peak = sub.peak;
            }
        }
        Ok(())
    }

    fn frame(&mut self, f: &FrameOp) -> Result<()> {
        let width = |ws: &[Wire], p: &PauliString| -> Result<()> {
            if p.num_qubits() != ws.len() {
                return Err(Error::DimensionMismatch {
                    expected: ws.len(),
                    found: p.num_qubits(),
                });
            }
            Ok(())
        };
        match f {
            FrameOp::Pauli { wires, pauli } => {
                self.need_live(wires)?;
                width(wires, pauli)?;
            }
            FrameOp::Table { key, wires, table } => {
                self.need_live(wires)?;
                self.need_key(key, table.len())?;
                for p in table {
                    width(wires, p)?;
                }
            }
            FrameOp::Transfer { from, to, map } => {
                self.need_live(from)?;
                self.need_live(to)?;
                if map.num_qubits() != from.len() || from.len() != to.len() {
                    return Err(Error::InvalidSpec("transfer width mismatch".into()));
                }
            }
            FrameOp::RequireClear { wires } => self.need_live(wires)?,
            FrameOp::AccReset { acc, .. } => {
                self.accs.insert(*acc);
            }
            FrameOp::AccMul { acc, key, table } => {
                if !self.accs.contains(acc) {
                    return Err(Error::InvalidSpec(format!("accumulator {acc} used before reset")));
                }
                self.need_key(key, table.len())?;
            }
        }
        Ok(())
    }
}

/// Incremental program construction with fresh wire, register and
/// accumulator ids.
#[derive(Debug, Default)]
pub struct Builder {
    next_wire: usize,
    next_reg: usize,
    next_acc: usize,
    ops: Vec<Op>,
}

impl Builder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn wire(&mut self) -> Wire {
        self.next_wire += 1;
        Wire(self.next_wire - 1)
    }

    pub fn register(&mut self) -> Register {
        self.next_reg += 1;
        Register(self.next_reg - 1)
    }

    pub fn accumulator(&mut self) -> usize {
        self.next_acc += 1;
        self.next_acc - 1
    }

    pub fn push(&mut self, op: Op) {
        self.ops.push(op);
    }

    /// Allocates `n` fresh wires.
    pub fn alloc(&mut self, n: usize) -> Vec<Wire> {
        let ws: Vec<Wire> = (0..n).map(|_| self.wire()).collect();
        self.push(Op::Alloc(ws.clone()));
        ws
    }

    pub fn release(&mut self, ws: &[Wire]) {
        self.push(Op::Release(ws.to_vec()));
    }

    pub fn measure(&mut self, spec: Descriptor, targets: &[Wire], adapt: Adapt) -> Register {
        let register = self.register();
        self.push(Op::Measure(MeasurementInstruction {
            spec,
            targets: targets.to_vec(),
            register,
            adapt,
        }));
        register
    }

    pub fn frame(&mut self, f: FrameOp) {
        self.push(Op::Frame(f));
    }

    /// Byproduct table keyed by one register.
    pub fn table(&mut self, r: Register, wires: &[Wire], table: Vec<PauliString>) {
        let key = Key::single(r, table.len());
        self.frame(FrameOp::Table {
            key,
            wires: wires.to_vec(),
            table,
        });
    }

    pub fn transfer(&mut self, from: &[Wire], to: &[Wire], map: CliffordMap) {
        self.frame(FrameOp::Transfer {
            from: from.to_vec(),
            to: to.to_vec(),
            map,
        });
    }

    /// Runs `f` against an empty op list and returns what it pushed.
    pub fn nested<T>(&mut self, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<(Vec<Op>, T)> {
        let outer = std::mem::take(&mut self.ops);
        let res = f(self);
        let inner = std::mem::replace(&mut self.ops, outer);
        Ok((inner, res?))
    }

    /// Emits `Select { key, .. }` with branch `i` built by `f(self, i)`.
    /// Every branch starts from the same id counters, so structurally equal
    /// branches allocate the same wires and registers.
    pub fn select<T>(&mut self, key: Key, mut f: impl FnMut(&mut Self, usize) -> Result<T>) -> Result<Vec<T>> {
        let start = (self.next_wire, self.next_reg, self.next_acc);
        let mut end = start;
        let mut branches = Vec::with_capacity(key.size());
        let mut outs = Vec::with_capacity(key.size());
        for i in 0..key.size() {
            (self.next_wire, self.next_reg, self.next_acc) = start;
            let (ops, t) = self.nested(|b| f(b, i))?;
            end = (end.0.max(self.next_wire), end.1.max(self.next_reg), end.2.max(self.next_acc));
            branches.push(ops);
            outs.push(t);
        }
        (self.next_wire, self.next_reg, self.next_acc) = end;
        self.push(Op::Select { key, branches });
        Ok(outs)
    }

    pub fn finish(self, inputs: Vec<Wire>, outputs: Vec<Wire>) -> Program {
        Program {
            inputs,
            ops: self.ops,
            outputs,
            frame_policy: FramePolicy::Deferred,
        }
    }
}
