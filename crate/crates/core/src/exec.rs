//! Dense execution of measurement programs.
//!
//! The executor keeps one statevector over the currently live physical
//! qubits plus a Pauli frame. Throughout a run the physical state equals
//! the frame applied to the ideal state.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::PauliFrame;
use crate::linalg::UnitaryMatrix;
use crate::measure::{measure, post_select, split};
use crate::pauli::PauliString;
use crate::program::{
    Adapt, Descriptor, FrameOp, FramePolicy, GateSpec, Key, LoopOp, MeasurementInstruction, Op, Program, Register,
    Until, Wire,
};
use crate::state::{extract_factor, tensor, PureState};

/// Safety cap on rounds of the recursive Pauli gadget.
pub const MAX_GADGET_ROUNDS: usize = 64;

const FACTOR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceCounts {
    pub measurements: usize,
    /// Two-qubit Bell-type measurements, rotated or not.
    pub bell: usize,
    pub four_qubit: usize,
    /// Pauli and rotated two-qubit observables.
    pub observables: usize,
    pub gadget_invocations: usize,
    pub gadget_rounds: usize,
    pub gadget_bells: usize,
    /// Most physical qubits alive at once.
    pub high_water: usize,
}

impl ResourceCounts {
    fn count(&mut self, d: &Descriptor) {
        self.measurements += 1;
        match d {
            Descriptor::Bell => self.bell += 1,
            Descriptor::RotatedBell(g) if g.arity() == 1 => self.bell += 1,
            Descriptor::RotatedBell(_) => self.four_qubit += 1,
            Descriptor::Pauli(_) | Descriptor::RotatedObservable { .. } => self.observables += 1,
            Descriptor::Projectors(ps) if ps.first().is_some_and(|p| p.nrows() == 16) => self.four_qubit += 1,
            Descriptor::Projectors(_) => {}
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutcomeTrace {
    /// Register values in program order (frame-free labels).
    pub outcomes: Vec<(Register, usize)>,
    /// What was physically measured, in the same order. Not recorded
    /// during branch enumeration.
    pub physical: Vec<Descriptor>,
    /// Born probability of the realized branch of program measurements.
    pub probability: f64,
    /// Iteration count of every loop execution, by label.
    pub loops: Vec<(String, usize)>,
    pub resources: ResourceCounts,
}

impl OutcomeTrace {
    pub fn outcome_values(&self) -> Vec<usize> {
        self.outcomes.iter().map(|o| o.1).collect()
    }

    pub fn loop_iterations(&self, label: &str) -> Vec<usize> {
        self.loops.iter().filter(|l| l.0 == label).map(|l| l.1).collect()
    }
}

#[derive(Debug, Clone)]
pub struct ExecResult {
    /// Physical state of the output wires, in output order.
    pub state: PureState,
    /// Residual frame on the outputs (identity under the eager policy).
    pub frame: PauliString,
    pub trace: OutcomeTrace,
}

impl ExecResult {
    /// The output with the residual frame applied.
    pub fn flushed(&self) -> Result<PureState> {
        let targets: Vec<usize> = (0..self.state.num_qubits()).collect();
        self.frame.apply_to(&self.state, &targets)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExecOptions {
    pub seed: u64,
    /// Register values to force, in program order; sampling resumes once
    /// they run out.
    pub forced: Option<Vec<usize>>,
    /// Overrides the program's own policy.
    pub policy: Option<FramePolicy>,
}

impl ExecOptions {
    pub fn seeded(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Runs `program` on `input` (over `program.inputs`, in order).
pub fn execute(program: &Program, input: Option<&PureState>, opts: &ExecOptions) -> Result<ExecResult> {
    let mut m = Machine::start(program, input, opts)?;
    match m.advance()? {
        None => m.finish(program),
        Some(_) => unreachable!("choices only pause enumeration"),
    }
}

/// One realized branch of `enumerate_branches`.
#[derive(Debug, Clone)]
pub struct Branch {
    pub outcomes: Vec<usize>,
    pub probability: f64,
    pub result: ExecResult,
}

/// Every outcome branch of nonzero probability. Loop-free programs under
/// the deferred policy only.
pub fn enumerate_branches(program: &Program, input: Option<&PureState>, seed: u64) -> Result<Vec<Branch>> {
    let mut out = Vec::new();
    for_each_branch(program, input, seed, |b| {
        out.push(b);
        Ok(())
    })?;
    Ok(out)
}

/// Streaming form of `enumerate_branches`, depth first in outcome order.
pub fn for_each_branch(
    program: &Program,
    input: Option<&PureState>,
    seed: u64,
    mut visit: impl FnMut(Branch) -> Result<()>,
) -> Result<()> {
    if program.frame_policy == FramePolicy::Eager {
        return Err(Error::Unsupported("branch enumeration under the eager policy".into()));
    }
    if contains_loop(&program.ops) {
        return Err(Error::Unsupported("branch enumeration of looping programs".into()));
    }
    let opts = ExecOptions {
        seed,
        forced: None,
        policy: Some(FramePolicy::Deferred),
    };
    let mut root = Machine::start(program, input, &opts)?;
    root.pause = true;
    root.record_physical = false;
    let mut stack = vec![root];
    while let Some(mut m) = stack.pop() {
        match m.advance()? {
            None => {
                let result = m.finish(program)?;
                visit(Branch {
                    outcomes: result.trace.outcome_values(),
                    probability: result.trace.probability,
                    result,
                })?;
            }
            Some(choice) => {
                // Every child gets its own post-measurement state.
                m.state = None;
                let mut live: Vec<(usize, f64, PureState)> = choice
                    .branches
                    .into_iter()
                    .enumerate()
                    .filter_map(|(r, (p, post))| post.map(|s| (r, p, s)))
                    .collect();
                let Some((r0, p0, post0)) = (!live.is_empty()).then(|| live.remove(0)) else {
                    continue;
                };
                for (r, p, post) in live.into_iter().rev() {
                    let mut child = m.clone();
                    child.commit(choice.instruction, &choice.physical, r, p, post);
                    stack.push(child);
                }
                m.commit(choice.instruction, &choice.physical, r0, p0, post0);
                stack.push(m);
            }
        }
    }
    Ok(())
}

fn contains_loop(ops: &[Op]) -> bool {
    ops.iter().any(|op| match op {
        Op::Loop(_) => true,
        Op::Select { branches, .. } => branches.iter().any(|b| contains_loop(b)),
        _ => false,
    })
}

/// A measurement whose outcome the caller must pick.
struct Choice<'a> {
    instruction: &'a MeasurementInstruction,
    physical: Descriptor,
    /// Indexed by ideal outcome.
    branches: Vec<(f64, Option<PureState>)>,
}

#[derive(Clone)]
enum Cursor<'a> {
    Block { ops: &'a [Op], pc: usize },
    Loop { op: &'a LoopOp, iters: usize },
}

/// Live dense state, classical memory and a resumable program position.
#[derive(Clone)]
pub(crate) struct Machine<'a> {
    state: Option<PureState>,
    slots: Vec<Wire>,
    frame: PauliFrame,
    registers: BTreeMap<Register, usize>,
    accs: BTreeMap<usize, PauliString>,
    rng: ChaCha8Rng,
    forced: Vec<usize>,
    cursor: usize,
    pause: bool,
    record_physical: bool,
    policy: FramePolicy,
    next_temp: usize,
    stack: Vec<Cursor<'a>>,
    trace: OutcomeTrace,
}

impl<'a> Machine<'a> {
    fn start(program: &'a Program, input: Option<&PureState>, opts: &ExecOptions) -> Result<Self> {
        program.validate()?;
        let n_in = input.map_or(0, |s| s.num_qubits());
        if n_in != program.inputs.len() {
            return Err(Error::DimensionMismatch {
                expected: program.inputs.len(),
                found: n_in,
            });
        }
        let mut m = Self::new(opts.seed);
        m.state = input.cloned();
        m.slots = program.inputs.clone();
        m.trace.resources.high_water = m.slots.len();
        m.forced = opts.forced.clone().unwrap_or_default();
        m.policy = opts.policy.unwrap_or(program.frame_policy);
        m.stack.push(Cursor::Block {
            ops: &program.ops,
            pc: 0,
        });
        Ok(m)
    }

    pub(crate) fn new(seed: u64) -> Self {
        Self {
            state: None,
            slots: Vec::new(),
            frame: PauliFrame::new(),
            registers: BTreeMap::new(),
            accs: BTreeMap::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            forced: Vec::new(),
            cursor: 0,
            pause: false,
            record_physical: true,
            policy: FramePolicy::Deferred,
            next_temp: usize::MAX,
            stack: Vec::new(),
            trace: OutcomeTrace {
                probability: 1.0,
                ..OutcomeTrace::default()
            },
        }
    }

    fn finish(mut self, program: &Program) -> Result<ExecResult> {
        if program.outputs.is_empty() {
            return Err(Error::InvalidSpec("program has no outputs".into()));
        }
        let state = self
            .state_of(&program.outputs)
            .map_err(|_| Error::Invariant("outputs entangled with leftover wires".into()))?;
        Ok(ExecResult {
            state,
            frame: self.frame.get(&program.outputs),
            trace: std::mem::take(&mut self.trace),
        })
    }

    fn slots_of(&self, wires: &[Wire]) -> Result<Vec<usize>> {
        wires
            .iter()
            .map(|w| {
                self.slots
                    .iter()
                    .position(|s| s == w)
                    .ok_or_else(|| Error::InvalidSpec(format!("wire {w} is not live")))
            })
            .collect()
    }

    /// Runs until the program ends or, when pausing, until a measurement
    /// outcome has to be chosen.
    fn advance(&mut self) -> Result<Option<Choice<'a>>> {
        loop {
            let op: &'a Op = match self.stack.last_mut() {
                None => return Ok(None),
                Some(Cursor::Block { ops, pc }) => {
                    let ops: &'a [Op] = ops;
                    if *pc == ops.len() {
                        self.stack.pop();
                        self.end_of_block()?;
                        continue;
                    }
                    *pc += 1;
                    &ops[*pc - 1]
                }
                Some(Cursor::Loop { .. }) => unreachable!("a loop cursor always has its body above it"),
            };
            match op {
                Op::Alloc(ws) => {
                    for w in ws {
                        self.alloc(*w)?;
                    }
                }
                Op::Release(ws) => self.release(ws)?,
                Op::Measure(m) => {
                    if let Some(c) = self.measure_instruction(m)? {
                        return Ok(Some(c));
                    }
                }
                Op::Frame(f) => {
                    self.frame_op(f)?;
                    if self.policy == FramePolicy::Eager {
                        self.flush_eagerly()?;
                    }
                }
                Op::Select { key, branches } => {
                    let idx = self.key_value(key)?;
                    self.stack.push(Cursor::Block {
                        ops: &branches[idx],
                        pc: 0,
                    });
                }
                Op::Loop(l) => {
                    if l.check_first && self.until_holds(&l.until)? {
                        self.trace.loops.push((l.label.clone(), 0));
                    } else {
                        self.stack.push(Cursor::Loop { op: l, iters: 0 });
                        self.stack.push(Cursor::Block { ops: &l.body, pc: 0 });
                    }
                }
            }
        }
    }

    fn end_of_block(&mut self) -> Result<()> {
        let Some(Cursor::Loop { op, iters }) = self.stack.last_mut() else {
            return Ok(());
        };
        let l: &'a LoopOp = op;
        *iters += 1;
        let n = *iters;
        for (cur, next) in &l.carry {
            let slot = self.slots_of(&[*next])?[0];
            self.slots[slot] = *cur;
            self.frame.rename(*next, *cur);
        }
        if self.until_holds(&l.until)? {
            self.stack.pop();
            self.trace.loops.push((l.label.clone(), n));
        } else if n == l.max_iters {
            return Err(Error::MaxRoundsExceeded(l.max_iters));
        } else {
            self.stack.push(Cursor::Block { ops: &l.body, pc: 0 });
        }
        Ok(())
    }

    pub(crate) fn alloc(&mut self, w: Wire) -> Result<()> {
        let fresh = PureState::random(1, &mut self.rng);
        self.state = Some(match self.state.take() {
            Some(s) => tensor(&s, &fresh)?,
            None => fresh,
        });
        self.slots.push(w);
        self.trace.resources.high_water = self.trace.resources.high_water.max(self.slots.len());
        Ok(())
    }

    pub(crate) fn release(&mut self, ws: &[Wire]) -> Result<()> {
        let gone = self.slots_of(ws)?;
        let keep: Vec<usize> = (0..self.slots.len()).filter(|i| !gone.contains(i)).collect();
        let state = self.state.take().expect("live wires imply a state");
        self.state = if keep.is_empty() {
            None
        } else {
            Some(
                extract_factor(&state, &keep, FACTOR_TOL)
                    .map_err(|_| Error::Invariant(format!("released wires {ws:?} are still entangled")))?,
            )
        };
        self.slots = keep.iter().map(|&i| self.slots[i]).collect();
        self.frame.take(ws);
        Ok(())
    }

    fn key_value(&self, key: &Key) -> Result<usize> {
        let vals = key
            .registers
            .iter()
            .map(|r| self.registers.get(r).copied().ok_or(Error::UnwrittenRegister(r.0)))
            .collect::<Result<Vec<_>>>()?;
        Ok(key.index(&vals))
    }

    fn measure_instruction(&mut self, m: &'a MeasurementInstruction) -> Result<Option<Choice<'a>>> {
        let (physical, perm) = match m.adapt {
            Adapt::Absorb => adapt(&m.spec, &self.frame.get(&m.targets))?,
            Adapt::Fixed => (m.spec.clone(), (0..m.spec.num_outcomes()).collect()),
        };
        let spec = physical.spec()?;
        let slots = self.slots_of(&m.targets)?;
        let state = self.state.as_ref().expect("targets are live");
        let (ideal, p, post) = match self.forced.get(self.cursor).copied() {
            Some(r) => {
                let phys = *perm.get(r).ok_or(Error::OutOfRange { index: r, limit: perm.len() })?;
                let (p, post) = post_select(state, &spec, &slots, phys)?;
                (r, p, post)
            }
            None if self.pause => {
                let mut all = split(state, &spec, &slots)?;
                let branches = perm
                    .iter()
                    .map(|&k| std::mem::replace(&mut all[k], (0.0, None)))
                    .collect();
                return Ok(Some(Choice {
                    instruction: m,
                    physical,
                    branches,
                }));
            }
            None => {
                let (k, p, post) = measure(state, &spec, &slots, &mut self.rng)?;
                let r = perm.iter().position(|&x| x == k).expect("permutation");
                (r, p, post)
            }
        };
        self.commit(m, &physical, ideal, p, post);
        Ok(None)
    }

    fn commit(&mut self, m: &MeasurementInstruction, physical: &Descriptor, ideal: usize, p: f64, post: PureState) {
        self.cursor += 1;
        self.state = Some(post);
        self.trace.probability *= p;
        self.trace.resources.count(physical);
        self.trace.outcomes.push((m.register, ideal));
        if self.record_physical {
            self.trace.physical.push(physical.clone());
        }
        self.registers.insert(m.register, ideal);
    }

    fn frame_op(&mut self, f: &FrameOp) -> Result<()> {
        match f {
            FrameOp::Pauli { wires, pauli } => self.frame.left_mul(wires, pauli),
            FrameOp::Table { key, wires, table } => {
                let p = &table[self.key_value(key)?];
                self.frame.left_mul(wires, p)
            }
            FrameOp::Transfer { from, to, map } => {
                let moved = map.conjugate(&self.frame.take(from))?;
                self.frame.left_mul(to, &moved)
            }
            FrameOp::RequireClear { wires } => {
                if self.frame.is_clear(wires) {
                    Ok(())
                } else {
                    Err(Error::Invariant(format!(
                        "frame {} on {wires:?} should be clear",
                        self.frame.get(wires)
                    )))
                }
            }
            FrameOp::AccReset { acc, width } => {
                self.accs.insert(*acc, PauliString::identity(*width));
                Ok(())
            }
            FrameOp::AccMul { acc, key, table } => {
                let p = &table[self.key_value(key)?];
                let cur = self.accs.get(acc).ok_or_else(|| Error::InvalidSpec(format!("accumulator {acc}")))?;
                let next = p.mul(cur)?;
                self.accs.insert(*acc, next);
                Ok(())
            }
        }
    }

    fn until_holds(&self, u: &Until) -> Result<bool> {
        Ok(match u {
            Until::FrameIdentity(ws) => self.frame.is_clear(ws),
            Until::Accumulator { acc, target } => self
                .accs
                .get(acc)
                .ok_or_else(|| Error::InvalidSpec(format!("accumulator {acc}")))?
                .eq_mod_phase(target),
        })
    }

    fn temp(&mut self) -> Wire {
        self.next_temp -= 1;
        Wire(self.next_temp)
    }

    fn flush_eagerly(&mut self) -> Result<()> {
        for w in self.frame.active() {
            if !self.slots.contains(&w) {
                continue;
            }
            let letter = self.frame.get(&[w]).letter(0);
            self.trace.resources.gadget_invocations += 1;
            let (rounds, bells) = self.pauli_gadget(w, letter, MAX_GADGET_ROUNDS)?;
            self.trace.resources.gadget_rounds += rounds;
            self.trace.resources.gadget_bells += bells;
            self.frame.take(&[w]);
        }
        Ok(())
    }

    /// Applies `sigma_l` to wire `w` physically by repeated teleportation
    /// through rotated Bell measurements, until no correction is left.
    /// Returns rounds and Bell measurements used.
    pub(crate) fn pauli_gadget(&mut self, w: Wire, l: usize, max_rounds: usize) -> Result<(usize, usize)> {
        let mut pending = l;
        let mut rounds = 0;
        loop {
            if rounds == max_rounds {
                return Err(Error::MaxRoundsExceeded(max_rounds));
            }
            rounds += 1;
            let (a1, a2) = (self.temp(), self.temp());
            self.alloc(a1)?;
            self.alloc(a2)?;
            let k = self.raw_measure(&Descriptor::Bell, &[a1, a2])?;
            let spec = Descriptor::rotated_bell(&format!("s{pending}"), UnitaryMatrix::pauli(pending));
            let j = self.raw_measure(&spec, &[w, a1])?;
            self.release(&[w, a1])?;
            let slot = self.slots_of(&[a2])?[0];
            self.slots[slot] = w;
            // The output carries sigma_k sigma_j relative to the target.
            pending = PauliString::from_indices(&[k])
                .mul(&PauliString::from_indices(&[j]))?
                .letter(0);
            if pending == 0 {
                return Ok((rounds, 2 * rounds));
            }
        }
    }

    /// Sampled measurement outside program bookkeeping.
    fn raw_measure(&mut self, d: &Descriptor, targets: &[Wire]) -> Result<usize> {
        let slots = self.slots_of(targets)?;
        let state = self.state.as_ref().expect("live");
        let (k, _, post) = measure(state, &d.spec()?, &slots, &mut self.rng)?;
        self.state = Some(post);
        Ok(k)
    }

    pub(crate) fn set_state(&mut self, wires: Vec<Wire>, state: PureState) {
        self.slots = wires;
        self.state = Some(state);
        self.trace.resources.high_water = self.trace.resources.high_water.max(self.slots.len());
    }

    pub(crate) fn state_of(&self, wires: &[Wire]) -> Result<PureState> {
        let keep = self.slots_of(wires)?;
        let s = self.state.as_ref().ok_or_else(|| Error::Invariant("no state".into()))?;
        if keep.len() == s.num_qubits() {
            s.permute(&keep)
        } else {
            extract_factor(s, &keep, FACTOR_TOL)
        }
    }
}

/// Pushes frame `f` (over the targets) into descriptor `d`: returns the
/// physical descriptor whose projectors are `f Pi_r f^dagger`, and the map
/// from ideal outcome `r` to physical outcome.
pub fn adapt(d: &Descriptor, f: &PauliString) -> Result<(Descriptor, Vec<usize>)> {
    let n = d.num_outcomes();
    if f.num_qubits() != d.arity() {
        return Err(Error::ArityMismatch {
            arity: d.arity(),
            targets: f.num_qubits(),
        });
    }
    if f.is_identity_mod_phase() {
        return Ok((d.clone(), (0..n).collect()));
    }
    let flip = |p: &PauliString, q: &PauliString| -> Result<usize> { Ok(usize::from(!p.commutes(q)?)) };
    Ok(match d {
        Descriptor::Pauli(p) => {
            let s = flip(p, f)?;
            (d.clone(), vec![s, 1 - s])
        }
        Descriptor::Bell => {
            let (f1, f2) = (f.restrict(&[0]), f.restrict(&[1]));
            let perm = (0..4)
                .map(|j| {
                    let p = f2.mul(&PauliString::from_indices(&[j]))?.mul(&f1)?;
                    Ok(p.letter(0))
                })
                .collect::<Result<Vec<_>>>()?;
            (d.clone(), perm)
        }
        Descriptor::RotatedBell(g) => {
            let m = g.arity();
            let f1 = f.restrict(&(0..m).collect::<Vec<_>>());
            let f2 = f.restrict(&(m..2 * m).collect::<Vec<_>>());
            let perm = (0..n)
                .map(|j| {
                    let digits: Vec<usize> = (0..m).map(|i| (j >> (2 * (m - 1 - i))) & 3).collect();
                    let p = f2.mul(&PauliString::from_indices(&digits))?;
                    Ok(p.letters().iter().fold(0, |acc, l| 4 * acc + l))
                })
                .collect::<Result<Vec<_>>>()?;
            (Descriptor::RotatedBell(premultiply(g, &f1)?), perm)
        }
        Descriptor::RotatedObservable { gate, axis, partner } => {
            let s = flip(&PauliString::from_indices(&[*partner]), &f.restrict(&[1]))?;
            let physical = Descriptor::RotatedObservable {
                gate: premultiply(gate, &f.restrict(&[0]))?,
                axis: *axis,
                partner: *partner,
            };
            (physical, vec![s, 1 - s])
        }
        Descriptor::Projectors(ps) => {
            let fm = f.to_matrix();
            let conj = ps.iter().map(|p| &fm * p * fm.adjoint()).collect();
            (Descriptor::Projectors(conj), (0..n).collect())
        }
    })
}

/// `W · F` with a readable label.
fn premultiply(g: &GateSpec, f: &PauliString) -> Result<GateSpec> {
    if f.is_identity_mod_phase() {
        return Ok(g.clone());
    }
    let fm = UnitaryMatrix::new(f.without_phase().to_matrix())?;
    Ok(GateSpec::new(
        format!("{}·{}", g.label, f.without_phase()),
        g.unitary.compose(&fm)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::program::Builder;
    use crate::state::fidelity;
    use proptest::prelude::*;

    fn teleport() -> Program {
        let mut b = Builder::new();
        let q = b.wire();
        let pair = b.alloc(2);
        let k = b.measure(Descriptor::Bell, &pair, Adapt::Absorb);
        b.table(k, &pair[1..], (0..4).map(|j| PauliString::from_indices(&[j])).collect());
        let j = b.measure(Descriptor::Bell, &[q, pair[0]], Adapt::Absorb);
        b.table(j, &pair[1..], (0..4).map(|j| PauliString::from_indices(&[j])).collect());
        b.release(&[q, pair[0]]);
        b.finish(vec![q], vec![pair[1]])
    }

    #[test]
    fn teleportation_all_branches() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = PureState::random(1, &mut rng);
        let branches = enumerate_branches(&teleport(), Some(&psi), 1).unwrap();
        assert_eq!(branches.len(), 16);
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-10);
        for b in &branches {
            assert!(fidelity(&b.result.flushed().unwrap(), &psi).unwrap() > 1.0 - 1e-10);
        }
    }

    #[test]
    fn forced_outcomes_reproduce_enumeration() {
        let psi = PureState::plus();
        for b in enumerate_branches(&teleport(), Some(&psi), 2).unwrap() {
            let opts = ExecOptions {
                seed: 2,
                forced: Some(b.outcomes.clone()),
                policy: None,
            };
            let r = execute(&teleport(), Some(&psi), &opts).unwrap();
            assert_eq!(r.trace.outcome_values(), b.outcomes);
            assert!((r.trace.probability - b.probability).abs() < 1e-12);
        }
    }

    #[test]
    fn eager_policy_clears_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = PureState::random(1, &mut rng);
        let mut p = teleport();
        p.frame_policy = FramePolicy::Eager;
        for seed in 0..20 {
            let r = execute(&p, Some(&psi), &ExecOptions::seeded(seed)).unwrap();
            assert!(r.frame.is_identity_mod_phase());
            assert!(fidelity(&r.state, &psi).unwrap() > 1.0 - 1e-10);
        }
    }

    #[test]
    fn same_seed_same_trace() {
        let psi = PureState::plus();
        let a = execute(&teleport(), Some(&psi), &ExecOptions::seeded(9)).unwrap();
        let b = execute(&teleport(), Some(&psi), &ExecOptions::seeded(9)).unwrap();
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn unwritten_register_is_rejected() {
        let mut b = Builder::new();
        let w = b.alloc(1);
        b.table(Register(3), &w, vec![PauliString::identity(1); 2]);
        let p = b.finish(vec![], w);
        assert!(matches!(
            execute(&p, None, &ExecOptions::default()),
            Err(Error::UnwrittenRegister(3))
        ));
    }

    fn descriptors(seed: u64) -> Vec<Descriptor> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        vec![
            Descriptor::Bell,
            Descriptor::Pauli("XZ".parse().unwrap()),
            Descriptor::rotated_bell("u", UnitaryMatrix::random(1, &mut rng)),
            Descriptor::rotated_bell("v", UnitaryMatrix::random(2, &mut rng)),
            Descriptor::RotatedObservable {
                gate: GateSpec::new("t", UnitaryMatrix::t()),
                axis: 1,
                partner: 1,
            },
        ]
    }

    proptest! {
        #[test]
        fn symbolic_relabel_matches_dense(seed in 0u64..1000, letters in proptest::collection::vec(0usize..4, 4)) {
            for d in descriptors(seed) {
                let f = PauliString::from_indices(&letters[..d.arity()]);
                let (physical, perm) = adapt(&d, &f).unwrap();
                let fm = f.to_matrix();
                let ideal = d.spec().unwrap();
                let phys = physical.spec().unwrap();
                for (r, &k) in perm.iter().enumerate() {
                    let want = &fm * ideal.projector(r) * fm.adjoint();
                    prop_assert!(max_abs_diff(&phys.projector(k), &want) < 1e-10, "{d} under {f}");
                }
            }
        }
    }
}
