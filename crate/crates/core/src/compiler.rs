//! Gate circuits and their lowering to measurement-only programs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clifford::CliffordMap;
use crate::error::{Error, Result};
use crate::exec::{enumerate_branches, execute, ExecOptions, ExecResult, ResourceCounts};
use crate::gadgets::{emit_1b_styled, emit_2a_core_styled, emit_2b, emit_acn_styled, Style};
use crate::linalg::{equal_up_to_phase, Matrix, UnitaryMatrix, STRUCT_TOL};
use crate::msets::{
    build_set, emit_conjugated_gate, rotated_bell_observables, ObservableSet, SetName, SpecialU, DEFAULT_MAX_ITERS,
};
use crate::pauli::PauliString;
use crate::program::{Adapt, Builder, Descriptor, FrameOp, FramePolicy, GateSpec, Program, Wire};
use crate::state::{apply_gate, fidelity, PureState, MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    P,
    T,
    #[serde(rename = "CNOT")]
    Cnot,
    #[serde(rename = "SWAP")]
    Swap,
    U1,
    U2,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            Self::Cnot | Self::Swap | Self::U2 => 2,
            _ => 1,
        }
    }

    fn fixed_unitary(self) -> Option<UnitaryMatrix> {
        Some(match self {
            Self::X => UnitaryMatrix::x(),
            Self::Y => UnitaryMatrix::y(),
            Self::Z => UnitaryMatrix::z(),
            Self::H => UnitaryMatrix::h(),
            Self::P => UnitaryMatrix::phase(),
            Self::T => UnitaryMatrix::t(),
            Self::Cnot => UnitaryMatrix::cnot(),
            Self::Swap => UnitaryMatrix::swap(),
            Self::U1 | Self::U2 => return None,
        })
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Cnot => "CNOT",
            Self::Swap => "SWAP",
            other => return write!(f, "{other:?}"),
        };
        f.write_str(s)
    }
}

impl FromStr for GateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_uppercase().as_str() {
            "X" => Self::X,
            "Y" => Self::Y,
            "Z" => Self::Z,
            "H" => Self::H,
            "P" | "S" => Self::P,
            "T" => Self::T,
            "CNOT" | "CX" => Self::Cnot,
            "SWAP" => Self::Swap,
            "U1" => Self::U1,
            "U2" => Self::U2,
            other => return Err(Error::Parse(format!("unknown gate {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    /// Present exactly for `U1` and `U2`.
    pub matrix: Option<UnitaryMatrix>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: &[usize]) -> Result<Self> {
        if kind.fixed_unitary().is_none() {
            return Err(Error::InvalidSpec(format!("{kind} needs a matrix")));
        }
        Self::checked(kind, targets, None)
    }

    /// `U1` or `U2`, by the matrix size.
    pub fn unitary(u: UnitaryMatrix, targets: &[usize]) -> Result<Self> {
        let kind = match u.arity() {
            1 => GateKind::U1,
            2 => GateKind::U2,
            a => return Err(Error::Unsupported(format!("{a}-qubit matrix gates"))),
        };
        Self::checked(kind, targets, Some(u))
    }

    fn checked(kind: GateKind, targets: &[usize], matrix: Option<UnitaryMatrix>) -> Result<Self> {
        if targets.len() != kind.arity() {
            return Err(Error::ArityMismatch {
                arity: kind.arity(),
                targets: targets.len(),
            });
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(Error::DuplicateTarget(targets[0]));
        }
        Ok(Self {
            kind,
            targets: targets.to_vec(),
            matrix,
        })
    }

    pub fn matrix(&self) -> UnitaryMatrix {
        self.kind
            .fixed_unitary()
            .or_else(|| self.matrix.clone())
            .expect("matrix gates carry their matrix")
    }
}

/// A gate-level circuit on `num_qubits` logical qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct GateCircuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
}

impl GateCircuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        for &t in &gate.targets {
            if t >= self.num_qubits {
                return Err(Error::OutOfRange {
                    index: t,
                    limit: self.num_qubits,
                });
            }
        }
        self.gates.push(gate);
        Ok(self)
    }

    pub fn gate(&mut self, kind: GateKind, targets: &[usize]) -> Result<&mut Self> {
        self.push(Gate::new(kind, targets)?)
    }

    pub fn validate(&self) -> Result<()> {
        let mut c = Self::new(self.num_qubits);
        for g in &self.gates {
            if g.matrix.is_some() != matches!(g.kind, GateKind::U1 | GateKind::U2) {
                return Err(Error::InvalidSpec(format!("{} matrix presence", g.kind)));
            }
            c.push(Gate::checked(g.kind, &g.targets, g.matrix.clone())?)?;
        }
        Ok(())
    }

    /// Dense application to `state`.
    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        self.gates
            .iter()
            .try_fold(state.clone(), |s, g| apply_gate(&s, &g.matrix(), &g.targets))
    }

    /// The circuit applied to `|0...0>`.
    pub fn simulate(&self) -> Result<PureState> {
        self.apply(&PureState::zero(self.num_qubits)?)
    }
}

/// Resource model the circuit is lowered to.
#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    /// Bell measurements plus one four-qubit rotated Bell measurement per gate.
    FourQubit,
    /// Two-qubit rotated Bell measurements for one-qubit gates and the
    /// `|a_cn>` ancilla with method 2a for CNOT.
    TwoQubitContinuous,
    /// As above with every measurement drawn from a discrete set.
    TwoQubitDiscrete(ObservableSet),
    /// Only the rotated Bell measurement of one special two-qubit unitary.
    SingleMeasurement(SpecialU),
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Self::FourQubit => "four-qubit",
            Self::TwoQubitContinuous => "two-qubit-continuous",
            Self::TwoQubitDiscrete(_) => "two-qubit-discrete",
            Self::SingleMeasurement(_) => "single-measurement",
        }
    }
}

/// Default angle of the S1 and S2 sets, and of `u = rz(angle)` for S0.
pub const DEFAULT_SET_THETA: f64 = std::f64::consts::FRAC_PI_8;

impl Mode {
    /// Builds a mode from its command-line name. `set` is required for,
    /// and only accepted by, `two-qubit-discrete`; `special` defaults to
    /// [`SpecialU::default`].
    pub fn from_parts(name: &str, set: Option<&str>, set_theta: f64, special: Option<SpecialU>) -> Result<Self> {
        if set.is_some() && name != "two-qubit-discrete" {
            return Err(Error::Parse(format!("an observable set does not apply to mode {name}")));
        }
        Ok(match name {
            "four-qubit" => Self::FourQubit,
            "two-qubit-continuous" => Self::TwoQubitContinuous,
            "two-qubit-discrete" => {
                let set: SetName = set
                    .ok_or_else(|| Error::Parse("two-qubit-discrete needs a set S0|S1|S2|S3".into()))?
                    .parse()?;
                Self::TwoQubitDiscrete(match set {
                    SetName::S0 => build_set(set, None, Some(&UnitaryMatrix::rz(set_theta)))?,
                    SetName::S1 | SetName::S2 => build_set(set, Some(set_theta), None)?,
                    SetName::S3 => build_set(set, None, None)?,
                })
            }
            "single-measurement" => Self::SingleMeasurement(special.unwrap_or_default()),
            other => return Err(Error::Parse(format!("unknown mode {other:?}"))),
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TwoQubitDiscrete(s) => write!(f, "{}({})", self.name(), s.name),
            Self::SingleMeasurement(u) => write!(f, "{}({:.16e},{:.16e})", self.name(), u.theta, u.phi),
            _ => f.write_str(self.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    /// Cap on simultaneously live physical qubits.
    pub max_physical: usize,
    /// Cap on random-walk loop iterations.
    pub max_iters: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            max_physical: MAX_QUBITS,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

pub fn compile(circuit: &GateCircuit, mode: &Mode) -> Result<Program> {
    compile_with(circuit, mode, &CompileOptions::default())
}

pub fn compile_with(circuit: &GateCircuit, mode: &Mode, opts: &CompileOptions) -> Result<Program> {
    circuit.validate()?;
    let mut l = Lowering::new(mode, opts)?;
    let mut logical: Vec<Wire> = (0..circuit.num_qubits).map(|_| l.fresh_zero()).collect();
    for g in &circuit.gates {
        l.gate(g, &mut logical)?;
    }
    let program = l.b.finish(Vec::new(), logical);
    program.validate()?;
    let needed = program.num_physical_qubits();
    if needed > opts.max_physical {
        return Err(Error::QubitBudget {
            needed,
            cap: opts.max_physical,
        });
    }
    if let Mode::TwoQubitDiscrete(_) = mode {
        let closure = l.closure.as_ref().expect("set in discrete mode");
        for m in program.measurements() {
            if !descriptor_in_set(&m.spec, closure) {
                return Err(Error::Invariant(format!("{} escapes the observable set", m.spec)));
            }
        }
    }
    Ok(program)
}

/// Whether a measurement only uses observables from `set`.
pub fn descriptor_in_set(d: &Descriptor, set: &ObservableSet) -> bool {
    match d {
        Descriptor::Pauli(_) | Descriptor::RotatedObservable { .. } => {
            d.observable().is_some_and(|m| set.contains(&m, 1e-9))
        }
        _ => false,
    }
}

struct Lowering<'m> {
    b: Builder,
    mode: &'m Mode,
    opts: CompileOptions,
    closure: Option<ObservableSet>,
    spare: Option<Wire>,
}

fn clifford_map(u: &UnitaryMatrix) -> Option<CliffordMap> {
    CliffordMap::from_unitary(u.matrix(), STRUCT_TOL)
}

fn pauli_of(u: &UnitaryMatrix) -> Option<PauliString> {
    PauliString::from_matrix(u.matrix(), STRUCT_TOL).map(|(p, _)| p)
}

impl<'m> Lowering<'m> {
    fn new(mode: &'m Mode, opts: &CompileOptions) -> Result<Self> {
        let closure = match mode {
            Mode::TwoQubitDiscrete(s) => Some(s.absorption_closure()?),
            _ => None,
        };
        Ok(Self {
            b: Builder::new(),
            mode,
            opts: *opts,
            closure,
            spare: None,
        })
    }

    /// A new wire holding `|0>`: a Z measurement with an X fix-up.
    fn fresh_zero(&mut self) -> Wire {
        let w = self.b.alloc(1);
        let r = self.b.measure(Descriptor::Pauli("Z".parse().expect("literal")), &w, Adapt::Absorb);
        self.b.table(r, &w, vec![PauliString::identity(1), "X".parse().expect("literal")]);
        w[0]
    }

    fn gate(&mut self, g: &Gate, logical: &mut [Wire]) -> Result<()> {
        let ws: Vec<Wire> = g.targets.iter().map(|&t| logical[t]).collect();
        let u = g.matrix();
        if g.kind == GateKind::Swap {
            logical.swap(g.targets[0], g.targets[1]);
            return Ok(());
        }
        if let Some(p) = pauli_of(&u) {
            self.b.frame(FrameOp::Pauli {
                wires: ws,
                pauli: p.without_phase(),
            });
            return Ok(());
        }
        let label = g.kind.to_string();
        let outs = match (self.mode, u.arity()) {
            (Mode::FourQubit, 1) => {
                let partner = if logical.len() > 1 {
                    let q = (g.targets[0] + 1) % logical.len();
                    Slot::Logical(q)
                } else {
                    Slot::Spare
                };
                let pw = match partner {
                    Slot::Logical(q) => logical[q],
                    Slot::Spare => self.spare_wire(),
                };
                let wide = GateSpec::new(format!("{label}⊗I"), u.tensor(&UnitaryMatrix::identity(1)));
                let out = self.four_qubit(&wide, [ws[0], pw])?;
                match partner {
                    Slot::Logical(q) => logical[q] = out[1],
                    Slot::Spare => self.spare = Some(out[1]),
                }
                vec![out[0]]
            }
            (Mode::FourQubit, _) => self.four_qubit(&GateSpec::new(label, u), [ws[0], ws[1]])?.to_vec(),
            (Mode::TwoQubitContinuous, 1) => self.one_b(&GateSpec::new(label, u), ws[0], Style::Direct)?,
            (Mode::TwoQubitDiscrete(_), 1) => {
                let mut w = ws[0];
                for step in self.discrete_decomposition(&u, &label)? {
                    w = self.one_b(&step, w, Style::Observables)?[0];
                }
                vec![w]
            }
            (Mode::TwoQubitContinuous, _) => self.cnot(g, &u, &ws, Style::Direct)?,
            (Mode::TwoQubitDiscrete(_), _) => self.cnot(g, &u, &ws, Style::Observables)?,
            (Mode::SingleMeasurement(su), _) => self.single(su, g, &u, &ws)?,
        };
        for (t, w) in g.targets.iter().zip(outs) {
            logical[*t] = w;
        }
        Ok(())
    }

    fn spare_wire(&mut self) -> Wire {
        match self.spare {
            Some(w) => w,
            None => {
                let w = self.fresh_zero();
                self.spare = Some(w);
                w
            }
        }
    }

    fn four_qubit(&mut self, g: &GateSpec, ws: [Wire; 2]) -> Result<[Wire; 2]> {
        let adapt = if clifford_map(&g.unitary).is_some() {
            Adapt::Fixed
        } else {
            Adapt::Absorb
        };
        let e = emit_2b(&mut self.b, g, ws, adapt)?;
        Ok([e.outputs[0], e.outputs[1]])
    }

    fn one_b(&mut self, g: &GateSpec, w: Wire, style: Style) -> Result<Vec<Wire>> {
        let adapt = if clifford_map(&g.unitary).is_some() {
            Adapt::Fixed
        } else {
            Adapt::Absorb
        };
        Ok(emit_1b_styled(&mut self.b, g, w, adapt, style)?.outputs)
    }

    fn cnot(&mut self, g: &Gate, u: &UnitaryMatrix, ws: &[Wire], style: Style) -> Result<Vec<Wire>> {
        let cnot = UnitaryMatrix::cnot();
        let swap = UnitaryMatrix::swap();
        let reversed = swap.compose(&cnot)?.compose(&swap)?;
        let (inputs, flip) = if equal_up_to_phase(u.matrix(), cnot.matrix(), STRUCT_TOL) {
            ([ws[0], ws[1]], false)
        } else if equal_up_to_phase(u.matrix(), reversed.matrix(), STRUCT_TOL) {
            ([ws[1], ws[0]], true)
        } else {
            return Err(Error::Unsupported(format!(
                "{} in mode {}: only CNOT is available as a two-qubit gate",
                g.kind,
                self.mode.name()
            )));
        };
        let (anc, regs) = emit_acn_styled(&mut self.b, style)?;
        let e = emit_2a_core_styled(&mut self.b, &GateSpec::new("CNOT", cnot), inputs, anc, regs, style)?;
        let mut outs = e.outputs;
        if flip {
            outs.reverse();
        }
        Ok(outs)
    }

    /// Observables a one-qubit gate needs, under every frame it may absorb.
    fn discrete_supports(&self, u: &UnitaryMatrix) -> Result<bool> {
        let set = self.closure.as_ref().expect("discrete mode");
        let frames: Vec<usize> = if clifford_map(u).is_some() { vec![0] } else { (0..4).collect() };
        for f in frames {
            let w = u.compose(&UnitaryMatrix::pauli(f))?;
            let (ox, oz) = rotated_bell_observables(&w)?;
            if !set.contains(&ox, 1e-9) || !set.contains(&oz, 1e-9) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The gate as one or two supported one-qubit gates.
    fn discrete_decomposition(&self, u: &UnitaryMatrix, label: &str) -> Result<Vec<GateSpec>> {
        if self.discrete_supports(u)? {
            return Ok(vec![GateSpec::new(label, u.clone())]);
        }
        let set = self.closure.as_ref().expect("discrete mode");
        let natives = [
            ("H", UnitaryMatrix::h()),
            ("P", UnitaryMatrix::phase()),
            ("P†", UnitaryMatrix::phase().adjoint()),
            ("T", UnitaryMatrix::t()),
            ("T†", UnitaryMatrix::t().adjoint()),
            ("u", set.u.clone()),
            ("u†", set.u.adjoint()),
        ];
        let mut ok = Vec::new();
        for (n, m) in natives {
            if self.discrete_supports(&m)? {
                ok.push((n, m));
            }
        }
        for (na, a) in &ok {
            for (nb, bm) in &ok {
                if equal_up_to_phase(&(bm.matrix() * a.matrix()), u.matrix(), STRUCT_TOL) {
                    return Ok(vec![GateSpec::new(*na, a.clone()), GateSpec::new(*nb, bm.clone())]);
                }
            }
        }
        Err(Error::Unsupported(format!(
            "{label} is not expressible over observable set {}",
            set.name
        )))
    }

    fn single(&mut self, su: &SpecialU, g: &Gate, u: &UnitaryMatrix, ws: &[Wire]) -> Result<Vec<Wire>> {
        let unsupported = || {
            Error::Unsupported(format!(
                "{} in mode single-measurement: only Paulis and Q U^ P U words are compiled",
                g.kind
            ))
        };
        if u.arity() != 2 {
            return Err(unsupported());
        }
        let (p, q) = conjugated_pauli_form(su, u).ok_or_else(unsupported)?;
        let wires = [ws[0], ws[1]];
        if p.is_identity_mod_phase() {
            self.b.frame(FrameOp::Pauli {
                wires: ws.to_vec(),
                pauli: q,
            });
        } else {
            emit_conjugated_gate(&mut self.b, &su.gate(), wires, &p, &q, self.opts.max_iters)?;
        }
        Ok(ws.to_vec())
    }
}

enum Slot {
    Logical(usize),
    Spare,
}

/// `(P, Q)` with `g = Q U^dagger P U` up to phase, if any.
pub fn conjugated_pauli_form(su: &SpecialU, g: &UnitaryMatrix) -> Option<(PauliString, PauliString)> {
    let um = su.unitary().matrix();
    for pi in 0..16 {
        let p = PauliString::two_qubit(pi);
        let inner: Matrix = um.adjoint() * p.to_matrix() * um;
        for qi in 0..16 {
            let q = PauliString::two_qubit(qi);
            if equal_up_to_phase(&(q.to_matrix() * &inner), g.matrix(), 1e-9) {
                return Some((p, q));
            }
        }
    }
    None
}

/// What happens to a pending frame when the next gate arrives.
#[derive(Debug, Clone, PartialEq)]
pub enum Absorbed {
    /// Clifford gate: performed as is; the frame is conjugated through it.
    Gate { gate: UnitaryMatrix, frame: PauliString },
    /// One-qubit non-Clifford gate: the rotated Bell measurement for
    /// `gate · frame` is requested and the frame is cleared.
    Measurement { basis: UnitaryMatrix, frame: PauliString },
}

pub fn absorb_frame(frame: &PauliString, gate: &UnitaryMatrix) -> Result<Absorbed> {
    if frame.num_qubits() != gate.arity() {
        return Err(Error::DimensionMismatch {
            expected: gate.arity(),
            found: frame.num_qubits(),
        });
    }
    if let Some(map) = clifford_map(gate) {
        return Ok(Absorbed::Gate {
            gate: gate.clone(),
            frame: map.conjugate(frame)?,
        });
    }
    if frame.is_identity_mod_phase() {
        return Ok(Absorbed::Gate {
            gate: gate.clone(),
            frame: frame.clone(),
        });
    }
    if gate.arity() != 1 {
        return Err(Error::Unsupported("absorbing a frame into a multi-qubit non-Clifford gate".into()));
    }
    let basis = gate.compose(&UnitaryMatrix::new(frame.to_matrix())?)?;
    Ok(Absorbed::Measurement {
        basis,
        frame: PauliString::identity(1),
    })
}

/// Runs a compiled program from `|0...0>`.
pub fn run(program: &Program, seed: u64, policy: Option<FramePolicy>) -> Result<ExecResult> {
    execute(
        program,
        None,
        &ExecOptions {
            seed,
            forced: None,
            policy,
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub mode: String,
    pub seed: u64,
    pub trials: usize,
    pub max_infidelity: f64,
    /// Distinct outcome traces seen.
    pub distinct_traces: usize,
    pub resource_counts: ResourceCounts,
    pub mean_bell_measurements: f64,
    pub num_physical_qubits: usize,
    /// Iterations of every random-walk or clearing loop, trial by trial.
    pub walk_lengths: Vec<usize>,
}

/// Runs `trials` seeded executions (seeds `seed..seed + trials`) and
/// compares each flushed output with the dense circuit.
pub fn verify(
    circuit: &GateCircuit,
    mode: &Mode,
    trials: usize,
    seed: u64,
    policy: Option<FramePolicy>,
) -> Result<VerifyReport> {
    if circuit.num_qubits > 4 {
        return Err(Error::Unsupported("dense verification beyond 4 logical qubits".into()));
    }
    let program = compile(circuit, mode)?;
    if !program.is_measurement_only() {
        return Err(Error::Invariant("compiled program is not measurement-only".into()));
    }
    let want = circuit.simulate()?;
    let mut max_inf: f64 = 0.0;
    let mut total = ResourceCounts::default();
    let mut traces = std::collections::BTreeSet::new();
    let mut walks = Vec::new();
    for t in 0..trials {
        let res = run(&program, seed.wrapping_add(t as u64), policy)?;
        max_inf = max_inf.max((1.0 - fidelity(&res.flushed()?, &want)?).max(0.0));
        let r = &res.trace.resources;
        total.measurements += r.measurements;
        total.bell += r.bell;
        total.four_qubit += r.four_qubit;
        total.observables += r.observables;
        total.gadget_invocations += r.gadget_invocations;
        total.gadget_rounds += r.gadget_rounds;
        total.gadget_bells += r.gadget_bells;
        total.high_water = total.high_water.max(r.high_water);
        walks.extend(res.trace.loops.iter().map(|l| l.1));
        traces.insert(res.trace.outcome_values());
    }
    Ok(VerifyReport {
        mode: mode.to_string(),
        seed,
        trials,
        max_infidelity: max_inf,
        distinct_traces: traces.len(),
        mean_bell_measurements: if trials == 0 {
            0.0
        } else {
            (total.bell + total.gadget_bells) as f64 / trials as f64
        },
        resource_counts: total,
        num_physical_qubits: program.num_physical_qubits(),
        walk_lengths: walks,
    })
}

/// Every outcome branch of the compiled program; returns the worst
/// infidelity and the branch count. Loop-free programs only.
pub fn verify_exhaustive(circuit: &GateCircuit, mode: &Mode, seed: u64) -> Result<(f64, usize)> {
    let program = compile(circuit, mode)?;
    let want = circuit.simulate()?;
    let branches = enumerate_branches(&program, None, seed)?;
    let mut worst: f64 = 0.0;
    for b in &branches {
        worst = worst.max((1.0 - fidelity(&b.result.flushed()?, &want)?).max(0.0));
    }
    Ok((worst, branches.len()))
}
