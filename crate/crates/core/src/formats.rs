//! Canonical JSON files: circuits, programs and reports.
//!
//! Keys are sorted and every non-integral number is written as a string in
//! `{:.16e}` form, so a file written, read back and written again is
//! byte-identical.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::clifford::CliffordMap;
use crate::compiler::{Gate, GateCircuit, GateKind};
use crate::error::{Error, Result};
use crate::linalg::{c, Matrix, UnitaryMatrix};
use crate::pauli::PauliString;
use crate::program::{
    Adapt, Descriptor, FrameOp, FramePolicy, GateSpec, Key, LoopOp, MeasurementInstruction, Op, Program, Register,
    Until, Wire,
};

/// A real number written as a fixed-format string; reads strings or numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_float(self.0))
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            S(String),
            F(f64),
        }
        match Raw::deserialize(d)? {
            Raw::F(f) => Ok(Num(f)),
            Raw::S(s) => s.trim().parse().map(Num).map_err(serde::de::Error::custom),
        }
    }
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixText(pub Vec<[Num; 2]>);

impl MatrixText {
    pub fn from_matrix(m: &Matrix) -> Self {
        let mut v = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for col in 0..m.ncols() {
                let z = m[(r, col)];
                v.push([Num(z.re), Num(z.im)]);
            }
        }
        Self(v)
    }

    pub fn to_matrix(&self) -> Result<Matrix> {
        let n = self.0.len();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n || d == 0 {
            return Err(Error::Parse(format!("matrix with {n} entries is not square")));
        }
        Ok(Matrix::from_row_iterator(d, d, self.0.iter().map(|[re, im]| c(re.0, im.0))))
    }

    pub fn to_unitary(&self) -> Result<UnitaryMatrix> {
        UnitaryMatrix::new(self.to_matrix()?)
    }
}

/// Serializes `t` as canonical JSON.
pub fn to_canonical_json<T: Serialize>(t: &T) -> Result<String> {
    let v = serde_json::to_value(t).map_err(|e| Error::Parse(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&canonical(v)).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => Value::String(fmt_float(n.as_f64().expect("f64"))),
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

fn from_json<'a, T: Deserialize<'a>>(s: &'a str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}

// ---------------------------------------------------------------------------
// Circuits

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateText {
    pub name: String,
    pub targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixText>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitFile {
    pub num_qubits: usize,
    pub gates: Vec<GateText>,
}

impl CircuitFile {
    pub fn from_circuit(c: &GateCircuit) -> Self {
        Self {
            num_qubits: c.num_qubits,
            gates: c
                .gates
                .iter()
                .map(|g| GateText {
                    name: g.kind.to_string(),
                    targets: g.targets.clone(),
                    matrix: g.matrix.as_ref().map(|m| MatrixText::from_matrix(m.matrix())),
                })
                .collect(),
        }
    }

    pub fn to_circuit(&self) -> Result<GateCircuit> {
        let mut c = GateCircuit::new(self.num_qubits);
        for g in &self.gates {
            let kind: GateKind = g.name.parse()?;
            let gate = match (&g.matrix, kind) {
                (Some(m), GateKind::U1 | GateKind::U2) => {
                    let u = m.to_unitary()?;
                    if u.arity() != kind.arity() {
                        return Err(Error::Parse(format!("{kind} with a {}-qubit matrix", u.arity())));
                    }
                    Gate::unitary(u, &g.targets)?
                }
                (None, GateKind::U1 | GateKind::U2) => return Err(Error::Parse(format!("{kind} needs a matrix"))),
                (Some(_), _) => return Err(Error::Parse(format!("{kind} takes no matrix"))),
                (None, _) => Gate::new(kind, &g.targets)?,
            };
            c.push(gate)?;
        }
        Ok(c)
    }
}

pub fn circuit_to_json(c: &GateCircuit) -> Result<String> {
    to_canonical_json(&CircuitFile::from_circuit(c))
}

pub fn circuit_from_json(s: &str) -> Result<GateCircuit> {
    from_json::<CircuitFile>(s)?.to_circuit()
}

// ---------------------------------------------------------------------------
// Programs

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DescriptorText {
    Pauli { pauli: PauliString },
    Bell,
    RotatedBell { label: String, matrix: MatrixText },
    RotatedObservable { label: String, matrix: MatrixText, axis: usize, partner: usize },
    Projectors { matrices: Vec<MatrixText> },
}

impl DescriptorText {
    fn from_descriptor(d: &Descriptor) -> Self {
        match d {
            Descriptor::Pauli(p) => Self::Pauli { pauli: p.clone() },
            Descriptor::Bell => Self::Bell,
            Descriptor::RotatedBell(g) => Self::RotatedBell {
                label: g.label.clone(),
                matrix: MatrixText::from_matrix(g.unitary.matrix()),
            },
            Descriptor::RotatedObservable { gate, axis, partner } => Self::RotatedObservable {
                label: gate.label.clone(),
                matrix: MatrixText::from_matrix(gate.unitary.matrix()),
                axis: *axis,
                partner: *partner,
            },
            Descriptor::Projectors(ps) => Self::Projectors {
                matrices: ps.iter().map(MatrixText::from_matrix).collect(),
            },
        }
    }

    fn to_descriptor(&self) -> Result<Descriptor> {
        Ok(match self {
            Self::Pauli { pauli } => Descriptor::Pauli(pauli.clone()),
            Self::Bell => Descriptor::Bell,
            Self::RotatedBell { label, matrix } => Descriptor::RotatedBell(GateSpec::new(label, matrix.to_unitary()?)),
            Self::RotatedObservable {
                label,
                matrix,
                axis,
                partner,
            } => Descriptor::RotatedObservable {
                gate: GateSpec::new(label, matrix.to_unitary()?),
                axis: *axis,
                partner: *partner,
            },
            Self::Projectors { matrices } => {
                Descriptor::Projectors(matrices.iter().map(MatrixText::to_matrix).collect::<Result<_>>()?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrameText {
    Pauli { wires: Vec<Wire>, pauli: PauliString },
    Table { key: Key, wires: Vec<Wire>, table: Vec<PauliString> },
    Transfer { from: Vec<Wire>, to: Vec<Wire>, map: CliffordMap },
    RequireClear { wires: Vec<Wire> },
    AccReset { acc: usize, width: usize },
    AccMul { acc: usize, key: Key, table: Vec<PauliString> },
}

impl FrameText {
    fn from_op(f: &FrameOp) -> Self {
        match f.clone() {
            FrameOp::Pauli { wires, pauli } => Self::Pauli { wires, pauli },
            FrameOp::Table { key, wires, table } => Self::Table { key, wires, table },
            FrameOp::Transfer { from, to, map } => Self::Transfer { from, to, map },
            FrameOp::RequireClear { wires } => Self::RequireClear { wires },
            FrameOp::AccReset { acc, width } => Self::AccReset { acc, width },
            FrameOp::AccMul { acc, key, table } => Self::AccMul { acc, key, table },
        }
    }

    fn to_op(&self) -> FrameOp {
        match self.clone() {
            Self::Pauli { wires, pauli } => FrameOp::Pauli { wires, pauli },
            Self::Table { key, wires, table } => FrameOp::Table { key, wires, table },
            Self::Transfer { from, to, map } => FrameOp::Transfer { from, to, map },
            Self::RequireClear { wires } => FrameOp::RequireClear { wires },
            Self::AccReset { acc, width } => FrameOp::AccReset { acc, width },
            Self::AccMul { acc, key, table } => FrameOp::AccMul { acc, key, table },
        }
    }

    fn reads(&self) -> Vec<Register> {
        match self {
            Self::Table { key, .. } | Self::AccMul { key, .. } => key.registers.clone(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UntilText {
    FrameIdentity { wires: Vec<Wire> },
    Accumulator { acc: usize, target: PauliString },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum OpText {
    Alloc {
        wires: Vec<Wire>,
    },
    Release {
        wires: Vec<Wire>,
    },
    Measure {
        spec: DescriptorText,
        targets: Vec<Wire>,
        register: Register,
        adapt: Adapt,
    },
    Frame {
        rule: FrameText,
    },
    Select {
        key: Key,
        branches: Vec<Vec<OpText>>,
    },
    Loop {
        label: String,
        body: Vec<OpText>,
        carry: Vec<(Wire, Wire)>,
        until: UntilText,
        check_first: bool,
        max_iters: usize,
    },
}

impl OpText {
    fn from_op(op: &Op) -> Self {
        match op {
            Op::Alloc(ws) => Self::Alloc { wires: ws.clone() },
            Op::Release(ws) => Self::Release { wires: ws.clone() },
            Op::Measure(m) => Self::Measure {
                spec: DescriptorText::from_descriptor(&m.spec),
                targets: m.targets.clone(),
                register: m.register,
                adapt: m.adapt,
            },
            Op::Frame(f) => Self::Frame {
                rule: FrameText::from_op(f),
            },
            Op::Select { key, branches } => Self::Select {
                key: key.clone(),
                branches: branches.iter().map(|b| b.iter().map(Self::from_op).collect()).collect(),
            },
            Op::Loop(l) => Self::Loop {
                label: l.label.clone(),
                body: l.body.iter().map(Self::from_op).collect(),
                carry: l.carry.clone(),
                until: match &l.until {
                    Until::FrameIdentity(w) => UntilText::FrameIdentity { wires: w.clone() },
                    Until::Accumulator { acc, target } => UntilText::Accumulator {
                        acc: *acc,
                        target: target.clone(),
                    },
                },
                check_first: l.check_first,
                max_iters: l.max_iters,
            },
        }
    }

    fn to_op(&self) -> Result<Op> {
        Ok(match self {
            Self::Alloc { wires } => Op::Alloc(wires.clone()),
            Self::Release { wires } => Op::Release(wires.clone()),
            Self::Measure {
                spec,
                targets,
                register,
                adapt,
            } => Op::Measure(MeasurementInstruction {
                spec: spec.to_descriptor()?,
                targets: targets.clone(),
                register: *register,
                adapt: *adapt,
            }),
            Self::Frame { rule } => Op::Frame(rule.to_op()),
            Self::Select { key, branches } => Op::Select {
                key: key.clone(),
                branches: branches
                    .iter()
                    .map(|b| b.iter().map(Self::to_op).collect::<Result<Vec<_>>>())
                    .collect::<Result<_>>()?,
            },
            Self::Loop {
                label,
                body,
                carry,
                until,
                check_first,
                max_iters,
            } => Op::Loop(LoopOp {
                label: label.clone(),
                body: body.iter().map(Self::to_op).collect::<Result<_>>()?,
                carry: carry.clone(),
                until: match until {
                    UntilText::FrameIdentity { wires } => Until::FrameIdentity(wires.clone()),
                    UntilText::Accumulator { acc, target } => Until::Accumulator {
                        acc: *acc,
                        target: target.clone(),
                    },
                },
                check_first: *check_first,
                max_iters: *max_iters,
            }),
        })
    }
}

/// Index entry for one classical rule: where it sits in the instruction
/// tree (`/`-separated positions) and which registers it reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedforwardEntry {
    pub path: String,
    pub rule: String,
    pub reads: Vec<Register>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramFile {
    pub num_physical_qubits: usize,
    pub inputs: Vec<Wire>,
    pub instructions: Vec<OpText>,
    /// Derived from `instructions`; ignored when reading.
    pub feedforward: Vec<FeedforwardEntry>,
    pub output_map: Vec<Wire>,
    pub frame_policy: FramePolicy,
}

fn index_feedforward(ops: &[OpText], prefix: &str, out: &mut Vec<FeedforwardEntry>) {
    for (i, op) in ops.iter().enumerate() {
        let path = if prefix.is_empty() {
            i.to_string()
        } else {
            format!("{prefix}/{i}")
        };
        match op {
            OpText::Frame { rule } => {
                let v = serde_json::to_value(rule).expect("serializable");
                out.push(FeedforwardEntry {
                    path,
                    rule: v["kind"].as_str().unwrap_or_default().to_string(),
                    reads: rule.reads(),
                });
            }
            OpText::Select { key, branches } => {
                out.push(FeedforwardEntry {
                    path: path.clone(),
                    rule: "select".into(),
                    reads: key.registers.clone(),
                });
                for (b, body) in branches.iter().enumerate() {
                    index_feedforward(body, &format!("{path}/{b}"), out);
                }
            }
            OpText::Loop { body, .. } => {
                out.push(FeedforwardEntry {
                    path: path.clone(),
                    rule: "loop".into(),
                    reads: Vec::new(),
                });
                index_feedforward(body, &path, out);
            }
            _ => {}
        }
    }
}

impl ProgramFile {
    pub fn from_program(p: &Program) -> Self {
        let instructions: Vec<OpText> = p.ops.iter().map(OpText::from_op).collect();
        let mut feedforward = Vec::new();
        index_feedforward(&instructions, "", &mut feedforward);
        Self {
            num_physical_qubits: p.num_physical_qubits(),
            inputs: p.inputs.clone(),
            instructions,
            feedforward,
            output_map: p.outputs.clone(),
            frame_policy: p.frame_policy,
        }
    }

    pub fn to_program(&self) -> Result<Program> {
        let p = Program {
            inputs: self.inputs.clone(),
            ops: self.instructions.iter().map(OpText::to_op).collect::<Result<_>>()?,
            outputs: self.output_map.clone(),
            frame_policy: self.frame_policy,
        };
        p.validate()?;
        Ok(p)
    }
}

pub fn program_to_json(p: &Program) -> Result<String> {
    to_canonical_json(&ProgramFile::from_program(p))
}

pub fn program_from_json(s: &str) -> Result<Program> {
    from_json::<ProgramFile>(s)?.to_program()
}
