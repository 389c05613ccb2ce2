//! Restricted measurement sets: the discrete observable families, the
//! special two-qubit unitary whose single rotated Bell measurement is
//! universal, its circuits, ancillas and random-walk primitives.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{clifford_membership, CliffordMap};
use crate::error::{Error, Result};
use crate::gadgets::{emit_bell_pair, CorrectionRule, Emitted, GadgetFragment};
use crate::linalg::{c, kron, max_abs_diff, sigma, Matrix, UnitaryMatrix, C64, STRUCT_TOL};
use crate::measure::{measure, MeasurementSpec};
use crate::pauli::PauliString;
use crate::program::{Adapt, Builder, Descriptor, FrameOp, GateSpec, Key, LoopOp, Op, Register, Until, Wire};
use crate::state::{make_bell_state, tensor, PureState};

/// Default cap on random-walk iterations.
pub const DEFAULT_MAX_ITERS: usize = 512;

const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];

fn letter_index(ch: char) -> Result<usize> {
    LETTERS
        .iter()
        .position(|&l| l == ch)
        .ok_or_else(|| Error::Parse(format!("unknown Pauli letter {ch:?}")))
}

/// `U = I ⊕ R` with `R = [[cos t, -i e^{-i p} sin t], [-i e^{i p} sin t, cos t]]`:
/// a controlled rotation about an axis in the XY plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialU {
    pub theta: f64,
    pub phi: f64,
    matrix: UnitaryMatrix,
}

impl SpecialU {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        let (s, co) = theta.sin_cos();
        let off = |sgn: f64| C64::from_polar(1.0, sgn * phi) * c(0.0, -s);
        let mut m = Matrix::identity(4, 4);
        m[(2, 2)] = c(co, 0.0);
        m[(3, 3)] = c(co, 0.0);
        m[(2, 3)] = off(-1.0);
        m[(3, 2)] = off(1.0);
        Ok(Self {
            theta,
            phi,
            matrix: UnitaryMatrix::new(m)?,
        })
    }

    pub fn unitary(&self) -> &UnitaryMatrix {
        &self.matrix
    }

    pub fn gate(&self) -> GateSpec {
        GateSpec::new("U", self.matrix.clone())
    }

    pub fn squared(&self) -> UnitaryMatrix {
        self.matrix.compose(&self.matrix).expect("same arity")
    }
}

impl Default for SpecialU {
    /// `theta = sqrt(2) pi / 4`, `phi = sqrt(3) pi / 4`.
    fn default() -> Self {
        Self::new(2f64.sqrt() * FRAC_PI_4, 3f64.sqrt() * FRAC_PI_4).expect("unitary by construction")
    }
}

/// `(I⊗Z) U^dagger (I⊗Z) U` and whether it equals `U^2` within 1e-12.
pub fn verify_u_squared(su: &SpecialU) -> (Matrix, bool) {
    let iz = PauliString::from_indices(&[0, 3]).to_matrix();
    let m = su.unitary().matrix();
    let prod = &iz * m.adjoint() * &iz * m;
    let ok = max_abs_diff(&prod, &(m * m)) < 1e-12;
    (prod, ok)
}

/// `max |(I⊗Z) U^dagger (I⊗Z) U - U^2|` for any two-qubit `u`.
pub fn u_squared_deviation(u: &UnitaryMatrix) -> Result<f64> {
    if u.arity() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: u.arity(),
        });
    }
    let iz = PauliString::from_indices(&[0, 3]).to_matrix();
    let m = u.matrix();
    let lhs = &iz * m.adjoint() * &iz * m;
    Ok(max_abs_diff(&lhs, &(m * m)))
}

/// The Paulis `(P, Q)` with `U^2 = Q U^dagger P U`.
pub fn u_squared_paulis() -> (PauliString, PauliString) {
    let iz = PauliString::from_indices(&[0, 3]);
    (iz.clone(), iz)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SetName {
    S0,
    S1,
    S2,
    S3,
}

impl fmt::Display for SetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for SetName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_uppercase().as_str() {
            "S0" => Self::S0,
            "S1" => Self::S1,
            "S2" => Self::S2,
            "S3" => Self::S3,
            other => return Err(Error::Parse(format!("unknown observable set {other:?}"))),
        })
    }
}

/// A one- or two-qubit observable of a discrete set.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    Pauli(PauliString),
    /// `(cos t sigma_a + sin t sigma_b) ⊗ sigma_partner`.
    Rot { theta: f64, a: usize, b: usize, partner: usize },
    /// `(n . sigma) ⊗ sigma_partner`.
    Axis { n: [f64; 3], partner: usize },
}

fn axis_matrix(n: &[f64; 3]) -> Matrix {
    (1..4).fold(Matrix::zeros(2, 2), |acc, k| acc + sigma(k) * c(n[k - 1], 0.0))
}

/// Bloch vector of a traceless Hermitian 2x2 matrix.
fn bloch(m: &Matrix) -> [f64; 3] {
    let t = |k: usize| (sigma(k) * m).trace().re / 2.0;
    [t(1), t(2), t(3)]
}

impl Observable {
    pub fn num_qubits(&self) -> usize {
        match self {
            Self::Pauli(p) => p.num_qubits(),
            _ => 2,
        }
    }

    pub fn matrix(&self) -> Matrix {
        match self {
            Self::Pauli(p) => p.to_matrix(),
            Self::Rot { theta, a, b, partner } => {
                let (s, co) = theta.sin_cos();
                let first = sigma(*a) * c(co, 0.0) + sigma(*b) * c(s, 0.0);
                kron(&first, &sigma(*partner))
            }
            Self::Axis { n, partner } => kron(&axis_matrix(n), &sigma(*partner)),
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Pauli(p) => write!(f, "{p}"),
            Self::Rot { theta, a, b, partner } => {
                write!(f, "rot({theta:.16e},{}{})⊗{}", LETTERS[*a], LETTERS[*b], LETTERS[*partner])
            }
            Self::Axis { n, partner } => {
                write!(f, "axis({:.16e},{:.16e},{:.16e})⊗{}", n[0], n[1], n[2], LETTERS[*partner])
            }
        }
    }
}

impl FromStr for Observable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("malformed observable {s:?}"));
        let Some((head, rest)) = s.split_once('(') else {
            return Ok(Self::Pauli(s.parse()?));
        };
        let (args, tail) = rest.split_once(')').ok_or_else(bad)?;
        let partner_ch = tail.strip_prefix('⊗').ok_or_else(bad)?;
        let mut pc = partner_ch.chars();
        let partner = letter_index(pc.next().ok_or_else(bad)?)?;
        if pc.next().is_some() {
            return Err(bad());
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        match head {
            "rot" => {
                let (t, ab) = args.split_once(',').ok_or_else(bad)?;
                let ab: Vec<char> = ab.trim().chars().collect();
                if ab.len() != 2 {
                    return Err(bad());
                }
                Ok(Self::Rot {
                    theta: num(t)?,
                    a: letter_index(ab[0])?,
                    b: letter_index(ab[1])?,
                    partner,
                })
            }
            "axis" => {
                let v: Vec<f64> = args.split(',').map(num).collect::<Result<_>>()?;
                let n: [f64; 3] = v.try_into().map_err(|_| bad())?;
                Ok(Self::Axis { n, partner })
            }
            _ => Err(bad()),
        }
    }
}

impl Serialize for Observable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Observable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A named set of allowed observables and the non-Clifford rotation `u`
/// it realises through a rotated Bell measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSet {
    pub name: SetName,
    pub theta: Option<f64>,
    pub observables: Vec<Observable>,
    pub u: UnitaryMatrix,
}

fn swap_qubits(m: &Matrix) -> Matrix {
    let s = UnitaryMatrix::swap();
    s.matrix() * m * s.matrix()
}

impl ObservableSet {
    /// Membership up to sign and, for two-qubit observables, exchange of
    /// the two qubits.
    pub fn contains(&self, m: &Matrix, tol: f64) -> bool {
        let cands: Vec<Matrix> = if m.nrows() == 4 {
            vec![m.clone(), swap_qubits(m)]
        } else {
            vec![m.clone()]
        };
        self.observables.iter().any(|o| {
            let om = o.matrix();
            om.nrows() == m.nrows()
                && cands
                    .iter()
                    .any(|x| max_abs_diff(x, &om) < tol || max_abs_diff(&(-x), &om) < tol)
        })
    }

    fn push_unique(&mut self, o: Observable) {
        if !self.contains(&o.matrix(), 1e-9) {
            self.observables.push(o);
        }
    }

    /// The set extended for every single-qubit frame on the rotated input.
    pub fn absorption_closure(&self) -> Result<Self> {
        let mut out = self.clone();
        for j in 1..4 {
            out = augment_for_absorption(&out, &PauliString::from_indices(&[j]))?;
        }
        Ok(out)
    }
}

fn check_theta(theta: f64) -> Result<()> {
    let q = theta / FRAC_PI_2;
    if !theta.is_finite() || (q - q.round()).abs() < 1e-9 {
        return Err(Error::DisallowedTheta(theta));
    }
    Ok(())
}

fn paulis(strs: &[&str]) -> Vec<Observable> {
    strs.iter()
        .map(|s| Observable::Pauli(s.parse().expect("literal")))
        .collect()
}

/// The two observables whose joint eigenbasis is the rotated Bell basis
/// of `u`: `(u^ X u)⊗X` and `(u^ Z u)⊗Z`.
pub fn rotated_bell_observables(u: &UnitaryMatrix) -> Result<(Matrix, Matrix)> {
    if u.arity() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: u.arity(),
        });
    }
    let m = u.matrix();
    let o = |k: usize| kron(&(m.adjoint() * sigma(k) * m), &sigma(k));
    Ok((o(1), o(3)))
}

/// Builds one of the four sets. `S1` and `S2` need `theta` away from
/// multiples of `pi/2`; `S0` needs a caller-supplied non-Clifford `u`.
pub fn build_set(name: SetName, theta: Option<f64>, u: Option<&UnitaryMatrix>) -> Result<ObservableSet> {
    let base = ["Z", "XX", "ZZ", "XZ"];
    let need_theta = || theta.ok_or_else(|| Error::InvalidSpec(format!("{name} needs theta")));
    let (theta, u, mut obs) = match name {
        SetName::S0 => {
            let u = u
                .cloned()
                .ok_or_else(|| Error::InvalidSpec("S0 needs a single-qubit unitary u".into()))?;
            if u.arity() != 1 {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    found: u.arity(),
                });
            }
            if clifford_membership(&u, STRUCT_TOL)? {
                return Err(Error::InvalidSpec("S0 needs u outside the Clifford group".into()));
            }
            (None, u, paulis(&[&base[..], &["XY"]].concat()))
        }
        SetName::S1 => {
            let t = need_theta()?;
            check_theta(t)?;
            let mut o = paulis(&[&base[..], &["XY"]].concat());
            o.push(Observable::Rot { theta: t, a: 3, b: 2, partner: 3 });
            (Some(t), UnitaryMatrix::rx(t), o)
        }
        SetName::S2 => {
            let t = need_theta()?;
            check_theta(t)?;
            let mut o = paulis(&[&base[..], &["XY"]].concat());
            o.push(Observable::Rot { theta: t, a: 1, b: 2, partner: 1 });
            (Some(t), UnitaryMatrix::rz(-t), o)
        }
        SetName::S3 => {
            let mut o = paulis(&base);
            o.push(Observable::Rot { theta: FRAC_PI_4, a: 1, b: 2, partner: 1 });
            (Some(FRAC_PI_4), UnitaryMatrix::rz(-FRAC_PI_4), o)
        }
    };
    if name == SetName::S0 {
        for k in [1, 3] {
            let first = u.matrix().adjoint() * sigma(k) * u.matrix();
            obs.push(Observable::Axis { n: bloch(&first), partner: k });
        }
    }
    let mut set = ObservableSet {
        name,
        theta,
        observables: Vec::new(),
        u,
    };
    for o in obs {
        set.push_unique(o);
    }
    Ok(set)
}

/// Adds the observables of the rotated Bell measurement for `u · sigma`,
/// the gate measured when the frame `sigma` is absorbed into `u`.
pub fn augment_for_absorption(set: &ObservableSet, correction: &PauliString) -> Result<ObservableSet> {
    if correction.num_qubits() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: correction.num_qubits(),
        });
    }
    let mut out = set.clone();
    let w = set.u.matrix() * correction.to_matrix();
    for k in [1, 3] {
        let first = w.adjoint() * sigma(k) * &w;
        out.push_unique(Observable::Axis { n: bloch(&first), partner: k });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Circuits, ancillas and primitives for the single-measurement scheme.

fn product_table() -> Vec<PauliString> {
    (0..256)
        .map(|i| {
            PauliString::two_qubit(i / 16)
                .mul(&PauliString::two_qubit(i % 16))
                .expect("same width")
        })
        .collect()
}

fn pair_key(k: Register, j: Register) -> Key {
    Key {
        registers: vec![k, j],
        radix: vec![16, 16],
    }
}

fn check_two(g: &GateSpec) -> Result<()> {
    if g.arity() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: g.arity(),
        });
    }
    Ok(())
}

/// Circuit A: the measurement on `[in1, in2, b1, b2]` against Bell pairs
/// `(b1, b3)`, `(b2, b4)`. Output on `(b3, b4)` is `P_j U |psi>`; the
/// byproduct is only recorded.
pub fn emit_circuit_a(b: &mut Builder, g: &GateSpec, inputs: [Wire; 2]) -> Result<Emitted> {
    check_two(g)?;
    b.frame(FrameOp::RequireClear { wires: inputs.to_vec() });
    let (b1, b3, k1) = emit_bell_pair(b);
    let (b2, b4, k2) = emit_bell_pair(b);
    let j = b.measure(Descriptor::RotatedBell(g.clone()), &[inputs[0], inputs[1], b1, b2], Adapt::Fixed);
    let table: Vec<PauliString> = (0..16).map(PauliString::two_qubit).collect();
    b.table(j, &[b3, b4], table);
    b.release(&[inputs[0], inputs[1], b1, b2]);
    Ok(Emitted {
        outputs: vec![b3, b4],
        prep: vec![k1, k2],
        core: vec![j],
        correction: CorrectionRule::None,
    })
}

/// Circuit B: the same measurement with the pair halves first,
/// `[b1, b2, in1, in2]`. Output on `(b3, b4)` is `U^T P_j |psi>`.
pub fn emit_circuit_b(b: &mut Builder, g: &GateSpec, inputs: [Wire; 2]) -> Result<Emitted> {
    check_two(g)?;
    b.frame(FrameOp::RequireClear { wires: inputs.to_vec() });
    let (b1, b3, k1) = emit_bell_pair(b);
    let (b2, b4, k2) = emit_bell_pair(b);
    let j = b.measure(Descriptor::RotatedBell(g.clone()), &[b1, b2, inputs[0], inputs[1]], Adapt::Fixed);
    b.release(&[inputs[0], inputs[1], b1, b2]);
    Ok(Emitted {
        outputs: vec![b3, b4],
        prep: vec![k1, k2],
        core: vec![j],
        correction: CorrectionRule::None,
    })
}

/// Ancilla C on fresh qubits: the measurement on `[c1, c2, c3, c4]` leaves
/// `(U^dagger P_k)_{12} |Phi_0>_{13} |Phi_0>_{24}`.
pub fn emit_ancilla_c(b: &mut Builder, g: &GateSpec) -> Result<([Wire; 4], Register)> {
    check_two(g)?;
    let w = b.alloc(4);
    let k = b.measure(Descriptor::RotatedBell(g.clone()), &w, Adapt::Fixed);
    Ok(([w[0], w[1], w[2], w[3]], k))
}

/// Ancilla D on fresh qubits: targets `[d3, d4, d1, d2]`, leaving
/// `(U^dagger P_k)_{34} |Phi_0>_{13} |Phi_0>_{24}`.
pub fn emit_ancilla_d(b: &mut Builder, g: &GateSpec) -> Result<([Wire; 4], Register)> {
    check_two(g)?;
    let w = b.alloc(4);
    let k = b.measure(Descriptor::RotatedBell(g.clone()), &[w[2], w[3], w[0], w[1]], Adapt::Fixed);
    Ok(([w[0], w[1], w[2], w[3]], k))
}

/// Outcome registers of one primitive application.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimitiveRegs {
    pub outputs: [Wire; 2],
    pub ancilla: Register,
    pub core: Register,
}

/// Primitive 2: ancilla C then circuit B. Applies `P_k P_j`; the input
/// frame is carried through to the output.
pub fn emit_primitive_2(b: &mut Builder, g: &GateSpec, inputs: [Wire; 2]) -> Result<PrimitiveRegs> {
    let (c, k) = emit_ancilla_c(b, g)?;
    let j = b.measure(Descriptor::RotatedBell(g.clone()), &[c[0], c[1], inputs[0], inputs[1]], Adapt::Fixed);
    b.transfer(&inputs, &[c[2], c[3]], CliffordMap::identity(2));
    b.frame(FrameOp::Table {
        key: pair_key(k, j),
        wires: vec![c[2], c[3]],
        table: product_table(),
    });
    b.release(&[c[0], c[1], inputs[0], inputs[1]]);
    Ok(PrimitiveRegs {
        outputs: [c[2], c[3]],
        ancilla: k,
        core: j,
    })
}

/// Primitive 1: ancilla D then circuit A. Applies `U^dagger P_k P_j U` to
/// a frame-free input and multiplies accumulator `acc` by `P_k P_j`.
pub fn emit_primitive_1(b: &mut Builder, g: &GateSpec, inputs: [Wire; 2], acc: usize) -> Result<PrimitiveRegs> {
    b.frame(FrameOp::RequireClear { wires: inputs.to_vec() });
    let (d, k) = emit_ancilla_d(b, g)?;
    let j = b.measure(Descriptor::RotatedBell(g.clone()), &[inputs[0], inputs[1], d[0], d[1]], Adapt::Fixed);
    b.frame(FrameOp::AccMul {
        acc,
        key: pair_key(k, j),
        table: product_table(),
    });
    b.release(&[inputs[0], inputs[1], d[0], d[1]]);
    Ok(PrimitiveRegs {
        outputs: [d[2], d[3]],
        ancilla: k,
        core: j,
    })
}

/// Repeats primitive 2 on `wires` while their frame is not the identity.
pub fn emit_clearing_loop(b: &mut Builder, g: &GateSpec, wires: [Wire; 2], max_iters: usize) -> Result<()> {
    let (body, regs) = b.nested(|b| emit_primitive_2(b, g, wires))?;
    b.push(Op::Loop(LoopOp {
        label: "clear".into(),
        body,
        carry: vec![(wires[0], regs.outputs[0]), (wires[1], regs.outputs[1])],
        until: Until::FrameIdentity(wires.to_vec()),
        check_first: true,
        max_iters,
    }));
    Ok(())
}

/// Repeats primitive 1 on `wires` until the accumulated Pauli equals
/// `target` up to phase; the net effect is `U^dagger target U`.
pub fn emit_walk_loop(b: &mut Builder, g: &GateSpec, wires: [Wire; 2], target: &PauliString, max_iters: usize) -> Result<()> {
    let acc = b.accumulator();
    b.frame(FrameOp::AccReset { acc, width: 2 });
    let (body, regs) = b.nested(|b| emit_primitive_1(b, g, wires, acc))?;
    b.push(Op::Loop(LoopOp {
        label: "walk".into(),
        body,
        carry: vec![(wires[0], regs.outputs[0]), (wires[1], regs.outputs[1])],
        until: Until::Accumulator {
            acc,
            target: target.clone(),
        },
        check_first: false,
        max_iters,
    }));
    Ok(())
}

/// `Q U^dagger P U` on `wires` using only the one rotated Bell measurement:
/// clear the frame, walk to `P`, then record `Q` in the frame.
pub fn emit_conjugated_gate(
    b: &mut Builder,
    g: &GateSpec,
    wires: [Wire; 2],
    p: &PauliString,
    q: &PauliString,
    max_iters: usize,
) -> Result<()> {
    emit_clearing_loop(b, g, wires, max_iters)?;
    emit_walk_loop(b, g, wires, p, max_iters)?;
    b.frame(FrameOp::Pauli {
        wires: wires.to_vec(),
        pauli: q.clone(),
    });
    Ok(())
}

fn fragment(name: &str, f: impl FnOnce(&mut Builder, [Wire; 2]) -> Result<Emitted>) -> Result<GadgetFragment> {
    crate::gadgets::standalone(name, 2, |b, ins| f(b, [ins[0], ins[1]]))
}

pub fn circuit_a(u: &UnitaryMatrix) -> Result<GadgetFragment> {
    let g = GateSpec::new("U", u.clone());
    fragment("circuit-A", |b, ins| emit_circuit_a(b, &g, ins))
}

pub fn circuit_b(u: &UnitaryMatrix) -> Result<GadgetFragment> {
    let g = GateSpec::new("U", u.clone());
    fragment("circuit-B", |b, ins| emit_circuit_b(b, &g, ins))
}

/// Primitive 1 or 2 as a standalone two-qubit fragment.
pub fn primitive(u: &UnitaryMatrix, which: Primitive) -> Result<GadgetFragment> {
    let g = GateSpec::new("U", u.clone());
    fragment(&format!("primitive-{}", which.number()), |b, ins| {
        let (regs, correction) = match which {
            Primitive::One => {
                let acc = b.accumulator();
                b.frame(FrameOp::AccReset { acc, width: 2 });
                (emit_primitive_1(b, &g, ins, acc)?, CorrectionRule::None)
            }
            Primitive::Two => {
                let r = emit_primitive_2(b, &g, ins)?;
                let c = CorrectionRule::Pauli {
                    key: pair_key(r.ancilla, r.core),
                    wires: r.outputs.to_vec(),
                    table: product_table(),
                };
                (r, c)
            }
        };
        Ok(Emitted {
            outputs: regs.outputs.to_vec(),
            prep: vec![regs.ancilla],
            core: vec![regs.core],
            correction,
        })
    })
}

/// `Q U^dagger P U` as a standalone fragment.
pub fn conjugated_gate(u: &SpecialU, p: &PauliString, q: &PauliString, max_iters: usize) -> Result<crate::program::Program> {
    let mut b = Builder::new();
    let w = [b.wire(), b.wire()];
    emit_conjugated_gate(&mut b, &u.gate(), w, p, q, max_iters)?;
    Ok(b.finish(w.to_vec(), w.to_vec()))
}

/// Dense ancilla: the measurement applied to `|Phi_0>_{13} |Phi_0>_{24}`,
/// on targets `[0, 1, 2, 3]` (C) or `[2, 3, 0, 1]` (D).
fn make_ancilla<R: Rng + ?Sized>(u: &UnitaryMatrix, targets: [usize; 4], rng: &mut R) -> Result<(PureState, usize)> {
    if u.arity() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: u.arity(),
        });
    }
    let phi = make_bell_state(0)?;
    // Pairs (0,2) and (1,3).
    let pairs = tensor(&phi, &phi)?.permute(&[0, 2, 1, 3])?;
    let (k, _, state) = measure(&pairs, &MeasurementSpec::rotated_bell(u), &targets, rng)?;
    Ok((state, k))
}

pub fn make_ancilla_c<R: Rng + ?Sized>(u: &UnitaryMatrix, rng: &mut R) -> Result<(PureState, usize)> {
    make_ancilla(u, [0, 1, 2, 3], rng)
}

pub fn make_ancilla_d<R: Rng + ?Sized>(u: &UnitaryMatrix, rng: &mut R) -> Result<(PureState, usize)> {
    make_ancilla(u, [2, 3, 0, 1], rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Primitive {
    /// Applies `U^dagger P U`; repeated until the accumulated `P` hits the
    /// target (at least once).
    One,
    /// Applies `P`; repeated while the accumulated `P` differs from the
    /// target (possibly zero times).
    Two,
}

impl Primitive {
    pub fn number(self) -> usize {
        match self {
            Self::One => 1,
            Self::Two => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkRun {
    pub primitive: Primitive,
    pub iterations: usize,
    /// `(k, j)` per iteration.
    pub steps: Vec<(usize, usize)>,
    pub accumulated: PauliString,
}

/// Pauli-level random walk over two-qubit Paulis: each step multiplies by
/// `P_k P_j` with `k`, `j` uniform. At least one step is taken, so an
/// identity target is hit only by a product equal to the identity. For
/// `Primitive::One` the applied gate is `U^dagger G U` with `G` the
/// accumulated Pauli; only `G` is tracked here.
pub fn random_walk_to_target<R: Rng + ?Sized>(
    target: &PauliString,
    primitive: Primitive,
    rng: &mut R,
    max_iters: usize,
) -> Result<WalkRun> {
    if target.num_qubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: target.num_qubits(),
        });
    }
    let mut acc = PauliString::identity(2);
    let mut steps = Vec::new();
    while steps.len() < max_iters {
        let (k, j) = (rng.gen_range(0..16), rng.gen_range(0..16));
        steps.push((k, j));
        acc = PauliString::two_qubit(k).mul(&PauliString::two_qubit(j))?.mul(&acc)?;
        if acc.eq_mod_phase(target) {
            return Ok(WalkRun {
                primitive,
                iterations: steps.len(),
                steps,
                accumulated: acc,
            });
        }
    }
    Err(Error::MaxRoundsExceeded(max_iters))
}

/// `P_0 prod_i U^dagger P_i U` for random Paulis; returns the Paulis used.
pub fn random_primitive_word<R: Rng + ?Sized>(
    u: &UnitaryMatrix,
    len: usize,
    rng: &mut R,
) -> Result<(Vec<PauliString>, UnitaryMatrix)> {
    if u.arity() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: u.arity(),
        });
    }
    let m = u.matrix();
    let mut ps = vec![PauliString::two_qubit(rng.gen_range(0..16))];
    let mut w = ps[0].to_matrix();
    for _ in 0..len {
        let p = PauliString::two_qubit(rng.gen_range(0..16));
        w = m.adjoint() * p.to_matrix() * m * w;
        ps.push(p);
    }
    Ok((ps, UnitaryMatrix::new(w)?))
}

/// For Clifford `u`: true iff `samples` random primitive words, with
/// lengths cycling through `1..=max_len`, are all Clifford. Non-Clifford
/// `u` is rejected.
pub fn clifford_closure_check<R: Rng + ?Sized>(
    u: &UnitaryMatrix,
    max_len: usize,
    samples: usize,
    rng: &mut R,
) -> Result<bool> {
    if !clifford_membership(u, STRUCT_TOL)? {
        return Err(Error::NotClifford);
    }
    for i in 0..samples {
        let (_, w) = random_primitive_word(u, 1 + i % max_len.max(1), rng)?;
        if !clifford_membership(&w, STRUCT_TOL)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The shortest sampled primitive word outside the Clifford group.
pub fn find_non_clifford_word<R: Rng + ?Sized>(
    u: &UnitaryMatrix,
    max_len: usize,
    samples: usize,
    rng: &mut R,
) -> Result<Option<(usize, Vec<PauliString>)>> {
    for len in 1..=max_len {
        for _ in 0..samples {
            let (ps, w) = random_primitive_word(u, len, rng)?;
            if !clifford_membership(&w, STRUCT_TOL)? {
                return Ok(Some((len, ps)));
            }
        }
    }
    Ok(None)
}
