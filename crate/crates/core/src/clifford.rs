//! Clifford gates and their action on Pauli strings by conjugation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, UnitaryMatrix};
use crate::pauli::PauliString;

/// The generators used by the toolkit; `P` is the phase gate `e^{-i pi Z/4}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CliffordGate {
    Cnot { control: usize, target: usize },
    H(usize),
    P(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Swap(usize, usize),
}

impl CliffordGate {
    pub fn targets(&self) -> Vec<usize> {
        match *self {
            Self::Cnot { control, target } => vec![control, target],
            Self::Swap(a, b) => vec![a, b],
            Self::H(q) | Self::P(q) | Self::X(q) | Self::Y(q) | Self::Z(q) => vec![q],
        }
    }

    pub fn unitary(&self) -> UnitaryMatrix {
        match self {
            Self::Cnot { .. } => UnitaryMatrix::cnot(),
            Self::Swap(..) => UnitaryMatrix::swap(),
            Self::H(_) => UnitaryMatrix::h(),
            Self::P(_) => UnitaryMatrix::phase(),
            Self::X(_) => UnitaryMatrix::x(),
            Self::Y(_) => UnitaryMatrix::y(),
            Self::Z(_) => UnitaryMatrix::z(),
        }
    }

    /// Images of `X` and `Z` on each local target qubit.
    fn local_map(&self) -> CliffordMap {
        let p = |s: &str| s.parse::<PauliString>().expect("literal");
        let (xs, zs) = match self {
            Self::H(_) => (vec![p("Z")], vec![p("X")]),
            Self::P(_) => (vec![p("Y")], vec![p("Z")]),
            Self::X(_) => (vec![p("X")], vec![p("-Z")]),
            Self::Y(_) => (vec![p("-X")], vec![p("-Z")]),
            Self::Z(_) => (vec![p("-X")], vec![p("Z")]),
            Self::Cnot { .. } => (vec![p("XX"), p("IX")], vec![p("ZI"), p("ZZ")]),
            Self::Swap(..) => (vec![p("IX"), p("XI")], vec![p("IZ"), p("ZI")]),
        };
        CliffordMap { xs, zs }
    }
}

/// A Clifford action given by the images of every `X_q` and `Z_q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordMap {
    pub xs: Vec<PauliString>,
    pub zs: Vec<PauliString>,
}

impl CliffordMap {
    pub fn identity(n: usize) -> Self {
        Self {
            xs: (0..n).map(|q| PauliString::single(n, q, 1)).collect(),
            zs: (0..n).map(|q| PauliString::single(n, q, 3)).collect(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.xs.len()
    }

    /// Reads the images off a dense unitary; `None` if `u` is not Clifford.
    pub fn from_unitary(u: &Matrix, tol: f64) -> Option<Self> {
        let n = u.nrows().trailing_zeros() as usize;
        let image = |p: PauliString| -> Option<PauliString> {
            let m = u * p.to_matrix() * u.adjoint();
            let (q, extra) = PauliString::from_matrix(&m, tol)?;
            // Images of Hermitian Paulis are Hermitian: the scalar is ±1.
            ((extra - crate::linalg::ONE).norm() <= tol).then_some(q)
        };
        let xs = (0..n).map(|q| image(PauliString::single(n, q, 1))).collect::<Option<Vec<_>>>()?;
        let zs = (0..n).map(|q| image(PauliString::single(n, q, 3))).collect::<Option<Vec<_>>>()?;
        Some(Self { xs, zs })
    }

    /// `C p C^dagger`, exact including phase.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString> {
        let n = self.num_qubits();
        if p.num_qubits() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.num_qubits(),
            });
        }
        let mut out = PauliString::identity(n).times_phase(p.phase_exponent());
        for q in 0..n {
            if p.x_bits()[q] {
                out = out.mul(&self.xs[q])?;
            }
            if p.z_bits()[q] {
                out = out.mul(&self.zs[q])?;
            }
        }
        Ok(out)
    }

    /// Lifts a `k`-qubit map onto `qubits` of an `n`-qubit register.
    pub fn embed(&self, n: usize, qubits: &[usize]) -> Result<Self> {
        let mut full = Self::identity(n);
        for (i, &q) in qubits.iter().enumerate() {
            full.xs[q] = self.xs[i].embed(n, qubits)?;
            full.zs[q] = self.zs[i].embed(n, qubits)?;
        }
        Ok(full)
    }
}

/// `g p g^dagger`.
pub fn conjugate_by_clifford(p: &PauliString, g: &CliffordGate) -> Result<PauliString> {
    let n = p.num_qubits();
    let targets = g.targets();
    crate::state::check_targets(n, &targets)?;
    g.local_map().embed(n, &targets)?.conjugate(p)
}

/// True iff `u X_q u^dagger` and `u Z_q u^dagger` are phase-adjusted Pauli
/// strings for every qubit. Limited to three qubits.
pub fn clifford_membership(u: &UnitaryMatrix, tol: f64) -> Result<bool> {
    if u.arity() > 3 {
        return Err(Error::Unsupported(format!(
            "Clifford membership for {}-qubit unitaries",
            u.arity()
        )));
    }
    Ok(CliffordMap::from_unitary(u.matrix(), tol).is_some())
}
