//! Pauli strings with exact phase tracking.
//!
//! A string is stored as `i^k X^x Z^z` per the usual symplectic encoding, so
//! `Y = i X Z` carries `k = 1`. The text form hides this: it prints the phase
//! relative to the named letters (`I`, `X`, `Y`, `Z`), e.g. `-IXXI`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{kron, sigma, Matrix, C64, I, ONE};
use crate::state::PureState;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: Vec<bool>,
    z: Vec<bool>,
    phase: u8,
}

fn i_pow(k: u8) -> C64 {
    match k % 4 {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

impl PauliString {
    pub fn identity(num_qubits: usize) -> Self {
        Self {
            x: vec![false; num_qubits],
            z: vec![false; num_qubits],
            phase: 0,
        }
    }

    /// `sigma_{j_0} ⊗ sigma_{j_1} ⊗ ...` with a `+1` prefactor.
    pub fn from_indices(indices: &[usize]) -> Self {
        let mut p = Self::identity(indices.len());
        for (q, &j) in indices.iter().enumerate() {
            p.set_letter(q, j);
        }
        p
    }

    /// `sigma_j` on qubit `q` of an `n`-qubit register.
    pub fn single(num_qubits: usize, q: usize, j: usize) -> Self {
        let mut p = Self::identity(num_qubits);
        p.set_letter(q, j);
        p
    }

    /// Two-qubit `P_j = sigma_{j_1} ⊗ sigma_{j_2}` for `j = 4 j_1 + j_2`.
    pub fn two_qubit(j: usize) -> Self {
        Self::from_indices(&[j / 4 % 4, j % 4])
    }

    pub fn from_bits(x: Vec<bool>, z: Vec<bool>, phase: u8) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: z.len(),
            });
        }
        Ok(Self { x, z, phase: phase % 4 })
    }

    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn x_bits(&self) -> &[bool] {
        &self.x
    }

    pub fn z_bits(&self) -> &[bool] {
        &self.z
    }

    /// `k` in `i^k X^x Z^z`.
    pub fn phase_exponent(&self) -> u8 {
        self.phase
    }

    fn y_count(&self) -> usize {
        self.x.iter().zip(&self.z).filter(|(x, z)| **x && **z).count()
    }

    /// Exponent `m` such that the operator is `i^m` times the named letters.
    pub fn named_phase(&self) -> u8 {
        ((self.phase as usize + 4 - self.y_count() % 4) % 4) as u8
    }

    /// Letter index on qubit `q`: 0 = I, 1 = X, 2 = Y, 3 = Z.
    pub fn letter(&self, q: usize) -> usize {
        match (self.x[q], self.z[q]) {
            (false, false) => 0,
            (true, false) => 1,
            (true, true) => 2,
            (false, true) => 3,
        }
    }

    pub fn letters(&self) -> Vec<usize> {
        (0..self.num_qubits()).map(|q| self.letter(q)).collect()
    }

    /// Replaces qubit `q` with `sigma_j`, keeping the named prefactor.
    pub fn set_letter(&mut self, q: usize, j: usize) {
        let named = self.named_phase();
        let (x, z) = match j {
            0 => (false, false),
            1 => (true, false),
            2 => (true, true),
            3 => (false, true),
            _ => panic!("Pauli index {j} out of range"),
        };
        self.x[q] = x;
        self.z[q] = z;
        self.phase = ((named as usize + self.y_count()) % 4) as u8;
    }

    /// Number of non-identity tensor factors.
    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).filter(|(x, z)| **x || **z).count()
    }

    pub fn is_hermitian(&self) -> bool {
        self.named_phase() % 2 == 0
    }

    pub fn is_identity_mod_phase(&self) -> bool {
        self.weight() == 0
    }

    pub fn eq_mod_phase(&self, other: &Self) -> bool {
        self.x == other.x && self.z == other.z
    }

    /// `+1` / `-1` for Hermitian strings relative to their named letters.
    pub fn sign(&self) -> Option<i8> {
        match self.named_phase() {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn times_phase(&self, k: u8) -> Self {
        Self {
            x: self.x.clone(),
            z: self.z.clone(),
            phase: (self.phase + k) % 4,
        }
    }

    pub fn negated(&self) -> Self {
        self.times_phase(2)
    }

    /// Drops the prefactor, leaving `+` times the named letters.
    pub fn without_phase(&self) -> Self {
        Self::from_indices(&self.letters())
    }

    fn check_width(&self, other: &Self) -> Result<()> {
        if self.num_qubits() != other.num_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits(),
                found: other.num_qubits(),
            });
        }
        Ok(())
    }

    /// Exact product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_width(other)?;
        // Z^{z1} X^{x2} = (-1)^{z1 x2} X^{x2} Z^{z1}
        let swaps = self.z.iter().zip(&other.x).filter(|(z, x)| **z && **x).count();
        let phase = ((self.phase as usize + other.phase as usize + 2 * swaps) % 4) as u8;
        Ok(Self {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
            phase,
        })
    }

    /// True iff the symplectic product vanishes mod 2.
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_width(other)?;
        let s = (0..self.num_qubits())
            .filter(|&q| (self.x[q] & other.z[q]) ^ (self.z[q] & other.x[q]))
            .count();
        Ok(s % 2 == 0)
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut x = self.x.clone();
        x.extend_from_slice(&other.x);
        let mut z = self.z.clone();
        z.extend_from_slice(&other.z);
        Self {
            x,
            z,
            phase: (self.phase + other.phase) % 4,
        }
    }

    /// Restriction to `qubits` (prefactor kept).
    pub fn restrict(&self, qubits: &[usize]) -> Self {
        let mut out = Self {
            x: qubits.iter().map(|&q| self.x[q]).collect(),
            z: qubits.iter().map(|&q| self.z[q]).collect(),
            phase: 0,
        };
        let named = self.named_phase();
        out.phase = ((named as usize + out.y_count()) % 4) as u8;
        out
    }

    /// Places `self` on `qubits` of an `n`-qubit register, identity elsewhere.
    pub fn embed(&self, num_qubits: usize, qubits: &[usize]) -> Result<Self> {
        if qubits.len() != self.num_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits(),
                found: qubits.len(),
            });
        }
        crate::state::check_targets(num_qubits, qubits)?;
        let mut out = Self::identity(num_qubits);
        for (i, &q) in qubits.iter().enumerate() {
            out.x[q] = self.x[i];
            out.z[q] = self.z[i];
        }
        out.phase = self.phase;
        Ok(out)
    }

    /// Dense `2^n x 2^n` matrix, qubit 0 leftmost.
    pub fn to_matrix(&self) -> Matrix {
        let mut m = Matrix::identity(1, 1);
        for q in 0..self.num_qubits() {
            m = kron(&m, &sigma(self.letter(q)));
        }
        m * i_pow(self.named_phase())
    }

    /// Recognizes a matrix that is a Pauli string times a unit scalar.
    /// The returned string absorbs the scalar when it is a power of `i`;
    /// otherwise the scalar is returned separately.
    pub fn from_matrix(m: &Matrix, tol: f64) -> Option<(Self, C64)> {
        let d = m.nrows();
        if !m.is_square() || !d.is_power_of_two() || d < 2 {
            return None;
        }
        let n = d.trailing_zeros() as usize;
        // Row 0 of X^x Z^z has its single nonzero at column x.
        let (col, _) = (0..d)
            .map(|cidx| (cidx, m[(0, cidx)].norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        let x: Vec<bool> = (0..n).map(|q| col >> (n - 1 - q) & 1 == 1).collect();
        for z_pat in 0..d {
            let z: Vec<bool> = (0..n).map(|q| z_pat >> (n - 1 - q) & 1 == 1).collect();
            let cand = Self {
                x: x.clone(),
                z,
                phase: 0,
            };
            if let Some(ph) = crate::linalg::phase_between(m, &cand.to_matrix(), tol) {
                for k in 0..4u8 {
                    if (ph - i_pow(k)).norm() <= tol {
                        return Some((cand.times_phase(k), ONE));
                    }
                }
                return Some((cand, ph));
            }
        }
        None
    }

    /// Applies the string to `targets` of `state` without densifying.
    pub fn apply_to(&self, state: &PureState, targets: &[usize]) -> Result<PureState> {
        let n = state.num_qubits();
        if targets.len() != self.num_qubits() {
            return Err(Error::ArityMismatch {
                arity: self.num_qubits(),
                targets: targets.len(),
            });
        }
        crate::state::check_targets(n, targets)?;
        let (mut xm, mut zm) = (0usize, 0usize);
        for (i, &q) in targets.iter().enumerate() {
            let bit = 1 << (n - 1 - q);
            if self.x[i] {
                xm |= bit;
            }
            if self.z[i] {
                zm |= bit;
            }
        }
        let ph = i_pow(self.phase);
        let src = state.amplitudes();
        let mut out = state.clone();
        let dst = out.amps_mut();
        for (idx, a) in src.iter().enumerate() {
            let s = if (idx & zm).count_ones() % 2 == 1 { -ph } else { ph };
            dst[idx ^ xm] = a * s;
        }
        Ok(out)
    }
}

/// `a · b` with size check.
pub fn pauli_mul(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    a.mul(b)
}

pub fn pauli_commutes(a: &PauliString, b: &PauliString) -> Result<bool> {
    a.commutes(b)
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.named_phase() {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in 0..self.num_qubits() {
            f.write_str(["I", "X", "Y", "Z"][self.letter(q)])?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Accepts an optional `+`, `-` or `−`, then an optional `i`, then letters.
    fn from_str(s: &str) -> Result<Self> {
        let mut rest = s.trim();
        let mut named = 0u8;
        if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        } else if let Some(r) = rest.strip_prefix('-').or_else(|| rest.strip_prefix('−')) {
            rest = r;
            named = 2;
        }
        if let Some(r) = rest.strip_prefix('i') {
            rest = r;
            named = (named + 1) % 4;
        }
        if rest.is_empty() {
            return Err(Error::Parse(format!("empty Pauli string {s:?}")));
        }
        let mut letters = Vec::with_capacity(rest.len());
        for ch in rest.chars() {
            letters.push(match ch {
                'I' => 0,
                'X' => 1,
                'Y' => 2,
                'Z' => 3,
                other => return Err(Error::Parse(format!("bad Pauli letter {other:?} in {s:?}"))),
            });
        }
        Ok(Self::from_indices(&letters).times_phase(named))
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
