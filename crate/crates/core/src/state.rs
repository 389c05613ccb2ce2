//! Dense statevector engine.
//!
//! Qubit 0 is the most significant bit of the amplitude index, i.e. the
//! leftmost tensor factor. Every other module follows this ordering.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{c, UnitaryMatrix, C64, ONE, STRUCT_TOL, ZERO};

/// Refuse to allocate beyond this many qubits.
pub const MAX_QUBITS: usize = 20;

/// Default tolerance for [`equal_up_to_global_phase`].
pub const PHASE_TOL: f64 = 1e-10;

/// Index of a Bell state `|Phi_j>`, `j` in `0..4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BellIndex(u8);

impl BellIndex {
    pub fn new(j: usize) -> Result<Self> {
        if j < 4 {
            Ok(Self(j as u8))
        } else {
            Err(Error::OutOfRange { index: j, limit: 4 })
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = Self> {
        (0..4).map(|j| Self(j as u8))
    }
}

/// Normalized pure state on `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl PureState {
    /// Wraps an amplitude vector, checking length and unit norm.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidSpec(format!(
                "amplitude vector length {len} is not 2^n with n >= 1"
            )));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n, MAX_QUBITS));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STRUCT_TOL {
            return Err(Error::InvalidSpec(format!("state norm {norm} != 1")));
        }
        Ok(Self { num_qubits: n, amps })
    }

    /// Normalizes `amps` before wrapping.
    pub fn normalized(mut amps: Vec<C64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::InvalidSpec("zero vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::new(amps)
    }

    pub(crate) fn from_raw(num_qubits: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << num_qubits);
        Self { num_qubits, amps }
    }

    /// Computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(num_qubits, MAX_QUBITS));
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::OutOfRange { index, limit: dim });
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self::from_raw(num_qubits, amps))
    }

    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    /// `(|0> + |1>)/sqrt 2`.
    pub fn plus() -> Self {
        let s = c(FRAC_1_SQRT_2, 0.0);
        Self::from_raw(1, vec![s, s])
    }

    /// Haar-random state.
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Self {
        let dim = 1usize << num_qubits;
        let amps = (0..dim)
            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(amps).expect("gaussian vector is nonzero")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Reorders qubits so that new qubit `i` is old qubit `order[i]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let n = self.num_qubits;
        check_targets(n, order)?;
        if order.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: order.len(),
            });
        }
        let mut amps = vec![ZERO; self.amps.len()];
        for (old, a) in self.amps.iter().enumerate() {
            let mut new = 0usize;
            for (i, &src) in order.iter().enumerate() {
                if old >> (n - 1 - src) & 1 == 1 {
                    new |= 1 << (n - 1 - i);
                }
            }
            amps[new] = *a;
        }
        Ok(Self::from_raw(n, amps))
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }
}

/// Gather/scatter tables splitting a full index into target and rest parts.
pub(crate) struct Layout {
    pub target_offsets: Vec<usize>,
    pub rest_offsets: Vec<usize>,
}

impl Layout {
    pub fn new(num_qubits: usize, targets: &[usize]) -> Self {
        // Each qubit added in place becomes the new most significant bit, so
        // walk the list backwards.
        let offsets = |qs: &[usize]| {
            let mut out = Vec::with_capacity(1 << qs.len());
            out.push(0usize);
            for &q in qs.iter().rev() {
                let bit = 1usize << (num_qubits - 1 - q);
                for i in 0..out.len() {
                    out.push(out[i] | bit);
                }
            }
            out
        };
        let rest: Vec<usize> = (0..num_qubits).filter(|q| !targets.contains(q)).collect();
        Self {
            target_offsets: offsets(targets),
            rest_offsets: offsets(&rest),
        }
    }
}

pub(crate) fn check_targets(num_qubits: usize, targets: &[usize]) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= num_qubits {
            return Err(Error::OutOfRange {
                index: t,
                limit: num_qubits,
            });
        }
        if targets[..i].contains(&t) {
            return Err(Error::DuplicateTarget(t));
        }
    }
    Ok(())
}

/// The Bell state `|Phi_j>` with the sign conventions
/// `Phi_0 = |00>+|11>`, `Phi_1 = |01>+|10>`, `Phi_2 = |01>-|10>`, `Phi_3 = |00>-|11>`.
pub fn make_bell_state(j: usize) -> Result<PureState> {
    let j = BellIndex::new(j)?;
    let s = c(FRAC_1_SQRT_2, 0.0);
    let amps = match j.index() {
        0 => vec![s, ZERO, ZERO, s],
        1 => vec![ZERO, s, s, ZERO],
        2 => vec![ZERO, s, -s, ZERO],
        _ => vec![s, ZERO, ZERO, -s],
    };
    Ok(PureState::from_raw(2, amps))
}

/// Applies `u` to `targets` (first target is the most significant gate qubit).
pub fn apply_gate(state: &PureState, u: &UnitaryMatrix, targets: &[usize]) -> Result<PureState> {
    let mut out = state.clone();
    apply_gate_in_place(&mut out, u.matrix(), targets)?;
    Ok(out)
}

pub(crate) fn apply_gate_in_place(
    state: &mut PureState,
    m: &crate::linalg::Matrix,
    targets: &[usize],
) -> Result<()> {
    let n = state.num_qubits;
    check_targets(n, targets)?;
    if m.nrows() != 1 << targets.len() {
        return Err(Error::ArityMismatch {
            arity: m.nrows().trailing_zeros() as usize,
            targets: targets.len(),
        });
    }
    let layout = Layout::new(n, targets);
    let d = layout.target_offsets.len();
    let mut buf = vec![ZERO; d];
    for &r in &layout.rest_offsets {
        for (t, &off) in layout.target_offsets.iter().enumerate() {
            buf[t] = state.amps[r | off];
        }
        for (row, &off) in layout.target_offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (col, b) in buf.iter().enumerate() {
                acc += m[(row, col)] * b;
            }
            state.amps[r | off] = acc;
        }
    }
    Ok(())
}

/// `|<a|b>|^2`.
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

pub fn equal_up_to_global_phase(a: &PureState, b: &PureState, tol: f64) -> Result<bool> {
    Ok(fidelity(a, b)? >= 1.0 - tol)
}

/// Kronecker product `a ⊗ b`; `a` supplies the leading qubits.
pub fn tensor(a: &PureState, b: &PureState) -> Result<PureState> {
    let n = a.num_qubits + b.num_qubits;
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits(n, MAX_QUBITS));
    }
    let amps = a
        .amps
        .iter()
        .flat_map(|x| b.amps.iter().map(move |y| x * y))
        .collect();
    Ok(PureState::from_raw(n, amps))
}

/// Splits off the state of `keep` (in the given order) when the full state
/// factorizes as `keep ⊗ rest`; fails if the two parts are entangled.
pub fn extract_factor(state: &PureState, keep: &[usize], tol: f64) -> Result<PureState> {
    let n = state.num_qubits;
    check_targets(n, keep)?;
    let layout = Layout::new(n, keep);
    // Column of largest weight in the (keep x rest) amplitude matrix.
    let (mut best, mut best_w) = (layout.rest_offsets[0], f64::NEG_INFINITY);
    for &r in &layout.rest_offsets {
        let w: f64 = layout.target_offsets.iter().map(|&t| state.amps[r | t].norm_sqr()).sum();
        if w > best_w {
            (best, best_w) = (r, w);
        }
    }
    let col: Vec<C64> = layout
        .target_offsets
        .iter()
        .map(|&t| state.amps[best | t])
        .collect();
    let part = PureState::normalized(col)?;
    // Product check: the weight captured by projecting onto `part` must be 1.
    let captured: f64 = layout
        .rest_offsets
        .iter()
        .map(|&r| {
            layout
                .target_offsets
                .iter()
                .zip(&part.amps)
                .map(|(&t, p)| p.conj() * state.amps[r | t])
                .sum::<C64>()
                .norm_sqr()
        })
        .sum();
    if captured < 1.0 - tol {
        return Err(Error::Invariant(format!(
            "qubits {keep:?} are entangled with the rest (captured weight {captured})"
        )));
    }
    Ok(part)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &[C64], b: &[C64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    #[test]
    fn bell_states_match_listed_signs() {
        let s = FRAC_1_SQRT_2;
        let phi0 = make_bell_state(0).unwrap();
        assert!(close(phi0.amplitudes(), &[c(s, 0.0), ZERO, ZERO, c(s, 0.0)]));
        let phi2 = make_bell_state(2).unwrap();
        assert!(close(phi2.amplitudes(), &[ZERO, c(s, 0.0), c(-s, 0.0), ZERO]));
        let phi3 = make_bell_state(3).unwrap();
        assert!(close(phi3.amplitudes(), &[c(s, 0.0), ZERO, ZERO, c(-s, 0.0)]));
        assert!(make_bell_state(4).is_err());
    }

    #[test]
    fn bell_states_are_sigma_on_second_half() {
        for j in 0..4 {
            let phi0 = make_bell_state(0).unwrap();
            let rotated = apply_gate(&phi0, &UnitaryMatrix::pauli(j), &[1]).unwrap();
            let phij = make_bell_state(j).unwrap();
            assert!(equal_up_to_global_phase(&rotated, &phij, 1e-12).unwrap());
        }
    }

    #[test]
    fn gate_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = PureState::random(3, &mut rng);
        let same = apply_gate(&psi, &UnitaryMatrix::identity(2), &[2, 0]).unwrap();
        assert!(close(psi.amplitudes(), same.amplitudes()));

        let plus = apply_gate(&PureState::zero(1).unwrap(), &UnitaryMatrix::h(), &[0]).unwrap();
        assert!(close(plus.amplitudes(), PureState::plus().amplitudes()));

        let input = tensor(&PureState::plus(), &PureState::zero(1).unwrap()).unwrap();
        let out = apply_gate(&input, &UnitaryMatrix::cnot(), &[0, 1]).unwrap();
        assert!(close(out.amplitudes(), make_bell_state(0).unwrap().amplitudes()));
    }

    #[test]
    fn gate_errors() {
        let psi = PureState::zero(2).unwrap();
        assert!(matches!(
            apply_gate(&psi, &UnitaryMatrix::cnot(), &[0]),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(matches!(
            apply_gate(&psi, &UnitaryMatrix::cnot(), &[1, 1]),
            Err(Error::DuplicateTarget(1))
        ));
        assert!(matches!(
            apply_gate(&psi, &UnitaryMatrix::h(), &[2]),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn fidelity_and_phase_examples() {
        let zero = PureState::zero(1).unwrap();
        let one = PureState::basis(1, 1).unwrap();
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = PureState::random(2, &mut rng);
        let ph = C64::from_polar(1.0, std::f64::consts::PI / 7.0);
        let rotated = PureState::new(psi.amplitudes().iter().map(|a| a * ph).collect()).unwrap();
        assert!(equal_up_to_global_phase(&psi, &rotated, PHASE_TOL).unwrap());

        let y0 = apply_gate(&zero, &UnitaryMatrix::y(), &[0]).unwrap();
        assert!(close(y0.amplitudes(), &[ZERO, I]));
        assert!(equal_up_to_global_phase(&y0, &one, PHASE_TOL).unwrap());
        assert!(!equal_up_to_global_phase(&PureState::plus(), &zero, PHASE_TOL).unwrap());
        assert!(fidelity(&zero, &psi).is_err());
    }

    #[test]
    fn tensor_examples() {
        let zero = PureState::zero(1).unwrap();
        let zz = tensor(&zero, &zero).unwrap();
        assert_eq!(zz, PureState::zero(2).unwrap());

        let step1 = tensor(
            &tensor(&PureState::plus(), &zero).unwrap(),
            &make_bell_state(0).unwrap(),
        )
        .unwrap();
        // 1/2 on |0000>, |0011>, |1000>, |1011>.
        for (i, a) in step1.amplitudes().iter().enumerate() {
            let expected = if [0b0000, 0b0011, 0b1000, 0b1011].contains(&i) { 0.5 } else { 0.0 };
            assert!((a - c(expected, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn permute_and_extract() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = PureState::random(1, &mut rng);
        let b = PureState::random(2, &mut rng);
        let ab = tensor(&a, &b).unwrap();
        let ba = ab.permute(&[1, 2, 0]).unwrap();
        assert!(equal_up_to_global_phase(&ba, &tensor(&b, &a).unwrap(), 1e-12).unwrap());
        let got = extract_factor(&ab, &[1, 2], 1e-10).unwrap();
        assert!(equal_up_to_global_phase(&got, &b, 1e-12).unwrap());
        let bell = make_bell_state(0).unwrap();
        assert!(extract_factor(&bell, &[0], 1e-10).is_err());
    }

    #[test]
    fn size_cap() {
        assert!(matches!(PureState::zero(21), Err(Error::TooManyQubits(21, 20))));
    }
}
