//! Projective measurements on the dense engine.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, UnitaryMatrix, C64, ONE, STRUCT_TOL, ZERO};
use crate::pauli::PauliString;
use crate::state::{check_targets, Layout, PureState};

/// Probability below which a forced outcome is reported as impossible.
pub const IMPOSSIBLE: f64 = 1e-12;

/// A projective measurement on `arity()` qubits.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasurementSpec {
    /// Complete measurement in an orthonormal basis; outcome `j` is `basis[j]`.
    Basis(Vec<Vec<C64>>),
    /// A Hermitian Pauli observable; outcome 0 is eigenvalue +1, outcome 1 is -1.
    Observable(PauliString),
    /// Orthogonal projectors summing to the identity.
    Projectors(Vec<Matrix>),
}

impl MeasurementSpec {
    pub fn basis(vectors: Vec<Vec<C64>>) -> Result<Self> {
        let spec = Self::Basis(vectors);
        spec.validate()?;
        Ok(spec)
    }

    pub fn observable(p: PauliString) -> Result<Self> {
        let spec = Self::Observable(p);
        spec.validate()?;
        Ok(spec)
    }

    pub fn projectors(ps: Vec<Matrix>) -> Result<Self> {
        let spec = Self::Projectors(ps);
        spec.validate()?;
        Ok(spec)
    }

    /// Bell-basis measurement, outcome `j` is `|Phi_j>`.
    pub fn bell() -> Self {
        Self::rotated_bell(&UnitaryMatrix::identity(1))
    }

    /// Measurement along `{(W^dagger ⊗ I)(Phi_{j_1} ⊗ ... ⊗ Phi_{j_m})}` for an
    /// `m`-qubit `W`. Target order is `[a_1..a_m, b_1..b_m]` where `(a_i, b_i)`
    /// carry `Phi_{j_i}`; the outcome index is `j = sum_i j_i 4^(m-i)`.
    pub fn rotated_bell(w: &UnitaryMatrix) -> Self {
        // Phi_j = (I ⊗ M_j) Phi_0 with M_j = I, X, [[0,-1],[1,0]], Z. The
        // product M_J is a signed permutation: column al has its entry in
        // row al ^ x_J with sign (-1)^|al & z_J|.
        let m = w.arity();
        let d = 1usize << m;
        let wd = w.adjoint();
        let wd = wd.matrix();
        let norm = 1.0 / (d as f64).sqrt();
        let vectors = (0..4usize.pow(m as u32))
            .map(|j| {
                let (mut xj, mut zj) = (0usize, 0usize);
                for i in 0..m {
                    let digit = (j >> (2 * (m - 1 - i))) & 3;
                    let bit = 1 << (m - 1 - i);
                    if digit == 1 || digit == 2 {
                        xj |= bit;
                    }
                    if digit >= 2 {
                        zj |= bit;
                    }
                }
                let mut v = vec![ZERO; d * d];
                for a in 0..d {
                    for al in 0..d {
                        let sign = if (al & zj).count_ones() % 2 == 1 { -norm } else { norm };
                        v[a * d + (al ^ xj)] = wd[(a, al)] * sign;
                    }
                }
                v
            })
            .collect();
        Self::Basis(vectors)
    }

    pub fn arity(&self) -> usize {
        match self {
            Self::Basis(v) => v.len().trailing_zeros() as usize,
            Self::Observable(p) => p.num_qubits(),
            Self::Projectors(ps) => ps.first().map_or(0, |p| p.nrows().trailing_zeros() as usize),
        }
    }

    pub fn num_outcomes(&self) -> usize {
        match self {
            Self::Basis(v) => v.len(),
            Self::Observable(_) => 2,
            Self::Projectors(ps) => ps.len(),
        }
    }

    /// Checks orthonormality / projector algebra / hermiticity within 1e-10.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Basis(v) => {
                let d = v.len();
                if d < 2 || !d.is_power_of_two() {
                    return Err(Error::InvalidSpec(format!("basis of size {d}")));
                }
                for (i, a) in v.iter().enumerate() {
                    if a.len() != d {
                        return Err(Error::InvalidSpec(format!("basis vector {i} has length {}", a.len())));
                    }
                    for (j, b) in v.iter().enumerate().skip(i) {
                        let ip: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                        let want = if i == j { ONE } else { ZERO };
                        if (ip - want).norm() > STRUCT_TOL {
                            return Err(Error::InvalidSpec(format!(
                                "basis vectors {i},{j} have inner product {ip}"
                            )));
                        }
                    }
                }
                Ok(())
            }
            Self::Observable(p) => {
                if p.is_hermitian() {
                    Ok(())
                } else {
                    Err(Error::NotHermitian(p.to_string()))
                }
            }
            Self::Projectors(ps) => {
                let Some(first) = ps.first() else {
                    return Err(Error::InvalidSpec("no projectors".into()));
                };
                let d = first.nrows();
                if d < 2 || !d.is_power_of_two() {
                    return Err(Error::InvalidSpec(format!("projector dimension {d}")));
                }
                let mut sum = Matrix::zeros(d, d);
                for (i, p) in ps.iter().enumerate() {
                    if p.shape() != (d, d) {
                        return Err(Error::InvalidSpec(format!("projector {i} has wrong shape")));
                    }
                    if crate::linalg::max_abs_diff(p, &p.adjoint()) > STRUCT_TOL {
                        return Err(Error::InvalidSpec(format!("projector {i} not Hermitian")));
                    }
                    if crate::linalg::max_abs_diff(&(p * p), p) > STRUCT_TOL {
                        return Err(Error::InvalidSpec(format!("projector {i} not idempotent")));
                    }
                    sum += p;
                }
                if crate::linalg::max_abs_diff(&sum, &Matrix::identity(d, d)) > STRUCT_TOL {
                    return Err(Error::InvalidSpec("projectors do not sum to identity".into()));
                }
                Ok(())
            }
        }
    }

    /// The projector onto outcome `k` as a dense matrix.
    pub fn projector(&self, k: usize) -> Matrix {
        match self {
            Self::Basis(v) => {
                let b = nalgebra::DVector::from_column_slice(&v[k]);
                &b * b.adjoint()
            }
            Self::Observable(p) => observable_projectors(p)[k].clone(),
            Self::Projectors(ps) => ps[k].clone(),
        }
    }

    pub fn as_projector_list(&self) -> Vec<Matrix> {
        (0..self.num_outcomes()).map(|k| self.projector(k)).collect()
    }
}

fn observable_projectors(p: &PauliString) -> [Matrix; 2] {
    let m = p.to_matrix();
    let id = Matrix::identity(m.nrows(), m.ncols());
    let half = C64::new(0.5, 0.0);
    [(&id + &m) * half, (&id - &m) * half]
}

/// Unnormalized post-measurement amplitudes for every outcome.
fn branches(state: &PureState, spec: &MeasurementSpec, targets: &[usize]) -> Result<Vec<(f64, Vec<C64>)>> {
    let n = state.num_qubits();
    check_targets(n, targets)?;
    if spec.arity() != targets.len() {
        return Err(Error::ArityMismatch {
            arity: spec.arity(),
            targets: targets.len(),
        });
    }
    let amps = state.amplitudes();
    if let MeasurementSpec::Observable(p) = spec {
        // Outcome 0 is (I + P)/2, outcome 1 is (I - P)/2.
        let pa = p.apply_to(state, targets)?;
        return Ok([1.0, -1.0]
            .into_iter()
            .map(|sgn| {
                let post: Vec<C64> = amps
                    .iter()
                    .zip(pa.amplitudes())
                    .map(|(a, b)| (a + b * sgn) * 0.5)
                    .collect();
                (post.iter().map(|a| a.norm_sqr()).sum(), post)
            })
            .collect());
    }
    let layout = Layout::new(n, targets);
    let d = layout.target_offsets.len();
    let mut out = Vec::with_capacity(spec.num_outcomes());
    match spec {
        MeasurementSpec::Basis(v) => {
            for b in v {
                let mut post = vec![ZERO; amps.len()];
                let mut prob = 0.0;
                for &r in &layout.rest_offsets {
                    let coeff: C64 = layout
                        .target_offsets
                        .iter()
                        .zip(b)
                        .map(|(&t, bt)| bt.conj() * amps[r | t])
                        .sum();
                    prob += coeff.norm_sqr();
                    for (&t, bt) in layout.target_offsets.iter().zip(b) {
                        post[r | t] = bt * coeff;
                    }
                }
                out.push((prob, post));
            }
        }
        _ => {
            for p in spec.as_projector_list() {
                let mut post = vec![ZERO; amps.len()];
                let mut buf = vec![ZERO; d];
                for &r in &layout.rest_offsets {
                    for (t, &off) in layout.target_offsets.iter().enumerate() {
                        buf[t] = amps[r | off];
                    }
                    for (row, &off) in layout.target_offsets.iter().enumerate() {
                        post[r | off] = (0..d).map(|col| p[(row, col)] * buf[col]).sum();
                    }
                }
                let prob = post.iter().map(|a| a.norm_sqr()).sum();
                out.push((prob, post));
            }
        }
    }
    Ok(out)
}

/// Born probabilities of every outcome, in outcome order.
pub fn outcome_probabilities(state: &PureState, spec: &MeasurementSpec, targets: &[usize]) -> Result<Vec<f64>> {
    Ok(branches(state, spec, targets)?.into_iter().map(|(p, _)| p).collect())
}

fn finish(n: usize, prob: f64, mut post: Vec<C64>) -> PureState {
    let norm = prob.sqrt();
    post.iter_mut().for_each(|a| *a /= norm);
    PureState::from_raw(n, post)
}

/// Samples an outcome by cumulative inversion over outcomes in ascending order.
pub fn measure<R: Rng + ?Sized>(
    state: &PureState,
    spec: &MeasurementSpec,
    targets: &[usize],
    rng: &mut R,
) -> Result<(usize, f64, PureState)> {
    let all = branches(state, spec, targets)?;
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut chosen = None;
    for (k, (p, _)) in all.iter().enumerate() {
        acc += p;
        if *p > IMPOSSIBLE && u < acc {
            chosen = Some(k);
            break;
        }
    }
    // Rounding can leave u above the final cumulative sum.
    let k = chosen
        .or_else(|| all.iter().rposition(|(p, _)| *p > IMPOSSIBLE))
        .ok_or_else(|| Error::Invariant("every outcome has zero probability".into()))?;
    let (p, post) = all.into_iter().nth(k).expect("k in range");
    Ok((k, p, finish(state.num_qubits(), p, post)))
}

/// Every outcome at once: `(probability, post-measurement state)`, with
/// `None` for impossible outcomes.
pub fn split(state: &PureState, spec: &MeasurementSpec, targets: &[usize]) -> Result<Vec<(f64, Option<PureState>)>> {
    let n = state.num_qubits();
    Ok(branches(state, spec, targets)?
        .into_iter()
        .map(|(p, post)| (p, (p >= IMPOSSIBLE).then(|| finish(n, p, post))))
        .collect())
}

/// Forces `outcome`, returning its Born probability and the renormalized state.
pub fn post_select(
    state: &PureState,
    spec: &MeasurementSpec,
    targets: &[usize],
    outcome: usize,
) -> Result<(f64, PureState)> {
    if outcome >= spec.num_outcomes() {
        return Err(Error::OutOfRange {
            index: outcome,
            limit: spec.num_outcomes(),
        });
    }
    let (p, post) = branches(state, spec, targets)?
        .into_iter()
        .nth(outcome)
        .expect("checked");
    if p < IMPOSSIBLE {
        return Err(Error::ImpossibleBranch(p));
    }
    Ok((p, finish(state.num_qubits(), p, post)))
}
