//! Dense complex matrices and the unitary newtype used throughout the crate.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex64;
pub type Matrix = DMatrix<C64>;

/// Structural tolerance for unitarity, orthogonality and idempotence checks.
pub const STRUCT_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Build a square matrix from row-major entries.
pub fn matrix(dim: usize, entries: &[C64]) -> Matrix {
    assert_eq!(entries.len(), dim * dim);
    Matrix::from_row_slice(dim, dim, entries)
}

/// The single-qubit Pauli matrix `sigma_j`, with `sigma_0 = I`.
pub fn sigma(j: usize) -> Matrix {
    match j {
        0 => matrix(2, &[ONE, ZERO, ZERO, ONE]),
        1 => matrix(2, &[ZERO, ONE, ONE, ZERO]),
        2 => matrix(2, &[ZERO, -I, I, ZERO]),
        3 => matrix(2, &[ONE, ZERO, ZERO, -ONE]),
        _ => panic!("Pauli index {j} out of range"),
    }
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// Largest entrywise modulus.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    max_abs(&(a - b))
}

/// `max |U^dagger U - I|`.
pub fn unitarity_deviation(m: &Matrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let id = Matrix::identity(m.nrows(), m.ncols());
    max_abs(&(m.adjoint() * m - id))
}

/// Finds the phase `e^{i a}` with `a ≈ e^{i a} b`, or `None` when the two
/// matrices are not proportional by a unit-modulus scalar within `tol`.
pub fn phase_between(a: &Matrix, b: &Matrix, tol: f64) -> Option<C64> {
    if a.shape() != b.shape() {
        return None;
    }
    let (idx, pivot) = b
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))?;
    if pivot.norm() < tol {
        return if max_abs(a) < tol { Some(ONE) } else { None };
    }
    let ratio = a[idx] / pivot;
    if (ratio.norm() - 1.0).abs() > tol {
        return None;
    }
    let phase = ratio / ratio.norm();
    (max_abs_diff(a, &(b * phase)) <= tol).then_some(phase)
}

pub fn equal_up_to_phase(a: &Matrix, b: &Matrix, tol: f64) -> bool {
    phase_between(a, b, tol).is_some()
}

/// A `2^k x 2^k` unitary acting on `k` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    arity: usize,
    matrix: Matrix,
}

impl UnitaryMatrix {
    /// Checks that `matrix` is a power-of-two square unitary within [`STRUCT_TOL`].
    pub fn new(matrix: Matrix) -> Result<Self> {
        let dim = matrix.nrows();
        if !matrix.is_square() || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidSpec(format!(
                "gate matrix must be 2^k x 2^k, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dev = unitarity_deviation(&matrix);
        if dev > STRUCT_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self {
            arity: dim.trailing_zeros() as usize,
            matrix,
        })
    }

    pub(crate) fn new_unchecked(matrix: Matrix) -> Self {
        let arity = matrix.nrows().trailing_zeros() as usize;
        Self { arity, matrix }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self::new_unchecked(self.matrix.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self::new_unchecked(self.matrix.transpose())
    }

    pub fn conjugate(&self) -> Self {
        Self::new_unchecked(self.matrix.conjugate())
    }

    /// `self * other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.arity != other.arity {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self::new_unchecked(&self.matrix * &other.matrix))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self::new_unchecked(kron(&self.matrix, &other.matrix))
    }

    pub fn identity(arity: usize) -> Self {
        let d = 1 << arity;
        Self::new_unchecked(Matrix::identity(d, d))
    }

    pub fn pauli(j: usize) -> Self {
        Self::new_unchecked(sigma(j))
    }

    pub fn x() -> Self {
        Self::pauli(1)
    }

    pub fn y() -> Self {
        Self::pauli(2)
    }

    pub fn z() -> Self {
        Self::pauli(3)
    }

    /// Hadamard `(X + Z) / sqrt 2`.
    pub fn h() -> Self {
        let s = c(FRAC_1_SQRT_2, 0.0);
        Self::new_unchecked(matrix(2, &[s, s, s, -s]))
    }

    /// The phase gate `e^{-i pi Z / 4}`.
    pub fn phase() -> Self {
        Self::rz(2.0 * FRAC_PI_4)
    }

    /// The pi/8 gate `e^{-i pi Z / 8}`.
    pub fn t() -> Self {
        Self::rz(2.0 * FRAC_PI_8)
    }

    /// `e^{-i angle Z / 2}`.
    pub fn rz(angle: f64) -> Self {
        let h = angle / 2.0;
        Self::new_unchecked(matrix(
            2,
            &[C64::from_polar(1.0, -h), ZERO, ZERO, C64::from_polar(1.0, h)],
        ))
    }

    /// `e^{-i angle X / 2}`.
    pub fn rx(angle: f64) -> Self {
        let h = angle / 2.0;
        let (s, co) = h.sin_cos();
        Self::new_unchecked(matrix(2, &[c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)]))
    }

    /// Controlled-NOT, control on the first (most significant) qubit.
    pub fn cnot() -> Self {
        let mut m = Matrix::zeros(4, 4);
        m[(0, 0)] = ONE;
        m[(1, 1)] = ONE;
        m[(2, 3)] = ONE;
        m[(3, 2)] = ONE;
        Self::new_unchecked(m)
    }

    pub fn swap() -> Self {
        let mut m = Matrix::zeros(4, 4);
        m[(0, 0)] = ONE;
        m[(1, 2)] = ONE;
        m[(2, 1)] = ONE;
        m[(3, 3)] = ONE;
        Self::new_unchecked(m)
    }

    /// Haar-random unitary via QR of a complex Gaussian matrix with the
    /// diagonal phases of `R` folded back in.
    pub fn random<R: Rng + ?Sized>(arity: usize, rng: &mut R) -> Self {
        let d = 1 << arity;
        let g = Matrix::from_fn(d, d, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let qr = g.qr();
        let (mut q, r) = (qr.q(), qr.r());
        for j in 0..d {
            let rjj = r[(j, j)];
            let ph = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
            for i in 0..d {
                q[(i, j)] *= ph;
            }
        }
        Self::new_unchecked(q)
    }
}
