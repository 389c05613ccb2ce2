//! Python bindings. Circuits, programs and reports cross the boundary as
//! the same JSON documents the command-line tool reads and writes.

use mqc::clifford::clifford_membership;
use mqc::compiler::{compile as compile_circuit, run, verify as verify_circuit, Mode, DEFAULT_SET_THETA};
use mqc::formats::{circuit_from_json, program_from_json, program_to_json, to_canonical_json};
use mqc::gadgets::{acn_state, prepare_acn as prepare_acn_state};
use mqc::linalg::{Matrix, UnitaryMatrix, STRUCT_TOL};
use mqc::msets::{u_squared_deviation as usq_deviation, SpecialU};
use mqc::pauli::PauliString;
use mqc::state::PureState;
use mqc::stats::{pauli_gadget_experiment, trial_rng, walk_experiment};
use num_complex::Complex64;
use pyo3::exceptions::{PyNotImplementedError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: mqc::Error) -> PyErr {
    use mqc::Error as E;
    match e {
        E::Unsupported(_) | E::QubitBudget { .. } | E::TooManyQubits(..) => PyNotImplementedError::new_err(e.to_string()),
        E::Invariant(_) | E::MaxRoundsExceeded(_) | E::UnwrittenRegister(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for mqc::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn mode(name: &str, set: Option<&str>, set_theta: f64, theta: Option<f64>, phi: Option<f64>) -> PyResult<Mode> {
    let special = match (theta, phi) {
        (None, None) => None,
        (t, p) => {
            let d = SpecialU::default();
            Some(SpecialU::new(t.unwrap_or(d.theta), p.unwrap_or(d.phi)).py()?)
        }
    };
    Mode::from_parts(name, set, set_theta, special).py()
}

fn amplitudes(s: &PureState) -> Vec<Complex64> {
    s.amplitudes().to_vec()
}

/// Compiles a circuit document into a canonical program document.
#[pyfunction]
#[pyo3(signature = (circuit, mode_name, set=None, set_theta=DEFAULT_SET_THETA, theta=None, phi=None))]
pub fn compile(
    circuit: &str,
    mode_name: &str,
    set: Option<&str>,
    set_theta: f64,
    theta: Option<f64>,
    phi: Option<f64>,
) -> PyResult<String> {
    let c = circuit_from_json(circuit).py()?;
    let m = mode(mode_name, set, set_theta, theta, phi)?;
    program_to_json(&compile_circuit(&c, &m).py()?).py()
}

/// Runs a program document from `|0...0>`; returns the flushed output
/// amplitudes, qubit 0 most significant.
#[pyfunction]
#[pyo3(signature = (program, seed=0))]
pub fn run_program(program: &str, seed: u64) -> PyResult<Vec<Complex64>> {
    let p = program_from_json(program).py()?;
    let res = run(&p, seed, None).py()?;
    Ok(amplitudes(&res.flushed().py()?))
}

/// Seeded verification against the dense circuit; returns the JSON report.
#[pyfunction]
#[pyo3(signature = (circuit, mode_name, trials=50, seed=0, set=None, set_theta=DEFAULT_SET_THETA, theta=None, phi=None))]
#[allow(clippy::too_many_arguments)]
pub fn verify(
    circuit: &str,
    mode_name: &str,
    trials: usize,
    seed: u64,
    set: Option<&str>,
    set_theta: f64,
    theta: Option<f64>,
    phi: Option<f64>,
) -> PyResult<String> {
    let c = circuit_from_json(circuit).py()?;
    let m = mode(mode_name, set, set_theta, theta, phi)?;
    to_canonical_json(&verify_circuit(&c, &m, trials, seed, None).py()?).py()
}

/// `max |(I⊗Z) U^dagger (I⊗Z) U - U^2|` for the special unitary.
#[pyfunction]
pub fn u_squared_deviation(theta: f64, phi: f64) -> PyResult<f64> {
    usq_deviation(SpecialU::new(theta, phi).py()?.unitary()).py()
}

/// The amplitudes of the CNOT ancilla.
#[pyfunction]
pub fn acn_amplitudes() -> Vec<Complex64> {
    amplitudes(&acn_state())
}

/// One preparation of the CNOT ancilla: the prepared amplitudes and its
/// `(k, l)` classification.
#[pyfunction]
#[pyo3(signature = (seed=0, post_select=false))]
pub fn prepare_acn(seed: u64, post_select: bool) -> PyResult<(Vec<Complex64>, (usize, usize))> {
    let prep = prepare_acn_state(&mut trial_rng(seed, 0), post_select).py()?;
    Ok((amplitudes(&prep.state), prep.classification))
}

/// Mean rounds and mean Bell measurements of the recursive Pauli gadget.
#[pyfunction]
#[pyo3(signature = (trials, seed=0, pauli=1, workers=1))]
pub fn pauli_gadget_means(trials: usize, seed: u64, pauli: usize, workers: usize) -> PyResult<(f64, f64)> {
    let s = pauli_gadget_experiment(trials, seed, pauli, workers).py()?;
    Ok((s.rounds.mean, s.bell_measurements.mean))
}

/// Mean hitting time of the Pauli walk and the chi-square p-value of the
/// geometric fit.
#[pyfunction]
#[pyo3(signature = (trials, seed=0, target="IZ", workers=1))]
pub fn walk_mean(trials: usize, seed: u64, target: &str, workers: usize) -> PyResult<(f64, f64)> {
    let t: PauliString = target.parse().py()?;
    let w = walk_experiment(trials, seed, &t, workers).py()?;
    Ok((w.iterations.mean, w.chi_square.p_value))
}

/// Product of two Pauli strings in text form, e.g. `"X" * "Z" = "-iY"`.
#[pyfunction]
pub fn pauli_mul(a: &str, b: &str) -> PyResult<String> {
    let a: PauliString = a.parse().py()?;
    let b: PauliString = b.parse().py()?;
    Ok(a.mul(&b).py()?.to_string())
}

/// Whether a square unitary (row-major nested lists) is a Clifford.
#[pyfunction]
pub fn is_clifford(rows: Vec<Vec<Complex64>>) -> PyResult<bool> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let m = Matrix::from_fn(n, n, |r, c| rows[r][c]);
    clifford_membership(&UnitaryMatrix::new(m).py()?, STRUCT_TOL).py()
}

#[pymodule]
fn mqc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(compile, m)?)?;
    m.add_function(wrap_pyfunction!(run_program, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(u_squared_deviation, m)?)?;
    m.add_function(wrap_pyfunction!(acn_amplitudes, m)?)?;
    m.add_function(wrap_pyfunction!(prepare_acn, m)?)?;
    m.add_function(wrap_pyfunction!(pauli_gadget_means, m)?)?;
    m.add_function(wrap_pyfunction!(walk_mean, m)?)?;
    m.add_function(wrap_pyfunction!(pauli_mul, m)?)?;
    m.add_function(wrap_pyfunction!(is_clifford, m)?)?;
    Ok(())
}
