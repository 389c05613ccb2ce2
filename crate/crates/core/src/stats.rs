//! Seeded Monte Carlo experiments and the goodness-of-fit tests used to
//! check them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::gadgets::gadget_pauli_recursive;
use crate::msets::{random_walk_to_target, Primitive};
use crate::pauli::PauliString;
use crate::state::PureState;

/// Two-sided tail mass beyond three standard deviations of a normal.
pub const THREE_SIGMA_P: f64 = 2.699_796_063_260_19e-3;

/// Minimum expected count per chi-square bin.
pub const MIN_EXPECTED: f64 = 5.0;

/// RNG for trial `i` of a run seeded with `seed`. Trials never share a
/// stream, so results do not depend on how trials are scheduled.
pub fn trial_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(i as u64);
    r
}

/// Runs `f(i)` for `i in 0..trials` over `workers` threads; results are in
/// trial order.
pub fn run_trials<T, F>(trials: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.clamp(1, trials.max(1));
    if workers == 1 {
        return (0..trials).map(f).collect();
    }
    let chunk = trials.div_ceil(workers);
    let f = &f;
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| s.spawn(move || (w * chunk..((w + 1) * chunk).min(trials)).map(f).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n.max(1) as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            n,
            mean,
            stderr: (var / n.max(1) as f64).sqrt(),
        }
    }

    pub fn of_counts(xs: &[usize]) -> Self {
        Self::of(&xs.iter().map(|&x| x as f64).collect::<Vec<_>>())
    }

    /// Distance from `expected` in standard errors.
    pub fn z_score(&self, expected: f64) -> f64 {
        if self.stderr == 0.0 {
            if self.mean == expected {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - expected) / self.stderr
        }
    }
}

/// `P(K = k)` for a geometric distribution on `1, 2, ...`.
pub fn geometric_pmf(p: f64, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        (1.0 - p).powi(k as i32 - 1) * p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// `(first value, observed, expected)` per bin; the last bin is open.
    pub bins: Vec<(usize, usize, f64)>,
    pub rejected: bool,
}

/// Chi-square goodness of fit of positive integer samples to a geometric
/// distribution with parameter `p`. Adjacent values are merged until each
/// bin expects at least [`MIN_EXPECTED`]; the tail forms the final bin.
/// Rejection is at [`THREE_SIGMA_P`].
pub fn chi_square_geometric(samples: &[usize], p: f64) -> Result<ChiSquareTest> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::InvalidSpec(format!("geometric parameter {p} outside (0, 1)")));
    }
    let n = samples.len() as f64;
    if n * p < MIN_EXPECTED {
        return Err(Error::InvalidSpec("too few samples for a chi-square test".into()));
    }
    let max = samples.iter().copied().max().unwrap_or(1);
    let mut counts = vec![0usize; max + 2];
    for &s in samples {
        counts[s] += 1;
    }
    // Close a bin once it and the remaining tail can both carry the minimum.
    let mut bins: Vec<(usize, usize, f64)> = Vec::new();
    let (mut start, mut obs, mut exp) = (1usize, 0usize, 0.0f64);
    let mut k = 1;
    loop {
        obs += counts.get(k).copied().unwrap_or(0);
        exp += n * geometric_pmf(p, k);
        let tail = n * (1.0 - p).powi(k as i32);
        if exp >= MIN_EXPECTED && tail >= MIN_EXPECTED {
            bins.push((start, obs, exp));
            start = k + 1;
            obs = 0;
            exp = 0.0;
        } else if tail < MIN_EXPECTED {
            let rest: usize = counts.iter().skip(k + 1).sum();
            bins.push((start, obs + rest, exp + tail));
            break;
        }
        k += 1;
    }
    if let [.., a, b] = bins.as_mut_slice() {
        if b.2 < MIN_EXPECTED {
            a.1 += b.1;
            a.2 += b.2;
            bins.pop();
        }
    }
    if bins.len() < 2 {
        return Err(Error::InvalidSpec("chi-square test needs at least two bins".into()));
    }
    let statistic = bins.iter().map(|&(_, o, e)| (o as f64 - e).powi(2) / e).sum::<f64>();
    let dof = bins.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    let p_value = dist.sf(statistic);
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value,
        bins,
        rejected: p_value < THREE_SIGMA_P,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PauliGadgetStats {
    pub trials: usize,
    pub rounds: Summary,
    pub bell_measurements: Summary,
    pub rounds_per_trial: Vec<usize>,
}

/// Runs the recursive Pauli gadget `trials` times for `sigma_l` on random
/// inputs and checks each output is `sigma_l` applied to the input.
pub fn pauli_gadget_experiment(trials: usize, seed: u64, l: usize, workers: usize) -> Result<PauliGadgetStats> {
    let runs = run_trials(trials, workers, |i| -> Result<(usize, usize)> {
        let mut rng = trial_rng(seed, i);
        let input = PureState::random(1, &mut rng);
        let run = gadget_pauli_recursive(l, &input, &mut rng, 100_000)?;
        let want = PauliString::from_indices(&[l]).apply_to(&input, &[0])?;
        if !crate::state::equal_up_to_global_phase(&run.output, &want, 1e-10)? {
            return Err(Error::Invariant(format!("Pauli gadget trial {i} produced the wrong output")));
        }
        Ok((run.rounds, run.bell_measurements))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let rounds: Vec<usize> = runs.iter().map(|r| r.0).collect();
    let bells: Vec<usize> = runs.iter().map(|r| r.1).collect();
    Ok(PauliGadgetStats {
        trials,
        rounds: Summary::of_counts(&rounds),
        bell_measurements: Summary::of_counts(&bells),
        rounds_per_trial: rounds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkStats {
    pub trials: usize,
    pub target: PauliString,
    pub iterations: Summary,
    pub chi_square: ChiSquareTest,
    /// `(iterations, count)` for every observed hitting time.
    pub histogram: Vec<(usize, usize)>,
}

/// Hitting times of the two-qubit Pauli walk towards `target`.
pub fn walk_experiment(trials: usize, seed: u64, target: &PauliString, workers: usize) -> Result<WalkStats> {
    if target.num_qubits() != 2 || target.eq_mod_phase(&PauliString::identity(2)) {
        return Err(Error::InvalidSpec("walk target must be a non-identity two-qubit Pauli".into()));
    }
    let its = run_trials(trials, workers, |i| {
        random_walk_to_target(target, Primitive::One, &mut trial_rng(seed, i), 1_000_000).map(|w| w.iterations)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut histogram = std::collections::BTreeMap::new();
    for &k in &its {
        *histogram.entry(k).or_insert(0usize) += 1;
    }
    Ok(WalkStats {
        trials,
        target: target.clone(),
        iterations: Summary::of_counts(&its),
        chi_square: chi_square_geometric(&its, 1.0 / 16.0)?,
        histogram: histogram.into_iter().collect(),
    })
}
