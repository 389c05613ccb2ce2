//! Stabilizer tableaus holding generators only.
//!
//! Measurement follows the generator-update rule: the first generator that
//! anticommutes with `M` is replaced by `s·M`, every other anticommuting
//! generator is multiplied by it. Determined outcomes come from a GF(2)
//! solve for the product of generators equal to `M`.

use rand::Rng;

use crate::clifford::{conjugate_by_clifford, CliffordGate};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::pauli::PauliString;
use crate::state::PureState;

/// Largest width `to_state` will densify.
pub const MAX_DENSE_TABLEAU: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerTableau {
    num_qubits: usize,
    generators: Vec<PauliString>,
}

/// Outcome of [`StabilizerTableau::measure`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableauMeasurement {
    pub outcome: i8,
    pub tableau: StabilizerTableau,
    pub deterministic: bool,
}

impl StabilizerTableau {
    pub fn new(generators: Vec<PauliString>) -> Result<Self> {
        let n = generators.len();
        if n == 0 {
            return Err(Error::InvalidSpec("empty tableau".into()));
        }
        for g in &generators {
            if g.num_qubits() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: g.num_qubits(),
                });
            }
            if g.sign().is_none() {
                return Err(Error::NotHermitian(g.to_string()));
            }
        }
        for (i, a) in generators.iter().enumerate() {
            for b in &generators[i + 1..] {
                if !a.commutes(b)? {
                    return Err(Error::InvalidSpec(format!("generators {a} and {b} anticommute")));
                }
            }
        }
        let t = Self {
            num_qubits: n,
            generators,
        };
        if Reducer::new(&t.generators).rank() != n {
            return Err(Error::InvalidSpec("generators are not independent".into()));
        }
        Ok(t)
    }

    /// Parses text forms such as `["XIII", "-IZII"]`.
    pub fn from_strs(gens: &[&str]) -> Result<Self> {
        let g = gens
            .iter()
            .map(|s| s.parse::<PauliString>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(g)
    }

    /// `|0...0>`.
    pub fn zero(n: usize) -> Self {
        Self {
            num_qubits: n,
            generators: (0..n).map(|q| PauliString::single(n, q, 3)).collect(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// Conjugates every generator by `g`.
    pub fn apply_clifford(&self, g: &CliffordGate) -> Result<Self> {
        let generators = self
            .generators
            .iter()
            .map(|p| conjugate_by_clifford(p, g))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            num_qubits: self.num_qubits,
            generators,
        })
    }

    /// Expresses `p` as a signed product of generators: `Some(s)` with
    /// `prod = s·p`, or `None` if `p` is not in the group up to phase.
    pub fn group_sign(&self, p: &PauliString) -> Result<Option<i8>> {
        if p.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: p.num_qubits(),
            });
        }
        let Some(subset) = Reducer::new(&self.generators).solve(p) else {
            return Ok(None);
        };
        let mut prod = PauliString::identity(self.num_qubits);
        for i in subset {
            prod = prod.mul(&self.generators[i])?;
        }
        match (prod.phase_exponent() + 4 - p.phase_exponent()) % 4 {
            0 => Ok(Some(1)),
            2 => Ok(Some(-1)),
            // only reachable for non-Hermitian p
            _ => Ok(None),
        }
    }

    /// Measures the Hermitian Pauli `m`.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        m: &PauliString,
        forced: Option<i8>,
        rng: &mut R,
    ) -> Result<TableauMeasurement> {
        if m.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: m.num_qubits(),
            });
        }
        if !m.is_hermitian() {
            return Err(Error::NotHermitian(m.to_string()));
        }
        if let Some(f) = forced {
            if f != 1 && f != -1 {
                return Err(Error::InvalidSpec(format!("forced outcome {f} is not ±1")));
            }
        }
        let mut anti = Vec::new();
        for (i, g) in self.generators.iter().enumerate() {
            if !g.commutes(m)? {
                anti.push(i);
            }
        }
        let Some((&pivot, rest)) = anti.split_first() else {
            let s = self
                .group_sign(m)?
                .ok_or_else(|| Error::Invariant(format!("{m} commutes with a full tableau but is not in it")))?;
            if let Some(f) = forced {
                if f != s {
                    return Err(Error::ContradictoryOutcome {
                        forced: f,
                        determined: s,
                    });
                }
            }
            return Ok(TableauMeasurement {
                outcome: s,
                tableau: self.clone(),
                deterministic: true,
            });
        };
        let s = forced.unwrap_or_else(|| if rng.gen_bool(0.5) { 1 } else { -1 });
        let mut gens = self.generators.clone();
        let n1 = gens[pivot].clone();
        for &i in rest {
            gens[i] = n1.mul(&gens[i])?;
            debug_assert!(gens[i].sign().is_some());
        }
        gens[pivot] = if s == 1 { m.clone() } else { m.negated() };
        Ok(TableauMeasurement {
            outcome: s,
            tableau: Self {
                num_qubits: self.num_qubits,
                generators: gens,
            },
            deterministic: false,
        })
    }

    /// The stabilized state, built by projecting computational basis states
    /// with `prod (I + g)/2` until one survives.
    pub fn to_state(&self) -> Result<PureState> {
        let n = self.num_qubits;
        if n > MAX_DENSE_TABLEAU {
            return Err(Error::TooManyQubits(n, MAX_DENSE_TABLEAU));
        }
        let all: Vec<usize> = (0..n).collect();
        for b in 0..1usize << n {
            let mut v = PureState::basis(n, b)?;
            let mut dead = false;
            for g in &self.generators {
                let gv = g.apply_to(&v, &all)?;
                let amps: Vec<C64> = v
                    .amplitudes()
                    .iter()
                    .zip(gv.amplitudes())
                    .map(|(a, b)| (a + b) * 0.5)
                    .collect();
                let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                if norm < 1e-6 {
                    dead = true;
                    break;
                }
                v = PureState::normalized(amps)?;
            }
            if !dead {
                return Ok(v);
            }
        }
        Err(Error::Invariant("every reference state was annihilated".into()))
    }

    /// Same signed stabilizer group.
    pub fn stabilizer_equal(&self, other: &Self) -> bool {
        self.num_qubits == other.num_qubits
            && other
                .generators
                .iter()
                .all(|g| matches!(self.group_sign(g), Ok(Some(1))))
    }
}

pub fn tableau_measure<R: Rng + ?Sized>(
    t: &StabilizerTableau,
    m: &PauliString,
    forced: Option<i8>,
    rng: &mut R,
) -> Result<TableauMeasurement> {
    t.measure(m, forced, rng)
}

pub fn tableau_to_state(t: &StabilizerTableau) -> Result<PureState> {
    t.to_state()
}

pub fn stabilizer_equal(a: &StabilizerTableau, b: &StabilizerTableau) -> bool {
    a.stabilizer_equal(b)
}

/// Gauss-Jordan elimination over the symplectic bit vectors, remembering
/// which generators make up each reduced row.
struct Reducer {
    rows: Vec<(Vec<bool>, Vec<bool>, usize)>,
}

fn bits(p: &PauliString) -> Vec<bool> {
    p.x_bits().iter().chain(p.z_bits()).copied().collect()
}

impl Reducer {
    fn new(gens: &[PauliString]) -> Self {
        let k = gens.len();
        let mut work: Vec<(Vec<bool>, Vec<bool>)> = gens
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let mut combo = vec![false; k];
                combo[i] = true;
                (bits(g), combo)
            })
            .collect();
        let width = work.first().map_or(0, |r| r.0.len());
        let mut rows: Vec<(Vec<bool>, Vec<bool>, usize)> = Vec::new();
        for col in 0..width {
            let Some(pos) = work.iter().position(|r| r.0[col]) else {
                continue;
            };
            let (pv, pc) = work.swap_remove(pos);
            for (v, c) in work.iter_mut() {
                if v[col] {
                    xor(v, &pv);
                    xor(c, &pc);
                }
            }
            for (v, c, _) in rows.iter_mut() {
                if v[col] {
                    xor(v, &pv);
                    xor(c, &pc);
                }
            }
            rows.push((pv, pc, col));
        }
        Self { rows }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn solve(&self, p: &PauliString) -> Option<Vec<usize>> {
        let mut v = bits(p);
        let mut combo = vec![false; self.rows.first().map_or(0, |r| r.1.len())];
        for (rv, rc, col) in &self.rows {
            if v[*col] {
                xor(&mut v, rv);
                xor(&mut combo, rc);
            }
        }
        if v.iter().any(|&b| b) {
            return None;
        }
        Some(combo.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect())
    }
}

fn xor(a: &mut [bool], b: &[bool]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x ^= *y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, ONE};
    use crate::state::{fidelity, make_bell_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn t(g: &[&str]) -> StabilizerTableau {
        StabilizerTableau::from_strs(g).unwrap()
    }

    fn acn() -> PureState {
        let h = c(0.5, 0.0);
        let mut amps = vec![c(0.0, 0.0); 16];
        for i in [0b0000, 0b0101, 0b1011, 0b1110] {
            amps[i] = h;
        }
        PureState::new(amps).unwrap()
    }

    #[test]
    fn evolution_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t0 = t(&["XIII", "IZII", "IIXX", "IIZZ"]);
        let r1 = t0.measure(&p("IXXI"), Some(1), &mut rng).unwrap();
        assert!(!r1.deterministic);
        assert_eq!(r1.tableau, t(&["XIII", "IXXI", "IIXX", "IZZZ"]));
        let r2 = r1.tableau.measure(&p("ZIZI"), Some(1), &mut rng).unwrap();
        assert_eq!(r2.tableau, t(&["ZIZI", "XXXI", "XIXX", "IZZZ"]));
        assert!(r2.tableau.stabilizer_equal(&t(&["XIXX", "ZIZI", "IXIX", "IZZZ"])));
        let f = fidelity(&r2.tableau.to_state().unwrap(), &acn()).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn determined_outcomes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = t(&["Z"]);
        let r = z.measure(&p("Z"), None, &mut rng).unwrap();
        assert_eq!((r.outcome, r.deterministic), (1, true));
        let r = z.measure(&p("-Z"), None, &mut rng).unwrap();
        assert_eq!(r.outcome, -1);
        assert_eq!(
            z.measure(&p("Z"), Some(-1), &mut rng),
            Err(Error::ContradictoryOutcome { forced: -1, determined: 1 })
        );
        let bell = t(&["XX", "ZZ"]);
        assert_eq!(bell.measure(&p("YY"), None, &mut rng).unwrap().outcome, -1);
        assert!(bell.measure(&p("iZZ"), None, &mut rng).is_err());
    }

    #[test]
    fn signed_group_equality() {
        assert!(stabilizer_equal(&t(&["XX", "ZZ"]), &t(&["XX", "-YY"])));
        assert!(!stabilizer_equal(&t(&["Z"]), &t(&["-Z"])));
        assert!(!stabilizer_equal(&t(&["XX", "ZZ"]), &t(&["XX", "YY"])));
    }

    #[test]
    fn validation() {
        assert!(StabilizerTableau::from_strs(&["XI", "ZI"]).is_err());
        assert!(StabilizerTableau::from_strs(&["ZZ", "-ZZ"]).is_err());
        assert!(StabilizerTableau::from_strs(&["ZZ", "iXX"]).is_err());
        assert!(StabilizerTableau::from_strs(&["ZZ"]).is_err());
    }

    #[test]
    fn states() {
        let s = t(&["Z"]).to_state().unwrap();
        assert!((s.amplitudes()[0] - ONE).norm() < 1e-12);
        let b = t(&["XX", "ZZ"]).to_state().unwrap();
        assert!((fidelity(&b, &make_bell_state(0).unwrap()).unwrap() - 1.0).abs() < 1e-12);
        let b3 = t(&["-XX", "-ZZ"]).to_state().unwrap();
        assert!((fidelity(&b3, &make_bell_state(2).unwrap()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pivot_choice_is_irrelevant() {
        // Reordering generators changes the pivot but not the group.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = t(&["XIII", "IZII", "IIXX", "IIZZ"]);
        let b = t(&["IIXX", "IZII", "IIZZ", "XIII"]);
        for m in ["IXXI", "ZIZI", "YYII"] {
            let ra = a.measure(&p(m), Some(-1), &mut rng).unwrap();
            let rb = b.measure(&p(m), Some(-1), &mut rng).unwrap();
            assert!(ra.tableau.stabilizer_equal(&rb.tableau));
        }
    }
}
