//! The Pauli frame: deferred Pauli corrections keyed by wire.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::pauli::PauliString;
use crate::program::Wire;

/// `i^phase ⊗_w sigma(w)`; the physical state equals the frame applied to
/// the ideal state.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliFrame {
    bits: BTreeMap<Wire, (bool, bool)>,
    phase: u8,
}

impl PauliFrame {
    pub fn new() -> Self {
        Self::default()
    }

    /// Global phase exponent of `i`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    /// The frame restricted to `wires`, as a Hermitian Pauli string.
    pub fn get(&self, wires: &[Wire]) -> PauliString {
        let (x, z): (Vec<bool>, Vec<bool>) = wires
            .iter()
            .map(|w| self.bits.get(w).copied().unwrap_or((false, false)))
            .unzip();
        let ys = x.iter().zip(&z).filter(|(a, b)| **a && **b).count();
        PauliString::from_bits(x, z, (ys % 4) as u8).expect("equal widths")
    }

    fn set(&mut self, wires: &[Wire], p: &PauliString) {
        for (q, w) in wires.iter().enumerate() {
            let b = (p.x_bits()[q], p.z_bits()[q]);
            if b == (false, false) {
                self.bits.remove(w);
            } else {
                self.bits.insert(*w, b);
            }
        }
    }

    /// `F_wires <- p · F_wires`.
    pub fn left_mul(&mut self, wires: &[Wire], p: &PauliString) -> Result<()> {
        let prod = p.mul(&self.get(wires))?;
        self.phase = (self.phase + prod.named_phase()) % 4;
        self.set(wires, &prod);
        Ok(())
    }

    /// Removes and returns the frame on `wires`.
    pub fn take(&mut self, wires: &[Wire]) -> PauliString {
        let p = self.get(wires);
        for w in wires {
            self.bits.remove(w);
        }
        p
    }

    pub fn is_clear(&self, wires: &[Wire]) -> bool {
        wires.iter().all(|w| !self.bits.contains_key(w))
    }

    /// Moves the entry for `from` to `to`, replacing whatever `to` held.
    pub fn rename(&mut self, from: Wire, to: Wire) {
        match self.bits.remove(&from) {
            Some(b) => {
                self.bits.insert(to, b);
            }
            None => {
                self.bits.remove(&to);
            }
        }
    }

    /// Wires carrying a non-identity correction, ascending.
    pub fn active(&self) -> Vec<Wire> {
        self.bits.keys().copied().collect()
    }

    /// Frame product `self · other`, wire by wire.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let mut out = other.clone();
        let wires = self.active();
        out.left_mul(&wires, &self.get(&wires))?;
        out.phase = (out.phase + self.phase) % 4;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ws(n: usize) -> Vec<Wire> {
        (0..n).map(Wire).collect()
    }

    #[test]
    fn left_mul_tracks_phase() {
        let mut f = PauliFrame::new();
        f.left_mul(&ws(1), &"X".parse().unwrap()).unwrap();
        f.left_mul(&ws(1), &"Z".parse().unwrap()).unwrap();
        // Z X = iY
        assert_eq!(f.get(&ws(1)), "Y".parse().unwrap());
        assert_eq!(f.phase(), 1);
        assert!(!f.is_clear(&ws(1)));
        f.take(&ws(1));
        assert!(f.is_clear(&ws(1)));
    }

    fn arb_frame() -> impl Strategy<Value = PauliFrame> {
        (proptest::collection::vec(0usize..4, 3), 0u8..4).prop_map(|(l, k)| {
            let mut f = PauliFrame::new();
            f.left_mul(&ws(3), &PauliString::from_indices(&l).times_phase(k)).unwrap();
            f
        })
    }

    fn full(f: &PauliFrame) -> PauliString {
        f.get(&ws(3)).times_phase(f.phase())
    }

    proptest! {
        #[test]
        fn composition_is_associative(a in arb_frame(), b in arb_frame(), c in arb_frame()) {
            let l = a.compose(&b).unwrap().compose(&c).unwrap();
            let r = a.compose(&b.compose(&c).unwrap()).unwrap();
            prop_assert_eq!(full(&l), full(&r));
        }

        #[test]
        fn composition_matches_pauli_product(a in arb_frame(), b in arb_frame()) {
            let ab = a.compose(&b).unwrap();
            prop_assert_eq!(full(&ab), full(&a).mul(&full(&b)).unwrap());
        }
    }
}
