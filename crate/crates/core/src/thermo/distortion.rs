//! Distortion of Birkhoff sums over windows delimited by a word.

use serde::Serialize;

use crate::error::{Result, ShiftError};
use crate::potential::FiniteRangePotential;
use crate::shift::{FiniteGraph, Word};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionReport {
    /// `sup |S_n f(x) - S_n f(y)|` over the qualifying pairs.
    pub value: f64,
    /// Oscillation of the table, an a priori bound on each boundary term.
    pub oscillation: f64,
    /// Number of windows examined.
    pub windows: usize,
    /// Set when no window qualified; `value` is then 0.
    pub no_pairs: bool,
    /// Window attaining the supremum.
    pub witness: Option<Word>,
}

/// Supremum over `n ≤ horizon` and periodic points `x, y` agreeing on the
/// window `x[0, n-1]`, which must begin and end with `w`, of the
/// difference of their `n`-step Birkhoff sums.
///
/// Only the `left` symbols before and the `right - 1` symbols after the
/// window can differ, and every admissible context extends to periodic
/// points, so the supremum is taken over contexts directly.
pub fn distortion_constant(g: &FiniteGraph, f: &FiniteRangePotential, w: &[usize], horizon: usize) -> Result<DistortionReport> {
    if f.graph() != g {
        return Err(ShiftError::Potential("potential is defined over a different graph".into()));
    }
    if w.is_empty() || !g.is_word(w) {
        return Err(ShiftError::NotAWord(w.to_vec()));
    }
    let (m, r) = (f.left(), f.right());
    let mut value = 0.0f64;
    let mut windows = 0;
    let mut witness = None;
    for n in w.len()..=horizon {
        for u in g.words(n) {
            if !(u.starts_with(w) && u.ends_with(w)) {
                continue;
            }
            windows += 1;
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for ext in g.words(m + n + r - 1) {
                if ext[m..m + n] != u[..] {
                    continue;
                }
                let s: f64 = (0..n).map(|i| f.eval_in(&ext, m + i).expect("context fits")).sum();
                lo = lo.min(s);
                hi = hi.max(s);
            }
            if hi - lo > value {
                value = hi - lo;
                witness = Some(u);
            }
        }
    }
    Ok(DistortionReport { value, oscillation: f.oscillation(), windows, no_pairs: windows == 0, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::fixtures::{full2, golden_mean};

    #[test]
    fn zero_potential() {
        let g = full2();
        let r = distortion_constant(&g, &FiniteRangePotential::zero(&g), &[0], 6).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(!r.no_pairs);
    }

    #[test]
    fn range_one_has_no_distortion() {
        let g = golden_mean();
        let f = FiniteRangePotential::from_fn(&g, 0, 1, |w| [0.3, -1.1][w[0]]).unwrap();
        let r = distortion_constant(&g, &f, &[1], 8).unwrap();
        assert_eq!(r.value, 0.0);
        assert!((r.oscillation - 1.4).abs() < 1e-15);
    }

    #[test]
    fn range_two_edge_term() {
        let g = full2();
        let table = [0.0, 0.5, 2.0, -1.0];
        let f = FiniteRangePotential::from_fn(&g, 0, 2, |w| table[2 * w[0] + w[1]]).unwrap();
        let r = distortion_constant(&g, &f, &[1, 1], 8).unwrap();
        // windows end in 1, so only f(1b) varies with the context b
        assert!((r.value - 3.0).abs() < 1e-12);
        assert!(r.value <= r.oscillation);
        let none = distortion_constant(&g, &f, &[1, 1], 1).unwrap();
        assert!(none.no_pairs && none.value == 0.0);
    }
}
