//! Finite-range potentials, Birkhoff sums and the one-sided reduction.

use std::collections::BTreeMap;

use num_traits::{ToPrimitive, Zero};

use crate::error::{Result, ShiftError};
use crate::shift::{FiniteGraph, PeriodicPoint, Word};

pub type Rational = num_rational::Rational64;

/// A potential depending on the coordinates `-left ..= right - 1`, given by
/// a weight for every admissible word of length `left + right`.
///
/// When built from rationals the exact table is kept alongside the float
/// one so partition functions can be compared exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteRangePotential {
    graph: FiniteGraph,
    left: usize,
    right: usize,
    weights: BTreeMap<Word, f64>,
    exact: Option<BTreeMap<Word, Rational>>,
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().expect("finite rational")
}

impl FiniteRangePotential {
    pub fn new(graph: &FiniteGraph, left: usize, right: usize, weights: BTreeMap<Word, f64>) -> Result<Self> {
        if right == 0 {
            return Err(ShiftError::Potential("right range must be at least 1".into()));
        }
        let words = graph.words(left + right);
        if words.len() != weights.len() || words.iter().any(|w| !weights.contains_key(w)) {
            let missing: Vec<_> = words.iter().filter(|w| !weights.contains_key(*w)).take(3).collect();
            let extra: Vec<_> = weights.keys().filter(|w| !graph.is_word(w) || w.len() != left + right).take(3).collect();
            return Err(ShiftError::Potential(format!(
                "table must cover exactly the admissible {}-words (missing {missing:?}, extra {extra:?})",
                left + right
            )));
        }
        if let Some((w, v)) = weights.iter().find(|(_, v)| !v.is_finite()) {
            return Err(ShiftError::Potential(format!("weight of {w:?} is not finite: {v}")));
        }
        Ok(FiniteRangePotential { graph: graph.clone(), left, right, weights, exact: None })
    }

    pub fn from_rational(graph: &FiniteGraph, left: usize, right: usize, exact: BTreeMap<Word, Rational>) -> Result<Self> {
        let floats = exact.iter().map(|(w, q)| (w.clone(), rational_to_f64(q))).collect();
        let mut f = Self::new(graph, left, right, floats)?;
        f.exact = Some(exact);
        Ok(f)
    }

    pub fn from_fn(graph: &FiniteGraph, left: usize, right: usize, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let weights = graph.words(left + right).into_iter().map(|w| {
            let v = f(&w);
            (w, v)
        });
        Self::new(graph, left, right, weights.collect())
    }

    pub fn from_rational_fn(
        graph: &FiniteGraph,
        left: usize,
        right: usize,
        f: impl Fn(&[usize]) -> Rational,
    ) -> Result<Self> {
        let weights = graph.words(left + right).into_iter().map(|w| {
            let v = f(&w);
            (w, v)
        });
        Self::from_rational(graph, left, right, weights.collect())
    }

    pub fn zero(graph: &FiniteGraph) -> Self {
        Self::constant(graph, Rational::zero())
    }

    pub fn constant(graph: &FiniteGraph, c: Rational) -> Self {
        Self::from_rational_fn(graph, 0, 1, |_| c).expect("constant table is total")
    }

    pub fn graph(&self) -> &FiniteGraph {
        &self.graph
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn right(&self) -> usize {
        self.right
    }

    /// Number of coordinates the potential reads (`left + right`).
    pub fn window(&self) -> usize {
        self.left + self.right
    }

    pub fn weights(&self) -> &BTreeMap<Word, f64> {
        &self.weights
    }

    pub fn exact_weights(&self) -> Option<&BTreeMap<Word, Rational>> {
        self.exact.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn is_future_only(&self) -> bool {
        self.left == 0
    }

    pub fn weight(&self, window: &[usize]) -> Option<f64> {
        self.weights.get(window).copied()
    }

    pub fn exact_weight(&self, window: &[usize]) -> Option<Rational> {
        self.exact.as_ref()?.get(window).copied()
    }

    pub fn upper_bound(&self) -> f64 {
        self.weights.values().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// max - min of the table.
    pub fn oscillation(&self) -> f64 {
        let lo = self.weights.values().copied().fold(f64::INFINITY, f64::min);
        self.upper_bound() - lo
    }

    /// Value at the point whose coordinate 0 sits at `origin` of `word`.
    pub fn eval_in(&self, word: &[usize], origin: usize) -> Result<f64> {
        let w = self.window_in(word, origin)?;
        self.weight(w).ok_or_else(|| ShiftError::NotAWord(w.to_vec()))
    }

    pub fn eval_exact_in(&self, word: &[usize], origin: usize) -> Result<Option<Rational>> {
        let w = self.window_in(word, origin)?;
        match &self.exact {
            None => Ok(None),
            Some(t) => t.get(w).copied().map(Some).ok_or_else(|| ShiftError::NotAWord(w.to_vec())),
        }
    }

    fn window_in<'a>(&self, word: &'a [usize], origin: usize) -> Result<&'a [usize]> {
        if origin < self.left || origin + self.right > word.len() {
            return Err(ShiftError::Potential(format!(
                "window [-{}, {}] does not fit at position {origin} of a word of length {}",
                self.left,
                self.right - 1,
                word.len()
            )));
        }
        Ok(&word[origin - self.left..origin + self.right])
    }

    fn periodic_window(&self, x: &PeriodicPoint, i: usize) -> Word {
        (0..self.window()).map(|j| x.at(i as i64 - self.left as i64 + j as i64)).collect()
    }

    /// Same potential plus a constant.
    pub fn add_constant(&self, c: Rational) -> Self {
        let mut out = self.clone();
        let cf = rational_to_f64(&c);
        out.weights.values_mut().for_each(|v| *v += cf);
        if let Some(t) = out.exact.as_mut() {
            t.values_mut().for_each(|v| *v += c);
        }
        out
    }

    /// Pulls the table back along an edge-preserving vertex map
    /// `sub -> self.graph()`.
    pub fn restrict(&self, sub: &FiniteGraph, vertex_map: &[usize]) -> Result<Self> {
        let image = |w: &[usize]| -> Word { w.iter().map(|&v| vertex_map[v]).collect() };
        match &self.exact {
            Some(t) => Self::from_rational_fn(sub, self.left, self.right, |w| t[&image(w)]),
            None => Self::from_fn(sub, self.left, self.right, |w| self.weights[&image(w)]),
        }
    }
}

fn check_point(f: &FiniteRangePotential, x: &PeriodicPoint) -> Result<()> {
    if !f.graph.is_cycle(&x.word) {
        return Err(ShiftError::NotAWord(x.word.clone()));
    }
    Ok(())
}

/// `f(x) + f(Sx) + ... + f(S^{n-1} x)` along the periodic point `x`.
pub fn birkhoff_sum(f: &FiniteRangePotential, x: &PeriodicPoint, n: usize) -> Result<f64> {
    check_point(f, x)?;
    let mut sum = 0.0;
    for i in 0..n {
        let w = f.periodic_window(x, i);
        sum += f.weight(&w).ok_or(ShiftError::NotAWord(w))?;
    }
    Ok(sum)
}

/// Exact Birkhoff sum for rational potentials (`None` for float tables).
pub fn birkhoff_sum_exact(f: &FiniteRangePotential, x: &PeriodicPoint, n: usize) -> Result<Option<Rational>> {
    check_point(f, x)?;
    let Some(table) = &f.exact else { return Ok(None) };
    let mut sum = Rational::zero();
    for i in 0..n {
        let w = f.periodic_window(x, i);
        sum += *table.get(&w).ok_or(ShiftError::NotAWord(w))?;
    }
    Ok(Some(sum))
}

/// Result of [`bowen_reduce`]: `g = f + h∘S - h` with `g` future-only.
#[derive(Debug, Clone, PartialEq)]
pub struct BowenReduction {
    pub g: FiniteRangePotential,
    pub h: FiniteRangePotential,
}

/// One-sided reduction of a finite-range potential. With left range `m`,
/// `g = f∘S^m` (same table read as a future-only potential) and
/// `h = f + f∘S + ... + f∘S^{m-1}`; for `m = 0`, `h = 0`.
pub fn bowen_reduce(f: &FiniteRangePotential) -> BowenReduction {
    let m = f.left;
    let r = f.right;
    let graph = &f.graph;
    let g = FiniteRangePotential { left: 0, right: m + r, ..f.clone() };
    if m == 0 {
        let h = FiniteRangePotential::zero(graph);
        return BowenReduction { g, h };
    }
    // h reads coordinates -m ..= m + r - 2; f∘S^k reads k - m ..= k + r - 1.
    let window = 2 * m + r - 1;
    let h = match &f.exact {
        Some(t) => FiniteRangePotential::from_rational_fn(graph, m, m + r - 1, |w| {
            (0..m).map(|k| t[&w[k..k + m + r]]).sum()
        }),
        None => FiniteRangePotential::from_fn(graph, m, m + r - 1, |w| {
            (0..m).map(|k| f.weights[&w[k..k + m + r]]).sum()
        }),
    }
    .expect("h table covers all words");
    debug_assert_eq!(h.window(), window);
    BowenReduction { g, h }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoboundaryCheck {
    pub words_checked: usize,
    /// Largest `|f + h∘S - h - g|` seen (0 for exact tables).
    pub max_error: f64,
    pub exact: bool,
    /// First word where the identity fails.
    pub counterexample: Option<Word>,
}

impl CoboundaryCheck {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Checks `g = f + h∘S - h` on every word long enough to contain all four
/// windows.
pub fn verify_coboundary(f: &FiniteRangePotential, g: &FiniteRangePotential, h: &FiniteRangePotential) -> CoboundaryCheck {
    let lo = f.left.max(g.left).max(h.left);
    let hi = [f.right, g.right, h.right + 1].into_iter().max().expect("nonempty");
    let exact = f.is_exact() && g.is_exact() && h.is_exact();
    let mut check = CoboundaryCheck { words_checked: 0, max_error: 0.0, exact, counterexample: None };
    for w in f.graph.words(lo + hi) {
        check.words_checked += 1;
        let o = lo;
        if exact {
            let v = |p: &FiniteRangePotential, origin| p.eval_exact_in(&w, origin).unwrap().unwrap();
            let lhs = v(f, o) + v(h, o + 1) - v(h, o);
            if lhs != v(g, o) && check.counterexample.is_none() {
                check.counterexample = Some(w.clone());
            }
        } else {
            let v = |p: &FiniteRangePotential, origin| p.eval_in(&w, origin).unwrap();
            let err = (v(f, o) + v(h, o + 1) - v(h, o) - v(g, o)).abs();
            check.max_error = check.max_error.max(err);
            let scale = 1.0 + v(f, o).abs() + v(h, o).abs() + v(h, o + 1).abs();
            if err > 1e-12 * scale && check.counterexample.is_none() {
                check.counterexample = Some(w.clone());
            }
        }
    }
    check
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::enumerate_periodic;
    use crate::shift::fixtures::{full2, golden_mean};

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn zero_potential_sums_to_zero() {
        let g = golden_mean();
        let x = PeriodicPoint { word: vec![0, 0, 1, 0, 1, 0, 0] };
        assert_eq!(birkhoff_sum(&FiniteRangePotential::zero(&g), &x, 7).unwrap(), 0.0);
    }

    #[test]
    fn first_coordinate_potential() {
        let g = full2();
        let f = FiniteRangePotential::from_rational_fn(&g, 0, 1, |w| q(w[0] as i64, 1)).unwrap();
        let x = PeriodicPoint { word: vec![0, 1] };
        assert_eq!(birkhoff_sum(&f, &x, 4).unwrap(), 2.0);
        assert_eq!(birkhoff_sum_exact(&f, &x, 4).unwrap(), Some(q(2, 1)));
    }

    #[test]
    fn counts_double_zero_cyclically() {
        let g = golden_mean();
        let f = FiniteRangePotential::from_rational_fn(&g, 0, 2, |w| q((w == [0, 0]) as i64, 1)).unwrap();
        let x = PeriodicPoint { word: vec![0, 0, 1, 0] };
        // cyclic pairs 00, 01, 10, 00 (the last wraps around)
        let pairs = (0..4).filter(|&i| x.word[i] == 0 && x.word[(i + 1) % 4] == 0).count() as i64;
        assert_eq!(pairs, 2);
        assert_eq!(birkhoff_sum_exact(&f, &x, 4).unwrap(), Some(q(pairs, 1)));
    }

    #[test]
    fn invalid_point_rejected() {
        let g = golden_mean();
        let x = PeriodicPoint { word: vec![1, 1] };
        assert!(birkhoff_sum(&FiniteRangePotential::zero(&g), &x, 2).is_err());
    }

    #[test]
    fn table_must_match_words() {
        let g = golden_mean();
        let mut w = BTreeMap::new();
        w.insert(vec![0], 0.0);
        assert!(FiniteRangePotential::new(&g, 0, 1, w.clone()).is_err());
        w.insert(vec![1], 1.0);
        assert!(FiniteRangePotential::new(&g, 0, 1, w.clone()).is_ok());
        w.insert(vec![1], f64::NAN);
        assert!(FiniteRangePotential::new(&g, 0, 1, w).is_err());
    }

    #[test]
    fn birkhoff_additivity() {
        let g = golden_mean();
        let f = FiniteRangePotential::from_rational_fn(&g, 1, 2, |w| q(w.iter().sum::<usize>() as i64 + 1, 3)).unwrap();
        for p in enumerate_periodic(&g, 6, &[]).unwrap().points {
            let total = birkhoff_sum_exact(&f, &p, 9).unwrap().unwrap();
            let first = birkhoff_sum_exact(&f, &p, 4).unwrap().unwrap();
            let mut rotated = p.word.clone();
            rotated.rotate_left(4);
            let rest = birkhoff_sum_exact(&f, &PeriodicPoint { word: rotated }, 5).unwrap().unwrap();
            assert_eq!(total, first + rest);
        }
    }

    #[test]
    fn bowen_trivial_for_future_potential() {
        let g = golden_mean();
        let f = FiniteRangePotential::from_rational_fn(&g, 0, 2, |w| q(w[1] as i64, 2)).unwrap();
        let red = bowen_reduce(&f);
        assert_eq!(red.g, f);
        assert!(red.h.weights().values().all(|&v| v == 0.0));
        assert!(verify_coboundary(&f, &red.g, &red.h).holds());
    }

    #[test]
    fn bowen_full2_product_potential() {
        let g = full2();
        // f(x) = x_{-1} x_0
        let f = FiniteRangePotential::from_rational_fn(&g, 1, 1, |w| q((w[0] * w[1]) as i64, 1)).unwrap();
        let red = bowen_reduce(&f);
        assert_eq!((red.g.left(), red.g.right()), (0, 2));
        assert_eq!(red.g.exact_weight(&[1, 1]), Some(q(1, 1)));
        assert_eq!(red.h.exact_weights(), f.exact_weights());
        let check = verify_coboundary(&f, &red.g, &red.h);
        assert!(check.holds() && check.exact);
        assert_eq!(check.words_checked, 8);
    }

    #[test]
    fn bowen_golden_mean_arbitrary_table() {
        let g = golden_mean();
        let vals = [q(3, 7), q(-2, 5), q(11, 3)];
        let f = FiniteRangePotential::from_rational_fn(&g, 1, 1, |w| vals[w[0] + w[1]]).unwrap();
        let red = bowen_reduce(&f);
        let check = verify_coboundary(&f, &red.g, &red.h);
        assert!(check.holds());
        assert_eq!(check.words_checked, g.words(3).len());
    }

    #[test]
    fn bowen_longer_past() {
        let g = full2();
        let f = FiniteRangePotential::from_fn(&g, 2, 2, |w| {
            w.iter().enumerate().map(|(i, &s)| (i as f64 + 0.5) * s as f64).sum::<f64>().sin()
        })
        .unwrap();
        let red = bowen_reduce(&f);
        assert_eq!(red.h.window(), 5);
        let check = verify_coboundary(&f, &red.g, &red.h);
        assert!(check.holds(), "{check:?}");
        assert!(!check.exact);
    }

    #[test]
    fn coboundary_detects_wrong_g() {
        let g = full2();
        let f = FiniteRangePotential::from_rational_fn(&g, 1, 1, |w| q((w[0] * w[1]) as i64, 1)).unwrap();
        let red = bowen_reduce(&f);
        let wrong = red.g.add_constant(q(1, 100));
        assert!(!verify_coboundary(&f, &wrong, &red.h).holds());
    }

    #[test]
    fn periodic_sums_invariant_under_reduction() {
        let g = golden_mean();
        let f = FiniteRangePotential::from_rational_fn(&g, 2, 1, |w| q(w[0] as i64 * 3 - w[2] as i64, 4)).unwrap();
        let red = bowen_reduce(&f);
        for n in 1..=8 {
            for p in enumerate_periodic(&g, n, &[]).unwrap().points {
                assert_eq!(birkhoff_sum_exact(&f, &p, n).unwrap(), birkhoff_sum_exact(&red.g, &p, n).unwrap());
            }
        }
    }
}
