//! Stationary Markov measures on k-blocks and equilibrium measures.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use super::pressure::spectral_data;
use crate::error::{Result, ShiftError};
use crate::potential::FiniteRangePotential;
use crate::shift::{FiniteGraph, Word};

/// Row sums and stationarity are enforced to this tolerance.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// A stationary Markov measure of order `k`: a Markov chain on the
/// admissible `k`-blocks of `graph`, moving `u0..u(k-1) -> u1..uk`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovMeasure {
    graph: FiniteGraph,
    order: usize,
    blocks: Vec<Word>,
    transitions: Vec<Vec<f64>>,
    stationary: Vec<f64>,
}

fn blocks_overlap(u: &[usize], v: &[usize]) -> bool {
    u[1..] == v[..v.len() - 1]
}

fn block_edge(g: &FiniteGraph, u: &[usize], v: &[usize]) -> bool {
    blocks_overlap(u, v) && g.has_edge(u[u.len() - 1], v[v.len() - 1])
}

/// Stationary vector of a stochastic matrix by a direct solve of
/// `πP = π, Σπ = 1`, polished by a few power steps.
fn stationary_vector(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(j, i)] = p[i][j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(n);
    rhs[n - 1] = 1.0;
    let sol = a.lu().solve(&rhs).ok_or_else(|| ShiftError::Measure("chain has no unique stationary vector".into()))?;
    let mut pi: Vec<f64> = sol.iter().map(|&x| x.max(0.0)).collect();
    for _ in 0..4 {
        if residual(p, &pi) <= 1e-15 {
            break;
        }
        let next: Vec<f64> = (0..n).map(|j| (0..n).map(|i| pi[i] * p[i][j]).sum()).collect();
        let s: f64 = next.iter().sum();
        pi = next.into_iter().map(|x| x / s).collect();
    }
    Ok(pi)
}

fn residual(p: &[Vec<f64>], pi: &[f64]) -> f64 {
    let n = p.len();
    (0..n).map(|j| ((0..n).map(|i| pi[i] * p[i][j]).sum::<f64>() - pi[j]).abs()).fold(0.0, f64::max)
}

impl MarkovMeasure {
    /// Validates a transition matrix on the admissible `order`-blocks
    /// (in lexicographic order) and computes its stationary vector.
    pub fn new(graph: &FiniteGraph, order: usize, transitions: Vec<Vec<f64>>) -> Result<Self> {
        if order == 0 {
            return Err(ShiftError::Measure("order must be at least 1".into()));
        }
        let blocks = graph.words(order);
        let n = blocks.len();
        if transitions.len() != n || transitions.iter().any(|r| r.len() != n) {
            return Err(ShiftError::Measure(format!("need a {n}×{n} matrix on the {order}-blocks")));
        }
        for (i, row) in transitions.iter().enumerate() {
            if row.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
                return Err(ShiftError::Measure(format!("row {i} has a negative or non-finite entry")));
            }
            if (row.iter().sum::<f64>() - 1.0).abs() > STOCHASTIC_TOL {
                return Err(ShiftError::Measure(format!("row {i} sums to {}", row.iter().sum::<f64>())));
            }
            if let Some(j) = (0..n).find(|&j| row[j] > 0.0 && !block_edge(graph, &blocks[i], &blocks[j])) {
                return Err(ShiftError::Measure(format!(
                    "transition {} -> {} is not admissible",
                    graph.format_word(&blocks[i]),
                    graph.format_word(&blocks[j])
                )));
            }
        }
        let stationary = stationary_vector(&transitions)?;
        if residual(&transitions, &stationary) > STOCHASTIC_TOL {
            return Err(ShiftError::Measure("stationary vector did not converge".into()));
        }
        Ok(MarkovMeasure { graph: graph.clone(), order, blocks, transitions, stationary })
    }

    /// Builds a measure from nonnegative weights on admissible transitions,
    /// normalizing rows.
    pub fn from_weights(graph: &FiniteGraph, order: usize, weights: &[Vec<f64>]) -> Result<Self> {
        let rows = weights
            .iter()
            .map(|row| {
                let s: f64 = row.iter().sum();
                row.iter().map(|x| x / s).collect()
            })
            .collect();
        Self::new(graph, order, rows)
    }

    /// The order-`order` Markov measure with the given `(order + 1)`-block
    /// frequencies: `P(u -> v) ∝ m(u v_last)`. Rows with no mass fall back
    /// to uniform over admissible successors.
    pub fn from_block_marginals(graph: &FiniteGraph, order: usize, marginals: &BTreeMap<Word, f64>) -> Result<Self> {
        if order == 0 {
            return Err(ShiftError::Measure("order must be at least 1".into()));
        }
        let blocks = graph.words(order);
        let rows = blocks
            .iter()
            .map(|u| {
                let raw: Vec<f64> = blocks
                    .iter()
                    .map(|v| {
                        if !block_edge(graph, u, v) {
                            return 0.0;
                        }
                        let mut w = u.clone();
                        w.push(v[order - 1]);
                        marginals.get(&w).copied().unwrap_or(0.0)
                    })
                    .collect();
                let s: f64 = raw.iter().sum();
                if s > 0.0 {
                    raw.into_iter().map(|x| x / s).collect()
                } else {
                    let admissible: Vec<bool> = blocks.iter().map(|v| block_edge(graph, u, v)).collect();
                    let c = admissible.iter().filter(|&&a| a).count() as f64;
                    admissible.into_iter().map(|a| if a { 1.0 / c } else { 0.0 }).collect()
                }
            })
            .collect();
        Self::new(graph, order, rows)
    }

    pub fn graph(&self) -> &FiniteGraph {
        &self.graph
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn blocks(&self) -> &[Word] {
        &self.blocks
    }

    pub fn transitions(&self) -> &[Vec<f64>] {
        &self.transitions
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn stationarity_residual(&self) -> f64 {
        residual(&self.transitions, &self.stationary)
    }

    pub fn max_row_error(&self) -> f64 {
        self.transitions.iter().map(|r| (r.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    fn block_index(&self, b: &[usize]) -> Option<usize> {
        self.blocks.binary_search_by(|x| x.as_slice().cmp(b)).ok()
    }

    /// Transition probability between two blocks.
    pub fn transition(&self, u: &[usize], v: &[usize]) -> f64 {
        match (self.block_index(u), self.block_index(v)) {
            (Some(i), Some(j)) => self.transitions[i][j],
            _ => 0.0,
        }
    }

    /// Every admissible transition has positive probability.
    pub fn is_fully_supported(&self) -> bool {
        let n = self.blocks.len();
        (0..n).all(|i| {
            self.stationary[i] > 0.0
                && (0..n).all(|j| !block_edge(&self.graph, &self.blocks[i], &self.blocks[j]) || self.transitions[i][j] > 0.0)
        })
    }

    /// Measure of the cylinder `[w]` at coordinate 0.
    pub fn cylinder(&self, w: &[usize]) -> f64 {
        let k = self.order;
        if w.len() < k {
            return self.blocks.iter().zip(&self.stationary).filter(|(b, _)| b.starts_with(w)).map(|(_, p)| p).sum();
        }
        let Some(first) = self.block_index(&w[..k]) else {
            return 0.0;
        };
        let mut p = self.stationary[first];
        let mut cur = first;
        for i in 1..=w.len() - k {
            let Some(next) = self.block_index(&w[i..i + k]) else {
                return 0.0;
            };
            p *= self.transitions[cur][next];
            cur = next;
        }
        p
    }

    /// Measures of all admissible words of length `len`.
    pub fn marginals(&self, len: usize) -> BTreeMap<Word, f64> {
        self.graph.words(len).into_iter().map(|w| {
            let p = self.cylinder(&w);
            (w, p)
        }).collect()
    }

    /// `-Σ π_u P_uv log P_uv`.
    pub fn entropy(&self) -> f64 {
        let mut h = 0.0;
        for (pi, row) in self.stationary.iter().zip(&self.transitions) {
            for &p in row {
                if p > 0.0 {
                    h -= pi * p * p.ln();
                }
            }
        }
        h
    }

    /// A sample path of `len` symbols started from the stationary law.
    pub fn sample<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Word {
        let pick = |weights: &[f64], rng: &mut R| -> usize {
            let mut u: f64 = rng.random();
            for (i, &w) in weights.iter().enumerate() {
                if u < w {
                    return i;
                }
                u -= w;
            }
            weights.iter().rposition(|&w| w > 0.0).expect("a positive weight")
        };
        let mut state = pick(&self.stationary, rng);
        let mut out = self.blocks[state].clone();
        while out.len() < len {
            state = pick(&self.transitions[state], rng);
            out.push(*self.blocks[state].last().expect("nonempty block"));
        }
        out.truncate(len);
        out
    }

    /// The same measure presented on `order`-blocks for a larger order.
    pub fn raise_order(&self, order: usize) -> Result<MarkovMeasure> {
        if order < self.order {
            return Err(ShiftError::Measure("can only raise the order".into()));
        }
        let blocks = self.graph.words(order);
        let rows = blocks
            .iter()
            .map(|u| {
                blocks
                    .iter()
                    .map(|v| {
                        if block_edge(&self.graph, u, v) {
                            let k = self.order;
                            self.transition(&u[order - k..], &v[order - k..])
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        MarkovMeasure::new(&self.graph, order, rows)
    }
}

/// The equilibrium measure of `(g, f)` from Perron data of the recoded
/// transfer matrix: `P_uv = M_uv r_v / (λ r_u)`, `π_u ∝ l_u r_u`. Its order
/// is the window of `f`.
pub fn equilibrium_measure(g: &FiniteGraph, f: &FiniteRangePotential) -> Result<MarkovMeasure> {
    let (rec, data) = spectral_data(g, f)?;
    let n = rec.blocks.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|u| {
            let raw: Vec<f64> = (0..n).map(|v| rec.matrix[u][v] * data.right[v] / (data.lambda * data.right[u])).collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / s).collect()
        })
        .collect();
    MarkovMeasure::new(g, f.window(), rows)
}

/// `h_μ + ∫ f dμ`.
pub fn measure_pressure(mu: &MarkovMeasure, f: &FiniteRangePotential) -> Result<f64> {
    if f.graph() != mu.graph() {
        return Err(ShiftError::Measure("measure and potential live on different graphs".into()));
    }
    let k = mu.order();
    if f.window() > k + 1 {
        return Err(ShiftError::Measure(format!("potential window {} exceeds order {} + 1", f.window(), k)));
    }
    let mut integral = 0.0;
    for (i, u) in mu.blocks().iter().enumerate() {
        for (j, v) in mu.blocks().iter().enumerate() {
            let p = mu.transitions()[i][j];
            if p == 0.0 {
                continue;
            }
            let mut w = u.clone();
            w.push(*v.last().expect("nonempty"));
            let val = f.weight(&w[..f.window()]).ok_or_else(|| ShiftError::Measure("measure charges an inadmissible word".into()))?;
            integral += mu.stationary()[i] * p * val;
        }
    }
    Ok(mu.entropy() + integral)
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureSummary {
    pub order: usize,
    pub entropy: f64,
    pub max_row_error: f64,
    pub stationarity_residual: f64,
}

impl From<&MarkovMeasure> for MeasureSummary {
    fn from(m: &MarkovMeasure) -> Self {
        MeasureSummary {
            order: m.order(),
            entropy: m.entropy(),
            max_row_error: m.max_row_error(),
            stationarity_residual: m.stationarity_residual(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::fixtures::{full2, golden_mean};
    use crate::thermo::pressure::pressure_spectral;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const PHI: f64 = 1.618033988749895;

    #[test]
    fn bernoulli_equilibrium() {
        let g = full2();
        let f = FiniteRangePotential::from_fn(&g, 0, 1, |w| if w[0] == 0 { 0.3f64.ln() } else { 0.7f64.ln() }).unwrap();
        let mu = equilibrium_measure(&g, &f).unwrap();
        for row in mu.transitions() {
            assert!((row[0] - 0.3).abs() < 1e-12 && (row[1] - 0.7).abs() < 1e-12);
        }
        assert!(measure_pressure(&mu, &f).unwrap().abs() < 1e-12);
    }

    #[test]
    fn parry_measure() {
        let g = golden_mean();
        let zero = FiniteRangePotential::zero(&g);
        let mu = equilibrium_measure(&g, &zero).unwrap();
        assert!((mu.transitions()[0][0] - 1.0 / PHI).abs() < 1e-12);
        assert!((mu.transitions()[0][1] - 1.0 / (PHI * PHI)).abs() < 1e-12);
        assert!((mu.transitions()[1][0] - 1.0).abs() < 1e-15);
        let p = pressure_spectral(&g, &zero).unwrap().value;
        assert!((measure_pressure(&mu, &zero).unwrap() - p).abs() < 1e-9);
        assert!(mu.stationarity_residual() < 1e-12);
        assert!(mu.is_fully_supported());
    }

    #[test]
    fn single_loop_point_mass() {
        let g = FiniteGraph::new(vec!["a".into()], &[(0, 0)]).unwrap();
        let f = FiniteRangePotential::from_fn(&g, 0, 1, |_| 1.25).unwrap();
        let mu = equilibrium_measure(&g, &f).unwrap();
        assert_eq!(mu.stationary(), &[1.0]);
        assert!((measure_pressure(&mu, &f).unwrap() - 1.25).abs() < 1e-15);
        assert!((pressure_spectral(&g, &f).unwrap().value - 1.25).abs() < 1e-12);
    }

    #[test]
    fn fair_coin_and_validation() {
        let g = full2();
        let mu = MarkovMeasure::new(&g, 1, vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!((measure_pressure(&mu, &FiniteRangePotential::zero(&g)).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(MarkovMeasure::new(&g, 1, vec![vec![0.5, 0.6], vec![0.5, 0.5]]).is_err());
        let gm = golden_mean();
        assert!(MarkovMeasure::new(&gm, 1, vec![vec![0.5, 0.5], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn marginals_and_raise() {
        let g = golden_mean();
        let mu = equilibrium_measure(&g, &FiniteRangePotential::zero(&g)).unwrap();
        let m2 = mu.marginals(2);
        assert!((m2.values().sum::<f64>() - 1.0).abs() < 1e-14);
        let hi = mu.raise_order(2).unwrap();
        for (w, p) in hi.marginals(3) {
            assert!((p - mu.cylinder(&w)).abs() < 1e-14);
        }
        assert!((hi.entropy() - mu.entropy()).abs() < 1e-14);
    }

    #[test]
    fn sampling_frequencies() {
        let g = golden_mean();
        let mu = equilibrium_measure(&g, &FiniteRangePotential::zero(&g)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let path = mu.sample(100_000, &mut rng);
        assert!(g.is_word(&path));
        let freq = path.iter().filter(|&&s| s == 0).count() as f64 / path.len() as f64;
        assert!((freq - mu.cylinder(&[0])).abs() < 0.01);
    }
}
