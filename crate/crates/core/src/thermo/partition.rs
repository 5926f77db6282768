//! Local partition functions `Z_n(S, f, W)`.

use std::io::Write;
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::Serialize;

use super::expsum::ExpSum;
use crate::error::{Result, ShiftError};
use crate::potential::{FiniteRangePotential, Rational};
use crate::shift::{for_each_periodic, FiniteGraph, PeriodicPoint, Word};

/// Default cap on periodic points visited per `n`.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ZnEntry {
    pub n: usize,
    pub value: f64,
    /// Rounding bound on `value`.
    pub error: f64,
    /// Number of periodic points summed.
    pub points: u128,
    /// Exact formal sum, present for rational potentials.
    pub exact: Option<ExpSum>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionFunctionTable {
    pub word: Word,
    /// Entries for `n = 1, 2, ...` in order.
    pub entries: Vec<ZnEntry>,
    /// Set when the enumeration budget stopped the table early; the value
    /// is the first `n` that was not computed.
    pub truncated_at: Option<usize>,
}

impl PartitionFunctionTable {
    pub fn n_max(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, n: usize) -> Option<&ZnEntry> {
        n.checked_sub(1).and_then(|i| self.entries.get(i))
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    /// Builds a table from plain values (float, no exact data).
    pub fn from_values(word: Word, values: &[f64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .map(|(i, &value)| ZnEntry { n: i + 1, value, error: 0.0, points: 0, exact: None })
            .collect();
        PartitionFunctionTable { word, entries, truncated_at: None }
    }

    /// CSV with columns `n, Z_n, ratio` where `ratio = Z_n e^{-nP}` (empty
    /// without a pressure).
    pub fn write_csv<W: Write>(&self, out: W, pressure: Option<f64>) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| ShiftError::Io(e.to_string());
        w.write_record(["n", "Z_n", "ratio"]).map_err(io)?;
        for e in &self.entries {
            let ratio = pressure.map(|p| format!("{:e}", e.value * (-(e.n as f64) * p).exp())).unwrap_or_default();
            w.write_record([e.n.to_string(), format!("{:e}", e.value), ratio]).map_err(io)?;
        }
        w.flush().map_err(|e| ShiftError::Io(e.to_string()))
    }
}

fn zn_entry(f: &FiniteRangePotential, n: usize, word: &[usize], budget: u64) -> Option<ZnEntry> {
    let g = f.graph();
    let mut value = 0.0;
    let mut points: u128 = 0;
    let mut exact = f.is_exact().then(ExpSum::zero);
    let mut over = false;
    for_each_periodic(g, n, word, |w| {
        points += 1;
        if points > budget as u128 {
            over = true;
            return ControlFlow::Break(());
        }
        let x = PeriodicPoint { word: w.to_vec() };
        value += periodic_sum(f, &x).exp();
        if let Some(e) = exact.as_mut() {
            e.add_term(periodic_sum_exact(f, &x), 1);
        }
        ControlFlow::Continue(())
    });
    if over {
        return None;
    }
    let error = value * (n as f64 + (points.max(1) as f64).log2() + 2.0) * f64::EPSILON;
    Some(ZnEntry { n, value, error, points, exact })
}

fn periodic_sum(f: &FiniteRangePotential, x: &PeriodicPoint) -> f64 {
    let n = x.period();
    (0..n)
        .map(|i| {
            let w: Word = (0..f.window()).map(|j| x.at(i as i64 - f.left() as i64 + j as i64)).collect();
            f.weight(&w).expect("periodic windows are words")
        })
        .sum()
}

fn periodic_sum_exact(f: &FiniteRangePotential, x: &PeriodicPoint) -> Rational {
    let n = x.period();
    (0..n)
        .map(|i| {
            let w: Word = (0..f.window()).map(|j| x.at(i as i64 - f.left() as i64 + j as i64)).collect();
            f.exact_weight(&w).expect("exact table")
        })
        .sum()
}

/// `Z_n` for `n = 1..=n_max` by enumerating periodic points.
pub fn partition_function(g: &FiniteGraph, f: &FiniteRangePotential, word: &[usize], n_max: usize) -> Result<PartitionFunctionTable> {
    partition_function_with_budget(g, f, word, n_max, DEFAULT_BUDGET)
}

pub fn partition_function_with_budget(
    g: &FiniteGraph,
    f: &FiniteRangePotential,
    word: &[usize],
    n_max: usize,
    budget: u64,
) -> Result<PartitionFunctionTable> {
    if f.graph() != g {
        return Err(ShiftError::Potential("potential is defined over a different graph".into()));
    }
    if !g.is_word(word) {
        return Err(ShiftError::NotAWord(word.to_vec()));
    }
    let computed: Vec<Option<ZnEntry>> = (1..=n_max).into_par_iter().map(|n| zn_entry(f, n, word, budget)).collect();
    let mut entries = Vec::with_capacity(n_max);
    let mut truncated_at = None;
    for (i, e) in computed.into_iter().enumerate() {
        match e {
            Some(e) => entries.push(e),
            None => {
                truncated_at = Some(i + 1);
                break;
            }
        }
    }
    Ok(PartitionFunctionTable { word: word.to_vec(), entries, truncated_at })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthVerdict {
    Stable,
    Decaying,
    Growing,
}

/// Finite-window evidence about `Z_n e^{-nP}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceWitness {
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Least-squares slope of `log(Z_n e^{-nP})` against `n`.
    pub slope: f64,
    pub window: (usize, usize),
    pub verdict: GrowthVerdict,
    pub disclaimer: &'static str,
}

/// Slope below which the ratio sequence counts as stable.
pub const STABLE_SLOPE: f64 = 0.02;

/// Looks at `Z_n e^{-nP}` over the second half of the positive entries.
pub fn positive_recurrence_test(t: &PartitionFunctionTable, pressure: f64) -> Result<RecurrenceWitness> {
    let first = t.entries.iter().position(|e| e.value > 0.0).ok_or(ShiftError::TooFewEntries { found: 0, needed: 8 })?;
    let after = t.entries.len() - first - 1;
    if after < 8 {
        return Err(ShiftError::TooFewEntries { found: after, needed: 8 });
    }
    let positive: Vec<&ZnEntry> = t.entries[first..].iter().filter(|e| e.value > 0.0).collect();
    let tail = &positive[positive.len() / 2..];
    let points: Vec<(f64, f64)> = tail.iter().map(|e| (e.n as f64, e.value.ln() - e.n as f64 * pressure)).collect();
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let ratios: Vec<f64> = points.iter().map(|p| p.1.exp()).collect();
    let verdict = if slope > STABLE_SLOPE {
        GrowthVerdict::Growing
    } else if slope < -STABLE_SLOPE {
        GrowthVerdict::Decaying
    } else {
        GrowthVerdict::Stable
    };
    Ok(RecurrenceWitness {
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        slope,
        window: (tail[0].n, tail[tail.len() - 1].n),
        verdict,
        disclaimer: "finite-window witness over the listed n only; not a proof of positive recurrence",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::fixtures::{full2, golden_mean};

    #[test]
    fn full2_zero_potential() {
        let g = full2();
        let t = partition_function(&g, &FiniteRangePotential::zero(&g), &[0], 10).unwrap();
        for e in &t.entries {
            // brute force: all 2^n binary words with x_0 = 0 are periodic points
            let brute = (0..1u32 << e.n).filter(|m| (m >> (e.n - 1)) & 1 == 0).count() as u128;
            assert_eq!(e.exact.as_ref().unwrap().as_count(), Some(brute));
            assert_eq!(e.value, brute as f64);
        }
    }

    #[test]
    fn golden_mean_tables() {
        let g = golden_mean();
        let zero = FiniteRangePotential::zero(&g);
        let t = partition_function(&g, &zero, &[1], 4).unwrap();
        assert_eq!(t.values(), vec![0.0, 1.0, 1.0, 2.0]);
        let t = partition_function(&g, &zero, &[], 5).unwrap();
        assert_eq!(t.values(), vec![1.0, 3.0, 4.0, 7.0, 11.0]);
    }

    #[test]
    fn invalid_word_and_budget() {
        let g = golden_mean();
        let zero = FiniteRangePotential::zero(&g);
        assert!(matches!(partition_function(&g, &zero, &[1, 1], 4), Err(ShiftError::NotAWord(_))));
        let t = partition_function_with_budget(&g, &zero, &[], 10, 20).unwrap();
        // L_6 = 18 ≤ 20 < L_7 = 29
        assert_eq!(t.truncated_at, Some(7));
        assert_eq!(t.entries.len(), 6);
    }

    #[test]
    fn recurrence_witness_verdicts() {
        let values: Vec<f64> = (1..=16).map(|n| 2f64.powi(n - 1)).collect();
        let t = PartitionFunctionTable::from_values(vec![0], &values);
        let w = positive_recurrence_test(&t, 2f64.ln()).unwrap();
        assert_eq!(w.verdict, GrowthVerdict::Stable);
        assert!((w.min_ratio - 0.5).abs() < 1e-12 && (w.max_ratio - 0.5).abs() < 1e-12);
        assert_eq!(positive_recurrence_test(&t, 3f64.ln()).unwrap().verdict, GrowthVerdict::Decaying);
        assert_eq!(positive_recurrence_test(&t, 0.0).unwrap().verdict, GrowthVerdict::Growing);
        let short = PartitionFunctionTable::from_values(vec![0], &values[..5]);
        assert!(positive_recurrence_test(&short, 0.0).is_err());
    }

    #[test]
    fn csv_export() {
        let t = PartitionFunctionTable::from_values(vec![0], &[1.0, 2.0]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf, Some(2f64.ln())).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("n,Z_n,ratio"));
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("1,1e0,5e-1"));
    }
}
