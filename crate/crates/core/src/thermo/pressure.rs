//! Gurevich pressure by three routes: transfer-matrix spectral radius,
//! extrapolation of a `Z_n` table, and suprema over finite exhaustions.

use serde::Serialize;

use super::partition::PartitionFunctionTable;
use super::perron::{perron, PerronData};
use crate::error::{Result, ShiftError};
use crate::potential::FiniteRangePotential;
use crate::shift::{higher_block, Exhaustion, FiniteGraph, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureMethod {
    Spectral,
    ZExtrapolation,
    ExhaustionSup,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureEstimate {
    pub value: f64,
    pub method: PressureMethod,
    pub error: f64,
    /// Squarings (spectral), table entries used (extrapolation) or levels
    /// (exhaustion).
    pub iterations: usize,
    /// Per-level values for exhaustions; empty otherwise.
    pub levels: Vec<f64>,
}

/// A range-one recoding of `(g, f)`: states are the `window`-blocks and
/// `matrix[u][v] = A[u][v] * exp(f(u))`, the weight sitting at the source.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedRecoding {
    pub graph: FiniteGraph,
    pub blocks: Vec<Word>,
    pub matrix: Vec<Vec<f64>>,
}

pub fn weighted_recoding(g: &FiniteGraph, f: &FiniteRangePotential) -> Result<WeightedRecoding> {
    if f.graph() != g {
        return Err(ShiftError::Potential("potential is defined over a different graph".into()));
    }
    let (graph, blocks) = if f.window() == 1 {
        (g.clone(), (0..g.vertex_count()).map(|v| vec![v]).collect::<Vec<_>>())
    } else {
        let hb = higher_block(g, f.window())?;
        (hb.graph, hb.blocks)
    };
    let n = graph.vertex_count();
    let mut matrix = vec![vec![0.0; n]; n];
    for (u, row) in matrix.iter_mut().enumerate() {
        let w = f.weight(&blocks[u]).expect("blocks are words").exp();
        for &v in graph.successors(u) {
            row[v] = w;
        }
    }
    Ok(WeightedRecoding { graph, blocks, matrix })
}

pub(crate) fn spectral_data(g: &FiniteGraph, f: &FiniteRangePotential) -> Result<(WeightedRecoding, PerronData)> {
    if !g.irreducible_and_period().0 {
        return Err(ShiftError::NotIrreducible { components: g.components() });
    }
    let rec = weighted_recoding(g, f)?;
    let data = perron(&rec.matrix)?;
    Ok((rec, data))
}

/// `log` of the spectral radius of the weighted transfer matrix, with the
/// Collatz–Wielandt bracket as error bound.
pub fn pressure_spectral(g: &FiniteGraph, f: &FiniteRangePotential) -> Result<PressureEstimate> {
    let (_, p) = spectral_data(g, f)?;
    let (lo, hi) = (p.lower.ln(), p.upper.ln());
    Ok(PressureEstimate {
        value: 0.5 * (lo + hi),
        method: PressureMethod::Spectral,
        error: 0.5 * (hi - lo) + 4.0 * f64::EPSILON * (1.0 + p.lambda.ln().abs()),
        iterations: p.squarings,
        levels: Vec::new(),
    })
}

/// Minimum number of positive entries in the residue class.
pub const MIN_TABLE_ENTRIES: usize = 6;

fn aitken(s: &[f64]) -> Vec<f64> {
    s.windows(3)
        .map(|w| {
            let d = w[2] - 2.0 * w[1] + w[0];
            if d.abs() <= 1e-14 * (w[2].abs() + 1.0) {
                w[2]
            } else {
                w[2] - (w[2] - w[1]).powi(2) / d
            }
        })
        .collect()
}

/// Growth rate of `Z_n` along `n ≡ 0 (mod d)`.
///
/// Successive log-differences `b_k = (log Z_{n_{k+1}} - log Z_{n_k}) / d`
/// converge geometrically; Aitken's process accelerates them. The error
/// combines the last acceleration step, the distance from the last raw
/// difference and a rounding floor.
pub fn pressure_from_table(t: &PartitionFunctionTable, period: usize) -> Result<PressureEstimate> {
    if period == 0 {
        return Err(ShiftError::InvalidArgument("period must be at least 1".into()));
    }
    let class: Vec<(usize, f64)> =
        t.entries.iter().filter(|e| e.n % period == 0 && e.value > 0.0).map(|e| (e.n, e.value.ln())).collect();
    if class.len() < MIN_TABLE_ENTRIES {
        return Err(ShiftError::TooFewEntries { found: class.len(), needed: MIN_TABLE_ENTRIES });
    }
    let b: Vec<f64> = class.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0) as f64).collect();
    let a = aitken(&b);
    let b_last = *b.last().expect("nonempty");
    let (value, error) = match a.len() {
        0 => (b_last, f64::INFINITY),
        1 => (a[0], (a[0] - b_last).abs().max((b[b.len() - 1] - b[b.len() - 2]).abs())),
        k => {
            let (last, prev) = (a[k - 1], a[k - 2]);
            (last, (last - prev).abs() + (b_last - last).abs())
        }
    };
    let n_max = class.last().expect("nonempty").0 as f64;
    Ok(PressureEstimate {
        value,
        method: PressureMethod::ZExtrapolation,
        error: error + 8.0 * f64::EPSILON * n_max.max(1.0),
        iterations: class.len(),
        levels: Vec::new(),
    })
}

/// Pressure of each level of a nested exhaustion, `f` given on the top
/// level. The value is the last level; no upper bound on the countable
/// limit is claimed.
pub fn pressure_exhaustion(e: &Exhaustion, f: &FiniteRangePotential) -> Result<PressureEstimate> {
    if f.graph() != e.top() {
        return Err(ShiftError::Potential("potential must be given on the top level of the exhaustion".into()));
    }
    let mut levels = Vec::with_capacity(e.levels.len());
    let mut error = 0.0f64;
    for (i, g) in e.levels.iter().enumerate() {
        let fi = f.restrict(g, &e.map_to_top(i))?;
        let p = pressure_spectral(g, &fi)?;
        if let Some(&prev) = levels.last() {
            if p.value < prev - 2.0 * (error + p.error) {
                return Err(ShiftError::NotNested(i - 1));
            }
        }
        error = p.error;
        levels.push(p.value);
    }
    Ok(PressureEstimate {
        value: *levels.last().expect("nonempty"),
        method: PressureMethod::ExhaustionSup,
        error,
        iterations: levels.len(),
        levels,
    })
}
