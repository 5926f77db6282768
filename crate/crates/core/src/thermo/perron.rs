//! Perron eigendata of nonnegative matrices.
//!
//! The lazy matrix `B = I + M/s` is primitive whenever `M` is irreducible,
//! so normalized repeated squaring of `B` converges to the rank-one
//! projector `r lᵀ`. Products of nonnegative matrices involve no
//! cancellation, so the squarings are entrywise accurate. The eigenvalue
//! is then bracketed by Collatz–Wielandt bounds on `M` itself.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Result, ShiftError};

const MAX_SQUARINGS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct PerronData {
    pub lambda: f64,
    /// Collatz–Wielandt bracket `lower ≤ λ ≤ upper`.
    pub lower: f64,
    pub upper: f64,
    /// Right Perron vector, max-normalized.
    pub right: Vec<f64>,
    /// Left Perron vector, max-normalized.
    pub left: Vec<f64>,
    pub squarings: usize,
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

fn normalize_max(v: &mut [f64]) {
    let m = v.iter().copied().fold(0.0, f64::max);
    if m > 0.0 {
        v.iter_mut().for_each(|x| *x /= m);
    }
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE)).fold(0.0, f64::max)
}

/// Perron data of an irreducible nonnegative square matrix.
pub fn perron(m: &[Vec<f64>]) -> Result<PerronData> {
    let n = m.len();
    if n == 0 || m.iter().any(|row| row.len() != n) {
        return Err(ShiftError::InvalidArgument("perron needs a nonempty square matrix".into()));
    }
    let scale = m.iter().map(|row| row.iter().sum::<f64>()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(ShiftError::InvalidArgument("zero matrix has no Perron vector".into()));
    }
    let mut b: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| m[i][j] / scale + if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut right = vec![1.0; n];
    let mut left = vec![1.0; n];
    let mut squarings = 0;
    let mut stable = 0;
    loop {
        b = matmul(&b, &b);
        squarings += 1;
        let top = b.iter().flatten().copied().fold(0.0, f64::max);
        b.iter_mut().flatten().for_each(|x| *x /= top);
        let mut r: Vec<f64> = b.iter().map(|row| row.iter().sum()).collect();
        let mut l: Vec<f64> = (0..n).map(|j| b.iter().map(|row| row[j]).sum()).collect();
        normalize_max(&mut r);
        normalize_max(&mut l);
        let change = max_rel_diff(&r, &right).max(max_rel_diff(&l, &left));
        right = r;
        left = l;
        if change < 1e-15 {
            stable += 1;
            if stable >= 3 {
                break;
            }
        } else {
            stable = 0;
        }
        if squarings >= MAX_SQUARINGS {
            return Err(ShiftError::NoConvergence(squarings));
        }
    }
    if right.iter().chain(left.iter()).any(|&x| !(x > 0.0)) {
        return Err(ShiftError::InvalidArgument("matrix is not irreducible (Perron vector has zero entries)".into()));
    }
    let mr: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[i][j] * right[j]).sum()).collect();
    let ratios = mr.iter().zip(&right).map(|(a, b)| a / b);
    let (mut lower, mut upper) = ratios.fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x), hi.max(x)));
    // allowance for rounding in M r
    let slack = 2.0 * (n as f64 + 2.0) * f64::EPSILON;
    lower *= 1.0 - slack;
    upper *= 1.0 + slack;
    Ok(PerronData { lambda: 0.5 * (lower + upper), lower, upper, right, left, squarings })
}

/// Bracket on the spectral radius of a possibly reducible nonnegative
/// matrix: the maximum over strongly connected blocks.
pub fn spectral_radius(m: &[Vec<f64>]) -> Result<(f64, f64)> {
    let n = m.len();
    let mut pg = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..n).map(|_| pg.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if m[i][j] > 0.0 {
                pg.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut best = (0.0f64, 0.0f64);
    for comp in tarjan_scc(&pg) {
        let idx: Vec<usize> = comp.iter().map(|v| v.index()).collect();
        let has_cycle = idx.len() > 1 || m[idx[0]][idx[0]] > 0.0;
        if !has_cycle {
            continue;
        }
        let sub: Vec<Vec<f64>> = idx.iter().map(|&i| idx.iter().map(|&j| m[i][j]).collect()).collect();
        let p = perron(&sub)?;
        if p.upper > best.1 {
            best = (p.lower, p.upper);
        }
    }
    Ok(best)
}
