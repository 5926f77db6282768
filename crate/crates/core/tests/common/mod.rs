//! Shared helpers for the integration tests: fixture paths, seeded random
//! irreducible graphs and rational potentials, and brute-force oracles.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shiftlab::io::{load_graph, load_potential};
use shiftlab::{FiniteGraph, FiniteRangePotential, Rational};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn graph(name: &str) -> FiniteGraph {
    load_graph(&fixture(name)).unwrap()
}

pub fn potential(name: &str, g: &FiniteGraph) -> FiniteRangePotential {
    load_potential(&fixture(name), g).unwrap().potential
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random Hamiltonian cycle plus up to two extra out-edges per vertex,
/// so the graph is irreducible and its entropy stays below log 3.
pub fn random_irreducible(rng: &mut ChaCha8Rng, max_vertices: usize) -> FiniteGraph {
    let n = rng.random_range(1..=max_vertices);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = std::collections::BTreeSet::new();
    for i in 0..n {
        edges.insert((order[i], order[(i + 1) % n]));
    }
    for u in 0..n {
        for _ in 0..2 {
            if rng.random_bool(0.5) {
                edges.insert((u, rng.random_range(0..n)));
            }
        }
    }
    let edges: Vec<(usize, usize)> = edges.into_iter().collect();
    FiniteGraph::from_edges(n, &edges).unwrap()
}

pub const WEIGHT_POOL: [(i64, i64); 7] = [(-1, 1), (-1, 2), (0, 1), (1, 3), (1, 2), (1, 1), (2, 1)];

pub fn random_potential(rng: &mut ChaCha8Rng, g: &FiniteGraph, left: usize, right: usize) -> FiniteRangePotential {
    let table: BTreeMap<Vec<usize>, Rational> = g
        .words(left + right)
        .into_iter()
        .map(|w| {
            let (p, q) = WEIGHT_POOL[rng.random_range(0..WEIGHT_POOL.len())];
            (w, Rational::new(p, q))
        })
        .collect();
    FiniteRangePotential::from_rational(g, left, right, table).unwrap()
}

/// Formal sums `Σ count · e^{exponent}` keyed by exponent.
pub type Formal = BTreeMap<Rational, u128>;

fn formal_mul(a: &Formal, b: &Formal) -> Formal {
    let mut out = Formal::new();
    for (x, m) in a {
        for (y, k) in b {
            *out.entry(x + y).or_insert(0) += m * k;
        }
    }
    out
}

fn formal_add(into: &mut Formal, a: &Formal) {
    for (x, m) in a {
        *into.entry(*x).or_insert(0) += m;
    }
}

/// Powers of the weighted matrix `M_uv = A_uv e^{f(u)}` for a range-one
/// potential, over formal sums. Returns `M^1, ..., M^n_max`.
pub fn weighted_powers(g: &FiniteGraph, f: &FiniteRangePotential, n_max: usize) -> Vec<Vec<Vec<Formal>>> {
    assert_eq!((f.left(), f.right()), (0, 1));
    let n = g.vertex_count();
    let mut m = vec![vec![Formal::new(); n]; n];
    for (u, v) in g.edges() {
        m[u][v].insert(f.exact_weight(&[u]).unwrap(), 1);
    }
    let mut powers = vec![m.clone()];
    for _ in 1..n_max {
        let prev = powers.last().unwrap();
        let mut next = vec![vec![Formal::new(); n]; n];
        for i in 0..n {
            for k in 0..n {
                if prev[i][k].is_empty() {
                    continue;
                }
                for j in 0..n {
                    if !m[k][j].is_empty() {
                        let t = formal_mul(&prev[i][k], &m[k][j]);
                        formal_add(&mut next[i][j], &t);
                    }
                }
            }
        }
        powers.push(next);
    }
    powers
}

pub fn trace(m: &[Vec<Formal>]) -> Formal {
    let mut out = Formal::new();
    for (i, row) in m.iter().enumerate() {
        formal_add(&mut out, &row[i]);
    }
    out
}

pub fn as_formal(terms: Vec<(Rational, u128)>) -> Formal {
    terms.into_iter().filter(|(_, c)| *c > 0).collect()
}

pub fn clean(f: Formal) -> Formal {
    f.into_iter().filter(|(_, c)| *c > 0).collect()
}

/// Closed paths of length `n`, by brute force over all words.
pub fn cycles(g: &FiniteGraph, n: usize) -> Vec<Vec<usize>> {
    g.words(n).into_iter().filter(|w| g.has_edge(w[n - 1], w[0])).collect()
}

/// `Σ_{i<n} f(S^i x)` for the periodic point with period word `w`, read
/// straight off the weight table.
pub fn periodic_birkhoff(f: &FiniteRangePotential, w: &[usize]) -> Rational {
    let n = w.len() as i64;
    (0..n)
        .map(|i| {
            let window: Vec<usize> =
                (0..f.window() as i64).map(|j| w[(i - f.left() as i64 + j).rem_euclid(n) as usize]).collect();
            f.exact_weight(&window).expect("exact potential")
        })
        .sum()
}

pub const GRAPH_FIXTURES: [&str; 5] = ["full2.json", "gm.json", "gm2.json", "point.json", "two-cycle.json"];

/// Every fixture graph with the zero potential, plus the golden mean
/// potentials.
pub fn fixture_systems() -> Vec<(String, FiniteGraph, FiniteRangePotential)> {
    let mut out: Vec<(String, FiniteGraph, FiniteRangePotential)> = GRAPH_FIXTURES
        .iter()
        .map(|name| {
            let g = graph(name);
            let f = potential("zero.json", &g);
            (format!("{name} + zero"), g, f)
        })
        .collect();
    let gm = graph("gm.json");
    for p in ["gm-potential.json", "gm-potential-2.json"] {
        out.push((format!("gm.json + {p}"), gm.clone(), potential(p, &gm)));
    }
    out
}
