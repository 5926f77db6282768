//! Randomized invariants. Graphs and potentials come from a seeded ChaCha
//! stream so failures shrink to a single seed.

mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use shiftlab::codes::{check_witness, gamma_on_point, verify_magic, EventuallyPeriodicPoint, MagicWitness, OneBlockCode};
use shiftlab::io::{emit_graph, emit_measure, emit_potential, load_ai, parse_graph, parse_measure, parse_potential, PotentialDocument};
use shiftlab::potential::bowen_reduce;
use shiftlab::shift::higher_block;
use shiftlab::thermo::{equilibrium_measure, partition_function, pressure_spectral};
use shiftlab::{FiniteGraph, Rational};

fn adjacency_trace(g: &FiniteGraph, n_max: usize) -> Vec<u128> {
    let k = g.vertex_count();
    let a: Vec<Vec<u128>> = g.adjacency().into_iter().map(|r| r.into_iter().map(u128::from).collect()).collect();
    let mut p = a.clone();
    let mut out = Vec::new();
    for _ in 0..n_max {
        out.push((0..k).map(|i| p[i][i]).sum());
        p = (0..k).map(|i| (0..k).map(|j| (0..k).map(|m| p[i][m] * a[m][j]).sum()).collect()).collect();
    }
    out
}

fn full_graph(k: usize) -> FiniteGraph {
    let edges: Vec<(usize, usize)> = (0..k).flat_map(|u| (0..k).map(move |v| (u, v))).collect();
    FiniteGraph::from_edges(k, &edges).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn periodic_counts_are_traces(seed in any::<u64>()) {
        let g = random_irreducible(&mut rng(seed), 6);
        let t = partition_function(&g, &shiftlab::FiniteRangePotential::zero(&g), &[], 9).unwrap();
        let counts: Vec<u128> = t.entries.iter().map(|e| e.points).collect();
        prop_assert_eq!(counts, adjacency_trace(&g, 9));
    }

    #[test]
    fn higher_block_keeps_periodic_counts(seed in any::<u64>(), k in 2usize..4) {
        let g = random_irreducible(&mut rng(seed), 5);
        let hb = higher_block(&g, k).unwrap();
        prop_assert_eq!(adjacency_trace(&g, 8), adjacency_trace(&hb.graph, 8));
    }

    #[test]
    fn constants_shift_pressure(seed in any::<u64>(), p in -20i64..20, q in 1i64..9) {
        let mut r = rng(seed);
        let g = random_irreducible(&mut r, 6);
        let f = random_potential(&mut r, &g, 0, 1);
        let c = Rational::new(p, q);
        let a = pressure_spectral(&g, &f).unwrap();
        let b = pressure_spectral(&g, &f.add_constant(c)).unwrap();
        prop_assert!((b.value - a.value - p as f64 / q as f64).abs() <= a.error + b.error + 1e-12);
    }

    #[test]
    fn bowen_reduction_keeps_partition_functions(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_irreducible(&mut r, 4);
        let f = random_potential(&mut r, &g, 1, 1);
        let b = bowen_reduce(&f);
        let w = vec![r.random_range(0..g.vertex_count())];
        let zf = partition_function(&g, &f, &w, 8).unwrap();
        let zg = partition_function(&g, &b.g, &w, 8).unwrap();
        for (a, b) in zf.entries.iter().zip(&zg.entries) {
            prop_assert_eq!(&a.exact, &b.exact);
        }
    }

    #[test]
    fn refutations_are_sound(seed in any::<u64>(), k in 1usize..3) {
        let mut r = rng(seed);
        let g = random_irreducible(&mut r, 4);
        let target = full_graph(k);
        let map: Vec<usize> = (0..g.vertex_count()).map(|_| r.random_range(0..k)).collect();
        let code = OneBlockCode::new(&g, &target, map).unwrap();
        let word = vec![r.random_range(0..k)];
        let cert = verify_magic(&code, &word, 0, 3).unwrap();
        if let Some(w) = &cert.witness {
            prop_assert!(check_witness(&code, w));
            if let MagicWitness::Ambiguous { x, x_prime, .. } = w {
                prop_assert_eq!(code.apply(x).unwrap().len(), x.len());
                prop_assert_ne!(x, x_prime);
            }
        }
    }

    #[test]
    fn graph_and_potential_documents_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_irreducible(&mut r, 6);
        let back = parse_graph(&emit_graph(&g)).unwrap();
        prop_assert_eq!(&back, &g);
        let f = random_potential(&mut r, &g, 1, 1);
        let doc = PotentialDocument { potential: f.clone(), certificate: None };
        let again = parse_potential(&emit_potential(&doc), &g).unwrap();
        prop_assert_eq!(again.potential, f);
    }

    #[test]
    fn equilibrium_measures_are_stochastic(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_irreducible(&mut r, 6);
        let f = random_potential(&mut r, &g, 0, 2);
        let mu = equilibrium_measure(&g, &f).unwrap();
        prop_assert!(mu.max_row_error() <= 1e-12);
        prop_assert!(mu.stationarity_residual() <= 1e-12);
        prop_assert!((mu.stationary().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let back = parse_measure(&emit_measure(&mu), &g).unwrap();
        for (a, b) in back.transitions().iter().flatten().zip(mu.transitions().iter().flatten()) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
    }
}

fn gm_point() -> impl Strategy<Value = EventuallyPeriodicPoint> {
    // periodic parts see the symbol 1, hence the word 10, infinitely often
    let tails = prop::sample::select(vec![vec![0, 1], vec![0, 0, 1], vec![0, 1, 0, 0, 1], vec![1, 0, 0]]);
    (tails.clone(), prop::collection::vec(0usize..2, 0..6), tails, -4i64..4)
        .prop_map(|(l, c, r, s)| EventuallyPeriodicPoint::new(l, c, r, s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_commutes_with_the_shift(x in gm_point()) {
        let gm = graph("gm.json");
        prop_assume!(x.is_admissible(&gm));
        for name in ["gm-self-ai.json", "gm-shifted-ai.json"] {
            let ai = load_ai(&fixture(name)).unwrap();
            let gx = gamma_on_point(&ai, &x).unwrap();
            prop_assert!(gx.is_admissible(ai.target()));
            prop_assert!(gamma_on_point(&ai, &x.shift()).unwrap().same_point(&gx.shift()));
        }
    }
}
