//! Finite presentations of Markov shifts.
//!
//! A vertex shift is the set of bi-infinite paths on a directed graph
//! `(V, E)` together with the left shift. Everything here works on finite
//! graphs; countable-state shifts enter the library either as loop systems
//! (see [`crate::induction`]) or as nested finite exhaustions.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::ops::ControlFlow;

use num_integer::Integer;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Result, ShiftError};
use crate::induction::LoopSystem;

/// A word over the alphabet, as dense symbol ids.
pub type Word = Vec<usize>;

/// A finite directed graph with named vertices. Successor lists are kept
/// sorted so every enumeration is lexicographic in symbol id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGraph {
    names: Vec<String>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl FiniteGraph {
    /// Builds a graph without pruning. Rejects duplicate edges, duplicate
    /// names and out-of-range endpoints.
    pub fn new(names: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let size = names.len();
        let mut seen_names = HashSet::new();
        for name in &names {
            if !seen_names.insert(name.as_str()) {
                return Err(ShiftError::DuplicateName(name.clone()));
            }
        }
        let mut seen = HashSet::new();
        let mut succ = vec![Vec::new(); size];
        let mut pred = vec![Vec::new(); size];
        for &(u, v) in edges {
            for index in [u, v] {
                if index >= size {
                    return Err(ShiftError::VertexOutOfRange { index, size });
                }
            }
            if !seen.insert((u, v)) {
                return Err(ShiftError::DuplicateEdge(u, v));
            }
            succ[u].push(v);
            pred[v].push(u);
        }
        for list in succ.iter_mut().chain(pred.iter_mut()) {
            list.sort_unstable();
        }
        Ok(FiniteGraph { names, succ, pred })
    }

    /// Graph on vertices named `"0"`, `"1"`, ...
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let names = (0..vertex_count).map(|i| i.to_string()).collect();
        Self::new(names, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.pred[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.succ[u].binary_search(&v).is_ok()
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
            .collect()
    }

    /// 0/1 adjacency matrix.
    pub fn adjacency(&self) -> Vec<Vec<u64>> {
        let n = self.vertex_count();
        let mut a = vec![vec![0; n]; n];
        for (u, v) in self.edges() {
            a[u][v] = 1;
        }
        a
    }

    /// True when every consecutive pair of `w` is an edge (the empty word
    /// and single symbols are words).
    pub fn is_word(&self, w: &[usize]) -> bool {
        w.iter().all(|&s| s < self.vertex_count()) && w.windows(2).all(|p| self.has_edge(p[0], p[1]))
    }

    /// True when `w` is a closed path, i.e. `w` repeated is a periodic point.
    pub fn is_cycle(&self, w: &[usize]) -> bool {
        !w.is_empty() && self.is_word(w) && self.has_edge(w[w.len() - 1], w[0])
    }

    /// All words of length `len`, lexicographically.
    pub fn words(&self, len: usize) -> Vec<Word> {
        let mut out = Vec::new();
        if len == 0 {
            out.push(Vec::new());
            return out;
        }
        let mut stack = Vec::with_capacity(len);
        for v in 0..self.vertex_count() {
            stack.push(v);
            self.extend_words(&mut stack, len, &mut out);
            stack.pop();
        }
        out
    }

    fn extend_words(&self, stack: &mut Word, len: usize, out: &mut Vec<Word>) {
        if stack.len() == len {
            out.push(stack.clone());
            return;
        }
        let last = *stack.last().expect("nonempty");
        for &v in self.successors(last) {
            stack.push(v);
            self.extend_words(stack, len, out);
            stack.pop();
        }
    }

    fn single_char_names(&self) -> bool {
        self.names.iter().all(|n| n.chars().count() == 1)
    }

    /// Renders a word: concatenated when every name is one character,
    /// space separated otherwise.
    pub fn format_word(&self, w: &[usize]) -> String {
        let sep = if self.single_char_names() { "" } else { " " };
        w.iter().map(|&s| self.names[s].as_str()).collect::<Vec<_>>().join(sep)
    }

    /// Parses a word written by [`format_word`](Self::format_word). Tokens
    /// may always be separated by whitespace.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Vec::new());
        }
        let lookup = |tok: &str| self.index_of(tok).ok_or_else(|| ShiftError::UnknownSymbol(tok.to_string()));
        if text.contains(char::is_whitespace) {
            return text.split_whitespace().map(lookup).collect();
        }
        if let Some(i) = self.index_of(text) {
            return Ok(vec![i]);
        }
        if self.single_char_names() {
            return text.chars().map(|c| lookup(&c.to_string())).collect();
        }
        Err(ShiftError::UnknownSymbol(text.to_string()))
    }

    /// Strongly connected components (petgraph's Tarjan), each sorted,
    /// ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut pg = DiGraph::<(), ()>::new();
        let nodes: Vec<_> = (0..self.vertex_count()).map(|_| pg.add_node(())).collect();
        for (u, v) in self.edges() {
            pg.add_edge(nodes[u], nodes[v], ());
        }
        let mut comps: Vec<Vec<usize>> = tarjan_scc(&pg)
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
                c.sort_unstable();
                c
            })
            .collect();
        comps.sort();
        comps
    }

    /// Repeatedly removes vertices with no incoming or no outgoing edge.
    /// Returns the pruned graph and the removed vertex ids (original
    /// numbering).
    pub fn prune(&self) -> (FiniteGraph, Vec<usize>) {
        let n = self.vertex_count();
        let mut alive = vec![true; n];
        let mut indeg: Vec<usize> = self.pred.iter().map(Vec::len).collect();
        let mut outdeg: Vec<usize> = self.succ.iter().map(Vec::len).collect();
        let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0 || outdeg[v] == 0).collect();
        while let Some(v) = queue.pop() {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            for &w in &self.succ[v] {
                if alive[w] {
                    indeg[w] -= 1;
                    if indeg[w] == 0 {
                        queue.push(w);
                    }
                }
            }
            for &u in &self.pred[v] {
                if alive[u] {
                    outdeg[u] -= 1;
                    if outdeg[u] == 0 {
                        queue.push(u);
                    }
                }
            }
        }
        let kept: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
        let removed = (0..n).filter(|&v| !alive[v]).collect();
        (self.induced_subgraph(&kept), removed)
    }

    /// Subgraph on `vertices` (in the given order) with all edges between them.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> FiniteGraph {
        let index: HashMap<usize, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let names = vertices.iter().map(|&v| self.names[v].clone()).collect();
        let edges: Vec<(usize, usize)> = self
            .edges()
            .into_iter()
            .filter_map(|(u, v)| Some((*index.get(&u)?, *index.get(&v)?)))
            .collect();
        FiniteGraph::new(names, &edges).expect("subgraph of a valid graph is valid")
    }

    /// `(irreducible, period)`; the period is `None` for reducible graphs.
    pub fn irreducible_and_period(&self) -> (bool, Option<usize>) {
        let n = self.vertex_count();
        if n == 0 || self.edge_count() == 0 || self.components().len() != 1 {
            return (false, None);
        }
        // BFS levels; period = gcd of level[u] + 1 - level[v] over edges.
        let mut level = vec![usize::MAX; n];
        level[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for &v in self.successors(u) {
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut period = 0usize;
        for (u, v) in self.edges() {
            let diff = (level[u] as i64 + 1 - level[v] as i64).unsigned_abs() as usize;
            period = period.gcd(&diff);
        }
        (true, Some(period))
    }
}

impl fmt::Display for FiniteGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "graph({} vertices, {} edges)", self.vertex_count(), self.edge_count())
    }
}

pub fn irreducible_and_period(g: &FiniteGraph) -> (bool, Option<usize>) {
    g.irreducible_and_period()
}

/// A validated, pruned, irreducible graph.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltGraph {
    pub graph: FiniteGraph,
    /// Names of the vertices removed by pruning.
    pub removed: Vec<String>,
    pub period: usize,
}

/// Validates a raw vertex/edge description: prunes vertices without a
/// bi-infinite continuation and requires the remainder to be irreducible.
pub fn build_graph(names: Vec<String>, edges: &[(usize, usize)]) -> Result<BuiltGraph> {
    if edges.is_empty() {
        return Err(ShiftError::EmptyGraph);
    }
    let raw = FiniteGraph::new(names, edges)?;
    let (graph, removed) = raw.prune();
    if graph.edge_count() == 0 {
        return Err(ShiftError::EmptyGraph);
    }
    let removed = removed.into_iter().map(|v| raw.name(v).to_string()).collect();
    match graph.irreducible_and_period() {
        (true, Some(period)) => Ok(BuiltGraph { graph, removed, period }),
        _ => {
            let components = graph
                .components()
                .into_iter()
                .map(|c| c.into_iter().map(|v| raw.index_of(graph.name(v)).expect("kept vertex")).collect())
                .collect();
            Err(ShiftError::NotIrreducible { components })
        }
    }
}

/// A periodic point given by its length-`n` word (a closed path).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PeriodicPoint {
    pub word: Word,
}

impl PeriodicPoint {
    pub fn period(&self) -> usize {
        self.word.len()
    }

    pub fn at(&self, i: i64) -> usize {
        self.word[i.rem_euclid(self.word.len() as i64) as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicEnumeration {
    pub points: Vec<PeriodicPoint>,
    /// False when the requested prefix is not a word of the shift; the
    /// point list is then empty.
    pub prefix_admissible: bool,
}

/// Visits the `n`-periodic points whose periodic extension begins with
/// `prefix`, in lexicographic order of their length-`n` words. When
/// `prefix` is longer than `n` it must itself be `n`-periodic. Returns
/// whether the prefix is admissible.
pub(crate) fn for_each_periodic<F>(g: &FiniteGraph, n: usize, prefix: &[usize], mut visit: F) -> bool
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    if !g.is_word(prefix) {
        return false;
    }
    if n == 0 {
        return true;
    }
    let head = &prefix[..prefix.len().min(n)];
    if prefix.iter().enumerate().any(|(i, &s)| s != prefix[i % n]) {
        return true;
    }
    let mut stack: Word = head.to_vec();
    if stack.is_empty() {
        for v in 0..g.vertex_count() {
            stack.push(v);
            if periodic_dfs(g, n, &mut stack, &mut visit).is_break() {
                return true;
            }
            stack.pop();
        }
    } else {
        let _ = periodic_dfs(g, n, &mut stack, &mut visit);
    }
    true
}

fn periodic_dfs<F>(g: &FiniteGraph, n: usize, stack: &mut Word, visit: &mut F) -> ControlFlow<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    if stack.len() == n {
        if g.has_edge(stack[n - 1], stack[0]) {
            return visit(stack);
        }
        return ControlFlow::Continue(());
    }
    let last = *stack.last().expect("nonempty");
    for &v in g.successors(last) {
        stack.push(v);
        let flow = periodic_dfs(g, n, stack, visit);
        stack.pop();
        flow?;
    }
    ControlFlow::Continue(())
}

/// The `n`-periodic points beginning with `prefix`, lexicographically.
pub fn enumerate_periodic(g: &FiniteGraph, n: usize, prefix: &[usize]) -> Result<PeriodicEnumeration> {
    if n == 0 {
        return Err(ShiftError::InvalidArgument("period must be at least 1".into()));
    }
    let mut points = Vec::new();
    let prefix_admissible = for_each_periodic(g, n, prefix, |w| {
        points.push(PeriodicPoint { word: w.to_vec() });
        ControlFlow::Continue(())
    });
    Ok(PeriodicEnumeration { points, prefix_admissible })
}

/// Higher-block presentation: vertices are the `N`-words, with an edge
/// `u0..u(N-1) -> u1..uN` whenever `u0..uN` is a word.
#[derive(Debug, Clone, PartialEq)]
pub struct HigherBlock {
    pub graph: FiniteGraph,
    /// The `N`-word behind each vertex.
    pub blocks: Vec<Word>,
    /// One-block labeling back to the base graph: first symbol of the block.
    pub labeling: Vec<usize>,
    pub block_len: usize,
}

impl HigherBlock {
    pub fn vertex_of(&self, block: &[usize]) -> Option<usize> {
        self.blocks.binary_search_by(|b| b.as_slice().cmp(block)).ok()
    }
}

pub fn higher_block(g: &FiniteGraph, block_len: usize) -> Result<HigherBlock> {
    if block_len == 0 {
        return Err(ShiftError::InvalidArgument("block length must be at least 1".into()));
    }
    let blocks = g.words(block_len);
    assert!(!blocks.is_empty(), "an irreducible graph has words of every length");
    let sep = if g.single_char_names() { "" } else { "." };
    let names: Vec<String> = blocks
        .iter()
        .map(|b| b.iter().map(|&s| g.name(s)).collect::<Vec<_>>().join(sep))
        .collect();
    let index: HashMap<&[usize], usize> = blocks.iter().enumerate().map(|(i, b)| (b.as_slice(), i)).collect();
    let mut edges = Vec::new();
    for (i, b) in blocks.iter().enumerate() {
        let last = b[block_len - 1];
        for &s in g.successors(last) {
            let mut next = b[1..].to_vec();
            next.push(s);
            edges.push((i, index[next.as_slice()]));
        }
    }
    let labeling = blocks.iter().map(|b| b[0]).collect();
    let graph = FiniteGraph::new(names, &edges)?;
    Ok(HigherBlock { graph, blocks, labeling, block_len })
}

/// A nested sequence of finite graphs. `witnesses[i]` maps the vertices of
/// level `i` injectively into level `i + 1`, carrying edges to edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Exhaustion {
    pub levels: Vec<FiniteGraph>,
    pub witnesses: Vec<Vec<usize>>,
}

impl Exhaustion {
    /// Checks nesting. Consecutive levels may coincide.
    pub fn new(levels: Vec<FiniteGraph>, witnesses: Vec<Vec<usize>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(ShiftError::InvalidArgument("exhaustion needs at least one level".into()));
        }
        if witnesses.len() + 1 != levels.len() {
            return Err(ShiftError::InvalidArgument("need one inclusion witness per consecutive pair".into()));
        }
        for (i, map) in witnesses.iter().enumerate() {
            let (small, big) = (&levels[i], &levels[i + 1]);
            let injective = map.iter().collect::<BTreeSet<_>>().len() == map.len();
            if map.len() != small.vertex_count() || !injective || map.iter().any(|&v| v >= big.vertex_count()) {
                return Err(ShiftError::NotNested(i));
            }
            if small.edges().into_iter().any(|(u, v)| !big.has_edge(map[u], map[v])) {
                return Err(ShiftError::NotNested(i));
            }
        }
        for (i, level) in levels.iter().enumerate() {
            if !level.irreducible_and_period().0 {
                return Err(ShiftError::NotIrreducible { components: levels[i].components() });
            }
        }
        Ok(Exhaustion { levels, witnesses })
    }

    /// Builds witnesses by matching vertex names.
    pub fn by_names(levels: Vec<FiniteGraph>) -> Result<Self> {
        let mut witnesses = Vec::new();
        for (i, pair) in levels.windows(2).enumerate() {
            let map: Option<Vec<usize>> = pair[0].names().iter().map(|n| pair[1].index_of(n)).collect();
            witnesses.push(map.ok_or(ShiftError::NotNested(i))?);
        }
        Self::new(levels, witnesses)
    }

    pub fn top(&self) -> &FiniteGraph {
        self.levels.last().expect("nonempty")
    }

    /// Vertex map from `level` into the top level.
    pub fn map_to_top(&self, level: usize) -> Vec<usize> {
        let mut map: Vec<usize> = (0..self.levels[level].vertex_count()).collect();
        for w in &self.witnesses[level..] {
            map = map.into_iter().map(|v| w[v]).collect();
        }
        map
    }
}

/// The ways a shift can be handed to the library.
#[derive(Debug, Clone, PartialEq)]
pub enum ShiftPresentation {
    Finite(FiniteGraph),
    Loops(LoopSystem),
    Exhaustion(Exhaustion),
}

impl ShiftPresentation {
    /// gcd of cycle lengths (for exhaustions, of the top level).
    pub fn period(&self) -> usize {
        match self {
            ShiftPresentation::Finite(g) => g.irreducible_and_period().1.unwrap_or(0),
            ShiftPresentation::Exhaustion(e) => e.top().irreducible_and_period().1.unwrap_or(0),
            ShiftPresentation::Loops(l) => l.period(),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    fn trace_power(a: &[Vec<u64>], n: usize) -> u64 {
        let k = a.len();
        let mut p: Vec<Vec<u64>> = (0..k).map(|i| (0..k).map(|j| u64::from(i == j)).collect()).collect();
        for _ in 0..n {
            p = (0..k)
                .map(|i| (0..k).map(|j| (0..k).map(|l| p[i][l] * a[l][j]).sum()).collect())
                .collect();
        }
        (0..k).map(|i| p[i][i]).sum()
    }

    #[test]
    fn build_full2_and_golden_mean() {
        let b = build_graph(names(2), &[(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        assert_eq!(b.period, 1);
        assert!(b.removed.is_empty());
        let b = build_graph(names(2), &[(0, 0), (0, 1), (1, 0)]).unwrap();
        assert_eq!(b.period, 1);
    }

    #[test]
    fn duplicate_edge_rejected() {
        let err = build_graph(names(1), &[(0, 0), (0, 0)]).unwrap_err();
        assert_eq!(err, ShiftError::DuplicateEdge(0, 0));
    }

    #[test]
    fn prunes_transient_vertices() {
        // 2 -> 0 has no incoming edge; 1 -> 3 is a dead end.
        let b = build_graph(names(4), &[(0, 1), (1, 0), (2, 0), (1, 3)]).unwrap();
        assert_eq!(b.removed, vec!["2".to_string(), "3".to_string()]);
        assert_eq!(b.period, 2);
        assert_eq!(b.graph.vertex_count(), 2);
    }

    #[test]
    fn reducible_graph_reports_components() {
        let err = build_graph(names(2), &[(0, 0), (1, 1)]).unwrap_err();
        assert_eq!(err, ShiftError::NotIrreducible { components: vec![vec![0], vec![1]] });
        let err = build_graph(names(1), &[(0, 0)]).map(|_| ());
        assert!(err.is_ok());
    }

    #[test]
    fn empty_after_pruning() {
        assert_eq!(build_graph(names(2), &[(0, 1)]).unwrap_err(), ShiftError::EmptyGraph);
    }

    #[test]
    fn irreducibility_and_period() {
        assert_eq!(full2().irreducible_and_period(), (true, Some(1)));
        let cycle = FiniteGraph::from_edges(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(cycle.irreducible_and_period(), (true, Some(2)));
        let loops = FiniteGraph::from_edges(2, &[(0, 0), (1, 1)]).unwrap();
        assert_eq!(loops.irreducible_and_period(), (false, None));
        let three = FiniteGraph::from_edges(3, &[(0, 1), (1, 2), (2, 0), (1, 0)]).unwrap();
        assert_eq!(three.irreducible_and_period(), (true, Some(1)));
        let six = FiniteGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (1, 0)]).unwrap();
        assert_eq!(six.irreducible_and_period(), (true, Some(2)));
    }

    #[test]
    fn periodic_points_full2() {
        let e = enumerate_periodic(&full2(), 3, &[0]).unwrap();
        // brute force over 2^3 candidates
        let brute: Vec<Word> = (0..8u32)
            .map(|m| (0..3).map(|i| ((m >> (2 - i)) & 1) as usize).collect::<Word>())
            .filter(|w| w[0] == 0)
            .collect();
        let got: Vec<Word> = e.points.into_iter().map(|p| p.word).collect();
        assert_eq!(got, brute);
        assert_eq!(got.len(), 4);
    }

    #[test]
    fn periodic_points_golden_mean() {
        let gm = golden_mean();
        let e = enumerate_periodic(&gm, 4, &[1]).unwrap();
        let got: Vec<Word> = e.points.into_iter().map(|p| p.word).collect();
        assert_eq!(got, vec![vec![1, 0, 0, 0], vec![1, 0, 1, 0]]);
        assert!(enumerate_periodic(&gm, 1, &[1]).unwrap().points.is_empty());
        let bad = enumerate_periodic(&gm, 4, &[1, 1]).unwrap();
        assert!(!bad.prefix_admissible && bad.points.is_empty());
    }

    #[test]
    fn long_prefix_uses_periodic_extension() {
        let e = enumerate_periodic(&full2(), 1, &[0, 0, 0]).unwrap();
        assert_eq!(e.points.len(), 1);
        assert!(enumerate_periodic(&full2(), 2, &[0, 1, 1]).unwrap().points.is_empty());
        assert_eq!(enumerate_periodic(&full2(), 2, &[0, 1, 0]).unwrap().points.len(), 1);
    }

    #[test]
    fn periodic_counts_match_traces() {
        for g in [full2(), golden_mean()] {
            let a = g.adjacency();
            for n in 1..=12 {
                let count = enumerate_periodic(&g, n, &[]).unwrap().points.len() as u64;
                assert_eq!(count, trace_power(&a, n), "n = {n}");
            }
        }
    }

    #[test]
    fn higher_block_shapes() {
        let hb = higher_block(&golden_mean(), 2).unwrap();
        assert_eq!(hb.graph.vertex_count(), 3);
        assert_eq!(hb.graph.edge_count(), 5);
        assert_eq!(hb.graph.names(), &["00", "01", "10"]);
        let hb = higher_block(&full2(), 2).unwrap();
        assert_eq!((hb.graph.vertex_count(), hb.graph.edge_count()), (4, 8));
        let hb = higher_block(&golden_mean(), 1).unwrap();
        assert_eq!(hb.graph, golden_mean());
        assert_eq!(hb.labeling, vec![0, 1]);
    }

    #[test]
    fn higher_block_preserves_periodic_counts_and_period() {
        let cycle = FiniteGraph::from_edges(3, &[(0, 1), (1, 2), (2, 0), (2, 1)]).unwrap();
        for g in [full2(), golden_mean(), cycle] {
            for block in 1..=3 {
                let hb = higher_block(&g, block).unwrap();
                assert_eq!(hb.graph.irreducible_and_period(), g.irreducible_and_period());
                for n in 1..=10 {
                    let base = enumerate_periodic(&g, n, &[]).unwrap().points.len();
                    let lifted = enumerate_periodic(&hb.graph, n, &[]).unwrap();
                    assert_eq!(lifted.points.len(), base);
                    // the labeling is a bijection on periodic points
                    let images: BTreeSet<Word> = lifted
                        .points
                        .iter()
                        .map(|p| p.word.iter().map(|&v| hb.labeling[v]).collect())
                        .collect();
                    assert_eq!(images.len(), base);
                }
            }
        }
    }

    #[test]
    fn pruning_is_idempotent() {
        let b = build_graph(names(5), &[(0, 1), (1, 0), (1, 2), (2, 2), (2, 0), (3, 0), (2, 4)]).unwrap();
        let again = build_graph(b.graph.names().to_vec(), &b.graph.edges()).unwrap();
        assert_eq!(again.graph, b.graph);
        assert!(again.removed.is_empty());
    }

    #[test]
    fn word_parsing_round_trip() {
        let g = FiniteGraph::new(vec!["a".into(), "bb".into()], &[(0, 1), (1, 0), (0, 0)]).unwrap();
        let w = g.parse_word("a bb a").unwrap();
        assert_eq!(w, vec![0, 1, 0]);
        assert_eq!(g.parse_word(&g.format_word(&w)).unwrap(), w);
        let gm = golden_mean();
        assert_eq!(gm.parse_word("0010").unwrap(), vec![0, 0, 1, 0]);
        assert!(gm.parse_word("2").is_err());
    }

    #[test]
    fn exhaustion_nesting() {
        let small = FiniteGraph::from_edges(1, &[(0, 0)]).unwrap();
        let e = Exhaustion::by_names(vec![small.clone(), golden_mean()]).unwrap();
        assert_eq!(e.map_to_top(0), vec![0]);
        let not_nested = Exhaustion::new(vec![golden_mean(), small], vec![vec![0, 0]]);
        assert_eq!(not_nested.unwrap_err(), ShiftError::NotNested(0));
    }
}
