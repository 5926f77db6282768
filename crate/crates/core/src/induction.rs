//! Induced presentations on distinguished words.
//!
//! For words `W1, W2` of common length `N`, the ambient shift is recoded by
//! its `N`-block graph and the first-return paths between the vertices
//! `W1`, `W2` are collected into a loop system. Returns longer than the
//! enumeration horizon are described exactly by a transfer tail through
//! the graph with the distinguished vertices removed.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShiftError};
use crate::potential::{rational_to_f64, FiniteRangePotential, Rational};
use crate::shift::{higher_block, FiniteGraph, HigherBlock, Word};
use crate::thermo::expsum::ExpSum;
use crate::thermo::partition::{partition_function, PartitionFunctionTable};
use crate::variation::{lift_variation, VariationCertificate, WordFamily};

/// Above this many first-return paths, loops are stored aggregated by
/// length instead of one per label.
pub const LABEL_BUDGET: u128 = 20_000;

/// First-return paths of one length and weight between two distinguished
/// vertices. `count * exp(weight)` is the contribution to `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct Loop {
    pub from: usize,
    pub to: usize,
    pub len: usize,
    /// Ambient word read along the path, when loops are stored one by one.
    pub label: Option<Word>,
    pub count: u128,
    /// Birkhoff sum of the potential along the loop.
    pub weight: f64,
    pub exact_weight: Option<Rational>,
}

impl Loop {
    pub fn unlabeled(from: usize, to: usize, len: usize, count: u128, weight: f64) -> Self {
        Loop { from, to, len, label: None, count, weight, exact_weight: None }
    }

    pub fn total(&self) -> f64 {
        self.count as f64 * self.weight.exp()
    }
}

/// `w_n = entry · Q^(n - L - 1) · exit` for `n > L`, `L` the explicit length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferTail {
    pub entry: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
    pub exit: Vec<f64>,
}

impl TransferTail {
    fn apply_left(&self, v: &[f64]) -> Vec<f64> {
        let d = v.len();
        (0..d).map(|j| (0..d).map(|i| v[i] * self.matrix[i][j]).sum()).collect()
    }

    /// `w_{L + k}` for `k ≥ 1`.
    pub fn term(&self, k: usize) -> f64 {
        let mut v = self.entry.clone();
        for _ in 1..k {
            v = self.apply_left(&v);
        }
        v.iter().zip(&self.exit).map(|(a, b)| a * b).sum()
    }
}

/// Total weight of the returns longer than the explicit length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoopTail {
    Zero,
    /// `w_n = coef * ratio^n`
    Geometric { coef: f64, ratio: f64 },
    /// `w_n = coef * n^(-exponent)`
    Polynomial { coef: f64, exponent: f64 },
    Transfer(TransferTail),
    /// Unknown beyond the explicit length.
    Truncated,
}

static ZERO_TAIL: LoopTail = LoopTail::Zero;

impl LoopTail {
    /// `w_n` for `n > explicit_len`; `None` when truncated.
    pub fn weight(&self, explicit_len: usize, n: usize) -> Option<f64> {
        debug_assert!(n > explicit_len);
        match self {
            LoopTail::Zero => Some(0.0),
            LoopTail::Geometric { coef, ratio } => Some(coef * ratio.powi(n as i32)),
            LoopTail::Polynomial { coef, exponent } => Some(coef * (n as f64).powf(-exponent)),
            LoopTail::Transfer(t) => Some(t.term(n - explicit_len)),
            LoopTail::Truncated => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ShiftError::InvalidArgument(m));
        match self {
            LoopTail::Zero | LoopTail::Truncated => Ok(()),
            LoopTail::Geometric { coef, ratio } if !(*coef >= 0.0 && *ratio >= 0.0 && coef.is_finite() && ratio.is_finite()) => {
                bad(format!("geometric tail needs finite coef, ratio ≥ 0 (got {coef}, {ratio})"))
            }
            LoopTail::Polynomial { coef, exponent } if !(*coef >= 0.0 && coef.is_finite() && *exponent > 0.0) => {
                bad(format!("polynomial tail needs coef ≥ 0 and exponent > 0 (got {coef}, {exponent})"))
            }
            LoopTail::Transfer(t) => {
                let d = t.entry.len();
                if t.exit.len() != d || t.matrix.len() != d || t.matrix.iter().any(|r| r.len() != d) {
                    return bad("transfer tail dimensions disagree".into());
                }
                if t.entry.iter().chain(&t.exit).chain(t.matrix.iter().flatten()).any(|&x| !(x >= 0.0 && x.is_finite())) {
                    return bad("transfer tail entries must be finite and nonnegative".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// First-return loops at one or two distinguished vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopSystem {
    /// Names of the distinguished vertices.
    pub names: Vec<String>,
    /// Ambient alphabet the loop labels are written in (may be empty).
    pub alphabet: Vec<String>,
    pub loops: Vec<Loop>,
    /// Loops up to this length are listed; tails describe the rest.
    pub explicit_len: usize,
    pub tails: BTreeMap<(usize, usize), LoopTail>,
}

impl LoopSystem {
    pub fn new(
        names: Vec<String>,
        alphabet: Vec<String>,
        loops: Vec<Loop>,
        explicit_len: usize,
        tails: BTreeMap<(usize, usize), LoopTail>,
    ) -> Result<Self> {
        let k = names.len();
        if k == 0 {
            return Err(ShiftError::InvalidArgument("loop system needs a distinguished vertex".into()));
        }
        let mut labels = HashSet::new();
        for l in &loops {
            if l.from >= k || l.to >= k {
                return Err(ShiftError::VertexOutOfRange { index: l.from.max(l.to), size: k });
            }
            if l.len == 0 || l.len > explicit_len {
                return Err(ShiftError::InvalidArgument(format!("loop length {} outside 1..={explicit_len}", l.len)));
            }
            if l.count == 0 || !l.weight.is_finite() {
                return Err(ShiftError::InvalidArgument("loops need a positive count and a finite weight".into()));
            }
            if let Some(label) = &l.label {
                if label.len() != l.len {
                    return Err(ShiftError::InvalidArgument(format!("label {label:?} does not have length {}", l.len)));
                }
                if !labels.insert((l.from, l.to, label.clone())) {
                    return Err(ShiftError::InvalidArgument(format!("label {label:?} appears twice")));
                }
            }
        }
        for (&(i, j), t) in &tails {
            if i >= k || j >= k {
                return Err(ShiftError::VertexOutOfRange { index: i.max(j), size: k });
            }
            t.validate()?;
        }
        Ok(LoopSystem { names, alphabet, loops, explicit_len, tails })
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn tail(&self, i: usize, j: usize) -> &LoopTail {
        self.tails.get(&(i, j)).unwrap_or(&ZERO_TAIL)
    }

    pub fn all_tails_zero(&self) -> bool {
        self.tails.values().all(|t| matches!(t, LoopTail::Zero))
    }

    /// Explicit `(len, w_len)` pairs from `i` to `j`, by increasing length.
    pub fn explicit_weights(&self, i: usize, j: usize) -> Vec<(usize, f64)> {
        let mut by_len: BTreeMap<usize, f64> = BTreeMap::new();
        for l in self.loops.iter().filter(|l| l.from == i && l.to == j) {
            *by_len.entry(l.len).or_insert(0.0) += l.total();
        }
        by_len.into_iter().collect()
    }

    /// Total weight `w_n` of returns of length `n` from `i` to `j`;
    /// `None` beyond a truncated tail.
    pub fn weight_at(&self, i: usize, j: usize, n: usize) -> Option<f64> {
        if n <= self.explicit_len {
            Some(self.loops.iter().filter(|l| l.from == i && l.to == j && l.len == n).map(Loop::total).sum())
        } else {
            self.tail(i, j).weight(self.explicit_len, n)
        }
    }

    /// Exact `w_n` as a formal sum when every loop of that length carries
    /// an exact weight and `n` is within the explicit range.
    pub fn exact_weight_at(&self, i: usize, j: usize, n: usize) -> Option<ExpSum> {
        if n > self.explicit_len {
            return match self.tail(i, j) {
                LoopTail::Zero => Some(ExpSum::zero()),
                _ => None,
            };
        }
        let mut s = ExpSum::zero();
        for l in self.loops.iter().filter(|l| l.from == i && l.to == j && l.len == n) {
            s.add_term(l.exact_weight?, l.count);
        }
        Some(s)
    }

    /// Lengths `n ≤ horizon` with `w_n > 0` from `i` to `j`.
    fn lengths(&self, i: usize, j: usize, horizon: usize) -> Vec<usize> {
        (1..=horizon).filter(|&n| self.weight_at(i, j, n).is_some_and(|w| w > 0.0)).collect()
    }

    /// gcd of closed-walk lengths through the distinguished vertices.
    pub fn period(&self) -> usize {
        let extra = self
            .tails
            .values()
            .map(|t| match t {
                LoopTail::Transfer(t) => 2 * t.entry.len() + 2,
                _ => 2,
            })
            .max()
            .unwrap_or(0);
        let horizon = self.explicit_len + extra;
        let k = self.vertex_count();
        let mut g = 0usize;
        for i in 0..k {
            for n in self.lengths(i, i, horizon) {
                g = g.gcd(&n);
            }
            for j in i + 1..k {
                for a in self.lengths(i, j, horizon) {
                    for b in self.lengths(j, i, horizon) {
                        g = g.gcd(&(a + b));
                    }
                }
            }
        }
        g
    }
}

/// An induced presentation together with the one-block labeling back to
/// the ambient shift.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedPresentation {
    pub base: FiniteGraph,
    pub higher: HigherBlock,
    /// Short words `w_i` the presentation was built from.
    pub base_words: Vec<Word>,
    /// Distinguished words `W_i` of common length `N`.
    pub words: Vec<Word>,
    /// Vertices of the block graph carrying the `W_i`.
    pub distinguished: Vec<usize>,
    /// Unweighted loops (weights 0, counts of paths).
    pub loops: LoopSystem,
    pub offset_l: usize,
    pub offset_m: usize,
    pub maxlen: usize,
}

impl InducedPresentation {
    pub fn block_len(&self) -> usize {
        self.higher.block_len
    }

    /// Whether the loops were stored one per label.
    pub fn is_labeled(&self) -> bool {
        self.loops.loops.iter().all(|l| l.label.is_some())
    }
}

/// Per-vertex path weights with optional exact exponents.
struct VertexWeights {
    float: Vec<f64>,
    exact: Option<Vec<Rational>>,
}

/// Aggregated first returns of each length `≤ maxlen` and transfer tails.
fn first_returns(h: &FiniteGraph, dist: &[usize], maxlen: usize, c: &VertexWeights) -> (Vec<Loop>, BTreeMap<(usize, usize), LoopTail>) {
    let nv = h.vertex_count();
    let is_dist: Vec<bool> = (0..nv).map(|v| dist.contains(&v)).collect();
    let mut loops = Vec::new();
    for (i, &src) in dist.iter().enumerate() {
        let mut float = vec![0.0; nv];
        float[src] = 1.0;
        let mut exact: Option<Vec<ExpSum>> = c.exact.as_ref().map(|_| {
            let mut v = vec![ExpSum::zero(); nv];
            v[src] = ExpSum::one();
            v
        });
        for len in 1..=maxlen {
            let mut nf = vec![0.0; nv];
            let mut ne = exact.as_ref().map(|_| vec![ExpSum::zero(); nv]);
            for u in 0..nv {
                if float[u] == 0.0 && exact.as_ref().is_none_or(|e| e[u].is_zero()) {
                    continue;
                }
                let fu = float[u] * c.float[u].exp();
                let eu = match (&exact, &c.exact) {
                    (Some(e), Some(q)) => Some(e[u].shifted(q[u])),
                    _ => None,
                };
                for &v in h.successors(u) {
                    nf[v] += fu;
                    if let (Some(ne), Some(eu)) = (ne.as_mut(), eu.as_ref()) {
                        ne[v].add_assign(eu);
                    }
                }
            }
            for (j, &dst) in dist.iter().enumerate() {
                match &ne {
                    Some(ne) => {
                        for (q, count) in ne[dst].terms() {
                            loops.push(Loop {
                                from: i,
                                to: j,
                                len,
                                label: None,
                                count,
                                weight: rational_to_f64(&q),
                                exact_weight: Some(q),
                            });
                        }
                    }
                    None if nf[dst] > 0.0 => loops.push(Loop::unlabeled(i, j, len, 1, nf[dst].ln())),
                    None => {}
                }
            }
            for v in 0..nv {
                if is_dist[v] {
                    nf[v] = 0.0;
                    if let Some(ne) = ne.as_mut() {
                        ne[v] = ExpSum::zero();
                    }
                }
            }
            float = nf;
            exact = ne;
        }
    }
    let mut tails = BTreeMap::new();
    let rest: Vec<usize> = (0..nv).filter(|&v| !is_dist[v]).collect();
    let d = rest.len();
    let w = |u: usize| c.float[u].exp();
    let matrix: Vec<Vec<f64>> =
        rest.iter().map(|&u| rest.iter().map(|&v| if h.has_edge(u, v) { w(u) } else { 0.0 }).collect()).collect();
    for (i, &src) in dist.iter().enumerate() {
        for (j, &dst) in dist.iter().enumerate() {
            let exit: Vec<f64> = rest.iter().map(|&v| if h.has_edge(v, dst) { w(v) } else { 0.0 }).collect();
            let mut tail = TransferTail {
                entry: rest.iter().map(|&u| if h.has_edge(src, u) { w(src) } else { 0.0 }).collect(),
                matrix: matrix.clone(),
                exit,
            };
            // advance the entry vector so the tail starts after maxlen
            for _ in 1..maxlen {
                tail.entry = tail.apply_left(&tail.entry);
            }
            let vanishes = {
                let mut v = tail.entry.clone();
                let mut zero = false;
                for _ in 0..=d {
                    if v.iter().all(|&x| x == 0.0) {
                        zero = true;
                        break;
                    }
                    v = tail.apply_left(&v);
                }
                zero
            };
            if !vanishes && d > 0 && maxlen >= 1 {
                tails.insert((i, j), LoopTail::Transfer(tail));
            }
        }
    }
    (loops, tails)
}

fn enumerate_labels(hb: &HigherBlock, dist: &[usize], maxlen: usize) -> Vec<Loop> {
    let h = &hb.graph;
    let mut out = Vec::new();
    let mut path = Vec::new();
    fn dfs(h: &FiniteGraph, hb: &HigherBlock, dist: &[usize], maxlen: usize, from: usize, path: &mut Vec<usize>, out: &mut Vec<Loop>) {
        let u = *path.last().expect("nonempty");
        for &v in h.successors(u) {
            if let Some(j) = dist.iter().position(|&d| d == v) {
                out.push(Loop {
                    from,
                    to: j,
                    len: path.len(),
                    label: Some(path.iter().map(|&b| hb.labeling[b]).collect()),
                    count: 1,
                    weight: 0.0,
                    exact_weight: Some(Rational::from_integer(0)),
                });
            } else if path.len() < maxlen {
                path.push(v);
                dfs(h, hb, dist, maxlen, from, path, out);
                path.pop();
            }
        }
    }
    for (i, &src) in dist.iter().enumerate() {
        path.push(src);
        dfs(h, hb, dist, maxlen, i, &mut path, &mut out);
        path.pop();
    }
    out.sort_by(|a, b| (a.from, a.to, a.len, &a.label).cmp(&(b.from, b.to, b.len, &b.label)));
    out
}

fn induce_with_offsets(
    g: &FiniteGraph,
    base_words: Vec<Word>,
    words: Vec<Word>,
    offset_l: usize,
    offset_m: usize,
    maxlen: usize,
) -> Result<InducedPresentation> {
    let n = words[0].len();
    for w in &words {
        if !g.is_word(w) || w.is_empty() {
            return Err(ShiftError::NotAWord(w.clone()));
        }
        if w.len() != n {
            return Err(ShiftError::InvalidArgument("distinguished words must have a common length".into()));
        }
    }
    if maxlen == 0 {
        return Err(ShiftError::InvalidArgument("maxlen must be at least 1".into()));
    }
    let mut words = words;
    words.dedup();
    let hb = higher_block(g, n)?;
    let dist: Vec<usize> = words.iter().map(|w| hb.vertex_of(w).expect("words are blocks")).collect();
    let ones = VertexWeights { float: vec![0.0; hb.graph.vertex_count()], exact: Some(vec![Rational::from_integer(0); hb.graph.vertex_count()]) };
    let (counted, tails) = first_returns(&hb.graph, &dist, maxlen, &ones);
    if counted.is_empty() && tails.is_empty() {
        return Err(ShiftError::InvalidArgument(format!("no first return within length {maxlen}")));
    }
    let total: u128 = counted.iter().map(|l| l.count).sum();
    let loops = if total <= LABEL_BUDGET { enumerate_labels(&hb, &dist, maxlen) } else { counted };
    let names = words.iter().map(|w| g.format_word(w)).collect();
    let loops = LoopSystem::new(names, g.names().to_vec(), loops, maxlen, tails)?;
    Ok(InducedPresentation { base: g.clone(), higher: hb, base_words, words, distinguished: dist, loops, offset_l, offset_m, maxlen })
}

/// Induces on the words `w1`, `w2` (equal for the single-word form),
/// enumerating first returns up to length `maxlen`. Offsets are `L = 0`
/// and `M = N - 1`.
pub fn induce(g: &FiniteGraph, w1: &[usize], w2: &[usize], maxlen: usize) -> Result<InducedPresentation> {
    let n = w1.len();
    let words = vec![w1.to_vec(), w2.to_vec()];
    induce_with_offsets(g, words.clone(), words, 0, n.saturating_sub(1), maxlen)
}

/// Pads `w_i` to `W_i = w_i a_i w_i b_i` of a common length with the
/// shortest nonempty `a_i, b_i` (then lexicographically first), and
/// induces on the `W_i`. `L = |w_1|`; `M` is the largest
/// `N - |b_j| - L - 1`.
pub fn induce_from_base(g: &FiniteGraph, w1: &[usize], w2: &[usize], maxlen: usize) -> Result<InducedPresentation> {
    for w in [w1, w2] {
        if w.is_empty() || !g.is_word(w) {
            return Err(ShiftError::NotAWord(w.to_vec()));
        }
    }
    // candidates (a, b) with |a| + |b| = t, sorted by (a, b)
    let pads = |w: &[usize], t: usize| -> Vec<(Word, Word)> {
        let n = 2 * w.len() + t;
        let mut out = Vec::new();
        for word in g.words(n) {
            if !word.starts_with(w) {
                continue;
            }
            for la in 1..t {
                let start = w.len() + la;
                if word[start..start + w.len()] == *w {
                    out.push((word[w.len()..start].to_vec(), word[start + w.len()..].to_vec()));
                }
            }
        }
        out.sort();
        out
    };
    let diff = 2 * (w1.len() as i64 - w2.len() as i64);
    for t1 in 2usize..=24 {
        let t2 = t1 as i64 + diff;
        if t2 < 2 {
            continue;
        }
        let (c1, c2) = (pads(w1, t1), pads(w2, t2 as usize));
        if let (Some((a1, b1)), Some((a2, b2))) = (c1.first(), c2.first()) {
            let big1: Word = [w1, a1, w1, b1].concat();
            let big2: Word = [w2, a2, w2, b2].concat();
            let n = big1.len();
            let l = w1.len();
            let m = [b1.len(), b2.len()].iter().map(|&b| (n - b).saturating_sub(l + 1)).max().expect("two words");
            return induce_with_offsets(g, vec![w1.to_vec(), w2.to_vec()], vec![big1, big2], l, m, maxlen.max(n));
        }
    }
    Err(ShiftError::InvalidArgument("no padding words found up to length 24".into()))
}

/// Loop weights of the lifted potential `f ∘ S^L ∘ φ`.
pub fn lift_loops(ind: &InducedPresentation, f: &FiniteRangePotential) -> Result<LoopSystem> {
    if f.graph() != &ind.base {
        return Err(ShiftError::Potential("potential is defined over a different graph".into()));
    }
    let (l, n) = (ind.offset_l, ind.block_len());
    if f.left() > l || l + f.right() > n {
        return Err(ShiftError::Potential(format!(
            "potential window [-{}, {}] does not fit in the distinguished words of length {n} at offset {l}",
            f.left(),
            f.right() - 1
        )));
    }
    let h = &ind.higher;
    let float: Vec<f64> = h.blocks.iter().map(|b| f.eval_in(b, l)).collect::<Result<_>>()?;
    let exact: Option<Vec<Rational>> = if f.is_exact() {
        Some(h.blocks.iter().map(|b| f.eval_exact_in(b, l).map(|q| q.expect("exact table"))).collect::<Result<_>>()?)
    } else {
        None
    };
    let c = VertexWeights { float, exact };
    let (aggregated, tails) = first_returns(&h.graph, &ind.distinguished, ind.maxlen, &c);
    let loops = if ind.is_labeled() {
        ind.loops
            .loops
            .iter()
            .map(|lp| {
                let label = lp.label.as_ref().expect("labeled");
                let ext: Word = [label.as_slice(), &ind.words[lp.to]].concat();
                let weight = (0..lp.len).map(|i| f.eval_in(&ext, l + i)).sum::<Result<f64>>()?;
                let exact_weight = match f.is_exact() {
                    true => Some((0..lp.len).map(|i| f.eval_exact_in(&ext, l + i).map(|q| q.expect("exact"))).sum::<Result<Rational>>()?),
                    false => None,
                };
                Ok(Loop { weight, exact_weight, ..lp.clone() })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        aggregated
    };
    LoopSystem::new(ind.loops.names.clone(), ind.loops.alphabet.clone(), loops, ind.maxlen, tails)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPotential {
    pub loops: LoopSystem,
    pub certificate: VariationCertificate,
}

/// Lifts `f` with its certificate: loop weights from [`lift_loops`] and
/// `ω̄_n = max(ω_{n+L}, ω_{n+M})`, relative to the induced alphabet.
pub fn lift_potential(ind: &InducedPresentation, f: &FiniteRangePotential, cert: &VariationCertificate) -> Result<LiftedPotential> {
    if let WordFamily::Words(ws) = &cert.family {
        if let Some(w) = ind.base_words.iter().find(|w| !ws.contains(w)) {
            return Err(ShiftError::CertificateRejected(format!("certificate family does not contain the base word {w:?}")));
        }
    }
    let loops = lift_loops(ind, f)?;
    let mut certificate = lift_variation(cert, ind.offset_l, ind.offset_m)?;
    certificate.family = WordFamily::Alphabet;
    Ok(LiftedPotential { loops, certificate })
}

/// `Z_n` of a single-vertex loop system by composing loops.
pub fn loop_partition(ls: &LoopSystem, n_max: usize) -> Vec<(f64, Option<ExpSum>, bool)> {
    let mut float = vec![1.0];
    let mut exact: Vec<Option<ExpSum>> = vec![Some(ExpSum::one())];
    let mut bounded = vec![false];
    for n in 1..=n_max {
        let mut f = 0.0;
        let mut e = Some(ExpSum::zero());
        let mut lower = false;
        for k in 1..=n {
            match ls.weight_at(0, 0, k) {
                Some(w) => f += w * float[n - k],
                None => lower = true,
            }
            e = match (e, ls.exact_weight_at(0, 0, k), &exact[n - k]) {
                (Some(mut acc), Some(wk), Some(rest)) => {
                    acc.add_assign(&wk.mul(rest));
                    Some(acc)
                }
                _ => None,
            };
            lower |= bounded[n - k];
        }
        float.push(f);
        exact.push(e);
        bounded.push(lower);
    }
    (1..=n_max).map(|n| (float[n], exact[n].clone(), bounded[n])).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZnRow {
    pub n: usize,
    pub ambient: f64,
    pub induced: f64,
    /// Both sides were compared as exact formal sums.
    pub exact: bool,
    /// The induced side is only a lower bound (truncated tail).
    pub lower_bound: bool,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZnCoincidence {
    pub rows: Vec<ZnRow>,
    pub first_mismatch: Option<usize>,
}

impl ZnCoincidence {
    pub fn holds(&self) -> bool {
        self.first_mismatch.is_none()
    }
}

/// Compares an ambient table with the loop compositions of `ls`.
pub fn compare_zn(table: &PartitionFunctionTable, ls: &LoopSystem) -> ZnCoincidence {
    let right = loop_partition(ls, table.entries.len());
    let mut rows = Vec::new();
    for (e, (f, ex, lower)) in table.entries.iter().zip(right) {
        let (exact, equal) = match (&e.exact, &ex) {
            (Some(a), Some(b)) => (true, a == b),
            _ if lower => (false, f <= e.value * (1.0 + 1e-9) + 1e-300),
            _ => (false, (e.value - f).abs() <= 1e-9 * e.value.abs().max(f.abs()) + e.error),
        };
        rows.push(ZnRow { n: e.n, ambient: e.value, induced: f, exact, lower_bound: lower, equal });
    }
    let first_mismatch = rows.iter().find(|r| !r.equal).map(|r| r.n);
    ZnCoincidence { rows, first_mismatch }
}

/// `Z_n(S, f, W) = Z_n(R, f̄, W)` for `n ≤ n_max`.
pub fn verify_zn_coincidence(
    g: &FiniteGraph,
    f: &FiniteRangePotential,
    w: &[usize],
    ind: &InducedPresentation,
    n_max: usize,
) -> Result<ZnCoincidence> {
    if ind.words.len() != 1 || ind.words[0] != w {
        return Err(ShiftError::InvalidArgument("presentation must be induced on the single word W".into()));
    }
    let table = partition_function(g, f, w, n_max)?;
    let ls = lift_loops(ind, f)?;
    Ok(compare_zn(&table, &ls))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InjectivityReport {
    /// Loop compositions examined.
    pub checked: usize,
    /// Two compositions with the same ambient word, as loop indices.
    pub collision: Option<(Vec<usize>, Vec<usize>)>,
}

/// Distinct closed loop compositions of total length `≤ period_cap` give
/// distinct ambient words.
pub fn check_injectivity(ind: &InducedPresentation, period_cap: usize) -> Result<InjectivityReport> {
    if !ind.is_labeled() {
        return Err(ShiftError::InvalidArgument("injectivity check needs labeled loops".into()));
    }
    let loops = &ind.loops.loops;
    let mut checked = 0;
    let mut seen: HashMap<Word, Vec<usize>> = HashMap::new();
    let mut stack: Vec<usize> = Vec::new();
    fn walk(
        loops: &[Loop],
        start: usize,
        at: usize,
        len: usize,
        cap: usize,
        stack: &mut Vec<usize>,
        seen: &mut HashMap<Word, Vec<usize>>,
        checked: &mut usize,
    ) -> Option<(Vec<usize>, Vec<usize>)> {
        for (idx, l) in loops.iter().enumerate() {
            if l.from != at || len + l.len > cap {
                continue;
            }
            stack.push(idx);
            if l.to == start {
                *checked += 1;
                let word: Word = stack.iter().flat_map(|&i| loops[i].label.clone().expect("labeled")).collect();
                if let Some(prev) = seen.insert(word, stack.clone()) {
                    return Some((prev, stack.clone()));
                }
            }
            if let Some(c) = walk(loops, start, l.to, len + l.len, cap, stack, seen, checked) {
                return Some(c);
            }
            stack.pop();
        }
        None
    }
    for start in 0..ind.loops.vertex_count() {
        if let Some(c) = walk(loops, start, start, 0, period_cap, &mut stack, &mut seen, &mut checked) {
            return Ok(InjectivityReport { checked, collision: Some(c) });
        }
        stack.clear();
    }
    Ok(InjectivityReport { checked, collision: None })
}
