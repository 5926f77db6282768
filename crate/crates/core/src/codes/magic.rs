//! Finite-depth certification of magic words for one-block codes.
//!
//! Condition (2): for every target word `C` with `|C| <= D` and `WCW`
//! admissible, all source paths whose image contains `WCW` at `[0, 2|W|+|C|)`
//! agree on `[I, I + |W| + |C|)`. Condition (1) is checked on target
//! periodic points seeing `W`, up to period `D + 2|W|`.

use std::collections::HashMap;
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::Serialize;

use super::OneBlockCode;
use crate::error::{Result, ShiftError};
use crate::shift::{for_each_periodic, Word};

/// Default cap on source path extensions explored.
pub const DEFAULT_MAGIC_BUDGET: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MagicWitness {
    /// Two source paths over the same `WCW` whose windows differ. Both
    /// words are laid out from `origin` (the coordinate of `x[0]` relative
    /// to the start of `WCW`).
    Ambiguous { c: Word, wcw: Word, x: Word, x_prime: Word, origin: i64, window_start: usize, window_len: usize },
    /// A target periodic point seeing `W` without any preimage.
    NoPreimage { point: Word },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MagicStatus {
    Certified,
    Refuted,
    /// Stopped by the budget; `reached_depth` is the last fully checked
    /// depth.
    BudgetExceeded { reached_depth: Option<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MagicWordCertificate {
    pub word: Word,
    pub offset: i64,
    pub depth: usize,
    #[serde(flatten)]
    pub status: MagicStatus,
    pub witness: Option<MagicWitness>,
    /// Number of words `C` checked for condition (2).
    pub words_checked: usize,
    /// Number of periodic points checked for condition (1).
    pub periodic_checked: usize,
}

impl MagicWordCertificate {
    pub fn is_certified(&self) -> bool {
        self.status == MagicStatus::Certified
    }
}

/// Layout of the source path searched for `WCW` with offset `i`.
#[derive(Debug, Clone, Copy)]
struct Layout {
    /// Path coordinate 0 sits at `lo` relative to the start of `WCW`.
    lo: i64,
    len: usize,
    window_start: usize,
    window_len: usize,
}

fn layout(w_len: usize, wcw_len: usize, offset: i64) -> Layout {
    let window_len = wcw_len - w_len;
    let lo = offset.min(0);
    let hi = (wcw_len as i64).max(offset + window_len as i64);
    Layout { lo, len: (hi - lo) as usize, window_start: (offset - lo) as usize, window_len }
}

/// Depth-first search over source paths with prescribed images, in
/// lexicographic order. `steps` counts extensions; the search stops when
/// it passes `cap`.
struct PreimageSearch<'a> {
    code: &'a OneBlockCode,
    pattern: Vec<Option<usize>>,
    steps: u64,
    cap: u64,
}

impl PreimageSearch<'_> {
    fn run<F: FnMut(&[usize]) -> ControlFlow<()>>(&mut self, visit: &mut F) -> Result<()> {
        let mut path = Vec::with_capacity(self.pattern.len());
        for s in 0..self.code.source().vertex_count() {
            if self.allowed(0, s) {
                path.push(s);
                let flow = self.dfs(&mut path, visit)?;
                path.pop();
                if flow.is_break() {
                    break;
                }
            }
        }
        Ok(())
    }

    fn allowed(&self, i: usize, s: usize) -> bool {
        self.pattern[i].is_none_or(|t| self.code.symbol(s) == t)
    }

    fn dfs<F: FnMut(&[usize]) -> ControlFlow<()>>(&mut self, path: &mut Word, visit: &mut F) -> Result<ControlFlow<()>> {
        self.steps += 1;
        if self.steps > self.cap {
            return Err(ShiftError::BudgetExceeded(self.cap));
        }
        if path.len() == self.pattern.len() {
            return Ok(visit(path));
        }
        let last = *path.last().expect("nonempty");
        let i = path.len();
        for &s in self.code.source().successors(last) {
            if self.allowed(i, s) {
                path.push(s);
                let flow = self.dfs(path, visit)?;
                path.pop();
                if flow.is_break() {
                    return Ok(flow);
                }
            }
        }
        Ok(ControlFlow::Continue(()))
    }
}

fn pattern_for(wcw: &[usize], l: &Layout) -> Vec<Option<usize>> {
    (0..l.len as i64)
        .map(|j| {
            let k = j + l.lo;
            (k >= 0 && (k as usize) < wcw.len()).then(|| wcw[k as usize])
        })
        .collect()
}

/// Outcome of the window search over one `WCW`.
enum WindowOutcome {
    NoPreimage,
    Unique(Word),
    Ambiguous(Word, Word),
}

fn resolve_window(code: &OneBlockCode, w_len: usize, wcw: &[usize], offset: i64, cap: u64) -> Result<(WindowOutcome, u64, Layout)> {
    let l = layout(w_len, wcw.len(), offset);
    let mut search = PreimageSearch { code, pattern: pattern_for(wcw, &l), steps: 0, cap };
    let mut first: Option<Word> = None;
    let mut clash: Option<Word> = None;
    let range = l.window_start..l.window_start + l.window_len;
    search.run(&mut |p: &[usize]| match &first {
        None => {
            first = Some(p.to_vec());
            ControlFlow::Continue(())
        }
        Some(f) if f[range.clone()] != p[range.clone()] => {
            clash = Some(p.to_vec());
            ControlFlow::Break(())
        }
        Some(_) => ControlFlow::Continue(()),
    })?;
    let outcome = match (first, clash) {
        (None, _) => WindowOutcome::NoPreimage,
        (Some(a), Some(b)) => WindowOutcome::Ambiguous(a, b),
        (Some(a), None) => WindowOutcome::Unique(a),
    };
    Ok((outcome, search.steps, l))
}

/// Whether the periodic point `y^∞` has a preimage: the product of the
/// source graph with the cycle `y` must contain a cycle.
fn periodic_has_preimage(code: &OneBlockCode, y: &[usize]) -> bool {
    let n = y.len();
    let src = code.source();
    let nodes: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..src.vertex_count()).filter(move |&s| code.symbol(s) == y[i]).map(move |s| (s, i))).collect();
    let index: HashMap<(usize, usize), usize> = nodes.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let succ: Vec<Vec<usize>> = nodes
        .iter()
        .map(|&(s, i)| src.successors(s).iter().filter_map(|&t| index.get(&(t, (i + 1) % n)).copied()).collect())
        .collect();
    let mut indeg = vec![0usize; nodes.len()];
    for list in &succ {
        for &t in list {
            indeg[t] += 1;
        }
    }
    // peel off nodes with no incoming edges; a cycle survives iff something
    // remains (every surviving node then has a predecessor among survivors)
    let mut alive = vec![true; nodes.len()];
    let mut stack: Vec<usize> = (0..nodes.len()).filter(|&k| indeg[k] == 0).collect();
    while let Some(k) = stack.pop() {
        alive[k] = false;
        for &t in &succ[k] {
            indeg[t] -= 1;
            if indeg[t] == 0 {
                stack.push(t);
            }
        }
    }
    alive.iter().any(|&a| a)
}

fn sees_cyclically(y: &[usize], w: &[usize]) -> bool {
    let reps = w.len() / y.len() + 2;
    let text: Word = y.iter().copied().cycle().take(reps * y.len()).collect();
    text.windows(w.len().max(1)).any(|s| w.is_empty() || s == w)
}

pub fn verify_magic(code: &OneBlockCode, word: &[usize], offset: i64, depth: usize) -> Result<MagicWordCertificate> {
    verify_magic_with_budget(code, word, offset, depth, DEFAULT_MAGIC_BUDGET)
}

pub fn verify_magic_with_budget(code: &OneBlockCode, word: &[usize], offset: i64, depth: usize, budget: u64) -> Result<MagicWordCertificate> {
    let target = code.target();
    if word.is_empty() || !target.is_word(word) {
        return Err(ShiftError::NotAWord(word.to_vec()));
    }
    if code.source().prune().0.vertex_count() != code.source().vertex_count() {
        return Err(ShiftError::Code("source graph has symbols on no bi-infinite path".into()));
    }
    let mut cert = MagicWordCertificate {
        word: word.to_vec(),
        offset,
        depth,
        status: MagicStatus::Certified,
        witness: None,
        words_checked: 0,
        periodic_checked: 0,
    };
    let mut used: u64 = 0;
    for d in 0..=depth {
        let cs: Vec<Word> = if d == 0 { vec![Vec::new()] } else { target.words(d) };
        let wcws: Vec<(Word, Word)> = cs
            .into_iter()
            .filter_map(|c| {
                let mut wcw = word.to_vec();
                wcw.extend_from_slice(&c);
                wcw.extend_from_slice(word);
                target.is_word(&wcw).then_some((c, wcw))
            })
            .collect();
        let cap = budget.saturating_sub(used).max(1);
        let results: Vec<Result<(WindowOutcome, u64, Layout)>> =
            wcws.par_iter().map(|(_, wcw)| resolve_window(code, word.len(), wcw, offset, cap)).collect();
        let mut depth_steps = 0u64;
        for ((c, wcw), r) in wcws.iter().zip(results) {
            let (outcome, steps, l) = match r {
                Ok(v) => v,
                Err(ShiftError::BudgetExceeded(_)) => {
                    cert.status = MagicStatus::BudgetExceeded { reached_depth: d.checked_sub(1) };
                    return Ok(cert);
                }
                Err(e) => return Err(e),
            };
            depth_steps += steps;
            cert.words_checked += 1;
            if let WindowOutcome::Ambiguous(x, x_prime) = outcome {
                cert.status = MagicStatus::Refuted;
                cert.witness = Some(MagicWitness::Ambiguous {
                    c: c.clone(),
                    wcw: wcw.clone(),
                    x,
                    x_prime,
                    origin: l.lo,
                    window_start: l.window_start,
                    window_len: l.window_len,
                });
                return Ok(cert);
            }
        }
        used += depth_steps;
        if used > budget {
            cert.status = MagicStatus::BudgetExceeded { reached_depth: Some(d) };
            return Ok(cert);
        }
    }
    let max_period = depth + 2 * word.len();
    for n in 1..=max_period {
        let mut failure: Option<Word> = None;
        let mut count = 0usize;
        for_each_periodic(target, n, &[], |y| {
            if !sees_cyclically(y, word) {
                return ControlFlow::Continue(());
            }
            count += 1;
            if periodic_has_preimage(code, y) {
                ControlFlow::Continue(())
            } else {
                failure = Some(y.to_vec());
                ControlFlow::Break(())
            }
        });
        cert.periodic_checked += count;
        used += count as u64 * (n as u64 + 1);
        if let Some(point) = failure {
            cert.status = MagicStatus::Refuted;
            cert.witness = Some(MagicWitness::NoPreimage { point });
            return Ok(cert);
        }
        if used > budget {
            cert.status = MagicStatus::BudgetExceeded { reached_depth: Some(depth) };
            return Ok(cert);
        }
    }
    Ok(cert)
}

/// Re-checks a refutation by applying the code: both paths must present
/// `WCW` and differ on the window; a missing preimage is re-searched.
pub fn check_witness(code: &OneBlockCode, witness: &MagicWitness) -> bool {
    match witness {
        MagicWitness::Ambiguous { wcw, x, x_prime, origin, window_start, window_len, .. } => {
            let presents = |p: &Word| {
                code.source().is_word(p)
                    && code.apply_unchecked(p).iter().enumerate().all(|(j, &t)| {
                        let k = j as i64 + origin;
                        k < 0 || k as usize >= wcw.len() || wcw[k as usize] == t
                    })
                    && (0..wcw.len()).all(|k| {
                        let j = k as i64 - origin;
                        j >= 0 && (j as usize) < p.len()
                    })
            };
            let r = *window_start..window_start + window_len;
            presents(x) && presents(x_prime) && x[r.clone()] != x_prime[r]
        }
        MagicWitness::NoPreimage { point } => code.target().is_cycle(point) && !periodic_has_preimage(code, point),
    }
}

/// The unique source window over each pair of consecutive, non-overlapping
/// occurrences of `word` in the target word `u`, glued together. Returns
/// the position in `u` of the first resolved symbol and the resolved
/// source path. `cache` memoizes windows by `WCW`.
pub(crate) fn resolve_preimage(
    code: &OneBlockCode,
    word: &[usize],
    offset: i64,
    u: &[usize],
    cache: &mut HashMap<Word, Word>,
) -> Result<(i64, Word)> {
    let m = word.len();
    let mut occ = Vec::new();
    let mut i = 0;
    while i + m <= u.len() {
        if &u[i..i + m] == word {
            occ.push(i);
            i += m;
        } else {
            i += 1;
        }
    }
    if occ.len() < 2 {
        return Err(ShiftError::OutsideDomain("fewer than two occurrences of the magic word".into()));
    }
    let mut out = Vec::new();
    for pair in occ.windows(2) {
        let wcw = &u[pair[0]..pair[1] + m];
        if let Some(w) = cache.get(wcw) {
            out.extend_from_slice(w);
            continue;
        }
        let (outcome, _, l) = resolve_window(code, m, wcw, offset, DEFAULT_MAGIC_BUDGET)?;
        let window = match outcome {
            WindowOutcome::Unique(p) => p[l.window_start..l.window_start + l.window_len].to_vec(),
            WindowOutcome::NoPreimage => {
                return Err(ShiftError::Code(format!("no source path presents the target word {wcw:?}")));
            }
            WindowOutcome::Ambiguous(..) => {
                return Err(ShiftError::Code(format!("magic window over {wcw:?} is not unique")));
            }
        };
        cache.insert(wcw.to_vec(), window.clone());
        out.extend_from_slice(&window);
    }
    Ok((occ[0] as i64 + offset, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::fixtures::{full2, golden_mean};

    #[test]
    fn identity_certified() {
        let g = golden_mean();
        let cert = verify_magic(&OneBlockCode::identity(&g), &[1], 0, 8).unwrap();
        assert!(cert.is_certified());
        assert!(cert.words_checked > 0 && cert.periodic_checked > 0);
    }

    #[test]
    fn two_block_labeling_certified() {
        let g = golden_mean();
        let code = OneBlockCode::block_labeling(&g, 2, 0).unwrap();
        assert!(verify_magic(&code, &[1, 0], 0, 8).unwrap().is_certified());
    }

    #[test]
    fn collapse_refuted_soundly() {
        let code = OneBlockCode::collapse(&full2());
        let cert = verify_magic(&code, &[0], 0, 2).unwrap();
        assert_eq!(cert.status, MagicStatus::Refuted);
        let w = cert.witness.unwrap();
        assert!(check_witness(&code, &w));
        match w {
            MagicWitness::Ambiguous { x, x_prime, .. } => {
                assert_eq!(code.apply(&x).unwrap(), code.apply(&x_prime).unwrap());
                assert_ne!(x[0], x_prime[0]);
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn missing_preimage_refuted() {
        // GM into FULL2 by inclusion: (1)^∞ has no preimage
        let code = OneBlockCode::new(&golden_mean(), &full2(), vec![0, 1]).unwrap();
        let cert = verify_magic(&code, &[0], 0, 2).unwrap();
        assert_eq!(cert.status, MagicStatus::Refuted);
        let w = cert.witness.unwrap();
        assert!(matches!(&w, MagicWitness::NoPreimage { point } if point.contains(&0) && point.windows(2).any(|p| p == [1, 1])));
        assert!(check_witness(&code, &w));
    }

    #[test]
    fn nonzero_offset_and_budget() {
        let g = golden_mean();
        let code = OneBlockCode::block_labeling(&g, 2, 0).unwrap();
        // the window may stick out of WCW on either side
        assert!(verify_magic(&code, &[1, 0], 1, 4).unwrap().is_certified());
        assert!(verify_magic(&code, &[1, 0], -1, 4).unwrap().is_certified());
        let c = verify_magic_with_budget(&OneBlockCode::identity(&full2()), &[0], 0, 8, 50).unwrap();
        assert!(matches!(c.status, MagicStatus::BudgetExceeded { .. }));
    }

    #[test]
    fn resolution_glues_windows() {
        let g = golden_mean();
        let code = OneBlockCode::block_labeling(&g, 2, 0).unwrap();
        let u = vec![1, 0, 0, 1, 0, 1, 0];
        let (start, p) = resolve_preimage(&code, &[1, 0], 0, &u, &mut HashMap::new()).unwrap();
        assert_eq!(start, 0);
        assert_eq!(code.apply(&p).unwrap(), u[..p.len()].to_vec());
        assert_eq!(p.len(), 5);
    }
}
