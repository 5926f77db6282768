//! Almost isomorphisms `S <- R -> T` and the induced map `γ` on `S_W`.

use std::collections::HashMap;

use super::magic::{resolve_preimage, verify_magic, MagicWordCertificate};
use super::point::EventuallyPeriodicPoint;
use super::OneBlockCode;
use crate::error::{Result, ShiftError};
use crate::shift::{FiniteGraph, Word};

/// A sliding-block inverse of a one-block code: the source symbol at
/// coordinate `i` is `table[image[i - memory ..= i + anticipation]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugacyWindow {
    pub memory: usize,
    pub anticipation: usize,
    table: HashMap<Word, usize>,
}

impl ConjugacyWindow {
    pub fn span(&self) -> usize {
        self.memory + self.anticipation + 1
    }

    pub fn decode(&self, window: &[usize]) -> Option<usize> {
        self.table.get(window).copied()
    }

    /// Decodes the target word `t`, losing `memory` symbols on the left and
    /// `anticipation` on the right.
    pub fn decode_word(&self, t: &[usize]) -> Option<Word> {
        if t.len() < self.span() {
            return Some(Vec::new());
        }
        t.windows(self.span()).map(|w| self.decode(w)).collect()
    }
}

fn try_window(code: &OneBlockCode, memory: usize, anticipation: usize) -> Option<ConjugacyWindow> {
    let span = memory + anticipation + 1;
    let mut table: HashMap<Word, usize> = HashMap::new();
    for y in code.source().words(span) {
        let key = code.apply_unchecked(&y);
        match table.get(&key) {
            Some(&s) if s != y[memory] => return None,
            Some(_) => {}
            None => {
                table.insert(key, y[memory]);
            }
        }
    }
    // every target word decodes, and consecutive decodings are source edges
    for t in code.target().words(span + 1) {
        let (a, b) = (table.get(&t[..span])?, table.get(&t[1..])?);
        if !code.source().has_edge(*a, *b) {
            return None;
        }
    }
    Some(ConjugacyWindow { memory, anticipation, table })
}

/// Looks for a sliding-block inverse with `memory + anticipation <=
/// max_span`, smallest total first. Finding one proves the code is a
/// conjugacy onto the (essential) target.
pub fn detect_conjugacy(code: &OneBlockCode, max_span: usize) -> Option<ConjugacyWindow> {
    if code.target().prune().0.vertex_count() != code.target().vertex_count() {
        return None;
    }
    (0..=max_span).find_map(|total| (0..=total).find_map(|a| try_window(code, a, total - a)))
}

/// Window sizes tried by [`detect_conjugacy`] when assembling.
pub const CONJUGACY_SEARCH_SPAN: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct AlmostIsomorphism {
    phi_s: OneBlockCode,
    phi_t: OneBlockCode,
    cert_s: MagicWordCertificate,
    cert_t: MagicWordCertificate,
    depth: usize,
    conj_s: Option<ConjugacyWindow>,
    conj_t: Option<ConjugacyWindow>,
}

/// Checks both certificates against their codes (by re-running the
/// verifier) and packages the pair.
pub fn assemble_ai(
    phi_s: OneBlockCode,
    phi_t: OneBlockCode,
    cert_s: MagicWordCertificate,
    cert_t: MagicWordCertificate,
    depth: usize,
) -> Result<AlmostIsomorphism> {
    if phi_s.source() != phi_t.source() {
        return Err(ShiftError::Code("the two legs start from different shifts".into()));
    }
    for (name, code, cert) in [("S", &phi_s, &cert_s), ("T", &phi_t, &cert_t)] {
        if !cert.is_certified() {
            return Err(ShiftError::Code(format!("the {name} leg's magic word is not certified ({:?})", cert.status)));
        }
        if cert.depth < depth {
            return Err(ShiftError::Code(format!("the {name} leg is certified to depth {} < {depth}", cert.depth)));
        }
        let again = verify_magic(code, &cert.word, cert.offset, cert.depth)?;
        if !again.is_certified() {
            return Err(ShiftError::Code(format!("the {name} leg's certificate does not hold for this code")));
        }
    }
    let conj_s = detect_conjugacy(&phi_s, CONJUGACY_SEARCH_SPAN);
    let conj_t = detect_conjugacy(&phi_t, CONJUGACY_SEARCH_SPAN);
    Ok(AlmostIsomorphism { phi_s, phi_t, cert_s, cert_t, depth, conj_s, conj_t })
}

impl AlmostIsomorphism {
    /// Verifies both legs at the given words and offsets, then assembles.
    pub fn certify(phi_s: OneBlockCode, phi_t: OneBlockCode, magic_s: (&[usize], i64), magic_t: (&[usize], i64), depth: usize) -> Result<Self> {
        let cert_s = verify_magic(&phi_s, magic_s.0, magic_s.1, depth)?;
        let cert_t = verify_magic(&phi_t, magic_t.0, magic_t.1, depth)?;
        assemble_ai(phi_s, phi_t, cert_s, cert_t, depth)
    }

    /// `R = S = T` with identity legs.
    pub fn identity(g: &FiniteGraph, word: &[usize], depth: usize) -> Result<Self> {
        let id = OneBlockCode::identity(g);
        Self::certify(id.clone(), id, (word, 0), (word, 0), depth)
    }

    pub fn common(&self) -> &FiniteGraph {
        self.phi_s.source()
    }

    pub fn source(&self) -> &FiniteGraph {
        self.phi_s.target()
    }

    pub fn target(&self) -> &FiniteGraph {
        self.phi_t.target()
    }

    pub fn phi_s(&self) -> &OneBlockCode {
        &self.phi_s
    }

    pub fn phi_t(&self) -> &OneBlockCode {
        &self.phi_t
    }

    pub fn cert_s(&self) -> &MagicWordCertificate {
        &self.cert_s
    }

    pub fn cert_t(&self) -> &MagicWordCertificate {
        &self.cert_t
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn conjugacy_s(&self) -> Option<&ConjugacyWindow> {
        self.conj_s.as_ref()
    }

    pub fn conjugacy_t(&self) -> Option<&ConjugacyWindow> {
        self.conj_t.as_ref()
    }

    /// Both legs are conjugacies, so `γ` is a sliding block code on all of S.
    pub fn is_conjugacy(&self) -> bool {
        self.conj_s.is_some() && self.conj_t.is_some()
    }

    /// `γ` on a finite S-word: returns the position in `u` of the first
    /// image symbol and the image.
    pub(crate) fn gamma_on_word(&self, u: &[usize], cache: &mut HashMap<Word, Word>) -> Result<(i64, Word)> {
        let (start, path) = resolve_preimage(&self.phi_s, &self.cert_s.word, self.cert_s.offset, u, cache)?;
        if !self.common().is_word(&path) {
            return Err(ShiftError::Code("resolved preimage windows do not glue into a path".into()));
        }
        Ok((start, self.phi_t.apply_unchecked(&path)))
    }
}

fn is_periodic_on(y: &[usize], from: usize, to: usize, p: usize) -> bool {
    (from..to.saturating_sub(p)).all(|i| y[i] == y[i + p])
}

/// `γ(x)` for an eventually periodic point of S seeing the S-magic word in
/// both periodic parts.
pub fn gamma_on_point(ai: &AlmostIsomorphism, x: &EventuallyPeriodicPoint) -> Result<EventuallyPeriodicPoint> {
    if !x.is_admissible(ai.source()) {
        return Err(ShiftError::NotAWord(x.window(x.start - x.left.len() as i64, x.left.len() + x.core.len() + x.right.len())));
    }
    let w = &ai.cert_s.word;
    if !x.sees_infinitely_often(w) {
        return Err(ShiftError::OutsideDomain(format!("the magic word {} is missing from a periodic part", ai.source().format_word(w))));
    }
    let (p, q) = (x.left.len(), x.right.len());
    let reach = w.len() + ai.cert_s.offset.unsigned_abs() as usize + p + q + 8;
    let (kl, kr) = (4 + (4 * reach).div_ceil(p), 4 + (4 * reach).div_ceil(q));
    let mut u: Word = Vec::with_capacity(kl * p + x.core.len() + kr * q);
    for _ in 0..kl {
        u.extend_from_slice(&x.left);
    }
    u.extend_from_slice(&x.core);
    for _ in 0..kr {
        u.extend_from_slice(&x.right);
    }
    let base = x.start - (kl * p) as i64;
    let (first, y) = ai.gamma_on_word(&u, &mut HashMap::new())?;
    let first = first as usize;
    // y[j] is the image at u-position first + j
    let left_end = kl * p - reach - first;
    let right_begin = kl * p + x.core.len() + reach - first;
    if !is_periodic_on(&y, 0, left_end, p) || !is_periodic_on(&y, right_begin, y.len(), q) {
        return Err(ShiftError::Code("image is not eventually periodic on the resolved range".into()));
    }
    let a0 = p;
    let b0 = y.len() - q;
    let point = EventuallyPeriodicPoint {
        left: y[a0 - p..a0].to_vec(),
        core: y[a0..b0].to_vec(),
        right: y[b0..].to_vec(),
        start: base + (first + a0) as i64,
    };
    Ok(point.canonical())
}
