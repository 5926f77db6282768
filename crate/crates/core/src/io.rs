//! JSON documents: graphs, exhaustions, loop systems, potentials, codes,
//! almost isomorphisms and measures.
//!
//! Every top-level document carries `"kind"` and `"version"`; unknown keys
//! are rejected. Emission goes through `serde_json::Value`, whose maps are
//! sorted, so the output key order is canonical.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::codes::{AlmostIsomorphism, OneBlockCode};
use crate::error::{Result, ShiftError};
use crate::induction::{Loop, LoopSystem, LoopTail};
use crate::potential::{rational_to_f64, FiniteRangePotential, Rational};
use crate::shift::{build_graph, Exhaustion, FiniteGraph, ShiftPresentation, Word};
use crate::thermo::MarkovMeasure;
use crate::variation::{VariationCertificate, VariationTail, WordFamily};

pub const SCHEMA_VERSION: u64 = 1;

fn schema<E: std::fmt::Display>(e: E) -> ShiftError {
    ShiftError::Schema(e.to_string())
}

/// A number in a document: JSON integers and `"p/q"` strings are exact,
/// other JSON numbers are floats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Num {
    pub fn parse(&self) -> Result<(f64, Option<Rational>)> {
        match self {
            Num::Int(i) => Ok((*i as f64, Some(Rational::from_integer(*i)))),
            Num::Float(x) if x.is_finite() => Ok((*x, None)),
            Num::Float(x) => Err(ShiftError::Schema(format!("non-finite number {x}"))),
            Num::Text(s) => {
                let q = parse_rational(s)?;
                Ok((rational_to_f64(&q), Some(q)))
            }
        }
    }

    pub fn exact(q: Rational) -> Self {
        if *q.denom() == 1 {
            Num::Int(*q.numer())
        } else {
            Num::Text(format!("{}/{}", q.numer(), q.denom()))
        }
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || ShiftError::Schema(format!("{s:?} is not an integer or a fraction p/q"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: i64 = n.parse().map_err(|_| bad())?;
    let d: i64 = d.parse().map_err(|_| bad())?;
    if d == 0 {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

/// Splits a document into its kind and payload, checking the version.
fn open(v: &Value, expected: &[&str]) -> Result<(String, Value)> {
    let obj = v.as_object().ok_or_else(|| ShiftError::Schema("document must be a JSON object".into()))?;
    let kind = obj.get("kind").and_then(Value::as_str).ok_or_else(|| ShiftError::Schema("missing \"kind\"".into()))?;
    if !expected.contains(&kind) {
        return Err(ShiftError::Schema(format!("expected a document of kind {}, got {kind:?}", expected.join(" | "))));
    }
    match obj.get("version") {
        Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION) => {}
        Some(other) => return Err(ShiftError::Schema(format!("unsupported schema version {other}"))),
        None => return Err(ShiftError::Schema("missing \"version\"".into())),
    }
    let mut rest: Map<String, Value> = obj.clone();
    rest.remove("kind");
    rest.remove("version");
    Ok((kind.to_string(), Value::Object(rest)))
}

fn seal(kind: &str, payload: impl Serialize) -> Value {
    let mut v = serde_json::to_value(payload).expect("documents serialize");
    let obj = v.as_object_mut().expect("payloads are objects");
    obj.insert("kind".into(), Value::from(kind));
    obj.insert("version".into(), Value::from(SCHEMA_VERSION));
    v
}

/// Pretty-printed canonical form with a trailing newline.
pub fn to_canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| ShiftError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ShiftError::Schema(format!("{}: {e}", path.display())))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

// ---------------------------------------------------------------- graphs

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphPayload {
    alphabet: Vec<String>,
    edges: Vec<(usize, usize)>,
}

impl GraphPayload {
    fn build(self) -> Result<FiniteGraph> {
        Ok(build_graph(self.alphabet, &self.edges)?.graph)
    }

    fn of(g: &FiniteGraph) -> Self {
        GraphPayload { alphabet: g.names().to_vec(), edges: g.edges() }
    }
}

pub fn parse_graph(v: &Value) -> Result<FiniteGraph> {
    let (_, p) = open(v, &["graph"])?;
    serde_json::from_value::<GraphPayload>(p).map_err(schema)?.build()
}

pub fn emit_graph(g: &FiniteGraph) -> Value {
    seal("graph", GraphPayload::of(g))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExhaustionPayload {
    levels: Vec<GraphPayload>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    witnesses: Option<Vec<Vec<usize>>>,
}

pub fn parse_exhaustion(v: &Value) -> Result<Exhaustion> {
    let (_, p) = open(v, &["exhaustion"])?;
    let p: ExhaustionPayload = serde_json::from_value(p).map_err(schema)?;
    let levels = p.levels.into_iter().map(GraphPayload::build).collect::<Result<Vec<_>>>()?;
    match p.witnesses {
        Some(w) => Exhaustion::new(levels, w),
        None => Exhaustion::by_names(levels),
    }
}

pub fn emit_exhaustion(e: &Exhaustion) -> Value {
    let levels = e.levels.iter().map(GraphPayload::of).collect();
    seal("exhaustion", ExhaustionPayload { levels, witnesses: Some(e.witnesses.clone()) })
}

// ----------------------------------------------------------------- loops

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    from: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    to: Option<String>,
    len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default = "one")]
    count: u128,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<Num>,
}

fn one() -> u128 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TailEntry {
    from: String,
    to: String,
    tail: LoopTail,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopsPayload {
    base: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    alphabet: Vec<String>,
    loops: Vec<LoopEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    explicit_len: Option<usize>,
    /// Shorthand for the tail at the only base vertex.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<LoopTail>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tails: Vec<TailEntry>,
}

fn names_only(names: &[String]) -> Result<FiniteGraph> {
    FiniteGraph::new(names.to_vec(), &[])
}

pub fn parse_loops(v: &Value) -> Result<LoopSystem> {
    let (_, p) = open(v, &["loops"])?;
    let p: LoopsPayload = serde_json::from_value(p).map_err(schema)?;
    let base = names_only(&p.base)?;
    let alphabet = names_only(&p.alphabet)?;
    let vertex = |name: &Option<String>| -> Result<usize> {
        match name {
            None if p.base.len() == 1 => Ok(0),
            None => Err(ShiftError::Schema("loops need \"from\" and \"to\" with several base vertices".into())),
            Some(n) => base.index_of(n).ok_or_else(|| ShiftError::UnknownSymbol(n.clone())),
        }
    };
    let mut loops = Vec::with_capacity(p.loops.len());
    for e in &p.loops {
        let (weight, exact_weight) = match &e.weight {
            None => (0.0, Some(Rational::from_integer(0))),
            Some(n) => n.parse()?,
        };
        let label = e.label.as_deref().map(|s| alphabet.parse_word(s)).transpose()?;
        loops.push(Loop { from: vertex(&e.from)?, to: vertex(&e.to)?, len: e.len, label, count: e.count, weight, exact_weight });
    }
    let mut tails = BTreeMap::new();
    if let Some(t) = p.tail {
        if p.base.len() != 1 {
            return Err(ShiftError::Schema("\"tail\" needs a single base vertex; use \"tails\"".into()));
        }
        tails.insert((0, 0), t);
    }
    for t in p.tails {
        let key = (vertex(&Some(t.from))?, vertex(&Some(t.to))?);
        if tails.insert(key, t.tail).is_some() {
            return Err(ShiftError::Schema(format!("tail {key:?} given twice")));
        }
    }
    let explicit_len = p.explicit_len.unwrap_or_else(|| loops.iter().map(|l| l.len).max().unwrap_or(0));
    LoopSystem::new(p.base, p.alphabet, loops, explicit_len, tails)
}

pub fn emit_loops(ls: &LoopSystem) -> Value {
    let alphabet = names_only(&ls.alphabet).expect("validated names");
    let loops = ls
        .loops
        .iter()
        .map(|l| LoopEntry {
            from: Some(ls.names[l.from].clone()),
            to: Some(ls.names[l.to].clone()),
            len: l.len,
            label: l.label.as_ref().map(|w| alphabet.format_word(w)),
            count: l.count,
            weight: Some(match l.exact_weight {
                Some(q) => Num::exact(q),
                None => Num::Float(l.weight),
            }),
        })
        .collect();
    let tails = ls
        .tails
        .iter()
        .filter(|(_, t)| !matches!(t, LoopTail::Zero))
        .map(|(&(i, j), t)| TailEntry { from: ls.names[i].clone(), to: ls.names[j].clone(), tail: t.clone() })
        .collect();
    seal(
        "loops",
        LoopsPayload { base: ls.names.clone(), alphabet: ls.alphabet.clone(), loops, explicit_len: Some(ls.explicit_len), tail: None, tails },
    )
}

/// Any shift document: graph, exhaustion or loops.
pub fn parse_shift(v: &Value) -> Result<ShiftPresentation> {
    let (kind, _) = open(v, &["graph", "exhaustion", "loops"])?;
    Ok(match kind.as_str() {
        "graph" => ShiftPresentation::Finite(parse_graph(v)?),
        "exhaustion" => ShiftPresentation::Exhaustion(parse_exhaustion(v)?),
        _ => ShiftPresentation::Loops(parse_loops(v)?),
    })
}

pub fn load_shift(path: &Path) -> Result<ShiftPresentation> {
    parse_shift(&read_json(path)?)
}

pub fn load_graph(path: &Path) -> Result<FiniteGraph> {
    parse_graph(&read_json(path)?)
}

// ------------------------------------------------------------ potentials

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum FamilyPayload {
    Words(Vec<String>),
    Named(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificatePayload {
    #[serde(default)]
    prefix: Vec<f64>,
    tail: VariationTail,
    p: f64,
    family: FamilyPayload,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialPayload {
    left_range: usize,
    right_range: usize,
    #[serde(default)]
    weights: BTreeMap<String, Num>,
    /// Value of every window not listed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    default: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    certificate: Option<CertificatePayload>,
}

/// A potential and its optional variation certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialDocument {
    pub potential: FiniteRangePotential,
    pub certificate: Option<VariationCertificate>,
}

pub fn parse_potential(v: &Value, g: &FiniteGraph) -> Result<PotentialDocument> {
    let (_, p) = open(v, &["potential"])?;
    let p: PotentialPayload = serde_json::from_value(p).map_err(schema)?;
    let window = p.left_range + p.right_range;
    if window == 0 {
        return Err(ShiftError::Schema("left_range + right_range must be at least 1".into()));
    }
    let mut given: BTreeMap<Word, (f64, Option<Rational>)> = BTreeMap::new();
    for (k, n) in &p.weights {
        let w = g.parse_word(k)?;
        if w.len() != window || !g.is_word(&w) {
            return Err(ShiftError::Potential(format!("{k:?} is not an admissible word of length {window}")));
        }
        if given.insert(w, n.parse()?).is_some() {
            return Err(ShiftError::Schema(format!("window {k:?} given twice")));
        }
    }
    let default = p.default.as_ref().map(Num::parse).transpose()?;
    let mut float = BTreeMap::new();
    let mut exact = Some(BTreeMap::new());
    for w in g.words(window) {
        let (x, q) = match given.get(&w).copied().or(default) {
            Some(v) => v,
            None => return Err(ShiftError::Potential(format!("no weight for {:?} and no default", g.format_word(&w)))),
        };
        match (q, exact.as_mut()) {
            (Some(q), Some(e)) => {
                e.insert(w.clone(), q);
            }
            _ => exact = None,
        }
        float.insert(w, x);
    }
    let potential = match exact {
        Some(e) => FiniteRangePotential::from_rational(g, p.left_range, p.right_range, e)?,
        None => FiniteRangePotential::new(g, p.left_range, p.right_range, float)?,
    };
    let certificate = p
        .certificate
        .map(|c| -> Result<VariationCertificate> {
            let family = match c.family {
                FamilyPayload::Named(s) if s == "alphabet" => WordFamily::Alphabet,
                FamilyPayload::Named(s) => return Err(ShiftError::Schema(format!("unknown word family {s:?}"))),
                FamilyPayload::Words(ws) => WordFamily::Words(ws.iter().map(|w| g.parse_word(w)).collect::<Result<_>>()?),
            };
            Ok(VariationCertificate { prefix: c.prefix, tail: c.tail, p: c.p, family })
        })
        .transpose()?;
    Ok(PotentialDocument { potential, certificate })
}

pub fn load_potential(path: &Path, g: &FiniteGraph) -> Result<PotentialDocument> {
    parse_potential(&read_json(path)?, g)
}

pub fn emit_potential(doc: &PotentialDocument) -> Value {
    let f = &doc.potential;
    let g = f.graph();
    let weights = match f.exact_weights() {
        Some(e) => e.iter().map(|(w, q)| (g.format_word(w), Num::exact(*q))).collect(),
        None => f.weights().iter().map(|(w, x)| (g.format_word(w), Num::Float(*x))).collect(),
    };
    let certificate = doc.certificate.as_ref().map(|c| CertificatePayload {
        prefix: c.prefix.clone(),
        tail: c.tail,
        p: c.p,
        family: match &c.family {
            WordFamily::Alphabet => FamilyPayload::Named("alphabet".into()),
            WordFamily::Words(ws) => FamilyPayload::Words(ws.iter().map(|w| g.format_word(w)).collect()),
        },
    });
    seal("potential", PotentialPayload { left_range: f.left(), right_range: f.right(), weights, default: None, certificate })
}

// ------------------------------------------------------------ codes / AI

/// A graph given inline or as a path relative to the referring document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum GraphRef {
    Path(String),
    Inline(Value),
}

impl GraphRef {
    fn resolve(&self, dir: &Path) -> Result<FiniteGraph> {
        match self {
            GraphRef::Path(p) => load_graph(&dir.join(p)),
            GraphRef::Inline(v) => parse_graph(v),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodePayload {
    source: GraphRef,
    target: GraphRef,
    phi: BTreeMap<String, String>,
}

fn build_code(source: &FiniteGraph, target: &FiniteGraph, phi: &BTreeMap<String, String>) -> Result<OneBlockCode> {
    let mut map = vec![None; source.vertex_count()];
    for (s, t) in phi {
        let i = source.index_of(s).ok_or_else(|| ShiftError::UnknownSymbol(s.clone()))?;
        let j = target.index_of(t).ok_or_else(|| ShiftError::UnknownSymbol(t.clone()))?;
        map[i] = Some(j);
    }
    let map = map
        .into_iter()
        .enumerate()
        .map(|(i, m)| m.ok_or_else(|| ShiftError::Code(format!("no image for source symbol {:?}", source.name(i)))))
        .collect::<Result<Vec<_>>>()?;
    OneBlockCode::new(source, target, map)
}

fn phi_map(c: &OneBlockCode) -> BTreeMap<String, String> {
    (0..c.source().vertex_count()).map(|s| (c.source().name(s).to_string(), c.target().name(c.symbol(s)).to_string())).collect()
}

pub fn parse_code(v: &Value, dir: &Path) -> Result<OneBlockCode> {
    let (_, p) = open(v, &["code"])?;
    let p: CodePayload = serde_json::from_value(p).map_err(schema)?;
    build_code(&p.source.resolve(dir)?, &p.target.resolve(dir)?, &p.phi)
}

pub fn load_code(path: &Path) -> Result<OneBlockCode> {
    parse_code(&read_json(path)?, &base_dir(path))
}

pub fn emit_code(c: &OneBlockCode) -> Value {
    seal(
        "code",
        CodePayload { source: GraphRef::Inline(emit_graph(c.source())), target: GraphRef::Inline(emit_graph(c.target())), phi: phi_map(c) },
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MagicWordRef {
    word: String,
    #[serde(default)]
    offset: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AiPayload {
    common: GraphRef,
    source: GraphRef,
    target: GraphRef,
    phi_s: BTreeMap<String, String>,
    phi_t: BTreeMap<String, String>,
    magic_s: MagicWordRef,
    magic_t: MagicWordRef,
    depth: usize,
}

/// Parses the legs and re-certifies both magic words to the declared depth.
pub fn parse_ai(v: &Value, dir: &Path) -> Result<AlmostIsomorphism> {
    let (_, p) = open(v, &["ai"])?;
    let p: AiPayload = serde_json::from_value(p).map_err(schema)?;
    let (r, s, t) = (p.common.resolve(dir)?, p.source.resolve(dir)?, p.target.resolve(dir)?);
    let phi_s = build_code(&r, &s, &p.phi_s)?;
    let phi_t = build_code(&r, &t, &p.phi_t)?;
    let ws = s.parse_word(&p.magic_s.word)?;
    let wt = t.parse_word(&p.magic_t.word)?;
    AlmostIsomorphism::certify(phi_s, phi_t, (&ws, p.magic_s.offset), (&wt, p.magic_t.offset), p.depth)
}

pub fn load_ai(path: &Path) -> Result<AlmostIsomorphism> {
    parse_ai(&read_json(path)?, &base_dir(path))
}

pub fn emit_ai(ai: &AlmostIsomorphism) -> Value {
    let magic = |g: &FiniteGraph, w: &Word, offset: i64| MagicWordRef { word: g.format_word(w), offset };
    seal(
        "ai",
        AiPayload {
            common: GraphRef::Inline(emit_graph(ai.common())),
            source: GraphRef::Inline(emit_graph(ai.source())),
            target: GraphRef::Inline(emit_graph(ai.target())),
            phi_s: phi_map(ai.phi_s()),
            phi_t: phi_map(ai.phi_t()),
            magic_s: magic(ai.source(), &ai.cert_s().word, ai.cert_s().offset),
            magic_t: magic(ai.target(), &ai.cert_t().word, ai.cert_t().offset),
            depth: ai.depth(),
        },
    )
}

// --------------------------------------------------------------- measures

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasurePayload {
    order: usize,
    /// `rows[block][next symbol] = probability`.
    rows: BTreeMap<String, BTreeMap<String, f64>>,
}

pub fn parse_measure(v: &Value, g: &FiniteGraph) -> Result<MarkovMeasure> {
    let (_, p) = open(v, &["measure"])?;
    let p: MeasurePayload = serde_json::from_value(p).map_err(schema)?;
    if p.order == 0 {
        return Err(ShiftError::Schema("order must be at least 1".into()));
    }
    let blocks = g.words(p.order);
    let index: BTreeMap<&Word, usize> = blocks.iter().enumerate().map(|(i, b)| (b, i)).collect();
    let mut rows = vec![vec![0.0; blocks.len()]; blocks.len()];
    for (u, row) in &p.rows {
        let uw = g.parse_word(u)?;
        let &i = index.get(&uw).ok_or_else(|| ShiftError::Measure(format!("{u:?} is not a block of length {}", p.order)))?;
        for (s, &prob) in row {
            let sym = g.index_of(s).ok_or_else(|| ShiftError::UnknownSymbol(s.clone()))?;
            let mut vw = uw[1..].to_vec();
            vw.push(sym);
            let &j = index.get(&vw).ok_or_else(|| ShiftError::Measure(format!("{u:?} cannot be followed by {s:?}")))?;
            if !g.has_edge(uw[p.order - 1], sym) {
                return Err(ShiftError::Measure(format!("{u:?} cannot be followed by {s:?}")));
            }
            rows[i][j] = prob;
        }
    }
    MarkovMeasure::new(g, p.order, rows)
}

pub fn load_measure(path: &Path, g: &FiniteGraph) -> Result<MarkovMeasure> {
    parse_measure(&read_json(path)?, g)
}

pub fn emit_measure(mu: &MarkovMeasure) -> Value {
    let g = mu.graph();
    let blocks = mu.blocks();
    let rows = blocks
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let row = blocks
                .iter()
                .enumerate()
                .filter(|&(j, _)| mu.transitions()[i][j] > 0.0)
                .map(|(j, v)| (g.name(v[v.len() - 1]).to_string(), mu.transitions()[i][j]))
                .collect();
            (g.format_word(u), row)
        })
        .collect();
    seal("measure", MeasurePayload { order: mu.order(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::fixtures::golden_mean;
    use serde_json::json;

    #[test]
    fn graph_round_trip_and_strictness() {
        let v = json!({"kind": "graph", "version": 1, "alphabet": ["0", "1"], "edges": [[0, 0], [0, 1], [1, 0]]});
        let g = parse_graph(&v).unwrap();
        assert_eq!(g, golden_mean());
        assert_eq!(emit_graph(&g), v);
        let extra = json!({"kind": "graph", "version": 1, "alphabet": ["0"], "edges": [[0, 0]], "colour": 3});
        assert!(matches!(parse_graph(&extra), Err(ShiftError::Schema(_))));
        let wrong = json!({"kind": "loops", "version": 1, "alphabet": ["0"], "edges": [[0, 0]]});
        assert!(parse_graph(&wrong).is_err());
        let dup = json!({"kind": "graph", "version": 1, "alphabet": ["0"], "edges": [[0, 0], [0, 0]]});
        assert!(matches!(parse_graph(&dup), Err(ShiftError::DuplicateEdge(0, 0))));
    }

    #[test]
    fn potential_exactness() {
        let g = golden_mean();
        let v = json!({"kind": "potential", "version": 1, "left_range": 0, "right_range": 1, "weights": {"0": "1/3", "1": -2}});
        let d = parse_potential(&v, &g).unwrap();
        assert_eq!(d.potential.exact_weight(&[0]), Some(Rational::new(1, 3)));
        assert_eq!(parse_potential(&emit_potential(&d), &g).unwrap(), d);
        let f = json!({"kind": "potential", "version": 1, "left_range": 0, "right_range": 1, "weights": {"0": 0.25}, "default": 0});
        let d = parse_potential(&f, &g).unwrap();
        assert!(!d.potential.is_exact());
        let missing = json!({"kind": "potential", "version": 1, "left_range": 0, "right_range": 2, "weights": {"00": 1}});
        assert!(parse_potential(&missing, &g).is_err());
    }

    #[test]
    fn loops_round_trip() {
        let v = json!({
            "kind": "loops", "version": 1, "base": ["a"],
            "loops": [{"len": 1, "weight": "1/2"}, {"len": 2, "count": 3}],
            "tail": {"kind": "geometric", "coef": 0.5, "ratio": 0.25}
        });
        let ls = parse_loops(&v).unwrap();
        assert_eq!(ls.explicit_len, 2);
        assert_eq!(ls.loops[1].count, 3);
        let again = parse_loops(&emit_loops(&ls)).unwrap();
        assert_eq!(again, ls);
        assert_eq!(emit_loops(&again), emit_loops(&ls));
    }

    #[test]
    fn measure_round_trip() {
        let g = golden_mean();
        let v = json!({"kind": "measure", "version": 1, "order": 1, "rows": {"0": {"0": 0.5, "1": 0.5}, "1": {"0": 1.0}}});
        let mu = parse_measure(&v, &g).unwrap();
        assert_eq!(emit_measure(&mu), v);
        let bad = json!({"kind": "measure", "version": 1, "order": 1, "rows": {"1": {"1": 1.0}}});
        assert!(parse_measure(&bad, &g).is_err());
    }

    #[test]
    fn ai_round_trip() {
        let g = golden_mean();
        let s = OneBlockCode::block_labeling(&g, 2, 0).unwrap();
        let ai = AlmostIsomorphism::certify(s.clone(), s, (&[1, 0], 0), (&[1, 0], 0), 4).unwrap();
        let v = emit_ai(&ai);
        let back = parse_ai(&v, Path::new(".")).unwrap();
        assert_eq!(emit_ai(&back), v);
        let c = parse_code(&emit_code(ai.phi_s()), Path::new(".")).unwrap();
        assert_eq!(&c, ai.phi_s());
    }
}
