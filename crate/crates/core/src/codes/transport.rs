//! Moving measures and potentials across an almost isomorphism.

use std::collections::{BTreeMap, HashMap};
use std::ops::ControlFlow;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::ai::{gamma_on_point, AlmostIsomorphism};
use super::point::EventuallyPeriodicPoint;
use crate::error::{Result, ShiftError};
use crate::potential::{rational_to_f64, FiniteRangePotential, Rational};
use crate::shift::{for_each_periodic, Word};
use crate::thermo::{equilibrium_measure, pressure_spectral, MarkovMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportMethod {
    ClosedForm,
    Sampled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportOptions {
    /// Total number of sampled S-symbols.
    pub budget: usize,
    /// Required whenever sampling happens.
    pub seed: Option<u64>,
    /// Sample even when both legs are conjugacies.
    pub force_sampling: bool,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions { budget: 100_000, seed: None, force_sampling: false }
    }
}

/// Independent sample streams; counts are merged in stream order.
pub const SAMPLE_STREAMS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportResult {
    #[serde(skip)]
    pub measure: MarkovMeasure,
    pub method: TransportMethod,
    pub order: usize,
    pub entropy_source: f64,
    pub entropy_target: f64,
    /// Total-variation distance between the Markov measure and the exact
    /// image on `(order + 2)`-blocks; closed form only.
    pub tv_gap: Option<f64>,
    pub seed: Option<u64>,
    pub samples: usize,
    /// 95% half-width of the entropy estimate across sample streams.
    pub entropy_halfwidth: Option<f64>,
}

/// Exact image of `μ` on T-words of length `len`, through the inverse
/// window of `φ_S` and the symbol map of `φ_T`.
fn pushforward_marginals(ai: &AlmostIsomorphism, mu: &MarkovMeasure, len: usize) -> BTreeMap<Word, f64> {
    let inv = ai.conjugacy_s().expect("closed form needs a conjugacy");
    let mut out: BTreeMap<Word, f64> = ai.target().words(len).into_iter().map(|w| (w, 0.0)).collect();
    for z in ai.source().words(len + inv.span() - 1) {
        let p = mu.cylinder(&z);
        if p == 0.0 {
            continue;
        }
        let y = inv.decode_word(&z).expect("conjugacy decodes every word");
        *out.entry(ai.phi_t().apply_unchecked(&y)).or_insert(0.0) += p;
    }
    out
}

fn count_blocks(w: &[usize], len: usize, into: &mut BTreeMap<Word, f64>) {
    for b in w.windows(len) {
        *into.entry(b.to_vec()).or_insert(0.0) += 1.0;
    }
}

fn normalize(m: &mut BTreeMap<Word, f64>) {
    let s: f64 = m.values().sum();
    if s > 0.0 {
        m.values_mut().for_each(|v| *v /= s);
    }
}

/// Image of the fully supported measure `μ` on S under `γ`, as an order-`k`
/// Markov measure on T.
pub fn transport_measure(ai: &AlmostIsomorphism, mu: &MarkovMeasure, k: usize, opts: &TransportOptions) -> Result<TransportResult> {
    if mu.graph() != ai.source() {
        return Err(ShiftError::Measure("measure does not live on the source shift".into()));
    }
    if !mu.is_fully_supported() {
        return Err(ShiftError::Measure("measure is not fully supported".into()));
    }
    if k == 0 {
        return Err(ShiftError::InvalidArgument("order must be at least 1".into()));
    }
    if ai.is_conjugacy() && !opts.force_sampling {
        let marg = pushforward_marginals(ai, mu, k + 1);
        let measure = MarkovMeasure::from_block_marginals(ai.target(), k, &marg)?;
        let longer = pushforward_marginals(ai, mu, k + 2);
        let tv = 0.5 * longer.iter().map(|(w, p)| (measure.cylinder(w) - p).abs()).sum::<f64>();
        return Ok(TransportResult {
            entropy_source: mu.entropy(),
            entropy_target: measure.entropy(),
            measure,
            method: TransportMethod::ClosedForm,
            order: k,
            tv_gap: Some(tv),
            seed: None,
            samples: 0,
            entropy_halfwidth: None,
        });
    }
    let seed = opts.seed.ok_or_else(|| ShiftError::InvalidArgument("sampling transport needs a seed".into()))?;
    let per_stream = opts.budget / SAMPLE_STREAMS;
    if per_stream < 4 * (k + 1) {
        return Err(ShiftError::InvalidArgument(format!("sample budget {} is too small", opts.budget)));
    }
    let streams: Vec<Result<BTreeMap<Word, f64>>> = (0..SAMPLE_STREAMS)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let u = mu.sample(per_stream, &mut rng);
            let (_, image) = ai.gamma_on_word(&u, &mut HashMap::new())?;
            let mut counts = BTreeMap::new();
            count_blocks(&image, k + 1, &mut counts);
            Ok(counts)
        })
        .collect();
    let mut total: BTreeMap<Word, f64> = BTreeMap::new();
    let mut entropies = Vec::with_capacity(SAMPLE_STREAMS);
    for s in streams {
        let mut counts = s?;
        for (w, c) in &counts {
            *total.entry(w.clone()).or_insert(0.0) += c;
        }
        normalize(&mut counts);
        entropies.push(MarkovMeasure::from_block_marginals(ai.target(), k, &counts)?.entropy());
    }
    normalize(&mut total);
    let measure = MarkovMeasure::from_block_marginals(ai.target(), k, &total)?;
    let b = entropies.len() as f64;
    let mean = entropies.iter().sum::<f64>() / b;
    let sd = (entropies.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (b - 1.0)).sqrt();
    Ok(TransportResult {
        entropy_source: mu.entropy(),
        entropy_target: measure.entropy(),
        measure,
        method: TransportMethod::Sampled,
        order: k,
        tv_gap: None,
        seed: Some(seed),
        samples: per_stream * SAMPLE_STREAMS,
        entropy_halfwidth: Some(1.96 * sd / b.sqrt()),
    })
}

/// The potential `g = f ∘ γ⁻¹` on T, defined when `φ_T` is a conjugacy.
/// With `ψ_T` the inverse window of `φ_T` (memory `a`, anticipation `m`),
/// `g` has left range `f.left + a` and right range `f.right + m`.
pub fn recode_potential(ai: &AlmostIsomorphism, f: &FiniteRangePotential) -> Result<FiniteRangePotential> {
    if f.graph() != ai.source() {
        return Err(ShiftError::Potential("potential does not live on the source shift".into()));
    }
    let inv = ai.conjugacy_t().ok_or_else(|| ShiftError::Code("recoding needs the T leg to be a conjugacy".into()))?;
    let (left, right) = (f.left() + inv.memory, f.right() + inv.anticipation);
    let pull = |t: &[usize]| -> Word {
        let y = inv.decode_word(t).expect("conjugacy decodes every word");
        ai.phi_s().apply_unchecked(&y)
    };
    if f.is_exact() {
        FiniteRangePotential::from_rational_fn(ai.target(), left, right, |t| f.exact_weight(&pull(t)).expect("S-word"))
    } else {
        FiniteRangePotential::from_fn(ai.target(), left, right, |t| f.weight(&pull(t)).expect("S-word"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrespondenceWitness {
    pub point: EventuallyPeriodicPoint,
    pub image: EventuallyPeriodicPoint,
    pub coordinate: i64,
    pub f_value: f64,
    pub g_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrespondenceReport {
    pub pass: bool,
    pub periodic_points: usize,
    pub heteroclinic_points: usize,
    pub witness: Option<CorrespondenceWitness>,
    pub pressure_source: f64,
    pub pressure_target: f64,
    pub pressure_gap: f64,
    pub pressure_tolerance: f64,
    pub transport: TransportResult,
    /// Largest difference between transported `μ_f` and `μ_g` on blocks of
    /// length `block_len`.
    pub measure_gap: f64,
    pub measure_tolerance: f64,
    pub block_len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceOptions {
    pub n_max: usize,
    pub block_len: usize,
    pub measure_tolerance: f64,
    /// Longest periodic part of the non-periodic test points.
    pub heteroclinic_period: usize,
    pub transport: TransportOptions,
}

impl Default for CorrespondenceOptions {
    fn default() -> Self {
        CorrespondenceOptions { n_max: 10, block_len: 2, measure_tolerance: 1e-9, heteroclinic_period: 3, transport: TransportOptions::default() }
    }
}

pub const PRESSURE_TOLERANCE: f64 = 1e-9;

fn values_agree(f: &FiniteRangePotential, fw: &[usize], g: &FiniteRangePotential, gw: &[usize]) -> Option<(f64, f64)> {
    let (a, b) = (f.weight(fw)?, g.weight(gw)?);
    let same = match (f.exact_weight(fw), g.exact_weight(gw)) {
        (Some(p), Some(q)) => p == q,
        _ => (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs())),
    };
    (!same).then_some((a, b))
}

/// Compares `f` and `g ∘ γ` at every coordinate of `x` that matters.
fn check_point(ai: &AlmostIsomorphism, f: &FiniteRangePotential, g: &FiniteRangePotential, x: &EventuallyPeriodicPoint) -> Result<Option<CorrespondenceWitness>> {
    let gx = gamma_on_point(ai, x)?;
    let periodic = x.core.is_empty() && x.left == x.right;
    let (from, to) = if periodic {
        (0, x.right.len() as i64)
    } else {
        let pad = (x.left.len() + x.right.len() + f.window() + g.window() + gx.left.len() + gx.right.len()) as i64 + 4;
        (x.start.min(gx.start) - pad, (x.start + x.core.len() as i64).max(gx.start + gx.core.len() as i64) + pad)
    };
    for j in from..to {
        let fw = x.window(j - f.left() as i64, f.window());
        let gw = gx.window(j - g.left() as i64, g.window());
        match values_agree(f, &fw, g, &gw) {
            None if f.weight(&fw).is_some() && g.weight(&gw).is_some() => {}
            None => return Err(ShiftError::Code("γ produced an inadmissible window".into())),
            Some((a, b)) => {
                return Ok(Some(CorrespondenceWitness { point: x.clone(), image: gx, coordinate: j, f_value: a, g_value: b }));
            }
        }
    }
    Ok(None)
}

fn sees(y: &[usize], w: &[usize]) -> bool {
    EventuallyPeriodicPoint::periodic(y).map(|p| p.sees_infinitely_often(w)).unwrap_or(false)
}

/// Checks `g ∘ γ = f` on eventually periodic points of `S_W`, the pressure
/// identity and the correspondence of equilibrium measures.
pub fn verify_correspondence(
    ai: &AlmostIsomorphism,
    f: &FiniteRangePotential,
    g: &FiniteRangePotential,
    opts: &CorrespondenceOptions,
) -> Result<CorrespondenceReport> {
    if f.graph() != ai.source() || g.graph() != ai.target() {
        return Err(ShiftError::Potential("potentials must live on the source and target shifts".into()));
    }
    let s = ai.source();
    let w = ai.cert_s().word.clone();
    let mut cycles: Vec<Word> = Vec::new();
    for n in 1..=opts.n_max {
        for_each_periodic(s, n, &[], |y| {
            if sees(y, &w) {
                cycles.push(y.to_vec());
            }
            ControlFlow::Continue(())
        });
    }
    let periodic: Vec<EventuallyPeriodicPoint> =
        cycles.iter().map(|y| EventuallyPeriodicPoint::periodic(y).expect("nonempty")).collect();
    let short: Vec<&Word> = cycles.iter().filter(|y| y.len() <= opts.heteroclinic_period).collect();
    let mut heteroclinic = Vec::new();
    for l in &short {
        for r in &short {
            for c in 0..=2 {
                for core in s.words(c) {
                    let x = EventuallyPeriodicPoint { left: (*l).clone(), core, right: (*r).clone(), start: 0 };
                    if x.is_admissible(s) && !(x.core.is_empty() && x.left == x.right) {
                        heteroclinic.push(x);
                    }
                }
            }
        }
    }
    let checks: Vec<Result<Option<CorrespondenceWitness>>> =
        periodic.par_iter().chain(heteroclinic.par_iter()).map(|x| check_point(ai, f, g, x)).collect();
    let mut witness = None;
    for c in checks {
        if let Some(wit) = c? {
            witness = Some(wit);
            break;
        }
    }
    let (ps, pt) = (pressure_spectral(s, f)?, pressure_spectral(ai.target(), g)?);
    let gap = (ps.value - pt.value).abs();
    let tol = PRESSURE_TOLERANCE + ps.error + pt.error;
    let mu_f = equilibrium_measure(s, f)?;
    let mu_g = equilibrium_measure(ai.target(), g)?;
    let transport = transport_measure(ai, &mu_f, opts.block_len.max(1), &opts.transport)?;
    let measure_gap = ai
        .target()
        .words(opts.block_len)
        .iter()
        .map(|b| (transport.measure.cylinder(b) - mu_g.cylinder(b)).abs())
        .fold(0.0, f64::max);
    Ok(CorrespondenceReport {
        pass: witness.is_none() && gap <= tol && measure_gap <= opts.measure_tolerance,
        periodic_points: periodic.len(),
        heteroclinic_points: heteroclinic.len(),
        witness,
        pressure_source: ps.value,
        pressure_target: pt.value,
        pressure_gap: gap,
        pressure_tolerance: tol,
        transport,
        measure_gap,
        measure_tolerance: opts.measure_tolerance,
        block_len: opts.block_len,
    })
}

/// `f` plus `delta` on the single window `block`.
pub fn perturb_potential(f: &FiniteRangePotential, block: &[usize], delta: Rational) -> Result<FiniteRangePotential> {
    if f.weight(block).is_none() {
        return Err(ShiftError::NotAWord(block.to_vec()));
    }
    if f.is_exact() {
        FiniteRangePotential::from_rational_fn(f.graph(), f.left(), f.right(), |w| {
            f.exact_weight(w).expect("word") + if w == block { delta } else { Rational::from_integer(0) }
        })
    } else {
        let d = rational_to_f64(&delta);
        FiniteRangePotential::from_fn(f.graph(), f.left(), f.right(), |w| f.weight(w).expect("word") + if w == block { d } else { 0.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::OneBlockCode;
    use crate::shift::fixtures::{full2, golden_mean};
    use crate::thermo::measure_pressure;

    const LOG_PHI: f64 = 0.48121182505960347;

    fn gm_self_ai(shifted: bool) -> AlmostIsomorphism {
        let g = golden_mean();
        let s = OneBlockCode::block_labeling(&g, 2, 0).unwrap();
        let t = OneBlockCode::block_labeling(&g, 2, usize::from(shifted)).unwrap();
        AlmostIsomorphism::certify(s, t, (&[1, 0], 0), (&[1, 0], 0), 8).unwrap()
    }

    fn sample_potential() -> FiniteRangePotential {
        FiniteRangePotential::from_rational_fn(&golden_mean(), 0, 1, |w| Rational::new(w[0] as i64 * 2 - 1, 3)).unwrap()
    }

    #[test]
    fn identity_bernoulli() {
        let g = full2();
        let ai = AlmostIsomorphism::identity(&g, &[0], 4).unwrap();
        let mu = MarkovMeasure::new(&g, 1, vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let r = transport_measure(&ai, &mu, 1, &TransportOptions::default()).unwrap();
        assert_eq!(r.method, TransportMethod::ClosedForm);
        assert!((r.entropy_target - 2f64.ln()).abs() < 1e-15 && r.entropy_source == r.entropy_target);
        assert!(r.tv_gap.unwrap() < 1e-15);
    }

    #[test]
    fn parry_closed_form_and_sampled() {
        let g = golden_mean();
        let ai = gm_self_ai(false);
        let parry = equilibrium_measure(&g, &FiniteRangePotential::zero(&g)).unwrap();
        let r = transport_measure(&ai, &parry, 2, &TransportOptions::default()).unwrap();
        assert!((r.entropy_target - LOG_PHI).abs() < 1e-12);
        let opts = TransportOptions { budget: 100_000, seed: Some(42), force_sampling: true };
        let s = transport_measure(&ai, &parry, 2, &opts).unwrap();
        assert!((s.entropy_target - LOG_PHI).abs() < 0.01);
        assert_eq!(s.entropy_target, transport_measure(&ai, &parry, 2, &opts).unwrap().entropy_target);
        let no_seed = TransportOptions { seed: None, ..opts };
        assert!(transport_measure(&ai, &parry, 2, &no_seed).is_err());
    }

    #[test]
    fn rejects_partial_support() {
        let g = full2();
        let ai = AlmostIsomorphism::identity(&g, &[0], 2).unwrap();
        let mu = MarkovMeasure::new(&g, 1, vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        assert!(transport_measure(&ai, &mu, 1, &TransportOptions::default()).is_err());
    }

    #[test]
    fn recoded_correspondence_passes() {
        for shifted in [false, true] {
            let ai = gm_self_ai(shifted);
            let f = sample_potential();
            let g = recode_potential(&ai, &f).unwrap();
            let r = verify_correspondence(&ai, &f, &g, &CorrespondenceOptions::default()).unwrap();
            assert!(r.pass, "{r:?}");
            assert!(r.pressure_gap < 1e-9 && r.measure_gap < 1e-9);
            let mu_f = equilibrium_measure(&golden_mean(), &f).unwrap();
            let moved = transport_measure(&ai, &mu_f, 2, &TransportOptions::default()).unwrap();
            let lhs = measure_pressure(&mu_f, &f).unwrap();
            let rhs = measure_pressure(&moved.measure, &g).unwrap();
            assert!((lhs - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn perturbed_recoding_fails() {
        let ai = gm_self_ai(false);
        let f = sample_potential();
        let g = recode_potential(&ai, &f).unwrap();
        assert!(perturb_potential(&g, &[0], Rational::new(1, 10)).is_err());
        let bad = perturb_potential(&g, &[1, 0], Rational::new(1, 10)).unwrap();
        let r = verify_correspondence(&ai, &f, &bad, &CorrespondenceOptions::default()).unwrap();
        assert!(!r.pass);
        let w = r.witness.unwrap();
        // the first periodic point seeing 10 is (01)^∞
        assert_eq!(w.point, EventuallyPeriodicPoint::periodic(&[0, 1]).unwrap());
        assert!((w.g_value - w.f_value - 0.1).abs() < 1e-12);
    }
}
