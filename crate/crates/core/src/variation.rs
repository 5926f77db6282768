//! Variation certificates: a nonincreasing sequence `ω` bounding the
//! oscillation of a potential between occurrences of words of a family,
//! together with the summability check `Σ n^p ω_n < ∞`.
//!
//! Certificates are verified, never synthesized.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShiftError};
use crate::potential::FiniteRangePotential;
use crate::shift::Word;

/// Explicit polynomial-tail terms summed before the integral comparison.
const POLYNOMIAL_EXPLICIT_TERMS: usize = 100_000;

/// Closed-form description of `ω_n` beyond the explicit prefix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VariationTail {
    Zero,
    /// `ω_n = coef * ratio^n`
    Geometric { coef: f64, ratio: f64 },
    /// `ω_n = coef * (n + offset)^(-exponent)`
    Polynomial {
        coef: f64,
        exponent: f64,
        #[serde(default)]
        offset: u64,
    },
}

impl VariationTail {
    pub fn at(&self, n: usize) -> f64 {
        match *self {
            VariationTail::Zero => 0.0,
            VariationTail::Geometric { coef, ratio } => coef * ratio.powi(n as i32),
            VariationTail::Polynomial { coef, exponent, offset } => coef * ((n as u64 + offset) as f64).powf(-exponent),
        }
    }

    fn shifted(&self, s: usize) -> Self {
        match *self {
            VariationTail::Zero => VariationTail::Zero,
            VariationTail::Geometric { coef, ratio } => VariationTail::Geometric { coef: coef * ratio.powi(s as i32), ratio },
            VariationTail::Polynomial { coef, exponent, offset } => {
                VariationTail::Polynomial { coef, exponent, offset: offset + s as u64 }
            }
        }
    }
}

/// The word family the certificate is relative to.
#[derive(Debug, Clone, PartialEq)]
pub enum WordFamily {
    Words(Vec<Word>),
    /// Every symbol of the (induced) alphabet.
    Alphabet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationCertificate {
    /// `ω_1, ..., ω_{n0}`.
    pub prefix: Vec<f64>,
    /// `ω_n` for `n > n0`.
    pub tail: VariationTail,
    pub p: f64,
    pub family: WordFamily,
}

impl VariationCertificate {
    pub fn zero(family: WordFamily) -> Self {
        VariationCertificate { prefix: Vec::new(), tail: VariationTail::Zero, p: 1.0, family }
    }

    /// `ω_n` for `n ≥ 1`.
    pub fn omega(&self, n: usize) -> f64 {
        assert!(n >= 1, "ω is indexed from 1");
        if n <= self.prefix.len() {
            self.prefix[n - 1]
        } else {
            self.tail.at(n)
        }
    }
}

/// Closed interval `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesBound {
    pub lower: f64,
    pub upper: f64,
}

impl SeriesBound {
    pub fn point(v: f64) -> Self {
        SeriesBound { lower: v, upper: v }
    }

    pub fn value(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn error(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationCheck {
    pub accepted: bool,
    /// Bounds on `Σ n^p ω_n` when accepted.
    pub sum: Option<SeriesBound>,
    /// Why the certificate was rejected.
    pub witness: Option<String>,
}

impl VariationCheck {
    fn reject(witness: String) -> Self {
        VariationCheck { accepted: false, sum: None, witness: Some(witness) }
    }
}

/// Compensated sum of nonnegative terms.
fn kahan_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for t in terms {
        let y = t - c;
        let s = sum + y;
        c = (s - sum) - y;
        sum = s;
    }
    sum
}

/// Two-sided bound on `Σ_{n ≥ start} n^p coef ratio^n`, `0 ≤ ratio < 1`.
fn geometric_series(start: usize, p: f64, coef: f64, ratio: f64) -> SeriesBound {
    if coef == 0.0 || ratio == 0.0 {
        return SeriesBound::point(0.0);
    }
    let a = start as f64;
    let head = coef * ratio.powf(a);
    if p == 0.0 {
        return SeriesBound::point(head / (1.0 - ratio));
    }
    if p == 1.0 {
        return SeriesBound::point(head * (a - (a - 1.0) * ratio) / ((1.0 - ratio) * (1.0 - ratio)));
    }
    // General p: explicit terms until the term ratio is safely below 1.
    let mut n = start;
    let mut partial = 0.0;
    loop {
        let term = (n as f64).powf(p) * coef * ratio.powf(n as f64);
        partial += term;
        let growth = ((n + 1) as f64 / n as f64).powf(p) * ratio;
        if n > start + 10 && growth < 1.0 {
            let rest = term * growth / (1.0 - growth);
            if rest <= 1e-17 * partial.max(f64::MIN_POSITIVE) || n > start + 1_000_000 {
                return SeriesBound { lower: partial, upper: partial + rest };
            }
        }
        n += 1;
    }
}

/// Bound on `Σ_{n ≥ start} n^p coef (n + offset)^(-q)` with `q - p > 1`.
fn polynomial_series(start: usize, p: f64, coef: f64, q: f64, offset: u64) -> SeriesBound {
    let s = offset as f64;
    let end = start + POLYNOMIAL_EXPLICIT_TERMS;
    // Sum smallest terms first.
    let partial = kahan_sum((start..end).rev().map(|n| {
        let n = n as f64;
        n.powf(p) * coef * (n + s).powf(-q)
    }));
    // Σ_{n ≥ end} ≤ ∫_{end-1}^∞ (x+s)^(p-q) dx, since n^p ≤ (n+s)^p.
    let e = 1.0 + p - q;
    let k = (end - 1) as f64;
    let upper_tail = coef * (k + s).powf(e) / (q - p - 1.0);
    let lower_tail = coef * (k / (k + s)).powf(p) * (k + 1.0 + s).powf(e) / (q - p - 1.0);
    SeriesBound { lower: partial + lower_tail, upper: partial + upper_tail }
}

/// Accepts a certificate when `Σ n^p ω_n` provably converges and reports
/// an enclosure of the sum.
pub fn check_variation_certificate(cert: &VariationCertificate) -> VariationCheck {
    if !(cert.p >= 0.0) {
        return VariationCheck::reject(format!("p = {} must be nonnegative", cert.p));
    }
    if let Some((i, v)) = cert.prefix.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
        return VariationCheck::reject(format!("ω_{} = {v} is not a nonnegative real", i + 1));
    }
    if let Some(i) = (1..cert.prefix.len()).find(|&i| cert.prefix[i] > cert.prefix[i - 1]) {
        return VariationCheck::reject(format!("ω increases at n = {}: {} > {}", i + 1, cert.prefix[i], cert.prefix[i - 1]));
    }
    let n0 = cert.prefix.len();
    match cert.tail {
        VariationTail::Zero => {}
        VariationTail::Geometric { coef, ratio } => {
            if !(coef >= 0.0 && (0.0..1.0).contains(&ratio)) {
                return VariationCheck::reject(format!("geometric tail needs coef ≥ 0 and 0 ≤ ratio < 1 (got {coef}, {ratio})"));
            }
        }
        VariationTail::Polynomial { coef, exponent, .. } => {
            if !(coef >= 0.0 && exponent > 0.0) {
                return VariationCheck::reject(format!("polynomial tail needs coef ≥ 0 and exponent > 0 (got {coef}, {exponent})"));
            }
            if coef > 0.0 && exponent - cert.p <= 1.0 {
                let partial: Vec<String> = [10usize, 100, 1000, 10000]
                    .iter()
                    .map(|&k| format!("{:.4}", (1..=k).map(|n| (n as f64).powf(cert.p) * cert.omega(n)).sum::<f64>()))
                    .collect();
                return VariationCheck::reject(format!(
                    "n^p ω_n ~ n^({}) is not summable (exponent - p = {} ≤ 1); partial sums at 10, 100, 1000, 10000: {}",
                    cert.p - exponent,
                    exponent - cert.p,
                    partial.join(", ")
                ));
            }
        }
    }
    if n0 > 0 && cert.tail.at(n0 + 1) > cert.prefix[n0 - 1] {
        return VariationCheck::reject(format!("tail value ω_{} exceeds ω_{}", n0 + 1, n0));
    }
    let head = kahan_sum((1..=n0).map(|n| (n as f64).powf(cert.p) * cert.prefix[n - 1]));
    let tail = match cert.tail {
        VariationTail::Zero => SeriesBound::point(0.0),
        VariationTail::Geometric { coef, ratio } => geometric_series(n0 + 1, cert.p, coef, ratio),
        VariationTail::Polynomial { coef, exponent, offset } => {
            if coef == 0.0 {
                SeriesBound::point(0.0)
            } else {
                polynomial_series(n0 + 1, cert.p, coef, exponent, offset)
            }
        }
    };
    // Allow for rounding in the closed forms.
    let slack = 4.0 * f64::EPSILON * (head + tail.upper);
    let sum = SeriesBound { lower: head + tail.lower - slack, upper: head + tail.upper + slack };
    VariationCheck { accepted: true, sum: Some(sum), witness: None }
}

/// `ω̄_n = max(ω_{n+L}, ω_{n+M})`. Since `ω` is nonincreasing this is
/// `ω_{n + min(L, M)}`.
pub fn lift_variation(cert: &VariationCertificate, l: usize, m: usize) -> Result<VariationCertificate> {
    let check = check_variation_certificate(cert);
    if !check.accepted {
        return Err(ShiftError::CertificateRejected(check.witness.unwrap_or_default()));
    }
    let s = l.min(m);
    let cut = s.min(cert.prefix.len());
    Ok(VariationCertificate {
        prefix: cert.prefix[cut..].to_vec(),
        tail: cert.tail.shifted(s),
        p: cert.p,
        family: cert.family.clone(),
    })
}

/// The two regularity classes used for relatively regular potentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegularityClassTag {
    /// Eventually 1-summable variations.
    E1,
    /// Eventually 0-summable variations, future coordinates only.
    E0Plus,
}

/// Which class a certified potential falls in; `E1` when both apply.
pub fn regularity_class(f: &FiniteRangePotential, cert: &VariationCertificate) -> Result<RegularityClassTag> {
    let check = check_variation_certificate(cert);
    if !check.accepted {
        return Err(ShiftError::CertificateRejected(check.witness.unwrap_or_default()));
    }
    if cert.p >= 1.0 {
        Ok(RegularityClassTag::E1)
    } else if f.is_future_only() {
        Ok(RegularityClassTag::E0Plus)
    } else {
        Err(ShiftError::CertificateRejected(format!(
            "p = {} certifies neither E1 nor E0+ for a potential with left range {}",
            cert.p,
            f.left()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geometric(coef: f64, ratio: f64, p: f64) -> VariationCertificate {
        VariationCertificate { prefix: vec![], tail: VariationTail::Geometric { coef, ratio }, p, family: WordFamily::Alphabet }
    }

    #[test]
    fn geometric_p1_closed_form() {
        let check = check_variation_certificate(&geometric(1.0, 0.5, 1.0));
        assert!(check.accepted);
        let sum = check.sum.unwrap();
        // oracle: direct partial sums of n 2^-n
        let direct: f64 = (1..200).map(|n| n as f64 * 0.5f64.powi(n)).sum();
        assert!((direct - 2.0).abs() < 1e-12);
        assert!((sum.value() - 2.0).abs() < 1e-12 && sum.error() < 1e-12);
    }

    #[test]
    fn geometric_general_p_matches_partial_sums() {
        let check = check_variation_certificate(&geometric(2.0, 0.7, 2.5));
        let sum = check.sum.unwrap();
        let direct: f64 = (1..2000).map(|n| (n as f64).powf(2.5) * 2.0 * 0.7f64.powi(n)).sum();
        assert!(sum.contains(direct) || (sum.value() - direct).abs() < 1e-9 * direct);
    }

    #[test]
    fn inverse_square_rejected_for_p1() {
        let cert = VariationCertificate {
            prefix: vec![],
            tail: VariationTail::Polynomial { coef: 1.0, exponent: 2.0, offset: 0 },
            p: 1.0,
            family: WordFamily::Alphabet,
        };
        let check = check_variation_certificate(&cert);
        assert!(!check.accepted);
        assert!(check.witness.unwrap().contains("not summable"));
        let p0 = VariationCertificate { p: 0.0, ..cert };
        let check = check_variation_certificate(&p0);
        let sum = check.sum.unwrap();
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!(sum.contains(zeta2), "{sum:?}");
        assert!(sum.error() < 1e-9);
    }

    #[test]
    fn zero_sequence() {
        let check = check_variation_certificate(&VariationCertificate::zero(WordFamily::Alphabet));
        assert!(check.accepted);
        assert_eq!(check.sum.unwrap().value(), 0.0);
    }

    #[test]
    fn nonmonotone_prefix_rejected() {
        let cert = VariationCertificate { prefix: vec![0.5, 0.7], tail: VariationTail::Zero, p: 0.0, family: WordFamily::Alphabet };
        assert!(!check_variation_certificate(&cert).accepted);
        let cert = VariationCertificate {
            prefix: vec![0.1],
            tail: VariationTail::Geometric { coef: 1.0, ratio: 0.9 },
            p: 0.0,
            family: WordFamily::Alphabet,
        };
        assert!(!check_variation_certificate(&cert).accepted);
    }

    #[test]
    fn lift_examples() {
        let base = geometric(1.0, 0.5, 1.0);
        let lifted = lift_variation(&base, 2, 1).unwrap();
        for n in 1..30 {
            assert!((lifted.omega(n) - 0.5f64.powi(n as i32 + 1)).abs() < 1e-18);
        }
        assert_eq!(lift_variation(&base, 0, 0).unwrap(), base);
        let lifted = lift_variation(&base, 3, 0).unwrap();
        let sum = check_variation_certificate(&lifted).sum.unwrap();
        assert!(sum.upper <= 2.0 + 1e-12);
    }

    #[test]
    fn lift_rejects_divergent_input() {
        let cert = VariationCertificate {
            prefix: vec![],
            tail: VariationTail::Polynomial { coef: 1.0, exponent: 1.5, offset: 0 },
            p: 1.0,
            family: WordFamily::Alphabet,
        };
        assert!(matches!(lift_variation(&cert, 1, 2), Err(ShiftError::CertificateRejected(_))));
    }

    #[test]
    fn regularity_classes() {
        use crate::shift::fixtures::golden_mean;
        let g = golden_mean();
        let f = FiniteRangePotential::zero(&g);
        let p0 = VariationCertificate { p: 0.0, ..VariationCertificate::zero(WordFamily::Alphabet) };
        assert_eq!(regularity_class(&f, &p0).unwrap(), RegularityClassTag::E0Plus);
        assert_eq!(regularity_class(&f, &VariationCertificate::zero(WordFamily::Alphabet)).unwrap(), RegularityClassTag::E1);
        let two_sided = FiniteRangePotential::from_fn(&g, 1, 1, |_| 0.0).unwrap();
        assert!(regularity_class(&two_sided, &p0).is_err());
    }

    fn arb_cert() -> impl Strategy<Value = VariationCertificate> {
        let prefix = prop::collection::vec(0.0f64..1.0, 0..6).prop_map(|mut v| {
            v.sort_by(|a, b| b.partial_cmp(a).unwrap());
            v.iter_mut().for_each(|x| *x += 1.0);
            v
        });
        let tail = prop_oneof![
            Just(VariationTail::Zero),
            (0.0f64..1.0, 0.0f64..0.95).prop_map(|(coef, ratio)| VariationTail::Geometric { coef, ratio }),
            (0.0f64..1.0, 2.2f64..5.0).prop_map(|(coef, exponent)| VariationTail::Polynomial { coef, exponent, offset: 0 }),
        ];
        (prefix, tail, prop_oneof![Just(0.0), Just(1.0)])
            .prop_map(|(prefix, tail, p)| VariationCertificate { prefix, tail, p, family: WordFamily::Alphabet })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn lifted_certificates_stay_accepted(cert in arb_cert(), l in 0usize..6, m in 0usize..6) {
            let before = check_variation_certificate(&cert);
            prop_assert!(before.accepted);
            let lifted = lift_variation(&cert, l, m).unwrap();
            let after = check_variation_certificate(&lifted);
            prop_assert!(after.accepted);
            for n in 1..40 {
                let expected = cert.omega(n + l).max(cert.omega(n + m));
                prop_assert!((lifted.omega(n) - expected).abs() <= 1e-14 * expected);
            }
            // Σ n^p ω̄_n ≤ Σ (n+L)^p ω_{n+L} + (n+M)^p ω_{n+M}; the right side is
            // bounded by twice the original sum.
            let upper = 2.0 * before.sum.unwrap().upper;
            prop_assert!(after.sum.unwrap().lower <= upper + 1e-12);
            let k = 400;
            let lhs: f64 = (1..k).map(|n| (n as f64).powf(cert.p) * lifted.omega(n)).sum();
            let rhs: f64 = (1..k)
                .map(|n| ((n + l) as f64).powf(cert.p) * cert.omega(n + l) + ((n + m) as f64).powf(cert.p) * cert.omega(n + m))
                .sum();
            prop_assert!(lhs <= rhs + 1e-12);
        }

        #[test]
        fn smaller_omega_keeps_acceptance(cert in arb_cert(), scale in 0.0f64..1.0) {
            let smaller = VariationCertificate {
                prefix: cert.prefix.iter().map(|x| x * scale).collect(),
                tail: match cert.tail {
                    VariationTail::Zero => VariationTail::Zero,
                    VariationTail::Geometric { coef, ratio } => VariationTail::Geometric { coef: coef * scale, ratio },
                    VariationTail::Polynomial { coef, exponent, offset } => VariationTail::Polynomial { coef: coef * scale, exponent, offset },
                },
                ..cert.clone()
            };
            prop_assert!(check_variation_certificate(&cert).accepted);
            prop_assert!(check_variation_certificate(&smaller).accepted);
        }
    }
}
