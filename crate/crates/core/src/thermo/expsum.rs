//! Formal sums `Σ c_i exp(q_i)` with rational exponents and integer
//! multiplicities, used to compare partition functions exactly.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;

use crate::potential::Rational;

/// Exponents are stored as integers over a common denominator.
#[derive(Clone, Debug, Default)]
pub struct ExpSum {
    denom: i64,
    terms: BTreeMap<i64, u128>,
}

impl ExpSum {
    pub fn zero() -> Self {
        ExpSum { denom: 1, terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::term(Rational::from_integer(0), 1)
    }

    /// `count * exp(exponent)`.
    pub fn term(exponent: Rational, count: u128) -> Self {
        let mut s = Self::zero();
        s.add_term(exponent, count);
        s
    }

    fn rescale(&mut self, denom: i64) {
        if denom == self.denom {
            return;
        }
        let factor = denom / self.denom;
        self.terms = std::mem::take(&mut self.terms).into_iter().map(|(k, c)| (k * factor, c)).collect();
        self.denom = denom;
    }

    pub fn add_term(&mut self, exponent: Rational, count: u128) {
        if count == 0 {
            return;
        }
        let denom = self.denom.lcm(exponent.denom());
        self.rescale(denom);
        let key = exponent.numer() * (denom / exponent.denom());
        *self.terms.entry(key).or_insert(0) += count;
    }

    pub fn add_assign(&mut self, other: &ExpSum) {
        let denom = self.denom.lcm(&other.denom);
        self.rescale(denom);
        let factor = denom / other.denom;
        for (&k, &c) in &other.terms {
            *self.terms.entry(k * factor).or_insert(0) += c;
        }
    }

    pub fn mul(&self, other: &ExpSum) -> ExpSum {
        let denom = self.denom.lcm(&other.denom);
        let (fa, fb) = (denom / self.denom, denom / other.denom);
        let mut terms = BTreeMap::new();
        for (&ka, &ca) in &self.terms {
            for (&kb, &cb) in &other.terms {
                *terms.entry(ka * fa + kb * fb).or_insert(0) += ca * cb;
            }
        }
        ExpSum { denom, terms }
    }

    /// Multiplies every term by `exp(shift)`.
    pub fn shifted(&self, shift: Rational) -> ExpSum {
        let mut out = ExpSum::zero();
        for (q, c) in self.terms() {
            out.add_term(q + shift, c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of multiplicities.
    pub fn multiplicity(&self) -> u128 {
        self.terms.values().sum()
    }

    /// `(exponent, multiplicity)` pairs in increasing exponent order.
    pub fn terms(&self) -> Vec<(Rational, u128)> {
        self.terms.iter().map(|(&k, &c)| (Rational::new(k, self.denom), c)).collect()
    }

    /// The integer value when every exponent is 0.
    pub fn as_count(&self) -> Option<u128> {
        match self.terms.len() {
            0 => Some(0),
            1 => self.terms.get(&0).copied(),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms.iter().map(|(&k, &c)| c as f64 * (k as f64 / self.denom as f64).exp()).sum()
    }
}

impl PartialEq for ExpSum {
    fn eq(&self, other: &Self) -> bool {
        self.terms() == other.terms()
    }
}

impl Eq for ExpSum {}

impl fmt::Display for ExpSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms().iter().map(|(q, c)| format!("{c}·e^({q})")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn arithmetic_and_equality() {
        let mut a = ExpSum::term(q(1, 2), 2);
        a.add_term(q(1, 3), 1);
        let mut b = ExpSum::term(q(2, 6), 1);
        b.add_term(q(3, 6), 2);
        assert_eq!(a, b);
        let sq = a.mul(&a);
        // (2e^{1/2} + e^{1/3})^2 = 4e + 4e^{5/6} + e^{2/3}
        let mut expected = ExpSum::term(q(1, 1), 4);
        expected.add_term(q(5, 6), 4);
        expected.add_term(q(2, 3), 1);
        assert_eq!(sq, expected);
        assert!((sq.to_f64() - a.to_f64().powi(2)).abs() < 1e-12);
        assert_eq!(ExpSum::term(q(0, 1), 7).as_count(), Some(7));
        assert_eq!(ExpSum::zero().as_count(), Some(0));
        assert_eq!(a.as_count(), None);
        assert_eq!(a.shifted(q(-1, 2)).terms(), vec![(q(-1, 6), 1), (q(0, 1), 2)]);
    }
}
