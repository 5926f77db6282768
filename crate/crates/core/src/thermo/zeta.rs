//! Artin–Mazur zeta series `exp(Σ Z_n t^n / n)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::partition::PartitionFunctionTable;
use crate::error::{Result, ShiftError};

#[derive(Debug, Clone, PartialEq)]
pub enum ZetaSeries {
    /// Every `Z_n` was an exact integer count.
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

impl ZetaSeries {
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            ZetaSeries::Exact(c) => c.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect(),
            ZetaSeries::Float(c) => c.clone(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ZetaSeries::Exact(_))
    }
}

/// Coefficients `c_0..=c_order` via `n c_n = Σ_{k=1}^n Z_k c_{n-k}`.
pub fn zeta_series(t: &PartitionFunctionTable, order: usize) -> Result<ZetaSeries> {
    if !t.word.is_empty() {
        return Err(ShiftError::InvalidArgument("zeta series needs the table with the empty word".into()));
    }
    if t.entries.len() < order {
        return Err(ShiftError::TooFewEntries { found: t.entries.len(), needed: order });
    }
    let counts: Option<Vec<u128>> =
        t.entries[..order].iter().map(|e| e.exact.as_ref().and_then(|x| x.as_count())).collect();
    match counts {
        Some(z) => {
            let z: Vec<BigRational> = z.into_iter().map(|c| BigRational::from_integer(BigInt::from(c))).collect();
            let mut c = vec![BigRational::from_integer(BigInt::from(1))];
            for n in 1..=order {
                let mut s = BigRational::zero();
                for k in 1..=n {
                    s += &z[k - 1] * &c[n - k];
                }
                c.push(s / BigRational::from_integer(BigInt::from(n)));
            }
            Ok(ZetaSeries::Exact(c))
        }
        None => {
            let z: Vec<f64> = t.entries[..order].iter().map(|e| e.value).collect();
            let mut c = vec![1.0];
            for n in 1..=order {
                let s: f64 = (1..=n).map(|k| z[k - 1] * c[n - k]).sum();
                c.push(s / n as f64);
            }
            Ok(ZetaSeries::Float(c))
        }
    }
}
