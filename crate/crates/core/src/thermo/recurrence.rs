//! Recurrence classification of loop systems through the first-return
//! series `F(z) = Σ w_n z^n`.
//!
//! Every evaluation of `F` and `F'` returns an enclosure. Explicit loops
//! are summed directly; tails are bounded in closed form (geometric),
//! by integral comparison (polynomial) or by a resolvent solve (transfer).

use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use super::perron::{perron, spectral_radius};
use crate::error::{Result, ShiftError};
use crate::induction::{LoopSystem, LoopTail, TransferTail};

/// Bisection stops once the root is bracketed to this width.
pub const BISECTION_TOL: f64 = 1e-10;
/// `F(R)` counts as 1 when its enclosure lies within this distance.
pub const UNIT_TOL: f64 = 1e-10;
const POLY_EXPLICIT_TERMS: usize = 1_000_000;

fn ser_extended<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_infinite() {
        s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*x)
    }
}

/// A closed interval on the extended half-line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    #[serde(serialize_with = "ser_extended")]
    pub lower: f64,
    #[serde(serialize_with = "ser_extended")]
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Self {
        Interval { lower, upper }
    }

    pub fn point(x: f64) -> Self {
        Interval { lower: x, upper: x }
    }

    pub fn infinite() -> Self {
        Interval::point(f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    fn add(self, o: Interval) -> Interval {
        Interval { lower: self.lower + o.lower, upper: self.upper + o.upper }
    }

    fn widen(self, rel: f64) -> Interval {
        Interval { lower: self.lower * (1.0 - rel), upper: self.upper * (1.0 + rel) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecurrenceVerdict {
    Transient,
    NullRecurrent,
    PositiveRecurrent,
    Spr,
    Indeterminate,
}

impl RecurrenceVerdict {
    /// SPR systems are in particular positive recurrent.
    pub fn is_positive_recurrent(self) -> bool {
        matches!(self, RecurrenceVerdict::PositiveRecurrent | RecurrenceVerdict::Spr)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceClass {
    pub verdict: RecurrenceVerdict,
    /// Radius of convergence of the first-return series.
    #[serde(serialize_with = "ser_extended")]
    pub radius: f64,
    /// The least root `z*` of `F(z) = 1`, when defined.
    pub root: Option<Interval>,
    /// `λ = 1 / z*`.
    pub lambda: Option<Interval>,
    /// `F` and `F'` at `z*`, or at the radius when there is no root.
    pub f_value: Interval,
    pub f_derivative: Interval,
    pub f_at_radius: Interval,
    pub note: String,
}

impl RecurrenceClass {
    /// `log λ` as a point estimate.
    pub fn log_lambda(&self) -> Option<f64> {
        self.lambda.map(|l| l.midpoint().ln())
    }
}

/// `(F, F')` enclosures of one entry of the first-return matrix.
#[derive(Debug, Clone, Copy)]
struct Entry {
    value: Interval,
    derivative: Interval,
}

fn kahan(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for t in terms {
        let y = t - c;
        let s = sum + y;
        c = (s - sum) - y;
        sum = s;
    }
    sum
}

/// Enclosure of `Σ_{n > start} coef n^s z^n` for `z ≤ 1`.
fn power_series(start: usize, coef: f64, s: f64, z: f64) -> Interval {
    if coef == 0.0 || z == 0.0 {
        return Interval::point(0.0);
    }
    if z >= 1.0 {
        if s >= -1.0 {
            return Interval::infinite();
        }
        let n = start + POLY_EXPLICIT_TERMS;
        let partial = kahan((start + 1..=n).map(|k| (k as f64).powf(s)));
        let q = -s;
        let upper = (n as f64).powf(1.0 - q) / (q - 1.0);
        let lower = ((n + 1) as f64).powf(1.0 - q) / (q - 1.0);
        let slack = 4.0 * f64::EPSILON * (n as f64).sqrt() * partial;
        return Interval::new(coef * (partial + lower - slack), coef * (partial + upper + slack));
    }
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    let mut k = start + 1;
    let mut zk = z.powi(k as i32);
    loop {
        let t = (k as f64).powf(s) * zk;
        let y = t - c;
        let s2 = sum + y;
        c = (s2 - sum) - y;
        sum = s2;
        let next_ratio = ((k + 2) as f64 / (k + 1) as f64).powf(s.max(0.0)) * z;
        if next_ratio < 1.0 {
            let t_next = ((k + 1) as f64).powf(s) * zk * z;
            let rem = t_next / (1.0 - next_ratio);
            if rem <= 1e-17 * sum || k - start >= POLY_EXPLICIT_TERMS {
                let slack = 4.0 * f64::EPSILON * ((k - start) as f64).sqrt() * sum;
                return Interval::new(coef * (sum - slack), coef * (sum + rem + slack));
            }
        }
        k += 1;
        zk *= z;
        if zk == 0.0 {
            return Interval::new(coef * sum, coef * sum * (1.0 + 1e-15));
        }
    }
}

/// Restricts a transfer tail to states reachable from the entry and
/// co-reachable to the exit.
fn trim(t: &TransferTail) -> TransferTail {
    let n = t.entry.len();
    let reach = |start: Vec<bool>, forward: bool| -> Vec<bool> {
        let mut seen = start;
        let mut stack: Vec<usize> = (0..n).filter(|&i| seen[i]).collect();
        while let Some(u) = stack.pop() {
            for v in 0..n {
                let edge = if forward { t.matrix[u][v] } else { t.matrix[v][u] };
                if edge > 0.0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    };
    let fwd = reach(t.entry.iter().map(|&x| x > 0.0).collect(), true);
    let bwd = reach(t.exit.iter().map(|&x| x > 0.0).collect(), false);
    let keep: Vec<usize> = (0..n).filter(|&i| fwd[i] && bwd[i]).collect();
    TransferTail {
        entry: keep.iter().map(|&i| t.entry[i]).collect(),
        matrix: keep.iter().map(|&i| keep.iter().map(|&j| t.matrix[i][j]).collect()).collect(),
        exit: keep.iter().map(|&i| t.exit[i]).collect(),
    }
}

fn transfer_radius(t: &TransferTail) -> Result<f64> {
    if t.entry.is_empty() {
        return Ok(f64::INFINITY);
    }
    let (_, hi) = spectral_radius(&t.matrix)?;
    Ok(if hi == 0.0 { f64::INFINITY } else { 1.0 / hi })
}

/// `Σ_{n > start} z^n e Q^{n-start-1} x` and its derivative, for a trimmed tail.
fn transfer_series(start: usize, t: &TransferTail, z: f64, radius: f64) -> Entry {
    let d = t.entry.len();
    if d == 0 || z == 0.0 {
        return Entry { value: Interval::point(0.0), derivative: Interval::point(0.0) };
    }
    if z >= radius {
        return Entry { value: Interval::infinite(), derivative: Interval::infinite() };
    }
    let q = DMatrix::from_fn(d, d, |i, j| t.matrix[i][j]);
    let a = DMatrix::<f64>::identity(d, d) - &q * z;
    let lu = a.lu();
    let exit = DVector::from_vec(t.exit.clone());
    let entry = DVector::from_vec(t.entry.clone());
    let (v, w) = match lu.solve(&exit) {
        Some(v) => {
            let qv = &q * &v;
            let w = lu.solve(&qv).unwrap_or(qv);
            (v, w)
        }
        None => return Entry { value: Interval::infinite(), derivative: Interval::infinite() },
    };
    let ev = entry.dot(&v).max(0.0);
    let ew = entry.dot(&w).max(0.0);
    let zl = z.powi(start as i32);
    let value = zl * z * ev;
    let derivative = (start as f64 + 1.0) * zl * ev + zl * z * ew;
    let rel = 64.0 * (d as f64 + start as f64) * f64::EPSILON / (1.0 - z / radius).max(1e-300);
    Entry { value: Interval::point(value).widen(rel), derivative: Interval::point(derivative).widen(rel) }
}

struct Series<'a> {
    ls: &'a LoopSystem,
    trimmed: Vec<Vec<Option<(TransferTail, f64)>>>,
    radius: f64,
    truncated: bool,
}

impl<'a> Series<'a> {
    fn new(ls: &'a LoopSystem) -> Result<Self> {
        let k = ls.vertex_count();
        let mut trimmed = vec![vec![None; k]; k];
        let mut radius = f64::INFINITY;
        let mut truncated = false;
        for i in 0..k {
            for j in 0..k {
                match ls.tail(i, j) {
                    LoopTail::Zero => {}
                    LoopTail::Geometric { coef, ratio } => {
                        if *coef > 0.0 && *ratio > 0.0 {
                            radius = radius.min(1.0 / ratio);
                        }
                    }
                    LoopTail::Polynomial { coef, .. } => {
                        if *coef > 0.0 {
                            radius = radius.min(1.0);
                        }
                    }
                    LoopTail::Transfer(t) => {
                        let tt = trim(t);
                        let r = transfer_radius(&tt)?;
                        radius = radius.min(r);
                        trimmed[i][j] = Some((tt, r));
                    }
                    LoopTail::Truncated => truncated = true,
                }
            }
        }
        Ok(Series { ls, trimmed, radius, truncated })
    }

    fn entry(&self, i: usize, j: usize, z: f64) -> Entry {
        let mut value = 0.0;
        let mut derivative = 0.0;
        let mut terms = 0usize;
        for (len, w) in self.ls.explicit_weights(i, j) {
            value += w * z.powi(len as i32);
            derivative += w * len as f64 * z.powi(len as i32 - 1);
            terms += 1;
        }
        let rel = (self.ls.explicit_len as f64 + terms as f64 + 4.0) * f64::EPSILON;
        let mut e = Entry { value: Interval::point(value).widen(rel), derivative: Interval::point(derivative).widen(rel) };
        let start = self.ls.explicit_len;
        let tail = match self.ls.tail(i, j) {
            LoopTail::Zero => None,
            LoopTail::Geometric { coef, ratio } => {
                let x = ratio * z;
                if *coef == 0.0 || x == 0.0 {
                    None
                } else if x >= 1.0 {
                    Some(Entry { value: Interval::infinite(), derivative: Interval::infinite() })
                } else {
                    let l = start as f64;
                    let v = coef * x.powi(start as i32 + 1) / (1.0 - x);
                    let dx = ((l + 1.0) * x.powi(start as i32) * (1.0 - x) + x.powi(start as i32 + 1)) / (1.0 - x).powi(2);
                    let rel = 16.0 * (l + 4.0) * f64::EPSILON / (1.0 - x);
                    Some(Entry { value: Interval::point(v).widen(rel), derivative: Interval::point(coef * ratio * dx).widen(rel) })
                }
            }
            LoopTail::Polynomial { coef, exponent } => {
                let value = power_series(start, *coef, -exponent, z);
                let derivative = if z == 0.0 {
                    Interval::point(if start == 0 { *coef } else { 0.0 })
                } else {
                    let d = power_series(start, *coef, 1.0 - exponent, z);
                    Interval::new(d.lower / z, d.upper / z)
                };
                Some(Entry { value, derivative })
            }
            LoopTail::Transfer(_) => {
                let (t, r) = self.trimmed[i][j].as_ref().expect("trimmed in new");
                Some(transfer_series(start, t, z, *r))
            }
            LoopTail::Truncated => Some(Entry {
                value: Interval::new(0.0, f64::INFINITY),
                derivative: Interval::new(0.0, f64::INFINITY),
            }),
        };
        if let Some(t) = tail {
            e.value = e.value.add(t.value);
            e.derivative = e.derivative.add(t.derivative);
        }
        e
    }

    fn matrix(&self, z: f64) -> Vec<Vec<Entry>> {
        let k = self.ls.vertex_count();
        (0..k).map(|i| (0..k).map(|j| self.entry(i, j, z)).collect()).collect()
    }

    /// Enclosure of the Perron root of the first-return matrix and of its
    /// derivative.
    fn eval(&self, z: f64) -> Result<Entry> {
        let m = self.matrix(z);
        match m.len() {
            1 => Ok(m[0][0]),
            2 => {
                let pick = |lower: bool| -> [[f64; 2]; 2] {
                    let g = |e: &Entry| if lower { e.value.lower } else { e.value.upper };
                    [[g(&m[0][0]), g(&m[0][1])], [g(&m[1][0]), g(&m[1][1])]]
                };
                let value = Interval::new(rho2(pick(true)), rho2(pick(false)));
                let derivative = perron_derivative(&m)?;
                Ok(Entry { value, derivative })
            }
            k => Err(ShiftError::InvalidArgument(format!("loop systems with {k} distinguished vertices are not supported"))),
        }
    }
}

/// Spectral radius of a nonnegative 2×2 matrix on the extended reals.
fn rho2(a: [[f64; 2]; 2]) -> f64 {
    let [[p, b], [c, d]] = a;
    let bc = if b == 0.0 || c == 0.0 { 0.0 } else { b * c };
    if p.is_infinite() || d.is_infinite() || bc.is_infinite() {
        return f64::INFINITY;
    }
    0.5 * (p + d) + (0.25 * (p - d).powi(2) + bc).sqrt()
}

/// `l^T F' r / l^T r` at the midpoint matrix.
fn perron_derivative(m: &[Vec<Entry>]) -> Result<Interval> {
    let k = m.len();
    let mid: Vec<Vec<f64>> = m.iter().map(|row| row.iter().map(|e| e.value.midpoint()).collect()).collect();
    if mid.iter().flatten().any(|x| !x.is_finite()) {
        return Ok(Interval::infinite());
    }
    let p = match perron(&mid) {
        Ok(p) => p,
        Err(_) => return Ok(Interval::new(0.0, f64::INFINITY)),
    };
    let norm: f64 = (0..k).map(|i| p.left[i] * p.right[i]).sum();
    let mut lo = 0.0;
    let mut hi = 0.0;
    for i in 0..k {
        for j in 0..k {
            let c = p.left[i] * p.right[j] / norm;
            if c > 0.0 {
                lo += c * m[i][j].derivative.lower;
                hi += c * m[i][j].derivative.upper;
            }
        }
    }
    Ok(Interval::new(lo * (1.0 - 1e-9), hi * (1.0 + 1e-9)))
}

/// Classifies a weighted loop system. Weights are the exponentiated
/// Birkhoff sums of the potential along each loop, so the potential is
/// folded into the system (see [`crate::induction::lift_potential`]).
pub fn recurrence_classify(ls: &LoopSystem) -> Result<RecurrenceClass> {
    let series = Series::new(ls)?;
    let radius = series.radius;
    let at_radius = if radius.is_finite() { series.eval(radius)? } else { Entry { value: Interval::infinite(), derivative: Interval::infinite() } };
    let at_radius = if radius.is_infinite() && ls.loops.is_empty() && ls.all_tails_zero() {
        Entry { value: Interval::point(0.0), derivative: Interval::point(0.0) }
    } else {
        at_radius
    };
    let base = |verdict, root: Option<Interval>, at: Entry, note: String| RecurrenceClass {
        verdict,
        radius,
        root,
        lambda: root.map(|r| Interval::new(1.0 / r.upper, 1.0 / r.lower)),
        f_value: at.value,
        f_derivative: at.derivative,
        f_at_radius: at_radius.value,
        note,
    };
    if series.truncated {
        return Ok(base(
            RecurrenceVerdict::Indeterminate,
            None,
            at_radius,
            "a truncated tail leaves the radius of convergence unknown".into(),
        ));
    }
    let fr = at_radius.value;
    if fr.lower > 1.0 {
        // the root lies strictly inside the disk
        let mut hi = if radius.is_finite() { radius } else { 1.0 };
        let mut found = false;
        for k in 1..=200 {
            let z = if radius.is_finite() { radius * (1.0 - 0.5f64.powi(k)) } else { hi };
            if series.eval(z)?.value.lower > 1.0 {
                hi = z;
                found = true;
                break;
            }
            if radius.is_infinite() {
                hi *= 2.0;
            }
        }
        if !found {
            return Ok(base(RecurrenceVerdict::Indeterminate, None, at_radius, "could not locate F(z) > 1 inside the disk".into()));
        }
        let mut lo = 0.0f64;
        while hi - lo > BISECTION_TOL * hi.max(1e-300) {
            let mid = 0.5 * (lo + hi);
            let v = series.eval(mid)?.value;
            if v.lower > 1.0 {
                hi = mid;
            } else if v.upper < 1.0 {
                lo = mid;
            } else {
                break;
            }
        }
        let (elo, ehi) = (series.eval(lo)?, series.eval(hi)?);
        let at_root = Entry {
            value: Interval::new(elo.value.lower, ehi.value.upper),
            derivative: Interval::new(elo.derivative.lower, ehi.derivative.upper),
        };
        return Ok(base(RecurrenceVerdict::Spr, Some(Interval::new(lo, hi)), at_root, "F(z*) = 1 with z* < R".into()));
    }
    if fr.upper < 1.0 {
        return Ok(base(RecurrenceVerdict::Transient, None, at_radius, "F(R) < 1".into()));
    }
    if fr.lower >= 1.0 - UNIT_TOL && fr.upper <= 1.0 + UNIT_TOL {
        let root = Some(Interval::point(radius));
        let d = at_radius.derivative;
        if d.lower.is_infinite() {
            return Ok(base(RecurrenceVerdict::NullRecurrent, root, at_radius, "F(R) = 1 and F'(R) = ∞".into()));
        }
        if d.upper.is_finite() {
            return Ok(base(RecurrenceVerdict::PositiveRecurrent, root, at_radius, "F(R) = 1 and F'(R) < ∞".into()));
        }
    }
    Ok(base(RecurrenceVerdict::Indeterminate, None, at_radius, "bounds on F(R) or F'(R) do not separate the cases".into()))
}
