//! Eventually periodic points `…ℓℓ core rr…`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShiftError};
use crate::shift::{FiniteGraph, Word};

/// `x[start - 1 - j] = left[(|left| - 1 - j) mod |left|]`, `core` sits at
/// `start..start + |core|`, and `right` repeats from there on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventuallyPeriodicPoint {
    pub left: Word,
    pub core: Word,
    pub right: Word,
    pub start: i64,
}

fn primitive_root(w: &[usize]) -> Word {
    let n = w.len();
    (1..=n)
        .find(|&p| n % p == 0 && (0..n).all(|i| w[i] == w[i % p]))
        .map(|p| w[..p].to_vec())
        .expect("p = n always works")
}

/// Whether `w` occurs in the bi-infinite repetition of `period`.
fn occurs_in_periodic(period: &[usize], w: &[usize]) -> bool {
    if w.is_empty() {
        return true;
    }
    let reps = w.len() / period.len() + 2;
    let text: Word = period.iter().copied().cycle().take(reps * period.len()).collect();
    text.windows(w.len()).any(|s| s == w)
}

impl EventuallyPeriodicPoint {
    pub fn new(left: Word, core: Word, right: Word, start: i64) -> Result<Self> {
        if left.is_empty() || right.is_empty() {
            return Err(ShiftError::InvalidArgument("periodic parts must be nonempty".into()));
        }
        Ok(EventuallyPeriodicPoint { left, core, right, start })
    }

    /// The periodic point `w^∞` with `x[0] = w[0]`.
    pub fn periodic(w: &[usize]) -> Result<Self> {
        Self::new(w.to_vec(), Vec::new(), w.to_vec(), 0)
    }

    pub fn at(&self, i: i64) -> usize {
        let end = self.start + self.core.len() as i64;
        if i < self.start {
            let l = self.left.len() as i64;
            let j = self.start - 1 - i;
            self.left[(l - 1 - j).rem_euclid(l) as usize]
        } else if i < end {
            self.core[(i - self.start) as usize]
        } else {
            self.right[((i - end) as usize) % self.right.len()]
        }
    }

    /// `x[from..from + len]`.
    pub fn window(&self, from: i64, len: usize) -> Word {
        (0..len as i64).map(|j| self.at(from + j)).collect()
    }

    /// The left shift: `(Sx)[i] = x[i + 1]`.
    pub fn shift(&self) -> Self {
        let mut y = self.clone();
        y.start -= 1;
        y
    }

    pub fn is_admissible(&self, g: &FiniteGraph) -> bool {
        let span = self.left.len() + self.core.len() + self.right.len() + 2;
        g.is_cycle(&self.left) && g.is_cycle(&self.right) && g.is_word(&self.window(self.start - self.left.len() as i64 - 1, span))
    }

    /// `w` occurs infinitely often in both directions.
    pub fn sees_infinitely_often(&self, w: &[usize]) -> bool {
        occurs_in_periodic(&self.left, w) && occurs_in_periodic(&self.right, w)
    }

    /// Normal form: primitive periods, shortest core, and for periodic
    /// points `0 <= start < period`. Two points are equal iff their
    /// normal forms are.
    pub fn canonical(&self) -> Self {
        let mut left = primitive_root(&self.left);
        let mut right = primitive_root(&self.right);
        let mut core = self.core.clone();
        let mut start = self.start;
        while let Some(&c) = core.last() {
            if c != right[right.len() - 1] {
                break;
            }
            right.rotate_right(1);
            core.pop();
        }
        while !core.is_empty() && core[0] == left[0] {
            left.rotate_left(1);
            core.remove(0);
            start += 1;
        }
        if core.is_empty() && left == right {
            // a periodic point: moving the boundary by whole periods changes nothing
            start = start.rem_euclid(left.len() as i64);
        }
        EventuallyPeriodicPoint { left, core, right, start }
    }

    pub fn same_point(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_and_shift() {
        let x = EventuallyPeriodicPoint::new(vec![0, 1], vec![2], vec![3], 0).unwrap();
        assert_eq!(x.window(-4, 7), vec![0, 1, 0, 1, 2, 3, 3]);
        let y = x.shift();
        assert_eq!(y.window(-5, 7), vec![0, 1, 0, 1, 2, 3, 3]);
        assert_eq!(y.at(-1), 2);
    }

    #[test]
    fn canonical_forms_agree() {
        let a = EventuallyPeriodicPoint::new(vec![0, 1, 0, 1], vec![0, 1, 2, 3], vec![3, 3], 0).unwrap();
        let b = EventuallyPeriodicPoint::new(vec![0, 1], vec![2], vec![3], 2).unwrap();
        assert_eq!(a.canonical(), b.canonical());
        let p = EventuallyPeriodicPoint::periodic(&[1, 0]).unwrap();
        let q = EventuallyPeriodicPoint::new(vec![1, 0], vec![1, 0, 1, 0], vec![1, 0], 4).unwrap();
        assert!(p.same_point(&q));
        assert!(!p.same_point(&p.shift()));
        assert!(p.same_point(&p.shift().shift()));
    }

    #[test]
    fn magic_domain() {
        let x = EventuallyPeriodicPoint::new(vec![0], vec![1], vec![0, 1], 0).unwrap();
        assert!(!x.sees_infinitely_often(&[1]));
        assert!(x.sees_infinitely_often(&[0]));
        assert!(EventuallyPeriodicPoint::periodic(&[1, 0]).unwrap().sees_infinitely_often(&[0, 1, 0]));
    }
}
