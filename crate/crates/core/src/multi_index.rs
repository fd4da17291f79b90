//! Multi-indices `L = (l_1, ..., l_n)` with `sum l_m = l`.

use std::fmt;

/// An element of `Z_l^n`. Sites are numbered from 0.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        Self(entries)
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn l(&self) -> usize {
        self.0.iter().sum()
    }

    /// `gamma(j)`: the site owning integration variable `j`.
    pub fn gamma(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(m, &lm)| std::iter::repeat_n(m, lm))
            .collect()
    }

    /// The block of integration variables owned by site `m`.
    pub fn block(&self, m: usize) -> std::ops::Range<usize> {
        let start: usize = self.0[..m].iter().sum();
        start..start + self.0[m]
    }

    /// `L <= L'`: every suffix sum `l_k + ... + l_n` is bounded by that of `L'`.
    pub fn precedes(&self, other: &MultiIndex) -> bool {
        debug_assert_eq!(self.n(), other.n());
        let (mut a, mut b) = (0usize, 0usize);
        for k in (1..self.n()).rev() {
            a += self.0[k];
            b += other.0[k];
            if a > b {
                return false;
            }
        }
        true
    }

    /// Entries in the order given by `order` (entry `k` of the result is `l_{order[k]}`).
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self(order.iter().map(|&m| self.0[m]).collect())
    }

    pub fn reversed(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// All of `Z_l^n` in lexicographic order.
pub fn enumerate(n: usize, l: usize) -> Vec<MultiIndex> {
    fn rec(n: usize, l: usize, prefix: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if n == 1 {
            prefix.push(l);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for a in 0..=l {
            prefix.push(a);
            rec(n - 1, l - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, l, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// Position of each multi-index in the lexicographic basis.
pub fn position(basis: &[MultiIndex], index: &MultiIndex) -> Option<usize> {
    basis.binary_search(index).ok()
}

/// `C(a, b)`, zero outside `0 <= b <= a`.
pub fn binomial(a: i64, b: i64) -> u64 {
    if b < 0 || a < 0 || b > a {
        return 0;
    }
    let b = b.min(a - b) as u64;
    let a = a as u64;
    (0..b).fold(1u64, |acc, k| acc * (a - k) / (k + 1))
}

/// Number of compositions of `total` into `parts` non-negative parts, `C(total + parts - 1, parts - 1)`.
///
/// This is the reading of every binomial exponent in the closed forms; it agrees with
/// `C(a, b)` whenever `b >= 0` and `a >= 0`, and gives `count(0, 0) = 1`.
pub fn count_compositions(total: i64, parts: i64) -> u64 {
    if total < 0 || parts < 0 {
        return 0;
    }
    if parts == 0 {
        return u64::from(total == 0);
    }
    binomial(total + parts - 1, parts - 1)
}

/// `dim W_l = C(n + l - 1, n - 1)`.
pub fn dimension(n: usize, l: usize) -> usize {
    count_compositions(l as i64, n as i64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let b = enumerate(3, 2);
        assert_eq!(b.len(), 6);
        assert_eq!(b.len(), dimension(3, 2));
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(b[0].entries(), &[0, 0, 2]);
        assert_eq!(b[5].entries(), &[2, 0, 0]);
        assert_eq!(enumerate(2, 0), vec![MultiIndex::new(vec![0, 0])]);
    }

    #[test]
    fn gamma_and_blocks() {
        let l = MultiIndex::new(vec![2, 0, 1]);
        assert_eq!(l.gamma(), vec![0, 0, 2]);
        assert_eq!(l.block(0), 0..2);
        assert_eq!(l.block(1), 2..2);
        assert_eq!(l.block(2), 2..3);
    }

    #[test]
    fn partial_order() {
        let a = MultiIndex::new(vec![1, 0]);
        let b = MultiIndex::new(vec![0, 1]);
        assert!(a.precedes(&b));
        assert!(!b.precedes(&a));
        assert!(a.precedes(&a));
        let c = MultiIndex::new(vec![0, 2, 0]);
        let d = MultiIndex::new(vec![1, 0, 1]);
        assert!(!c.precedes(&d) && !d.precedes(&c));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(2, 5), 0);
        assert_eq!(binomial(-1, 0), 0);
        assert_eq!(count_compositions(0, 0), 1);
        assert_eq!(count_compositions(1, 0), 0);
        assert_eq!(count_compositions(-1, 3), 0);
        assert_eq!(count_compositions(2, 3), 6);
    }
}
