use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

use super::{Factorization, Limits, Sieve};
use crate::{Error, Result};

/// `S(x, y)`: the `y`-smooth integers `n ≤ x`, streamed in ascending order.
#[derive(Debug, Clone)]
pub struct SmoothSet<'a> {
    x: u128,
    y: u64,
    primes: &'a [u64],
    count: u128,
}

impl<'a> SmoothSet<'a> {
    pub fn x(&self) -> u128 {
        self.x
    }

    pub fn y(&self) -> u64 {
        self.y
    }

    /// `Ψ(x, y)`.
    pub fn len(&self) -> u128 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// The primes `p ≤ y` the set is built over.
    pub fn primes(&self) -> &'a [u64] {
        self.primes
    }

    pub fn iter(&self) -> SmoothIter<'a> {
        SmoothIter::new(self.x, self.primes)
    }
}

impl<'a> IntoIterator for &SmoothSet<'a> {
    type Item = Factorization;
    type IntoIter = SmoothIter<'a>;

    fn into_iter(self) -> SmoothIter<'a> {
        self.iter()
    }
}

/// Enumerates `S(x, y)` over the primes of `sieve`, which must reach
/// `min(x, y)`.
///
/// Fails with a resource error when `Ψ(x, y)` exceeds the enumeration
/// ceiling; the count is established up front by a depth-first pass that
/// stops at the ceiling.
pub fn enumerate_smooth<'a>(x: u128, y: u64, sieve: &'a Sieve, limits: &Limits) -> Result<SmoothSet<'a>> {
    if x < 1 {
        return Err(Error::Domain { what: "enumeration needs x >= 1", value: x as f64 });
    }
    if y < 2 {
        return Err(Error::Domain { what: "enumeration needs y >= 2", value: y as f64 });
    }
    let primes = usable_primes(x, y, sieve)?;
    let count = count_capped(x, primes, limits.enumeration_ceiling).ok_or(Error::Resource {
        what: "smooth enumeration size",
        limit: limits.enumeration_ceiling,
    })?;
    Ok(SmoothSet { x, y, primes, count })
}

/// The primes `p ≤ min(x, y)`.
pub(crate) fn usable_primes(x: u128, y: u64, sieve: &Sieve) -> Result<&[u64]> {
    let bound = if x < y as u128 { x as u64 } else { y };
    sieve.primes_up_to(bound)
}

/// Counts `n ≤ x` composed of `primes`, giving up once the count passes `cap`.
pub(crate) fn count_capped(x: u128, primes: &[u64], cap: u128) -> Option<u128> {
    fn walk(x: u128, primes: &[u64], start: usize, count: &mut u128, cap: u128) -> bool {
        for (i, &p) in primes.iter().enumerate().skip(start) {
            let m = x / p as u128;
            if m == 0 {
                break;
            }
            *count += 1;
            if *count > cap || !walk(m, primes, i, count, cap) {
                return false;
            }
        }
        true
    }
    let mut count = 1u128;
    if count > cap {
        return None;
    }
    walk(x, primes, 0, &mut count, cap).then_some(count)
}

struct Node {
    fac: Factorization,
    /// Index of `P(value)` in the prime list.
    idx: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.fac.value() == other.fac.value()
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // reversed: BinaryHeap is a max-heap and we pop the smallest value
    fn cmp(&self, other: &Self) -> Ordering {
        other.fac.value().cmp(&self.fac.value())
    }
}

/// Ascending stream over a smooth set.
///
/// Each `n > 1` is reached from `n / P(n)` by multiplying by `P(n)`. A node
/// `m·p_j` spawns its first child `m·p_j·p_j` and its next sibling
/// `m·p_{j+1}`, so the heap grows by at most one entry per item emitted.
pub struct SmoothIter<'a> {
    x: u128,
    primes: &'a [u64],
    heap: BinaryHeap<Node>,
    emitted_one: bool,
}

impl<'a> SmoothIter<'a> {
    fn new(x: u128, primes: &'a [u64]) -> Self {
        let mut heap = BinaryHeap::new();
        if let Some(&p) = primes.first() {
            if p as u128 <= x {
                let mut fac = Factorization::one();
                fac.push_prime(p);
                heap.push(Node { fac, idx: 0 });
            }
        }
        Self { x, primes, heap, emitted_one: x < 1 }
    }
}

impl Iterator for SmoothIter<'_> {
    type Item = Factorization;

    fn next(&mut self) -> Option<Factorization> {
        if !self.emitted_one {
            self.emitted_one = true;
            return Some(Factorization::one());
        }
        let Node { fac, idx } = self.heap.pop()?;
        let p = self.primes[idx];
        if let Some(v) = fac.value().checked_mul(p as u128) {
            if v <= self.x {
                let mut child = fac.clone();
                child.push_prime(p);
                self.heap.push(Node { fac: child, idx });
            }
        }
        if let Some(&q) = self.primes.get(idx + 1) {
            let parent_value = fac.value() / p as u128;
            if let Some(v) = parent_value.checked_mul(q as u128) {
                if v <= self.x {
                    let mut sibling = fac.clone();
                    sibling.pop_largest();
                    sibling.push_prime(q);
                    self.heap.push(Node { fac: sibling, idx: idx + 1 });
                }
            }
        }
        Some(fac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn values(x: u128, y: u64) -> Vec<u128> {
        let sieve = Sieve::new(1000).unwrap();
        let set = enumerate_smooth(x, y, &sieve, &Limits::DEFAULT).unwrap();
        let v: Vec<u128> = set.iter().map(|f| f.value()).collect();
        assert_eq!(v.len() as u128, set.len());
        v
    }

    #[test]
    fn three_smooth_up_to_ten() {
        assert_eq!(values(10, 3), [1, 2, 3, 4, 6, 8, 9]);
    }

    #[test]
    fn three_smooth_up_to_hundred_by_double_loop() {
        let mut oracle = Vec::new();
        let mut a = 1u128;
        while a <= 100 {
            let mut b = a;
            while b <= 100 {
                oracle.push(b);
                b *= 3;
            }
            a *= 2;
        }
        oracle.sort_unstable();
        assert_eq!(oracle.len(), 20);
        assert_eq!(values(100, 3), oracle);
    }

    #[test]
    fn no_constraint_when_y_at_least_x() {
        let v = values(500, 997);
        assert_eq!(v, (1..=500).collect::<Vec<_>>());
        assert_eq!(values(1, 2), [1]);
    }

    #[test]
    fn factorizations_multiply_back_and_respect_y() {
        let sieve = Sieve::new(100).unwrap();
        let set = enumerate_smooth(5000, 13, &sieve, &Limits::DEFAULT).unwrap();
        let mut prev = 0;
        for f in &set {
            let product: u128 = f.factors().iter().map(|pp| (pp.p as u128).pow(pp.exp)).product();
            assert_eq!(product, f.value());
            assert!(f.largest_prime() <= 13);
            assert!(f.value() > prev);
            prev = f.value();
        }
    }

    #[test]
    fn enumeration_ceiling() {
        let sieve = Sieve::new(100).unwrap();
        let limits = Limits { enumeration_ceiling: 19, ..Limits::DEFAULT };
        assert!(enumerate_smooth(100, 3, &sieve, &limits).unwrap_err().is_resource());
        let limits = Limits { enumeration_ceiling: 20, ..Limits::DEFAULT };
        assert_eq!(enumerate_smooth(100, 3, &sieve, &limits).unwrap().len(), 20);
    }

    #[test]
    fn short_sieve_is_rejected() {
        let sieve = Sieve::new(10).unwrap();
        assert!(enumerate_smooth(1000, 20, &sieve, &Limits::DEFAULT).is_err());
        assert!(enumerate_smooth(1000, 10, &sieve, &Limits::DEFAULT).is_ok());
        // y beyond the sieve is fine when x itself is small
        assert!(enumerate_smooth(7, 20, &sieve, &Limits::DEFAULT).is_ok());
    }
}
