use alloc::collections::BTreeMap;

use super::smooth::{count_capped, usable_primes};
use super::{Limits, Sieve};
use crate::{Error, Result};

fn check_args(x: u128, y: u64) -> Result<()> {
    if x < 1 {
        return Err(Error::Domain { what: "psi needs x >= 1", value: x as f64 });
    }
    if y < 2 {
        return Err(Error::Domain { what: "psi needs y >= 2", value: y as f64 });
    }
    Ok(())
}

/// `Ψ(x, y)` by direct enumeration of `S(x, y)`.
pub fn psi_exact(x: u128, y: u64, sieve: &Sieve, limits: &Limits) -> Result<u128> {
    check_args(x, y)?;
    let primes = usable_primes(x, y, sieve)?;
    count_capped(x, primes, limits.enumeration_ceiling)
        .ok_or(Error::Resource { what: "smooth enumeration size", limit: limits.enumeration_ceiling })
}

/// `Ψ(x, y)` from the identity `Ψ(x, y) = 1 + Σ_{p ≤ y} Ψ(x/p, p)`, memoized
/// on `(⌊x⌋, π(y))`. Independent of the enumeration behind [`psi_exact`].
pub fn psi_recursive(x: u128, y: u64, sieve: &Sieve, limits: &Limits) -> Result<u128> {
    check_args(x, y)?;
    let primes = usable_primes(x, y, sieve)?;
    let bound = x.min(y as u128);
    let mut memo = Memo { primes, bound, table: BTreeMap::new(), ceiling: limits.memo_ceiling };
    memo.psi(x, primes.len())
}

struct Memo<'a> {
    /// Every prime up to `bound` is in `primes`.
    primes: &'a [u64],
    bound: u128,
    table: BTreeMap<(u128, usize), u128>,
    ceiling: usize,
}

impl Memo<'_> {
    /// Count of `n ≤ x` whose prime factors lie among the first `k` primes.
    fn psi(&mut self, x: u128, k: usize) -> Result<u128> {
        if x == 0 {
            return Ok(0);
        }
        // only primes ≤ x matter
        let k = k.min(self.primes[..k].partition_point(|&p| p as u128 <= x));
        match k {
            0 => return Ok(1),
            1 => return Ok(ilog(x, self.primes[0]) + 1),
            _ => {}
        }
        // every prime ≤ x is allowed, so every n ≤ x counts
        let all_allowed = match self.primes.get(k) {
            Some(&next) => next as u128 > x,
            None => x <= self.bound,
        };
        if all_allowed {
            return Ok(x);
        }
        if let Some(&v) = self.table.get(&(x, k)) {
            return Ok(v);
        }
        let mut total = 1u128;
        for i in 0..k {
            total += self.psi(x / self.primes[i] as u128, i + 1)?;
        }
        if self.table.len() >= self.ceiling {
            return Err(Error::Resource { what: "psi memo table", limit: self.ceiling as u128 });
        }
        self.table.insert((x, k), total);
        Ok(total)
    }
}

/// `⌊log_b x⌋` for `x ≥ 1`.
fn ilog(x: u128, b: u64) -> u128 {
    let b = b as u128;
    let mut k = 0;
    let mut v = x;
    while v >= b {
        v /= b;
        k += 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sieve() -> Sieve {
        Sieve::new(1000).unwrap()
    }

    #[test]
    fn small_values() {
        let s = sieve();
        let l = Limits::DEFAULT;
        assert_eq!(psi_exact(10, 3, &s, &l).unwrap(), 7);
        assert_eq!(psi_recursive(10, 3, &s, &l).unwrap(), 7);
        assert_eq!(psi_exact(100, 2, &s, &l).unwrap(), 7);
        assert_eq!(psi_recursive(100, 2, &s, &l).unwrap(), 7);
        assert_eq!(psi_exact(100, 3, &s, &l).unwrap(), 20);
        assert_eq!(psi_recursive(100, 3, &s, &l).unwrap(), 20);
        for y in [2, 3, 10, 1000] {
            assert_eq!(psi_recursive(1, y, &s, &l).unwrap(), 1);
            assert_eq!(psi_exact(1, y, &s, &l).unwrap(), 1);
        }
    }

    #[test]
    fn brute_force_agreement_on_small_grid() {
        let s = sieve();
        let l = Limits::DEFAULT;
        for x in [1u128, 2, 17, 64, 99, 360, 1000] {
            for y in [2u64, 3, 5, 6, 7, 11, 30, 97, 1000] {
                let brute = (1..=x)
                    .filter(|&n| {
                        let mut m = n;
                        for &p in s.primes_up_to(y).unwrap() {
                            while m % p as u128 == 0 {
                                m /= p as u128;
                            }
                        }
                        m == 1
                    })
                    .count() as u128;
                assert_eq!(psi_exact(x, y, &s, &l).unwrap(), brute, "x={x} y={y}");
                assert_eq!(psi_recursive(x, y, &s, &l).unwrap(), brute, "x={x} y={y}");
            }
        }
    }

    #[test]
    fn memo_ceiling_is_enforced() {
        let s = sieve();
        let limits = Limits { memo_ceiling: 3, ..Limits::DEFAULT };
        assert!(psi_recursive(1_000_000, 100, &s, &limits).unwrap_err().is_resource());
    }

    #[test]
    fn bad_arguments() {
        let s = sieve();
        assert!(psi_exact(0, 3, &s, &Limits::DEFAULT).is_err());
        assert!(psi_recursive(10, 1, &s, &Limits::DEFAULT).is_err());
    }

    #[test]
    fn ilog_edges() {
        assert_eq!(ilog(1, 2), 0);
        assert_eq!(ilog(8, 2), 3);
        assert_eq!(ilog(100, 2), 6);
    }
}
