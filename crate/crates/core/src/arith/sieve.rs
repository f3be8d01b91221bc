use alloc::vec;
use alloc::vec::Vec;

use super::Limits;
use crate::{Error, Result};

/// Sieve of Eratosthenes over `[0, limit]`, kept both as a bitset and as the
/// ascending list of primes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sieve {
    limit: u64,
    bits: Vec<u8>,
    primes: Vec<u64>,
}

impl Sieve {
    pub fn new(limit: u64) -> Result<Self> {
        Self::with_limits(limit, &Limits::DEFAULT)
    }

    pub fn with_limits(limit: u64, limits: &Limits) -> Result<Self> {
        if limit > limits.sieve_ceiling {
            return Err(Error::Resource { what: "sieve bound", limit: limits.sieve_ceiling as u128 });
        }
        let n = limit as usize;
        let mut composite = vec![false; n + 1];
        let mut i = 2usize;
        while i * i <= n {
            if !composite[i] {
                let mut j = i * i;
                while j <= n {
                    composite[j] = true;
                    j += i;
                }
            }
            i += 1;
        }
        let mut bits = vec![0u8; n / 8 + 1];
        let mut primes = Vec::new();
        for (k, &c) in composite.iter().enumerate().skip(2) {
            if !c {
                bits[k / 8] |= 1 << (k % 8);
                primes.push(k as u64);
            }
        }
        Ok(Self { limit, bits, primes })
    }

    /// Rebuilds a sieve from its little-endian bitset (bit `k % 8` of byte
    /// `k / 8` is set iff `k` is prime).
    pub fn from_bitset(limit: u64, bits: Vec<u8>) -> Result<Self> {
        let n = limit as usize;
        if bits.len() != n / 8 + 1 {
            return Err(Error::Invalid("sieve bitset length does not match its bound"));
        }
        let mut primes = Vec::new();
        for k in 0..=n {
            if bits[k / 8] >> (k % 8) & 1 == 1 {
                if k < 2 {
                    return Err(Error::Invalid("sieve bitset marks 0 or 1 as prime"));
                }
                primes.push(k as u64);
            }
        }
        // bits past the bound must be clear
        if n % 8 != 7 && bits[n / 8] >> (n % 8 + 1) != 0 {
            return Err(Error::Invalid("sieve bitset has bits beyond its bound"));
        }
        Ok(Self { limit, bits, primes })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn bitset(&self) -> &[u8] {
        &self.bits
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primes `p ≤ y`; `y` may exceed the sieve bound only if no prime lies
    /// in between, which the caller cannot know, so that is an error.
    pub fn primes_up_to(&self, y: u64) -> Result<&[u64]> {
        if y > self.limit {
            return Err(Error::Resource { what: "prime bound beyond sieve", limit: self.limit as u128 });
        }
        let end = self.primes.partition_point(|&p| p <= y);
        Ok(&self.primes[..end])
    }

    pub fn is_prime(&self, n: u64) -> Option<bool> {
        (n <= self.limit).then(|| self.bits[n as usize / 8] >> (n % 8) & 1 == 1)
    }

    /// `π(y)` for `y` within the sieve bound.
    pub fn pi(&self, y: u64) -> Result<usize> {
        self.primes_up_to(y).map(<[u64]>::len)
    }
}

/// The primes in `[2, limit]`, ascending.
pub fn sieve_primes(limit: u64) -> Result<Vec<u64>> {
    Sieve::new(limit).map(|s| s.primes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_bounds() {
        assert_eq!(sieve_primes(10).unwrap(), [2, 3, 5, 7]);
        assert!(sieve_primes(1).unwrap().is_empty());
        assert!(sieve_primes(0).unwrap().is_empty());
        assert_eq!(sieve_primes(2).unwrap(), [2]);
    }

    #[test]
    fn counts_match_known_values_of_pi() {
        let s = Sieve::new(1_000_000).unwrap();
        assert_eq!(s.pi(100).unwrap(), 25);
        assert_eq!(s.pi(1000).unwrap(), 168);
        assert_eq!(s.pi(1_000_000).unwrap(), 78498);
    }

    #[test]
    fn ceiling_is_enforced() {
        let limits = Limits { sieve_ceiling: 100, ..Limits::DEFAULT };
        assert!(Sieve::with_limits(101, &limits).unwrap_err().is_resource());
        assert!(Sieve::with_limits(100, &limits).is_ok());
    }

    #[test]
    fn bitset_round_trip_and_validation() {
        for limit in [0, 1, 7, 8, 9, 97, 1000] {
            let s = Sieve::new(limit).unwrap();
            let back = Sieve::from_bitset(limit, s.bitset().to_vec()).unwrap();
            assert_eq!(back, s);
        }
        let s = Sieve::new(20).unwrap();
        assert!(Sieve::from_bitset(21, s.bitset().to_vec()).is_ok());
        assert!(Sieve::from_bitset(30, s.bitset().to_vec()).is_err());
        let mut bad = s.bitset().to_vec();
        bad[0] |= 0b10;
        assert!(Sieve::from_bitset(20, bad).is_err());
    }

    #[test]
    fn primes_up_to_beyond_bound_is_an_error() {
        let s = Sieve::new(50).unwrap();
        assert_eq!(s.primes_up_to(50).unwrap().last(), Some(&47));
        assert!(s.primes_up_to(51).is_err());
    }
}
