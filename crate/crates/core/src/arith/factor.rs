use alloc::vec::Vec;

use crate::{Error, Result};

/// One component `p^exp ∥ n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PrimePower {
    pub p: u64,
    pub exp: u32,
}

impl PrimePower {
    #[inline]
    pub fn log_p(&self) -> f64 {
        libm::log(self.p as f64)
    }
}

/// Canonical factorization of a positive integer. Primes are strictly
/// increasing, exponents are positive, and `value` is their product.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factorization {
    factors: Vec<PrimePower>,
    value: u128,
}

impl Factorization {
    pub fn one() -> Self {
        Self { factors: Vec::new(), value: 1 }
    }

    /// Builds a factorization from `(p, exp)` pairs. Primality of each `p` is
    /// the caller's responsibility; ordering, exponents and overflow are
    /// checked.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, u32)>,
    {
        let mut factors = Vec::new();
        let mut value: u128 = 1;
        let mut last = 1u64;
        for (p, exp) in pairs {
            if p <= last {
                return Err(Error::Invalid("primes must be strictly increasing and at least 2"));
            }
            if exp == 0 {
                return Err(Error::Invalid("exponents must be positive"));
            }
            for _ in 0..exp {
                value = value
                    .checked_mul(p as u128)
                    .ok_or(Error::Resource { what: "factorization value exceeds u128", limit: u128::MAX })?;
            }
            factors.push(PrimePower { p, exp });
            last = p;
        }
        Ok(Self { factors, value })
    }

    /// Factors `n` over `primes` (ascending). Returns `None` when a cofactor
    /// greater than one survives, i.e. `n` is not smooth over `primes`.
    pub fn over_primes(mut n: u128, primes: &[u64]) -> Option<Self> {
        if n == 0 {
            return None;
        }
        let value = n;
        let mut factors = Vec::new();
        for &p in primes {
            if n == 1 {
                break;
            }
            let pp = p as u128;
            if pp * pp > n {
                // n is 1 or a prime; it must itself be among `primes`
                if n <= u64::MAX as u128 && primes.binary_search(&(n as u64)).is_ok() {
                    factors.push(PrimePower { p: n as u64, exp: 1 });
                    n = 1;
                }
                break;
            }
            let mut exp = 0;
            while n.is_multiple_of(pp) {
                n /= pp;
                exp += 1;
            }
            if exp > 0 {
                factors.push(PrimePower { p, exp });
            }
        }
        (n == 1).then_some(Self { factors, value })
    }

    pub fn value(&self) -> u128 {
        self.value
    }

    pub fn factors(&self) -> &[PrimePower] {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// `τ(n) = Π (ν + 1)`.
    pub fn tau(&self) -> u128 {
        self.factors.iter().map(|f| f.exp as u128 + 1).product()
    }

    /// `ω(n)`, the number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    /// `P(n)` with the convention `P(1) = 1`.
    pub fn largest_prime(&self) -> u64 {
        self.factors.last().map_or(1, |f| f.p)
    }

    pub fn log_value(&self) -> f64 {
        self.factors.iter().map(|f| f.exp as f64 * f.log_p()).sum()
    }

    /// `T_n = max (ν + 1) log p` over the components; `0` for `n = 1`.
    pub fn t_max(&self) -> f64 {
        self.factors.iter().map(|f| (f.exp as f64 + 1.0) * f.log_p()).fold(0.0, f64::max)
    }

    /// Multiplies by a prime at least as large as `P(n)`.
    pub(crate) fn push_prime(&mut self, p: u64) {
        match self.factors.last_mut() {
            Some(last) if last.p == p => last.exp += 1,
            _ => {
                debug_assert!(p > self.largest_prime());
                self.factors.push(PrimePower { p, exp: 1 });
            }
        }
        self.value *= p as u128;
    }

    /// Divides by `P(n)` once.
    pub(crate) fn pop_largest(&mut self) {
        if let Some(last) = self.factors.last_mut() {
            self.value /= last.p as u128;
            last.exp -= 1;
            if last.exp == 0 {
                self.factors.pop();
            }
        }
    }

    /// All divisors of `n`, unsorted, generated by iterated products over the
    /// prime powers.
    pub fn divisors(&self) -> Vec<u128> {
        let mut out = Vec::with_capacity(self.tau().min(1 << 24) as usize);
        out.push(1u128);
        for f in &self.factors {
            let len = out.len();
            let mut pk = 1u128;
            for _ in 0..f.exp {
                pk *= f.p as u128;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
        out
    }
}
