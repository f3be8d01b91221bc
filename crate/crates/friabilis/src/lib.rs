//! Command-line front end and experiment drivers for `friabilis-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod output;

pub use error::{AppError, AppResult};

use friabilis_core::arith::{Factorization, Limits, Sieve};

/// Factors `n` by trial division over a sieve up to `√n`.
pub fn factorize(n: u128, limits: &Limits) -> AppResult<Factorization> {
    if n == 0 {
        return Err(AppError::Config("n must be positive".into()));
    }
    let root = isqrt(n);
    if root > limits.sieve_ceiling as u128 {
        return Err(friabilis_core::Error::Resource { what: "trial division sieve", limit: limits.sieve_ceiling as u128 }.into());
    }
    let sieve = Sieve::with_limits((root as u64).max(2), limits)?;
    let mut m = n;
    let mut pairs = Vec::new();
    for &p in sieve.primes() {
        let p128 = p as u128;
        if p128 * p128 > m {
            break;
        }
        let mut exp = 0;
        while m.is_multiple_of(p128) {
            m /= p128;
            exp += 1;
        }
        if exp > 0 {
            pairs.push((p, exp));
        }
    }
    if m > 1 {
        let p = u64::try_from(m).map_err(|_| AppError::Config("n has a prime factor above 2^64".into()))?;
        pairs.push((p, 1));
    }
    Ok(Factorization::from_pairs(pairs)?)
}

fn isqrt(n: u128) -> u128 {
    let mut r = (n as f64).sqrt() as u128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}
