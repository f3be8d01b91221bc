//! Primes, smooth integers and exact values of `Ψ(x, y)`.

mod factor;
mod psi;
mod sieve;
mod smooth;

pub use factor::{Factorization, PrimePower};
pub use psi::{psi_exact, psi_recursive};
pub use sieve::{sieve_primes, Sieve};
pub use smooth::{enumerate_smooth, SmoothIter, SmoothSet};

/// Size ceilings guarding every allocation that grows with the inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest sieve bound accepted.
    pub sieve_ceiling: u64,
    /// Largest `Ψ(x, y)` that may be enumerated.
    pub enumeration_ceiling: u128,
    /// Largest number of memoized states in [`psi_recursive`].
    pub memo_ceiling: usize,
}

impl Limits {
    pub const DEFAULT: Limits = Limits {
        sieve_ceiling: 10_000_000,
        enumeration_ceiling: 100_000_000,
        memo_ceiling: 20_000_000,
    };
}

impl Default for Limits {
    fn default() -> Self {
        Self::DEFAULT
    }
}
