//! Exact and asymptotic tools for the distribution of divisors of smooth
//! (friable) integers.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! - [`arith`]: prime sieving, ascending enumeration of `S(x, y)` with full
//!   factorizations, and two independent exact counts of `Ψ(x, y)`.
//! - [`dickman`]: the Dickman function and the `x·ρ(u)` estimate.
//! - [`saddle`]: the global saddle point `α(x, y)` and the quantities built
//!   on it (`ζ(α, y)`, `σ₂*`, `σ̄²`, the Hildebrand–Tenenbaum estimate).
//! - [`divdist`]: the exact law of the random divisor `D_n`, its moments and
//!   the additive functions `f_k`.
//! - [`perron`]: the moment generating function `Z_n`, derivatives of its
//!   logarithm, the per-integer saddle point `β_n(z)` and tail approximations.
#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod arith;
pub mod dickman;
pub mod divdist;
mod error;
pub mod perron;
pub mod saddle;
mod sum;

pub use error::{Error, Result};
pub use sum::KahanSum;
