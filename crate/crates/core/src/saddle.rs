//! The global saddle point `α(x, y)`, root of
//! `Σ_{p ≤ y} log p / (p^α − 1) = log x`, and the quantities evaluated at it.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::arith::Sieve;
use crate::{Error, KahanSum, Result};

/// Primes `p ≤ y` with their logarithms, shared across solves for one `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeLogs {
    y: f64,
    primes: Vec<u64>,
    logs: Vec<f64>,
}

impl PrimeLogs {
    pub fn new(sieve: &Sieve, y: f64) -> Result<Self> {
        if !(y >= 2.0) {
            return Err(Error::Domain { what: "prime sums need y >= 2", value: y });
        }
        let bound = libm::floor(y);
        if bound > sieve.limit() as f64 {
            return Err(Error::Resource { what: "prime bound beyond sieve", limit: sieve.limit() as u128 });
        }
        let primes = sieve.primes_up_to(bound as u64)?.to_vec();
        let logs = primes.iter().map(|&p| libm::log(p as f64)).collect();
        Ok(Self { y, primes, logs })
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn logs(&self) -> &[f64] {
        &self.logs
    }

    /// `π(y)`.
    pub fn count(&self) -> usize {
        self.primes.len()
    }

    fn sum(&self, mut term: impl FnMut(f64) -> f64) -> f64 {
        self.logs.iter().map(|&l| term(l)).collect::<KahanSum>().value()
    }

    /// `Σ log p / (p^α − 1)`.
    fn saddle_sum(&self, alpha: f64) -> f64 {
        self.sum(|l| l / libm::expm1(alpha * l))
    }
}

/// `log ζ(s, y) = Σ_{p ≤ y} −log(1 − p^{−s})`.
pub fn zeta_partial_log(s: f64, logs: &PrimeLogs) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain { what: "zeta_partial_log needs s > 0", value: s });
    }
    Ok(logs.sum(|l| -libm::log1p(-libm::exp(-s * l))))
}

/// `σ₂*(α, y) = Σ_{p ≤ y} (log p)² p^α / (p^α − 1)²`.
pub fn sigma2_star(alpha: f64, logs: &PrimeLogs) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain { what: "sigma2_star needs alpha > 0", value: alpha });
    }
    Ok(logs.sum(|l| {
        let d = libm::expm1(alpha * l);
        l * l * (d + 1.0) / (d * d)
    }))
}

/// `σ̄² = ½ Σ_{p ≤ y} (p^α − 1/3)(log p)² / (p^α − 1)²`.
pub fn sigma_bar_sq_at(alpha: f64, logs: &PrimeLogs) -> f64 {
    0.5 * logs.sum(|l| {
        let d = libm::expm1(alpha * l);
        (d + 2.0 / 3.0) * l * l / (d * d)
    })
}

const BRACKET_LOW: f64 = 1e-6;
const BISECTION_STEPS: u32 = 60;
const NEWTON_STEPS: u32 = 8;

/// Solves for `α(x, y)` with residual at most `tol · max(1, log x)`.
///
/// Brackets on `[1e-6, 2]` (doubling the upper end as needed), bisects 60
/// times and polishes with at most 8 Newton steps.
pub fn solve_alpha(x: f64, logs: &PrimeLogs, tol: f64) -> Result<f64> {
    if !(x >= logs.y()) {
        return Err(Error::Domain { what: "solve_alpha needs x >= y", value: x });
    }
    if !(tol > 0.0) {
        return Err(Error::Domain { what: "solve_alpha needs tol > 0", value: tol });
    }
    let log_x = libm::log(x);
    let scale = log_x.max(1.0);
    let residual = |a: f64| logs.saddle_sum(a) - log_x;

    let mut lo = BRACKET_LOW;
    if residual(lo) <= 0.0 {
        return Err(Error::Domain { what: "saddle equation has no root above 1e-6", value: x });
    }
    let mut hi = 2.0;
    let mut doublings = 0;
    while residual(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 64 {
            return Err(Error::NoConvergence { what: "alpha bracketing", iterations: doublings });
        }
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut alpha = 0.5 * (lo + hi);
    for _ in 0..=NEWTON_STEPS {
        let r = residual(alpha);
        if libm::fabs(r) <= tol * scale {
            return Ok(alpha);
        }
        // d/dα Σ log p/(p^α − 1) = −σ₂*(α)
        let slope = sigma2_star(alpha, logs)?;
        let next = alpha + r / slope;
        if !(next > 0.0) || !next.is_finite() {
            break;
        }
        alpha = next;
    }
    Err(Error::NoConvergence { what: "alpha Newton polish", iterations: NEWTON_STEPS })
}

/// Everything evaluated at the global saddle point for one `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SaddleContext {
    pub x: f64,
    pub y: f64,
    /// `log x / log y`.
    pub u: f64,
    /// `min(u, π(y))`.
    pub u_bar: f64,
    pub alpha: f64,
    /// `log ζ(α, y)`.
    pub log_zeta: f64,
    pub sigma2_star: f64,
    pub sigma_bar_sq: f64,
    /// `π(y)`.
    pub prime_count: usize,
    #[cfg_attr(feature = "serde", serde(skip))]
    logs: PrimeLogs,
}

impl SaddleContext {
    pub const DEFAULT_TOL: f64 = 1e-12;

    pub fn new(sieve: &Sieve, x: f64, y: f64) -> Result<Self> {
        Self::with_logs(&PrimeLogs::new(sieve, y)?, x, Self::DEFAULT_TOL)
    }

    pub fn with_logs(logs: &PrimeLogs, x: f64, tol: f64) -> Result<Self> {
        let y = logs.y();
        let alpha = solve_alpha(x, logs, tol)?;
        let u = libm::log(x) / libm::log(y);
        let prime_count = logs.count();
        Ok(Self {
            x,
            y,
            u,
            u_bar: u.min(prime_count as f64),
            alpha,
            log_zeta: zeta_partial_log(alpha, logs)?,
            sigma2_star: sigma2_star(alpha, logs)?,
            sigma_bar_sq: sigma_bar_sq_at(alpha, logs),
            prime_count,
            logs: logs.clone(),
        })
    }

    pub fn logs(&self) -> &PrimeLogs {
        &self.logs
    }

    pub fn sigma_bar(&self) -> f64 {
        libm::sqrt(self.sigma_bar_sq)
    }

    /// `log` of `x^α ζ(α, y) / (α √(2π σ₂*))`.
    pub fn log_psi_saddle_estimate(&self) -> f64 {
        self.alpha * libm::log(self.x) + self.log_zeta
            - libm::log(self.alpha)
            - 0.5 * libm::log(2.0 * PI * self.sigma2_star)
    }

    /// Hildebrand–Tenenbaum estimate of `Ψ(x, y)`.
    pub fn psi_saddle_estimate(&self) -> f64 {
        libm::exp(self.log_psi_saddle_estimate())
    }

    pub fn alpha_asymptotic_check(&self) -> AlphaReport {
        let log_x = libm::log(self.x);
        let log_y = libm::log(self.y);
        let reference = 1.0 + self.y / log_x;
        let u_bar = self.u_bar;
        AlphaReport {
            alpha_ratio: self.alpha * log_y / libm::log(reference),
            y_alpha_ratio: libm::exp(self.alpha * log_y) / reference,
            one_minus_alpha_scaled: (1.0 - self.alpha) * log_y,
            log_u_bar_term: libm::log(u_bar * libm::log(u_bar + 1.0)),
            sigma2_star_ratio: self.sigma2_star / ((1.0 + log_x / self.y) * log_x * log_y),
        }
    }
}

/// Diagnostic ratios comparing `α` and `σ₂*` to their first-order shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AlphaReport {
    /// `α log y / log(1 + y/log x)`, tends to 1.
    pub alpha_ratio: f64,
    /// `y^α / (1 + y/log x)`, bounded below.
    pub y_alpha_ratio: f64,
    /// `(1 − α) log y`, compared against `log(ū log(ū + 1))` up to `O(1)`.
    pub one_minus_alpha_scaled: f64,
    pub log_u_bar_term: f64,
    /// `σ₂* / ((1 + log x / y) log x log y)`, bounded above and below.
    pub sigma2_star_ratio: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logs(y: f64) -> PrimeLogs {
        PrimeLogs::new(&Sieve::new(10_000).unwrap(), y).unwrap()
    }

    #[test]
    fn closed_form_roots() {
        let a = solve_alpha(2.0, &logs(2.0), 1e-12).unwrap();
        assert!((a - 1.0).abs() < 1e-12);
        let a = solve_alpha(4.0, &logs(2.0), 1e-12).unwrap();
        assert!((a - libm::log2(1.5)).abs() < 1e-10);
    }

    #[test]
    fn root_for_hundred_and_ten() {
        // independent high-precision root of Σ_{p ≤ 7} log p/(p^α − 1) = log 100
        let a = solve_alpha(100.0, &logs(10.0), 1e-12).unwrap();
        assert!((a - 0.580_141_773_417_412_1).abs() < 1e-12, "{a}");
    }

    #[test]
    fn zeta_partial_log_values() {
        let s = 0.7;
        let v = zeta_partial_log(s, &logs(2.0)).unwrap();
        assert!((v + libm::log(1.0 - libm::pow(2.0, -s))).abs() < 1e-15);
        let v = zeta_partial_log(1.0, &logs(6.0)).unwrap();
        assert!((v - libm::log(3.75)).abs() < 1e-14);
        assert!(zeta_partial_log(200.0, &logs(100.0)).unwrap() < 1e-50);
        assert!(zeta_partial_log(0.0, &logs(6.0)).is_err());
    }

    #[test]
    fn sigma2_star_values() {
        let l2 = core::f64::consts::LN_2;
        let v = sigma2_star(1.0, &logs(2.0)).unwrap();
        assert!((v - 2.0 * l2 * l2).abs() < 1e-15);
        let lg = logs(100.0);
        let mut prev = f64::INFINITY;
        for k in 1..40 {
            let v = sigma2_star(k as f64 * 0.05, &lg).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(sigma2_star(-1.0, &lg).is_err());
    }

    #[test]
    fn sigma_bar_single_prime() {
        let alpha = 0.37;
        let l = core::f64::consts::LN_2;
        let pa = libm::pow(2.0, alpha);
        let want = 0.5 * l * l * (pa - 1.0 / 3.0) / ((pa - 1.0) * (pa - 1.0));
        assert!((sigma_bar_sq_at(alpha, &logs(2.0)) - want).abs() < 1e-14 * want);
    }

    #[test]
    fn context_fields() {
        let sieve = Sieve::new(1000).unwrap();
        let ctx = SaddleContext::new(&sieve, 1e6, 100.0).unwrap();
        assert!((ctx.u - 3.0).abs() < 1e-12);
        assert_eq!(ctx.prime_count, 25);
        assert_eq!(ctx.u_bar, ctx.u);
        assert!(ctx.sigma2_star > 0.0 && ctx.sigma_bar_sq > 0.0);
        let ctx = SaddleContext::new(&sieve, 1e9, 10.0).unwrap();
        assert_eq!(ctx.u_bar, 4.0);
        // σ₂* against (1 + log x/y) log x log y
        let ctx = SaddleContext::new(&sieve, 1e6, 100.0).unwrap();
        let r = ctx.alpha_asymptotic_check();
        assert!(r.sigma2_star_ratio > 1.0 / 3.0 && r.sigma2_star_ratio < 3.0, "{r:?}");
        assert!(r.y_alpha_ratio > 0.1);
    }

    #[test]
    fn non_integer_y_uses_primes_below() {
        let sieve = Sieve::new(1000).unwrap();
        let a = SaddleContext::new(&sieve, 1e5, 100.0).unwrap();
        let b = SaddleContext::new(&sieve, 1e5, 97.0).unwrap();
        let c = SaddleContext::new(&sieve, 1e5, 100.9).unwrap();
        assert_eq!(a.alpha, b.alpha);
        assert_eq!(a.alpha, c.alpha);
        assert_eq!(a.sigma_bar_sq, b.sigma_bar_sq);
    }

    #[test]
    fn bad_inputs() {
        let lg = logs(100.0);
        assert!(solve_alpha(50.0, &lg, 1e-12).is_err());
        assert!(solve_alpha(1e6, &lg, 0.0).is_err());
        assert!(PrimeLogs::new(&Sieve::new(10).unwrap(), 1.5).is_err());
        assert!(PrimeLogs::new(&Sieve::new(10).unwrap(), 11.0).is_err());
    }
}
