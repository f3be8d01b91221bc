//! The Dickman function `ρ(u)`, continuous solution of
//! `u ρ'(u) + ρ(u - 1) = 0` with `ρ = 1` on `[0, 1]`.
//!
//! The table integrates `ρ(u) = ρ(k) - ∫_k^u ρ(t - 1)/t dt` on a uniform grid
//! whose step divides 1, so the delayed argument always falls on a grid point.
//! Each step uses a four-point cubic rule whose stencil stays inside the
//! current unit interval, where `ρ` is smooth; lookups between grid points
//! use cubic interpolation under the same restriction.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Samples of `ρ` on `[0, u_max]` with step `1 / steps_per_unit`.
#[derive(Debug, Clone)]
pub struct RhoTable {
    per_unit: usize,
    u_max: f64,
    samples: Vec<f64>,
}

impl RhoTable {
    pub const DEFAULT_STEPS_PER_UNIT: usize = 10_000;
    pub const DEFAULT_U_MAX: f64 = 50.0;

    pub fn new(u_max: f64, steps_per_unit: usize) -> Result<Self> {
        if !(u_max >= 1.0 && u_max.is_finite()) {
            return Err(Error::Domain { what: "rho table needs u_max >= 1", value: u_max });
        }
        if steps_per_unit < 4 {
            return Err(Error::Domain { what: "rho table needs at least 4 steps per unit", value: steps_per_unit as f64 });
        }
        let n = steps_per_unit;
        let units = libm::ceil(u_max) as usize;
        let len = units * n + 1;
        let h = 1.0 / n as f64;
        let mut rho = Vec::with_capacity(len);
        rho.resize(n + 1, 1.0);
        // g(t_j) = ρ(t_j - 1) / t_j, known once the previous unit is filled
        let g = |rho: &[f64], j: usize| rho[j - n] / (j as f64 * h);
        for i in n + 1..len {
            let first = i - 1 == ((i - 1) / n) * n;
            let last = i % n == 0;
            let integral = if first {
                9.0 * g(&rho, i - 1) + 19.0 * g(&rho, i) - 5.0 * g(&rho, i + 1) + g(&rho, i + 2)
            } else if last {
                g(&rho, i - 3) - 5.0 * g(&rho, i - 2) + 19.0 * g(&rho, i - 1) + 9.0 * g(&rho, i)
            } else {
                -g(&rho, i - 2) + 13.0 * g(&rho, i - 1) + 13.0 * g(&rho, i) - g(&rho, i + 1)
            } * h
                / 24.0;
            let next = rho[i - 1] - integral;
            rho.push(next);
        }
        Ok(Self { per_unit: n, u_max, samples: rho })
    }

    pub fn step(&self) -> f64 {
        1.0 / self.per_unit as f64
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// `ρ(u)`; zero for `u < 0`.
    pub fn rho(&self, u: f64) -> Result<f64> {
        if u.is_nan() || u > self.u_max {
            return Err(Error::Domain { what: "rho argument beyond table range", value: u });
        }
        if u < 0.0 {
            return Ok(0.0);
        }
        if u <= 1.0 {
            return Ok(1.0);
        }
        let n = self.per_unit;
        let pos = u * n as f64;
        let i = libm::floor(pos) as usize;
        let frac = pos - i as f64;
        if frac == 0.0 {
            return Ok(self.samples[i]);
        }
        // four consecutive nodes inside the unit interval holding [i, i+1]
        let unit_start = (i / n) * n;
        let unit_end = unit_start + n;
        let start = (i.saturating_sub(1)).clamp(unit_start, unit_end - 3);
        let t = pos - start as f64;
        let y = &self.samples[start..start + 4];
        // Lagrange basis on nodes 0, 1, 2, 3
        let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
        let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
        let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
        Ok(l0 * y[0] + l1 * y[1] + l2 * y[2] + l3 * y[3])
    }
}

/// `ρ(u)` from a table with the default step, sized to `u`.
pub fn dickman_rho(u: f64) -> Result<f64> {
    if u.is_nan() || u > RhoTable::DEFAULT_U_MAX {
        return Err(Error::Domain { what: "rho argument beyond default u_max", value: u });
    }
    if u <= 1.0 {
        return Ok(if u < 0.0 { 0.0 } else { 1.0 });
    }
    RhoTable::new(libm::ceil(u), RhoTable::DEFAULT_STEPS_PER_UNIT)?.rho(u)
}

/// First-order estimate `Ψ(x, y) ≈ x ρ(log x / log y)`.
pub fn psi_dickman_estimate(x: f64, y: f64) -> Result<f64> {
    if !(y >= 2.0) || !(x >= y) {
        return Err(Error::Domain { what: "dickman estimate needs x >= y >= 2", value: x });
    }
    let u = libm::log(x) / libm::log(y);
    Ok(x * dickman_rho(u)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const RHO_3: f64 = 0.048_608_388_291_131_57;

    #[test]
    fn flat_on_unit_interval_and_zero_below() {
        assert_eq!(dickman_rho(0.0).unwrap(), 1.0);
        assert_eq!(dickman_rho(0.5).unwrap(), 1.0);
        assert_eq!(dickman_rho(1.0).unwrap(), 1.0);
        assert_eq!(dickman_rho(-0.3).unwrap(), 0.0);
    }

    #[test]
    fn matches_one_minus_log_on_second_interval() {
        let table = RhoTable::new(3.0, RhoTable::DEFAULT_STEPS_PER_UNIT).unwrap();
        for k in 0..=200 {
            let u = 1.0 + k as f64 / 200.0 + 1.234e-5;
            let u = u.min(2.0);
            let want = 1.0 - libm::log(u);
            assert!((table.rho(u).unwrap() - want).abs() < 1e-9, "u={u}");
        }
        assert!((dickman_rho(2.0).unwrap() - 0.306_852_819_440_054_7).abs() < 1e-12);
    }

    #[test]
    fn value_at_three() {
        assert!((dickman_rho(3.0).unwrap() - RHO_3).abs() < 1e-10);
    }

    #[test]
    fn coarse_grid_is_already_accurate() {
        let coarse = RhoTable::new(4.0, 200).unwrap();
        assert!((coarse.rho(3.0).unwrap() - RHO_3).abs() < 1e-9);
    }

    #[test]
    fn positive_nonincreasing_and_bounded() {
        let table = RhoTable::new(RhoTable::DEFAULT_U_MAX, 1000).unwrap();
        let s = table.samples();
        assert!(s.iter().all(|&v| v > 0.0 && v <= 1.0));
        assert!(s.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn domain_errors() {
        assert!(dickman_rho(50.5).is_err());
        assert!(dickman_rho(f64::NAN).is_err());
        assert!(RhoTable::new(0.5, 100).is_err());
        assert!(RhoTable::new(5.0, 3).is_err());
        assert!(psi_dickman_estimate(10.0, 20.0).is_err());
    }

    #[test]
    fn dickman_estimate() {
        assert_eq!(psi_dickman_estimate(1000.0, 1000.0).unwrap(), 1000.0);
        let v = psi_dickman_estimate(1e6, 1e3).unwrap();
        assert!((v - 1e6 * (1.0 - core::f64::consts::LN_2)).abs() < 1e-4, "{v}");
    }
}
