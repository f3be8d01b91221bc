//! The moment generating function `Z_n(s) = E(e^{s D_n})`, derivatives of
//! `φ_n = log Z_n`, the per-integer saddle point `β_n(z)` and two
//! approximations of `P(D_n ≥ ½ log n + z σ_n)`: the saddle-point formula
//! `e^{E_n} Φ(β_n μ₂)` and a truncated Perron integral.
//!
//! Each prime-power component contributes `k(Vs) − k(Ls)` to `φ_n(s)`, with
//! `L = log p`, `V = (ν + 1) L` and `k(x) = log((e^x − 1)/x)`. Working with
//! `k` removes the `1/s` poles of the textbook kernels; near zero `k` and its
//! derivatives come from the Bernoulli series.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::arith::Factorization;
use crate::divdist::{self, DivisorLaw};
use crate::{Error, KahanSum, Result};

/// `Φ(z) = (1/√2π) ∫_z^∞ e^{−t²/2} dt`.
pub fn gaussian_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// `log Φ(z)`, finite far into the upper tail where `Φ` underflows.
pub fn log_gaussian_tail(z: f64) -> f64 {
    if z < -1.0 {
        libm::log1p(-gaussian_tail(-z))
    } else if z < 30.0 {
        libm::log(gaussian_tail(z))
    } else {
        // Laplace continued fraction: Φ(z) = ϕ(z) / (z + 1/(z + 2/(z + …)))
        let mut r = z;
        for k in (1..=40).rev() {
            r = z + k as f64 / r;
        }
        -0.5 * z * z - 0.5 * libm::log(2.0 * PI) - libm::log(r)
    }
}

// k(x) = Σ_{m ≥ 1} b_m x^m / (m · m!), b_1 = 1/2, b_m = B_m for m ≥ 2.
const BERNOULLI_EVEN: [(f64, f64); 13] = [
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
    (43867.0, 798.0),
    (-174611.0, 330.0),
    (854513.0, 138.0),
    (-236364091.0, 2730.0),
    (8553103.0, 6.0),
];
const SERIES_TERMS: usize = 27;
const SERIES_RADIUS: f64 = 1.0;

fn series_coefficients() -> [f64; SERIES_TERMS] {
    let mut c = [0.0; SERIES_TERMS];
    let mut factorial = 1.0;
    for (m, slot) in c.iter_mut().enumerate().skip(1) {
        factorial *= m as f64;
        let b = if m == 1 {
            0.5
        } else if m % 2 == 0 {
            let (num, den) = BERNOULLI_EVEN[m / 2 - 1];
            num / den
        } else {
            0.0
        };
        *slot = b / (m as f64 * factorial);
    }
    c
}

/// `k^{(order)}(x)` for `order ≤ 4` and any real `x`.
fn kappa(order: u32, x: f64) -> f64 {
    let a = libm::fabs(x);
    if a <= SERIES_RADIUS {
        return kappa_series(order, x);
    }
    let v = kappa_closed(order, a);
    if x >= 0.0 {
        return v;
    }
    // k(x) − x/2 is even
    match order {
        0 => v - a,
        1 => 1.0 - v,
        3 => -v,
        _ => v,
    }
}

fn kappa_series(order: u32, x: f64) -> f64 {
    let c = series_coefficients();
    let j = order as usize;
    let mut acc = 0.0;
    for m in (j.max(1)..SERIES_TERMS).rev() {
        let falling: f64 = (m - j + 1..=m).map(|i| i as f64).product();
        acc = acc * x + c[m] * falling;
    }
    // the Horner loop skips the x^{m−j} offset when j = 0
    if j == 0 {
        acc * x
    } else {
        acc
    }
}

fn kappa_closed(order: u32, a: f64) -> f64 {
    let q = libm::exp(-a);
    let om = -libm::expm1(-a);
    match order {
        0 => a + libm::log(om) - libm::log(a),
        1 => 1.0 / om - 1.0 / a,
        2 => -q / (om * om) + 1.0 / (a * a),
        3 => q * (1.0 + q) / (om * om * om) - 2.0 / (a * a * a),
        4 => -q * (1.0 + 4.0 * q + q * q) / (om * om * om * om) + 6.0 / (a * a * a * a),
        _ => unreachable!("kappa order above 4"),
    }
}

/// `φ_n^{(order)}(s)` for real `s`; `order = 0` is `φ_n` itself.
fn phi_any(f: &Factorization, s: f64, order: u32) -> f64 {
    let mut acc = KahanSum::new();
    for pp in f.factors() {
        let l = pp.log_p();
        let v = (pp.exp as f64 + 1.0) * l;
        let lj = libm::pow(l, order as f64);
        let vj = libm::pow(v, order as f64);
        acc.add(vj * kappa(order, v * s) - lj * kappa(order, l * s));
    }
    acc.value()
}

/// `φ_n(s) = log Z_n(s)` for real `s`.
pub fn log_mgf(f: &Factorization, s: f64) -> f64 {
    phi_any(f, s, 0)
}

/// `φ_n^{(order)}(s)`, `order ∈ 1..=4`.
pub fn phi_derivative(f: &Factorization, s: f64, order: u32) -> Result<f64> {
    if !(1..=4).contains(&order) {
        return Err(Error::Domain { what: "phi derivative order must be 1..=4", value: order as f64 });
    }
    if !s.is_finite() {
        return Err(Error::Domain { what: "phi derivative needs finite s", value: s });
    }
    Ok(phi_any(f, s, order))
}

/// `Z_n(s) = Π (1/(ν+1)) Σ_{j ≤ ν} p^{js}`. The geometric-sum form is entire,
/// so there are no poles to avoid.
pub fn mgf(f: &Factorization, s: Complex64) -> Complex64 {
    let mut z = Complex64::new(1.0, 0.0);
    for pp in f.factors() {
        let w = (s * pp.log_p()).exp();
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..pp.exp {
            acc = acc * w + 1.0;
        }
        z *= acc / (pp.exp as f64 + 1.0);
    }
    z
}

pub const BETA_TOL: f64 = 1e-10;
const BETA_MAX_ITER: u32 = 100;

/// `β_n(z)`: the root of `φ_n'(β) = ½ log n + z σ_n`, for
/// `0 ≤ z < log n / (2σ_n)`. The residual is at most `tol · log n`.
pub fn solve_beta(f: &Factorization, z: f64, tol: f64) -> Result<f64> {
    if f.is_one() {
        return Err(Error::Domain { what: "beta needs n > 1", value: 1.0 });
    }
    let m = divdist::moments(f);
    let sigma = m.sigma();
    let log_n = f.log_value();
    let sup = log_n / (2.0 * sigma);
    if !(z >= 0.0) || z >= sup {
        return Err(Error::Domain { what: "beta needs 0 <= z < log n / (2 sigma_n)", value: z });
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let target = 0.5 * log_n + z * sigma;
    let scale = tol * log_n;
    let residual = |b: f64| phi_any(f, b, 1) - target;

    let (mut lo, mut hi) = (0.0, z / sigma);
    let mut expansions = 0;
    while residual(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 || !hi.is_finite() {
            return Err(Error::NoConvergence { what: "beta bracketing", iterations: expansions });
        }
    }
    // Newton from the origin, falling back to bisection outside the bracket
    let mut beta = 0.0f64;
    for _ in 0..BETA_MAX_ITER {
        let r = residual(beta);
        if libm::fabs(r) <= scale {
            return Ok(beta);
        }
        if r < 0.0 {
            lo = lo.max(beta);
        } else {
            hi = hi.min(beta);
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(beta);
        }
        let step = beta - r / phi_any(f, beta, 2);
        beta = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
    }
    Err(Error::NoConvergence { what: "beta Newton", iterations: BETA_MAX_ITER })
}

/// Ingredients and value of `e^{E_n(z)} Φ(β_n μ₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SaddleTail {
    pub beta: f64,
    /// `μ₂ = √φ_n''(β_n)`.
    pub mu2: f64,
    /// `E_n = φ_n(β) − (½ log n + zσ_n) β + ½ β² φ_n''(β)`.
    pub e_n: f64,
    pub approx: f64,
}

pub fn saddle_tail_approx(f: &Factorization, z: f64) -> Result<SaddleTail> {
    let beta = solve_beta(f, z, BETA_TOL)?;
    let m = divdist::moments(f);
    let t = 0.5 * f.log_value() + z * m.sigma();
    let phi2 = phi_any(f, beta, 2);
    let mu2 = libm::sqrt(phi2);
    let e_n = log_mgf(f, beta) - t * beta + 0.5 * beta * beta * phi2;
    let arg = beta * mu2;
    let approx = if arg < 30.0 {
        libm::exp(e_n) * gaussian_tail(arg)
    } else {
        libm::exp(e_n + log_gaussian_tail(arg))
    };
    Ok(SaddleTail { beta, mu2, e_n, approx })
}

pub const PERRON_DEFAULT_T: f64 = 200.0;
pub const PERRON_DEFAULT_STEPS: usize = 200_000;

/// Result of the truncated Perron integral.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PerronQuadrature {
    pub value: f64,
    /// Abscissa of the vertical line.
    pub abscissa: f64,
    /// The threshold `t` in `P(D_n ≥ t)`.
    pub t: f64,
    /// The fastest oscillation of the integrand has a wavelength shorter
    /// than one panel.
    pub under_resolved: bool,
}

/// `(1/2πi) ∫_{β−iT}^{β+iT} Z_n(s) e^{−ts} ds/s` at `t = ½ log n + zσ_n`,
/// with `β = β_n(z)` (or `1/σ_n` when `z = 0`, where `β_n` vanishes).
pub fn perron_tail_quadrature(f: &Factorization, z: f64, t_max: f64, steps: usize) -> Result<PerronQuadrature> {
    let beta = solve_beta(f, z, BETA_TOL)?;
    let sigma = divdist::moments(f).sigma();
    let t = 0.5 * f.log_value() + z * sigma;
    if hits_atom(f, t) {
        return Err(Error::Domain { what: "perron threshold coincides with an atom", value: t });
    }
    let abscissa = if beta > 1e-8 { beta } else { 1.0 / sigma };
    perron_tail_at(f, t, abscissa, t_max, steps)
}

/// Truncated Perron integral for an arbitrary threshold `t` and abscissa
/// `c > 0`, by composite Simpson over `τ ∈ [0, T]` using conjugate symmetry.
pub fn perron_tail_at(f: &Factorization, t: f64, c: f64, t_max: f64, steps: usize) -> Result<PerronQuadrature> {
    if !(t_max >= 1.0) {
        return Err(Error::Domain { what: "perron truncation needs T >= 1", value: t_max });
    }
    if !(c > 0.0) {
        return Err(Error::Domain { what: "perron abscissa must be positive", value: c });
    }
    if steps < 2 {
        return Err(Error::Domain { what: "perron quadrature needs at least 2 panels", value: steps as f64 });
    }
    let steps = steps + steps % 2;
    let h = t_max / steps as f64;
    let integrand = |tau: f64| {
        let s = Complex64::new(c, tau);
        (mgf(f, s) * (-t * s).exp() / s).re
    };
    let mut acc = KahanSum::new();
    acc.add(integrand(0.0));
    acc.add(integrand(t_max));
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc.add(w * integrand(i as f64 * h));
    }
    let value = acc.value() * h / 3.0 / PI;
    let log_n = f.log_value();
    let frequency = t.abs().max((log_n - t).abs());
    let under_resolved = frequency > 0.0 && 2.0 * PI / frequency < h;
    Ok(PerronQuadrature { value, abscissa: c, t, under_resolved })
}

/// Whether `e^t` is, up to [`divdist::ATOM_TOL`] in log scale, a divisor of `n`.
pub fn hits_atom(f: &Factorization, t: f64) -> bool {
    if !(t > -1.0) || t > 88.0 {
        return false;
    }
    let d = libm::round(libm::exp(t));
    let n = f.value();
    [d - 1.0, d, d + 1.0].iter().any(|&cand| {
        cand >= 1.0
            && (cand as u128) <= n
            && n.is_multiple_of(cand as u128)
            && libm::fabs(libm::log(cand) - t) <= divdist::ATOM_TOL
    })
}

/// Exact tail against its Gaussian and saddle-point approximations.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TailReport {
    pub n: u128,
    pub z: f64,
    /// Threshold actually used, after any nudge off an atom.
    pub t: f64,
    pub nudged: bool,
    pub exact_tail: f64,
    #[cfg_attr(feature = "serde", serde(rename = "gaussian_Phi"))]
    pub gaussian_phi: f64,
    pub saddle_approx: f64,
    pub perron_approx: Option<f64>,
    pub beta: f64,
    pub mu2: f64,
    #[cfg_attr(feature = "serde", serde(rename = "E_n"))]
    pub e_n: f64,
    /// `exact / Φ(z) − 1`.
    pub rel_err_gauss: f64,
    /// `exact / saddle_approx − 1`.
    pub rel_err_saddle: f64,
}

/// Builds a [`TailReport`]; `perron` is `(T, steps)` for the optional
/// quadrature cross-check, evaluated at the same (possibly nudged) threshold.
pub fn tail_report(f: &Factorization, z: f64, perron: Option<(f64, usize)>) -> Result<TailReport> {
    let law: DivisorLaw = divdist::exact_law(f)?;
    let saddle = saddle_tail_approx(f, z)?;
    let sigma = divdist::moments(f).sigma();
    let (t, nudged) = divdist::nudge_off_atoms(&law, 0.5 * f.log_value() + z * sigma);
    let exact_tail = law.exact_upper_tail(t);
    let gaussian_phi = gaussian_tail(z);
    let perron_approx = match perron {
        Some((t_max, steps)) => {
            let c = if saddle.beta > 1e-8 { saddle.beta } else { 1.0 / sigma };
            Some(perron_tail_at(f, t, c, t_max, steps)?.value)
        }
        None => None,
    };
    Ok(TailReport {
        n: f.value(),
        z,
        t,
        nudged,
        exact_tail,
        gaussian_phi,
        saddle_approx: saddle.approx,
        perron_approx,
        beta: saddle.beta,
        mu2: saddle.mu2,
        e_n: saddle.e_n,
        rel_err_gauss: exact_tail / gaussian_phi - 1.0,
        rel_err_saddle: exact_tail / saddle.approx - 1.0,
    })
}
