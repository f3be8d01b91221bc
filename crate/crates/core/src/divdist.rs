//! The law of `D_n`, uniform over `{log d : d | n}`, and additive functions
//! of the prime-power decomposition.

use alloc::vec::Vec;

use crate::arith::Factorization;
use crate::saddle::SaddleContext;
use crate::{Error, KahanSum, Result};

/// Default ceiling on `τ(n)` for [`exact_law`].
pub const TAU_CEILING: u128 = 2_000_000;

/// Query points within this distance of an atom are treated as hitting it.
pub const ATOM_TOL: f64 = 1e-12;

/// Relative size of the shift applied to thresholds that hit an atom.
pub const NUDGE_REL: f64 = 1e-9;

/// Moves `t` up by `NUDGE_REL · log n` when it hits an atom of `law`, so that
/// tails are taken at a point where the distribution function is continuous.
/// Returns the threshold used and whether it moved.
pub fn nudge_off_atoms(law: &DivisorLaw, t: f64) -> (f64, bool) {
    if law.collides(t) {
        (t + NUDGE_REL * law.log_n().max(1.0), true)
    } else {
        (t, false)
    }
}

/// Centered moments of `D_n` in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DivisorMoments {
    pub tau: u128,
    /// `σ_n² = m₂`.
    pub m2: f64,
    pub m4: f64,
    /// `w_n = m₂² / m₄`, with `w_1 = 1`.
    pub w: f64,
    /// `T_n = max (ν + 1) log p`.
    pub t_max: f64,
}

impl DivisorMoments {
    pub fn sigma(&self) -> f64 {
        libm::sqrt(self.m2)
    }

    pub fn sigma_sq(&self) -> f64 {
        self.m2
    }
}

/// `m₂ = (1/12) Σ ν(ν+2)(log p)²`, `m₄ = (1/240) Σ ν(ν+2)(3ν²+6ν−4)(log p)⁴`.
pub fn moments(f: &Factorization) -> DivisorMoments {
    let mut m2 = KahanSum::new();
    let mut m4 = KahanSum::new();
    for pp in f.factors() {
        let nu = pp.exp as f64;
        let l2 = pp.log_p() * pp.log_p();
        let a = nu * (nu + 2.0);
        m2.add(a * l2);
        m4.add(a * (3.0 * nu * nu + 6.0 * nu - 4.0) * l2 * l2);
    }
    let m2 = m2.value() / 12.0;
    let m4 = m4.value() / 240.0;
    let w = if f.is_one() { 1.0 } else { m2 * m2 / m4 };
    DivisorMoments { tau: f.tau(), m2, m4, w, t_max: f.t_max() }
}

/// One atom of `D_n`: the divisor `d` and `log d`. Every atom has mass
/// `1/τ(n)`; distinct divisors never share a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub divisor: u128,
    pub value: f64,
}

/// Reduced fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Ratio {
    pub num: u128,
    pub den: u128,
}

impl Ratio {
    pub fn new(num: u128, den: u128) -> Self {
        let g = gcd(num, den).max(1);
        Self { num: num / g, den: den / g }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact law of `D_n`, atoms sorted by divisor.
#[derive(Debug, Clone, PartialEq)]
pub struct DivisorLaw {
    n: u128,
    log_n: f64,
    atoms: Vec<Atom>,
}

impl DivisorLaw {
    pub fn n(&self) -> u128 {
        self.n
    }

    pub fn tau(&self) -> u128 {
        self.atoms.len() as u128
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// `E(D_n) = ½ log n`.
    pub fn mean(&self) -> f64 {
        0.5 * self.log_n
    }

    pub fn log_n(&self) -> f64 {
        self.log_n
    }

    pub fn atom_mass(&self) -> Ratio {
        Ratio::new(1, self.tau())
    }

    /// Whether `t` lies within [`ATOM_TOL`] of an atom.
    pub fn collides(&self, t: f64) -> bool {
        let i = self.atoms.partition_point(|a| a.value < t - ATOM_TOL);
        self.atoms.get(i).is_some_and(|a| a.value <= t + ATOM_TOL)
    }

    /// Number of atoms with `log d ≥ t` (an atom within [`ATOM_TOL`] of `t`
    /// counts).
    pub fn upper_count(&self, t: f64) -> u128 {
        let i = self.atoms.partition_point(|a| a.value < t - ATOM_TOL);
        (self.atoms.len() - i) as u128
    }

    /// Number of atoms with `log d ≤ t`, same collision rule.
    pub fn lower_count(&self, t: f64) -> u128 {
        self.atoms.partition_point(|a| a.value <= t + ATOM_TOL) as u128
    }

    /// `P(D_n ≥ t)` as an exact fraction.
    pub fn upper_tail_ratio(&self, t: f64) -> Ratio {
        Ratio::new(self.upper_count(t), self.tau())
    }

    /// `P(D_n ≤ t)` as an exact fraction.
    pub fn lower_tail_ratio(&self, t: f64) -> Ratio {
        Ratio::new(self.lower_count(t), self.tau())
    }

    /// `P(D_n ≥ t)`.
    pub fn exact_upper_tail(&self, t: f64) -> f64 {
        self.upper_count(t) as f64 / self.atoms.len() as f64
    }

    /// `P(D_n ≤ t)`.
    pub fn exact_lower_tail(&self, t: f64) -> f64 {
        self.lower_count(t) as f64 / self.atoms.len() as f64
    }

    /// `E((D_n − ½ log n)^k)` computed over the atoms.
    pub fn central_moment(&self, k: i32) -> f64 {
        let mean = self.mean();
        let s: KahanSum = self.atoms.iter().map(|a| libm::pow(a.value - mean, k as f64)).collect();
        s.value() / self.atoms.len() as f64
    }
}

/// All `τ(n)` atoms, built by convolving the uniform laws of the prime-power
/// components, then sorted.
pub fn exact_law(f: &Factorization) -> Result<DivisorLaw> {
    exact_law_capped(f, TAU_CEILING)
}

pub fn exact_law_capped(f: &Factorization, tau_ceiling: u128) -> Result<DivisorLaw> {
    if f.tau() > tau_ceiling {
        return Err(Error::Resource { what: "divisor count", limit: tau_ceiling });
    }
    let mut atoms = Vec::with_capacity(f.tau() as usize);
    atoms.push(1u128);
    for pp in f.factors() {
        let len = atoms.len();
        let mut pk = 1u128;
        for _ in 0..pp.exp {
            pk *= pp.p as u128;
            for i in 0..len {
                atoms.push(atoms[i] * pk);
            }
        }
    }
    atoms.sort_unstable();
    let atoms = atoms.into_iter().map(|d| Atom { divisor: d, value: log_u128(d) }).collect();
    Ok(DivisorLaw { n: f.value(), log_n: log_u128(f.value()), atoms })
}

fn log_u128(d: u128) -> f64 {
    libm::log(d as f64)
}

/// `f_k(n) = Σ_{p^ν ∥ n} (ν log p)^k`; `f_0 = ω`.
pub fn additive_fk(f: &Factorization, k: u32) -> f64 {
    f.factors()
        .iter()
        .map(|pp| libm::pow(pp.exp as f64 * pp.log_p(), k as f64))
        .collect::<KahanSum>()
        .value()
}

/// Model mean `A_{f_k}(x, y) = Σ_{p ≤ y, ν ≥ 1} (ν log p)^k p^{−να}(1 − p^{−α})`.
///
/// The inner sum over `ν` stops once past the peak of `ν^k q^ν` and the
/// current term drops below `1e-17` of the partial sum.
pub fn model_mean(ctx: &SaddleContext, k: u32) -> f64 {
    let alpha = ctx.alpha;
    let mut total = KahanSum::new();
    for &l in ctx.logs().logs() {
        let q = libm::exp(-alpha * l);
        let one_minus_q = -libm::expm1(-alpha * l);
        let peak = if k == 0 { 0.0 } else { k as f64 / (alpha * l) };
        let mut inner = KahanSum::new();
        let mut q_pow = 1.0;
        let mut nu = 1u32;
        loop {
            q_pow *= q;
            let term = libm::pow(nu as f64 * l, k as f64) * q_pow * one_minus_q;
            inner.add(term);
            if (nu as f64 > peak && term <= 1e-17 * inner.value()) || q_pow == 0.0 || nu > 1_000_000 {
                break;
            }
            nu += 1;
        }
        total.add(inner.value());
    }
    total.value()
}

/// `ω̃_{x,y}(n)`: components `p^ν ∥ n` with `√y < p ≤ y` and
/// `u/(2ū) ≤ ν ≤ 2u/ū`.
pub fn omega_tilde(f: &Factorization, ctx: &SaddleContext) -> u32 {
    let sqrt_y = libm::sqrt(ctx.y);
    let ratio = ctx.u / ctx.u_bar;
    f.factors()
        .iter()
        .filter(|pp| {
            let p = pp.p as f64;
            let nu = pp.exp as f64;
            p > sqrt_y && p <= ctx.y && nu >= ratio / 2.0 && nu <= 2.0 * ratio
        })
        .count() as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Sieve;
    use crate::saddle::PrimeLogs;

    fn fac(pairs: &[(u64, u32)]) -> Factorization {
        Factorization::from_pairs(pairs.iter().copied()).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn moments_of_one() {
        let m = moments(&Factorization::one());
        assert_eq!(m.tau, 1);
        assert_eq!(m.m2, 0.0);
        assert_eq!(m.w, 1.0);
    }

    #[test]
    fn moments_of_prime_and_prime_square_by_brute_force() {
        let l = libm::log(7.0);
        // {0, l} with mass 1/2: centered ±l/2
        let m = moments(&fac(&[(7, 1)]));
        assert!(close(m.m2, l * l / 4.0, 1e-14));
        assert!(close(m.m4, l.powi(4) / 16.0, 1e-14));
        assert!(close(m.w, 1.0, 1e-14));
        // {0, l, 2l} with mass 1/3: centered −l, 0, l
        let m = moments(&fac(&[(7, 2)]));
        assert!(close(m.m2, 2.0 / 3.0 * l * l, 1e-14));
        assert!(close(m.m4, 2.0 / 3.0 * l.powi(4), 1e-14));
        assert!(close(m.w, 2.0 / 3.0, 1e-14));
    }

    #[test]
    fn small_laws() {
        let law = exact_law(&fac(&[(2, 1), (3, 1)])).unwrap();
        let d: Vec<u128> = law.atoms().iter().map(|a| a.divisor).collect();
        assert_eq!(d, [1, 2, 3, 6]);
        assert_eq!(law.atom_mass(), Ratio { num: 1, den: 4 });
        let law = exact_law(&fac(&[(2, 2)])).unwrap();
        let v: Vec<f64> = law.atoms().iter().map(|a| a.value).collect();
        let l2 = core::f64::consts::LN_2;
        assert_eq!(v, [0.0, l2, libm::log(4.0)]);
        assert!((v[2] - 2.0 * l2).abs() < 1e-15);
        let law = exact_law(&fac(&[(2, 2), (3, 1)])).unwrap();
        let d: Vec<u128> = law.atoms().iter().map(|a| a.divisor).collect();
        assert_eq!(d, [1, 2, 3, 4, 6, 12]);
    }

    #[test]
    fn tails() {
        let law = exact_law(&fac(&[(2, 1), (3, 1)])).unwrap();
        assert_eq!(law.exact_upper_tail(0.0), 1.0);
        assert_eq!(law.exact_upper_tail(libm::log(6.0) + 1e-6), 0.0);
        assert_eq!(law.upper_tail_ratio(libm::log(3.0)), Ratio { num: 1, den: 2 });
        assert!(law.collides(libm::log(3.0)));
        assert!(!law.collides(1.0));
        assert_eq!(law.lower_count(libm::log(2.0)), 2);
    }

    #[test]
    fn tau_ceiling() {
        let f = fac(&[(2, 3), (3, 3)]);
        assert!(exact_law_capped(&f, 15).unwrap_err().is_resource());
        assert_eq!(exact_law_capped(&f, 16).unwrap().tau(), 16);
    }

    #[test]
    fn additive_functions() {
        let f = fac(&[(2, 2), (3, 1)]);
        assert_eq!(additive_fk(&f, 0), 2.0);
        assert!(close(additive_fk(&f, 1), libm::log(12.0), 1e-15));
        let l2 = core::f64::consts::LN_2;
        let l3 = libm::log(3.0);
        assert!(close(additive_fk(&f, 2), 4.0 * l2 * l2 + l3 * l3, 1e-15));
        assert_eq!(additive_fk(&Factorization::one(), 3), 0.0);
    }

    #[test]
    fn model_mean_geometric_closed_forms() {
        let sieve = Sieve::new(100).unwrap();
        let logs = PrimeLogs::new(&sieve, 2.0).unwrap();
        let ctx = SaddleContext::with_logs(&logs, 1000.0, 1e-12).unwrap();
        let l = core::f64::consts::LN_2;
        let pa = libm::exp(ctx.alpha * l);
        // Σ ν l q^ν (1 − q) = l q / (1 − q) = l / (2^α − 1)
        assert!(close(model_mean(&ctx, 1), l / (pa - 1.0), 1e-13));
        // Σ q^ν (1 − q) = q
        assert!(close(model_mean(&ctx, 0), 1.0 / pa, 1e-13));
        // k = 1 at the saddle point is exactly log x by the defining equation
        assert!(close(model_mean(&ctx, 1), libm::log(1000.0), 1e-11));
    }

    #[test]
    fn model_mean_omega_is_sum_of_inverse_powers() {
        let sieve = Sieve::new(1000).unwrap();
        let logs = PrimeLogs::new(&sieve, 100.0).unwrap();
        let ctx = SaddleContext::with_logs(&logs, 1e6, 1e-12).unwrap();
        let direct: f64 = logs.logs().iter().map(|&l| libm::exp(-ctx.alpha * l)).sum();
        assert!(close(model_mean(&ctx, 0), direct, 1e-13));
    }

    #[test]
    fn omega_tilde_window() {
        let sieve = Sieve::new(1000).unwrap();
        let logs = PrimeLogs::new(&sieve, 100.0).unwrap();
        let ctx = SaddleContext::with_logs(&logs, 1e6, 1e-12).unwrap();
        // u = ū = 3, window ν ∈ [1/2, 2], primes in (10, 100]
        assert_eq!(omega_tilde(&Factorization::one(), &ctx), 0);
        assert_eq!(omega_tilde(&fac(&[(97, 1)]), &ctx), 1);
        assert_eq!(omega_tilde(&fac(&[(7, 1)]), &ctx), 0);
        assert_eq!(omega_tilde(&fac(&[(2, 1), (11, 2), (13, 3), (89, 1)]), &ctx), 2);
    }
}
