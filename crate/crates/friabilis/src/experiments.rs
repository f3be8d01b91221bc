//! Desk-scale measurements over `S(x, y)`: Gaussian tails per integer, the
//! averaged law `D(x, y; z)`, concentration of additive functions and the
//! arcsine law for unrestricted integers.

use std::f64::consts::FRAC_2_PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use friabilis_core::arith::{enumerate_smooth, Factorization, Limits, Sieve};
use friabilis_core::divdist::{self, additive_fk, model_mean, nudge_off_atoms};
use friabilis_core::perron::gaussian_tail;
use friabilis_core::saddle::SaddleContext;

use crate::error::{AppError, AppResult};

pub const DEFAULT_C: f64 = 10.0;
pub const DEFAULT_B: f64 = 1.0;
pub const DEFAULT_C5: f64 = 1.0;
pub const DEFAULT_SAMPLE_CAP: usize = 200_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_W_BINS: usize = 5;

/// The integers of `S(x, y)` a run works on: all of them, or a seeded
/// uniform sample when there are more than the cap.
#[derive(Debug, Clone)]
pub struct Population {
    pub members: Vec<Factorization>,
    /// `Ψ(x, y)`.
    pub total: u128,
    pub sampled: bool,
}

pub fn population(x: u128, y: u64, sieve: &Sieve, limits: &Limits, sample_cap: usize, seed: u64) -> AppResult<Population> {
    if sample_cap == 0 {
        return Err(AppError::Config("sample cap must be at least 1".into()));
    }
    let set = enumerate_smooth(x, y, sieve, limits)?;
    let total = set.len();
    if total <= sample_cap as u128 {
        return Ok(Population { members: set.iter().collect(), total, sampled: false });
    }
    // reservoir sampling over the ascending stream
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members: Vec<Factorization> = Vec::with_capacity(sample_cap);
    for (i, f) in set.iter().enumerate() {
        if i < sample_cap {
            members.push(f);
        } else {
            let j = rng.gen_range(0..=i);
            if j < sample_cap {
                members[j] = f;
            }
        }
    }
    members.sort_by_key(|f| f.value());
    Ok(Population { members, total, sampled: true })
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

fn check_grid(z_grid: &[f64]) -> AppResult<()> {
    if z_grid.is_empty() {
        return Err(AppError::Config("z grid is empty".into()));
    }
    if let Some(z) = z_grid.iter().find(|z| !z.is_finite()) {
        return Err(AppError::Config(format!("z grid contains {z}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct CltRunConfig {
    pub x: u128,
    pub y: u64,
    pub z_grid: Vec<f64>,
    /// Normalized errors above this mark an integer as exceptional.
    #[serde(rename = "C")]
    pub c: f64,
    pub w_min: f64,
    pub seed: u64,
    pub sample_cap: usize,
    /// `z` is tested only when `z ≤ B w_n^{1/4}`.
    #[serde(rename = "B")]
    pub b: f64,
    pub w_bins: usize,
}

impl CltRunConfig {
    pub fn new(x: u128, y: u64, z_grid: Vec<f64>) -> Self {
        CltRunConfig {
            x,
            y,
            z_grid,
            c: DEFAULT_C,
            w_min: 0.0,
            seed: DEFAULT_SEED,
            sample_cap: DEFAULT_SAMPLE_CAP,
            b: DEFAULT_B,
            w_bins: DEFAULT_W_BINS,
        }
    }

    fn validate(&self) -> AppResult<()> {
        check_grid(&self.z_grid)?;
        if let Some(z) = self.z_grid.iter().find(|z| **z < 0.0) {
            return Err(AppError::Config(format!("z grid must be nonnegative, got {z}")));
        }
        if !(self.c > 0.0) {
            return Err(AppError::Config("C must be positive".into()));
        }
        if !(self.b > 0.0) {
            return Err(AppError::Config("B must be positive".into()));
        }
        if self.w_bins == 0 {
            return Err(AppError::Config("need at least one w bin".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltRow {
    pub z: f64,
    pub n_tested: usize,
    pub exceptional_count: usize,
    pub exceptional_fraction: f64,
    pub median_normalized_error: f64,
    pub max_normalized_error: f64,
    /// Thresholds moved off an atom.
    pub nudged: usize,
}

/// One `(n, z)` evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltRecord {
    pub n: u128,
    pub z: f64,
    pub w: f64,
    pub exact_tail: f64,
    pub normalized_error: f64,
    pub nudged: bool,
}

/// Median normalized error among tested integers whose `w_n` falls in one
/// equal-count bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WBinRow {
    pub z: f64,
    pub bin: usize,
    pub w_lo: f64,
    pub w_hi: f64,
    pub count: usize,
    pub median_normalized_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CltRunResult {
    pub config: CltRunConfig,
    pub population: u128,
    pub sampled: bool,
    pub rows: Vec<CltRow>,
    pub w_bins: Vec<WBinRow>,
    #[serde(skip)]
    pub records: Vec<CltRecord>,
}

/// `|exact/Φ(z) − 1| · w_n / (1 + z⁴)`.
pub fn normalized_error(exact: f64, z: f64, w: f64) -> f64 {
    (exact / gaussian_tail(z) - 1.0).abs() * w / (1.0 + z.powi(4))
}

fn clt_records(f: &Factorization, cfg: &CltRunConfig) -> AppResult<Vec<CltRecord>> {
    let m = divdist::moments(f);
    if m.w < cfg.w_min {
        return Ok(Vec::new());
    }
    let law = divdist::exact_law(f)?;
    let half_log = 0.5 * f.log_value();
    let sigma = m.sigma();
    let z_cap = cfg.b * m.w.powf(0.25);
    Ok(cfg
        .z_grid
        .iter()
        .filter(|&&z| z <= z_cap)
        .map(|&z| {
            let (t, nudged) = nudge_off_atoms(&law, half_log + z * sigma);
            let exact_tail = law.exact_upper_tail(t);
            CltRecord { n: f.value(), z, w: m.w, exact_tail, normalized_error: normalized_error(exact_tail, z, m.w), nudged }
        })
        .collect())
}

pub fn run_clt(cfg: &CltRunConfig, sieve: &Sieve, limits: &Limits) -> AppResult<CltRunResult> {
    cfg.validate()?;
    let pop = population(cfg.x, cfg.y, sieve, limits, cfg.sample_cap, cfg.seed)?;
    let per_n: Vec<Vec<CltRecord>> = pop
        .members
        .par_iter()
        .filter(|f| !f.is_one())
        .map(|f| clt_records(f, cfg))
        .collect::<AppResult<_>>()?;
    let records: Vec<CltRecord> = per_n.into_iter().flatten().collect();

    let mut rows = Vec::new();
    let mut w_bins = Vec::new();
    for &z in &cfg.z_grid {
        let mut at_z: Vec<&CltRecord> = records.iter().filter(|r| r.z == z).collect();
        let mut errs: Vec<f64> = at_z.iter().map(|r| r.normalized_error).collect();
        let n_tested = errs.len();
        let exceptional_count = errs.iter().filter(|&&e| e > cfg.c).count();
        let max = errs.iter().copied().fold(f64::NAN, f64::max);
        rows.push(CltRow {
            z,
            n_tested,
            exceptional_count,
            exceptional_fraction: if n_tested == 0 { 0.0 } else { exceptional_count as f64 / n_tested as f64 },
            median_normalized_error: median(&mut errs),
            max_normalized_error: max,
            nudged: at_z.iter().filter(|r| r.nudged).count(),
        });

        at_z.sort_by(|a, b| a.w.total_cmp(&b.w).then(a.n.cmp(&b.n)));
        let bins = cfg.w_bins.min(at_z.len());
        for bin in 0..bins {
            let lo = bin * at_z.len() / bins;
            let hi = (bin + 1) * at_z.len() / bins;
            let chunk = &at_z[lo..hi];
            let mut errs: Vec<f64> = chunk.iter().map(|r| r.normalized_error).collect();
            w_bins.push(WBinRow {
                z,
                bin,
                w_lo: chunk[0].w,
                w_hi: chunk[chunk.len() - 1].w,
                count: chunk.len(),
                median_normalized_error: median(&mut errs),
            });
        }
    }
    Ok(CltRunResult { config: cfg.clone(), population: pop.total, sampled: pop.sampled, rows, w_bins, records })
}

#[derive(Debug, Clone, Serialize)]
pub struct AverageConfig {
    pub x: u128,
    pub y: u64,
    pub z_grid: Vec<f64>,
    /// Grid points must satisfy `|z| ≤ c5 ū^{1/5}`.
    pub c5: f64,
    pub seed: u64,
    pub sample_cap: usize,
}

impl AverageConfig {
    pub fn new(x: u128, y: u64, z_grid: Vec<f64>) -> Self {
        AverageConfig { x, y, z_grid, c5: DEFAULT_C5, seed: DEFAULT_SEED, sample_cap: DEFAULT_SAMPLE_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageRow {
    pub z: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "Phi")]
    pub phi: f64,
    /// `|D − Φ| · ū / ((1 + z⁴) Φ)`.
    pub normalized_gap: f64,
    pub nudged: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AverageResult {
    pub config: AverageConfig,
    pub population: u128,
    pub sampled: bool,
    pub u_bar: f64,
    pub sigma_bar: f64,
    pub rows: Vec<AverageRow>,
}

/// `D(x, y; z)`: the mean over `n ∈ S(x, y)` of `P(D_n ≥ ½ log n + z σ̄)`,
/// with the model standard deviation `σ̄` shared by every `n`.
pub fn run_average(cfg: &AverageConfig, sieve: &Sieve, limits: &Limits) -> AppResult<AverageResult> {
    check_grid(&cfg.z_grid)?;
    if !(cfg.c5 > 0.0) {
        return Err(AppError::Config("c5 must be positive".into()));
    }
    let ctx = SaddleContext::new(sieve, cfg.x as f64, cfg.y as f64)?;
    let z_max = cfg.c5 * ctx.u_bar.powf(0.2);
    if let Some(z) = cfg.z_grid.iter().find(|z| z.abs() > z_max) {
        return Err(AppError::Config(format!("|z| = {} exceeds c5 * u_bar^(1/5) = {z_max:.6}", z.abs())));
    }
    let sigma_bar = ctx.sigma_bar();
    let pop = population(cfg.x, cfg.y, sieve, limits, cfg.sample_cap, cfg.seed)?;
    let per_n: Vec<Vec<(f64, bool)>> = pop
        .members
        .par_iter()
        .map(|f| {
            let law = divdist::exact_law(f)?;
            let half_log = 0.5 * f.log_value();
            Ok(cfg
                .z_grid
                .iter()
                .map(|&z| {
                    let (t, nudged) = nudge_off_atoms(&law, half_log + z * sigma_bar);
                    (law.exact_upper_tail(t), nudged)
                })
                .collect())
        })
        .collect::<AppResult<_>>()?;
    let count = per_n.len() as f64;
    let rows = cfg
        .z_grid
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let d = per_n.iter().map(|v| v[i].0).sum::<f64>() / count;
            let phi = gaussian_tail(z);
            AverageRow {
                z,
                d,
                phi,
                normalized_gap: (d - phi).abs() * ctx.u_bar / ((1.0 + z.powi(4)) * phi),
                nudged: per_n.iter().filter(|v| v[i].1).count(),
            }
        })
        .collect();
    Ok(AverageResult { config: cfg.clone(), population: pop.total, sampled: pop.sampled, u_bar: ctx.u_bar, sigma_bar, rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationConfig {
    pub x: u128,
    pub y: u64,
    pub k_list: Vec<u32>,
    pub thresholds: Vec<f64>,
    pub seed: u64,
    pub sample_cap: usize,
}

impl ConcentrationConfig {
    pub fn new(x: u128, y: u64, k_list: Vec<u32>, thresholds: Vec<f64>) -> Self {
        ConcentrationConfig { x, y, k_list, thresholds, seed: DEFAULT_SEED, sample_cap: DEFAULT_SAMPLE_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub k: u32,
    pub delta: f64,
    /// `A_{f_k}(x, y)`.
    pub model_mean: f64,
    pub fraction: f64,
    /// `e^{−δ² ū}`, for comparison of shape only.
    pub bound_shape: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationResult {
    pub config: ConcentrationConfig,
    pub population: u128,
    pub sampled: bool,
    pub u_bar: f64,
    pub rows: Vec<ConcentrationRow>,
    /// Distribution of `σ_n / σ̄` in bins of width 0.1 on `[0, 3)`, with a final open bin.
    pub sigma_ratio_histogram: Vec<HistogramBin>,
}

const HIST_WIDTH: f64 = 0.1;
const HIST_BINS: usize = 30;

pub fn run_concentration(cfg: &ConcentrationConfig, sieve: &Sieve, limits: &Limits) -> AppResult<ConcentrationResult> {
    if cfg.k_list.is_empty() || cfg.thresholds.is_empty() {
        return Err(AppError::Config("need at least one k and one threshold".into()));
    }
    if let Some(d) = cfg.thresholds.iter().find(|d| !(**d >= 0.0)) {
        return Err(AppError::Config(format!("thresholds must be nonnegative, got {d}")));
    }
    let ctx = SaddleContext::new(sieve, cfg.x as f64, cfg.y as f64)?;
    let pop = population(cfg.x, cfg.y, sieve, limits, cfg.sample_cap, cfg.seed)?;
    let count = pop.members.len() as f64;

    let mut rows = Vec::new();
    for &k in &cfg.k_list {
        let mean = model_mean(&ctx, k);
        let deviations: Vec<f64> = pop.members.par_iter().map(|f| (additive_fk(f, k) / mean - 1.0).abs()).collect();
        for &delta in &cfg.thresholds {
            // δ = 0 counts every integer, including exact hits
            let hits = deviations.iter().filter(|&&d| delta == 0.0 || d > delta).count();
            rows.push(ConcentrationRow {
                k,
                delta,
                model_mean: mean,
                fraction: hits as f64 / count,
                bound_shape: (-delta * delta * ctx.u_bar).exp(),
            });
        }
    }

    let sigma_bar = ctx.sigma_bar();
    let mut counts = vec![0usize; HIST_BINS + 1];
    for f in &pop.members {
        let ratio = divdist::moments(f).sigma() / sigma_bar;
        let bin = ((ratio / HIST_WIDTH) as usize).min(HIST_BINS);
        counts[bin] += 1;
    }
    let sigma_ratio_histogram = counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lo: i as f64 * HIST_WIDTH,
            hi: if i == HIST_BINS { f64::INFINITY } else { (i + 1) as f64 * HIST_WIDTH },
            count,
        })
        .collect();
    Ok(ConcentrationResult { config: cfg.clone(), population: pop.total, sampled: pop.sampled, u_bar: ctx.u_bar, rows, sigma_ratio_histogram })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcsineRow {
    pub v: f64,
    /// Mean over `n ≤ x` of `P(D_n ≤ v log n)`.
    pub mean_lower_tail: f64,
    /// `(2/π) arcsin √v`.
    pub arcsine: f64,
    pub gap: f64,
}

/// Compares the averaged divisor distribution of all `n ≤ x` with the
/// arcsine law.
pub fn arcsine_check(x: u64, v_list: &[f64], sieve: &Sieve, limits: &Limits) -> AppResult<Vec<ArcsineRow>> {
    if let Some(v) = v_list.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(AppError::Config(format!("v must lie in [0, 1], got {v}")));
    }
    let pop = population(x as u128, x, sieve, limits, usize::MAX, 0)?;
    let count = pop.members.len() as f64;
    let per_n: Vec<Vec<f64>> = pop
        .members
        .par_iter()
        .map(|f| {
            let law = divdist::exact_law(f)?;
            let log_n = f.log_value();
            Ok(v_list.iter().map(|&v| law.exact_lower_tail(v * log_n)).collect())
        })
        .collect::<AppResult<_>>()?;
    Ok(v_list
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mean_lower_tail = per_n.iter().map(|r| r[i]).sum::<f64>() / count;
            let arcsine = FRAC_2_PI * v.sqrt().asin();
            ArcsineRow { v, mean_lower_tail, arcsine, gap: (mean_lower_tail - arcsine).abs() }
        })
        .collect())
}
