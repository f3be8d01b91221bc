//! Subcommands of the `friabilis` binary. Each returns the text to print.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use friabilis_core::arith::{psi_exact, Limits};
use friabilis_core::dickman::{dickman_rho, psi_dickman_estimate};
use friabilis_core::divdist::{self, Ratio};
use friabilis_core::perron;
use friabilis_core::saddle::SaddleContext;

use crate::cache::SieveCache;
use crate::error::{AppError, AppResult};
use crate::experiments::{self, AverageConfig, CltRunConfig, ConcentrationConfig};
use crate::factorize;
use crate::output::{csv_string, json_string, sig12, write_csv};

#[derive(Debug, Parser)]
#[command(name = "friabilis", version, about = "Divisor distribution of smooth integers")]
pub struct Cli {
    /// Directory for cached prime sieves (defaults to $FRIABILIS_CACHE).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dickman's function rho(u).
    Rho {
        #[arg(long)]
        u: f64,
    },
    /// Saddle point alpha(x, y) and estimates of Psi(x, y).
    Saddle {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long)]
        json: bool,
    },
    /// Moments of the divisor distribution of n.
    Divdist {
        #[arg(long)]
        n: u128,
        /// Also print every atom as CSV.
        #[arg(long)]
        atoms: bool,
    },
    /// Exact tail of D_n against its approximations, as JSON.
    Tail {
        #[arg(long)]
        n: u128,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        /// Perron quadrature cross-check as `T,steps`.
        #[arg(long, value_parser = parse_perron)]
        perron: Option<(f64, usize)>,
    },
    /// Per-integer Gaussian tail errors over S(x, y).
    Clt(CltArgs),
    /// The averaged law D(x, y; z).
    Average(AverageArgs),
    /// Concentration of f_k(n) around its model mean.
    Concentration(ConcentrationArgs),
    /// Mean divisor distribution of all n <= x against the arcsine law.
    Arcsine {
        #[arg(long)]
        x: u64,
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5")]
        v: Vec<f64>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub x: u128,
    #[arg(long)]
    pub y: u64,
    #[arg(long, default_value_t = experiments::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = experiments::DEFAULT_SAMPLE_CAP)]
    pub sample_cap: usize,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the full result as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CltArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',', required = true)]
    pub z_grid: Vec<f64>,
    #[arg(long = "C", default_value_t = experiments::DEFAULT_C)]
    pub c: f64,
    #[arg(long = "B", default_value_t = experiments::DEFAULT_B)]
    pub b: f64,
    #[arg(long, default_value_t = 0.0)]
    pub w_min: f64,
    #[arg(long, default_value_t = experiments::DEFAULT_W_BINS)]
    pub w_bins: usize,
    /// Also write the per-bin medians as CSV.
    #[arg(long)]
    pub bins_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AverageArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub z_grid: Vec<f64>,
    #[arg(long, default_value_t = experiments::DEFAULT_C5)]
    pub c5: f64,
}

#[derive(Debug, Args)]
pub struct ConcentrationArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    pub k_list: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.25,0.5")]
    pub thresholds: Vec<f64>,
}

fn parse_perron(s: &str) -> Result<(f64, usize), String> {
    let (t, steps) = s.split_once(',').ok_or_else(|| "expected T,steps".to_string())?;
    let t: f64 = t.trim().parse().map_err(|e| format!("bad T: {e}"))?;
    let steps: usize = steps.trim().parse().map_err(|e| format!("bad steps: {e}"))?;
    Ok((t, steps))
}

/// Executes a parsed command line and returns what should go to standard output.
pub fn run(cli: Cli) -> AppResult<String> {
    let limits = Limits::DEFAULT;
    let cache = SieveCache::configured(cli.cache_dir);
    match cli.command {
        Command::Rho { u } => Ok(format!("{}\n", sig12(dickman_rho(u)?))),
        Command::Saddle { x, y, json } => saddle(&cache, &limits, x, y, json),
        Command::Divdist { n, atoms } => divdist_cmd(&limits, n, atoms),
        Command::Tail { n, z, perron } => {
            let f = factorize(n, &limits)?;
            json_string(&perron::tail_report(&f, z, perron)?)
        }
        Command::Clt(a) => {
            let cfg = CltRunConfig {
                x: a.common.x,
                y: a.common.y,
                z_grid: a.z_grid,
                c: a.c,
                w_min: a.w_min,
                seed: a.common.seed,
                sample_cap: a.common.sample_cap,
                b: a.b,
                w_bins: a.w_bins,
            };
            let sieve = cache.sieve(cfg.y.max(2), &limits)?;
            let r = experiments::run_clt(&cfg, &sieve, &limits)?;
            let meta = vec![
                ("kind", "clt".to_string()),
                ("x", cfg.x.to_string()),
                ("y", cfg.y.to_string()),
                ("C", cfg.c.to_string()),
                ("B", cfg.b.to_string()),
                ("w_min", cfg.w_min.to_string()),
                ("seed", cfg.seed.to_string()),
                ("sample_cap", cfg.sample_cap.to_string()),
                ("population", r.population.to_string()),
                ("sampled", r.sampled.to_string()),
                ("median", "exact".to_string()),
            ];
            if let Some(path) = &a.bins_out {
                write_csv(BufWriter::new(File::create(path)?), &meta, &r.w_bins)?;
            }
            emit(&a.common, &meta, &r.rows, &r)
        }
        Command::Average(a) => {
            let cfg = AverageConfig {
                x: a.common.x,
                y: a.common.y,
                z_grid: a.z_grid,
                c5: a.c5,
                seed: a.common.seed,
                sample_cap: a.common.sample_cap,
            };
            let sieve = cache.sieve(cfg.y.max(2), &limits)?;
            let r = experiments::run_average(&cfg, &sieve, &limits)?;
            let meta = vec![
                ("kind", "average".to_string()),
                ("x", cfg.x.to_string()),
                ("y", cfg.y.to_string()),
                ("c5", cfg.c5.to_string()),
                ("seed", cfg.seed.to_string()),
                ("sample_cap", cfg.sample_cap.to_string()),
                ("population", r.population.to_string()),
                ("sampled", r.sampled.to_string()),
                ("u_bar", r.u_bar.to_string()),
                ("sigma_bar", r.sigma_bar.to_string()),
            ];
            emit(&a.common, &meta, &r.rows, &r)
        }
        Command::Concentration(a) => {
            let cfg = ConcentrationConfig {
                x: a.common.x,
                y: a.common.y,
                k_list: a.k_list,
                thresholds: a.thresholds,
                seed: a.common.seed,
                sample_cap: a.common.sample_cap,
            };
            let sieve = cache.sieve(cfg.y.max(2), &limits)?;
            let r = experiments::run_concentration(&cfg, &sieve, &limits)?;
            let meta = vec![
                ("kind", "concentration".to_string()),
                ("x", cfg.x.to_string()),
                ("y", cfg.y.to_string()),
                ("seed", cfg.seed.to_string()),
                ("sample_cap", cfg.sample_cap.to_string()),
                ("population", r.population.to_string()),
                ("sampled", r.sampled.to_string()),
                ("u_bar", r.u_bar.to_string()),
            ];
            emit(&a.common, &meta, &r.rows, &r)
        }
        Command::Arcsine { x, v, json } => {
            let sieve = cache.sieve(x.max(2), &limits)?;
            let rows = experiments::arcsine_check(x, &v, &sieve, &limits)?;
            if json {
                json_string(&rows)
            } else {
                csv_string(&[("kind", "arcsine".to_string()), ("x", x.to_string())], &rows)
            }
        }
    }
}

fn emit<R: Serialize, T: Serialize>(common: &Common, meta: &[(&str, String)], rows: &[R], full: &T) -> AppResult<String> {
    if common.json {
        return json_string(full);
    }
    match &common.out {
        Some(path) => {
            write_csv(BufWriter::new(File::create(path)?), meta, rows)?;
            Ok(String::new())
        }
        None => csv_string(meta, rows),
    }
}

#[derive(Serialize)]
struct SaddleReport {
    #[serde(flatten)]
    ctx: SaddleContext,
    psi_saddle: f64,
    psi_dickman: f64,
    psi_exact: Option<u128>,
}

fn saddle(cache: &SieveCache, limits: &Limits, x: f64, y: f64, json: bool) -> AppResult<String> {
    if !(x >= 1.0 && y >= 2.0) || !x.is_finite() || !y.is_finite() {
        return Err(AppError::Config("saddle needs x >= 1 and finite y >= 2".into()));
    }
    let sieve = cache.sieve(y.floor() as u64, limits)?;
    let ctx = SaddleContext::new(&sieve, x, y)?;
    let psi_exact = if x < 1e30 {
        match psi_exact(x.floor() as u128, y.floor() as u64, &sieve, limits) {
            Ok(v) => Some(v),
            Err(e) if e.is_resource() => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let report = SaddleReport {
        psi_saddle: ctx.psi_saddle_estimate(),
        psi_dickman: psi_dickman_estimate(x, y)?,
        psi_exact,
        ctx,
    };
    if json {
        return json_string(&report);
    }
    let c = &report.ctx;
    let lines: Vec<(&str, String)> = vec![
        ("x", format!("{}", c.x)),
        ("y", format!("{}", c.y)),
        ("u", sig12(c.u)),
        ("u_bar", sig12(c.u_bar)),
        ("alpha", sig12(c.alpha)),
        ("log_zeta", sig12(c.log_zeta)),
        ("sigma2_star", sig12(c.sigma2_star)),
        ("sigma_bar_sq", sig12(c.sigma_bar_sq)),
        ("psi_saddle", sig12(report.psi_saddle)),
        ("psi_dickman", sig12(report.psi_dickman)),
        ("psi_exact", report.psi_exact.map_or("infeasible".to_string(), |v| v.to_string())),
    ];
    Ok(lines.iter().map(|(k, v)| format!("{k:<14}{v}\n")).collect())
}

fn divdist_cmd(limits: &Limits, n: u128, atoms: bool) -> AppResult<String> {
    let f = factorize(n, limits)?;
    let m = divdist::moments(&f);
    let mut out = format!(
        "{:<10}{}\n{:<10}{}\n{:<10}{}\n{:<10}{}\n{:<10}{}\n",
        "n", n, "tau", m.tau, "sigma_sq", sig12(m.m2), "m4", sig12(m.m4), "w", sig12(m.w)
    );
    if atoms {
        let law = divdist::exact_law(&f)?;
        let Ratio { num, den } = law.atom_mass();
        out.push_str("value,mass_num,mass_den\n");
        for a in law.atoms() {
            out.push_str(&format!("{},{num},{den}\n", a.value));
        }
    }
    Ok(out)
}
