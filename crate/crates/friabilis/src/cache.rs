//! On-disk cache of prime sieves.
//!
//! File layout, all integers little-endian:
//! 8-byte magic `FRIASIEV`, `u32` version (1), `u64` limit, `u64` byte count,
//! then the bitset (bit `k % 8` of byte `k / 8` set when `k` is prime).

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use friabilis_core::arith::{Limits, Sieve};

use crate::error::{AppError, AppResult};

pub const MAGIC: [u8; 8] = *b"FRIASIEV";
pub const VERSION: u32 = 1;
pub const ENV_VAR: &str = "FRIABILIS_CACHE";

#[derive(Debug, Clone, Default)]
pub struct SieveCache {
    dir: Option<PathBuf>,
}

impl SieveCache {
    /// No caching: sieves are rebuilt on every request.
    pub fn disabled() -> Self {
        SieveCache { dir: None }
    }

    pub fn at(dir: impl Into<PathBuf>) -> Self {
        SieveCache { dir: Some(dir.into()) }
    }

    /// An explicit directory wins over `FRIABILIS_CACHE`.
    pub fn configured(explicit: Option<PathBuf>) -> Self {
        match explicit.or_else(|| std::env::var_os(ENV_VAR).filter(|v| !v.is_empty()).map(PathBuf::from)) {
            Some(dir) => SieveCache::at(dir),
            None => SieveCache::disabled(),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn path_for(dir: &Path, limit: u64) -> PathBuf {
        dir.join(format!("sieve-{limit}.bin"))
    }

    /// Loads the sieve for `limit` from the cache, building and storing it on a miss.
    /// A corrupt file is an error rather than a silent rebuild.
    pub fn sieve(&self, limit: u64, limits: &Limits) -> AppResult<Sieve> {
        let Some(dir) = &self.dir else {
            return Ok(Sieve::with_limits(limit, limits)?);
        };
        let path = Self::path_for(dir, limit);
        if path.exists() {
            return read_sieve(&path);
        }
        let sieve = Sieve::with_limits(limit, limits)?;
        fs::create_dir_all(dir)?;
        write_sieve(&path, &sieve)?;
        Ok(sieve)
    }
}

pub fn write_sieve(path: &Path, sieve: &Sieve) -> AppResult<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&MAGIC)?;
        f.write_all(&VERSION.to_le_bytes())?;
        f.write_all(&sieve.limit().to_le_bytes())?;
        f.write_all(&(sieve.bitset().len() as u64).to_le_bytes())?;
        f.write_all(sieve.bitset())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_sieve(path: &Path) -> AppResult<Sieve> {
    let bad = |reason: &str| AppError::Cache { path: path.display().to_string(), reason: reason.to_string() };
    let mut f = fs::File::open(path)?;
    let mut header = [0u8; 28];
    f.read_exact(&mut header).map_err(|_| bad("truncated header"))?;
    if header[..8] != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let limit = u64::from_le_bytes(header[12..20].try_into().unwrap());
    let len = u64::from_le_bytes(header[20..28].try_into().unwrap());
    let mut bits = Vec::new();
    f.read_to_end(&mut bits)?;
    if bits.len() as u64 != len {
        return Err(bad("length mismatch"));
    }
    Sieve::from_bitset(limit, bits).map_err(|e| bad(&e.to_string()))
}
