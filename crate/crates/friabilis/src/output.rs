//! CSV and JSON writers. Every CSV starts with a `# schema=1 ...` metadata
//! line followed by the header row.

use std::io::Write;

use serde::Serialize;

use crate::error::AppResult;

pub const SCHEMA: u32 = 1;

pub fn write_csv<W: Write, R: Serialize>(mut out: W, meta: &[(&str, String)], rows: &[R]) -> AppResult<()> {
    write!(out, "# schema={SCHEMA}")?;
    for (k, v) in meta {
        write!(out, " {k}={v}")?;
    }
    writeln!(out)?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<R: Serialize>(meta: &[(&str, String)], rows: &[R]) -> AppResult<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, meta, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn json_string<T: Serialize>(value: &T) -> AppResult<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// `v` rounded to 12 significant digits.
pub fn sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exponent = v.abs().log10().floor() as i32;
    if (-5..12).contains(&exponent) {
        format!("{:.*}", (11 - exponent) as usize, v)
    } else {
        format!("{v:.11e}")
    }
}
