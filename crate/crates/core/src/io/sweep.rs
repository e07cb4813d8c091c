//! Sweep tables as CSV.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which parses
//! back to the identical `f64`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RomError};

pub const HEADER: &str = "eps1,eps_d,eps2,mean_error,mean_bound,online_s,n1,m,n2";

/// One tolerance triple of a sweep, averaged over the test queries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps1: f64,
    pub eps_d: f64,
    pub eps2: f64,
    pub mean_error: f64,
    pub mean_bound: f64,
    pub online_s: f64,
    pub n1: usize,
    pub m: usize,
    pub n2: usize,
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in rows {
        let floats = [r.eps1, r.eps_d, r.eps2, r.mean_error, r.mean_bound, r.online_s].map(format_float);
        out.push_str(&format!("{},{},{},{}\n", floats.join(","), r.n1, r.m, r.n2));
    }
    out
}

pub fn from_csv(text: &str) -> std::result::Result<Vec<SweepRow>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == HEADER => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != 9 {
                return Err(format!("row {}: expected 9 cells, got {}", i + 1, cells.len()));
            }
            let f = |k: usize| cells[k].parse::<f64>().map_err(|e| format!("row {}, column {}: {e}", i + 1, k + 1));
            let u = |k: usize| cells[k].parse::<usize>().map_err(|e| format!("row {}, column {}: {e}", i + 1, k + 1));
            Ok(SweepRow {
                eps1: f(0)?,
                eps_d: f(1)?,
                eps2: f(2)?,
                mean_error: f(3)?,
                mean_bound: f(4)?,
                online_s: f(5)?,
                n1: u(6)?,
                m: u(7)?,
                n2: u(8)?,
            })
        })
        .collect()
}

pub fn write_csv(path: impl AsRef<Path>, rows: &[SweepRow]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_csv(rows)).map_err(|e| RomError::io(path, e))
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRow>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| RomError::io(path, e))?;
    from_csv(&text).map_err(|message| RomError::Format { path: path.into(), message })
}
