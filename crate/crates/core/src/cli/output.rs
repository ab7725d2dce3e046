//! Result records and their CSV / JSON encodings.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{Mode, PointStatus, PrecoderFamily, SweepResult};
use crate::rates::Method;

pub const SCHEMA_LINE: &str = "#schema=1";
pub const RESULT_HEADER: &str = "axis,axis_value,precoder,mode,method,rate,stderr,trials,seed,xi,status";
pub const CHECK_HEADER: &str = "check,value,target,tolerance,passed";

/// One row of a rate result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub axis: String,
    pub axis_value: f64,
    pub precoder: PrecoderFamily,
    pub mode: Mode,
    pub method: Method,
    pub rate: Option<f64>,
    pub stderr: Option<f64>,
    pub trials: u64,
    pub seed: u64,
    pub xi: Option<f64>,
    pub status: PointStatus,
}

/// One row of the `validate` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn records_from_sweep(result: &SweepResult, seed: u64) -> Vec<Record> {
    let mut out = Vec::new();
    for s in &result.series {
        for p in &s.points {
            out.push(Record {
                axis: result.axis.clone(),
                axis_value: p.axis_value,
                precoder: s.precoder,
                mode: s.mode,
                method: s.method,
                rate: p.rate,
                stderr: p.stderr,
                trials: p.trials,
                seed,
                xi: p.xi,
                status: p.status,
            });
        }
    }
    out
}

/// Formats `x` with 12 significant digits, trailing zeros removed.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let s = format!("{:.*e}", (DIGITS - 1) as usize, x);
        let (mantissa, e) = s.split_once('e').unwrap_or((&s, "0"));
        format!("{}e{e}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

pub fn results_csv(records: &[Record]) -> String {
    let mut s = format!("{SCHEMA_LINE}\n{RESULT_HEADER}\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.axis,
            fmt_sig(r.axis_value),
            r.precoder.name(),
            r.mode.name(),
            r.method.name(),
            opt(r.rate),
            opt(r.stderr),
            r.trials,
            r.seed,
            opt(r.xi),
            r.status.name(),
        );
    }
    s
}

pub fn checks_csv(records: &[CheckRecord]) -> String {
    let mut s = format!("{SCHEMA_LINE}\n{CHECK_HEADER}\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.check,
            fmt_sig(r.value),
            fmt_sig(r.target),
            fmt_sig(r.tolerance),
            r.passed
        );
    }
    s
}

/// Files collected during a run and written at the end.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, path: PathBuf, contents: impl Into<Vec<u8>>) {
        self.files.push((path, contents.into()));
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    pub fn write_all(&self) -> io::Result<()> {
        for (path, data) in &self.files {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, data)?;
        }
        Ok(())
    }
}
