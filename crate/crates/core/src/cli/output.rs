use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

/// `x` with 17 significant digits, the shortest width that round-trips every
/// `f64`.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column-oriented complex time series ready to be written as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<'a> {
    pub times_fs: &'a [f64],
    pub names: Vec<String>,
    pub columns: Vec<&'a [Complex64]>,
}

impl Table<'_> {
    pub fn header(&self) -> String {
        let mut line = String::from("time_fs");
        for name in &self.names {
            let _ = write!(line, ",{name}_re,{name}_im");
        }
        line
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for (n, t) in self.times_fs.iter().enumerate() {
            out.push_str(&format_number(*t));
            for col in &self.columns {
                out.push(',');
                out.push_str(&format_number(col[n].re));
                out.push(',');
                out.push_str(&format_number(col[n].im));
            }
            out.push('\n');
        }
        out
    }
}

/// Location of the metadata written next to `out`.
pub fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".meta.json");
    PathBuf::from(name)
}

pub fn write_outputs(out: &Path, csv: &str, meta: &impl Serialize) -> io::Result<()> {
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(out, csv)?;
    let mut json = serde_json::to_string_pretty(meta).map_err(io::Error::other)?;
    json.push('\n');
    fs::write(meta_path(out), json)
}

/// Reads a CSV produced by [`Table::to_csv`] back into times and columns.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or("empty file")?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        let row = row.map_err(|e| format!("row {}: {e}", i + 1))?;
        if row.len() != header.len() {
            return Err(format!(
                "row {} has {} fields, header has {}",
                i + 1,
                row.len(),
                header.len()
            ));
        }
        rows.push(row);
    }
    Ok((header, rows))
}
