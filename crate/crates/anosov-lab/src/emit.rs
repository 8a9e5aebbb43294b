//! Artifact emission: CSV with a header row, RFC-4180 quoting, '.'
//! decimal separator and fixed 12 significant digits; JSON reports with
//! stable field order. Identical inputs produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::LabError;

/// 12 significant digits in scientific notation, sign and exponent
/// normalized so equal values format identically on every platform.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        // collapse -0.0
        return "0.00000000000e0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    format!("{x:.11e}")
}

fn needs_quoting(field: &str) -> bool {
    field.contains(',') || field.contains('"') || field.contains('\n') || field.contains('\r')
}

pub fn csv_field(field: &str) -> String {
    if needs_quoting(field) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub struct CsvWriter {
    path: PathBuf,
    buf: String,
    columns: usize,
}

impl CsvWriter {
    pub fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self, LabError> {
        fs::create_dir_all(dir)?;
        let mut buf = String::new();
        buf.push_str(&header.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(","));
        buf.push_str("\r\n");
        Ok(CsvWriter {
            path: dir.join(name),
            buf,
            columns: header.len(),
        })
    }

    pub fn row(&mut self, fields: &[String]) {
        debug_assert_eq!(fields.len(), self.columns);
        self.buf
            .push_str(&fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(","));
        self.buf.push_str("\r\n");
    }

    pub fn finish(self) -> Result<PathBuf, LabError> {
        let mut f = fs::File::create(&self.path)?;
        f.write_all(self.buf.as_bytes())?;
        Ok(self.path)
    }
}

pub fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<PathBuf, LabError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

/// Stdout summary line: compact JSON, one line.
pub fn print_summary(value: &serde_json::Value) {
    println!("{value}");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig12_is_stable() {
        assert_eq!(sig12(0.0), "0.00000000000e0");
        assert_eq!(sig12(-0.0), "0.00000000000e0");
        assert_eq!(sig12(1.0), "1.00000000000e0");
        assert_eq!(sig12(-0.25), "-2.50000000000e-1");
        assert_eq!(sig12(12345.6789), "1.23456789000e4");
    }

    #[test]
    fn quoting_follows_rfc4180() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
