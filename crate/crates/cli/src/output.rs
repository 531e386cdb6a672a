//! Artifact writers: CSV with 17-significant-digit floats, LF endings,
//! and deterministic JSON summaries.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

/// 17 significant digits, enough to round-trip any f64 bit pattern.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub struct CsvWriter {
    buffer: String,
}

impl CsvWriter {
    pub fn new(header: &str) -> Self {
        let mut buffer = String::new();
        buffer.push_str(header);
        buffer.push('\n');
        CsvWriter { buffer }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buffer.push_str(&fields.join(","));
        self.buffer.push('\n');
    }

    pub fn row_f64(&mut self, values: &[f64]) {
        let fields: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
        self.row(&fields);
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.buffer.as_bytes())
    }

    pub fn body(&self) -> &str {
        &self.buffer
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)
}

/// One named pass/fail check inside a summary.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

impl Check {
    pub fn new(name: &str, passed: bool) -> Self {
        Check {
            name: name.to_string(),
            passed,
            value: None,
            threshold: None,
        }
    }

    pub fn with_value(name: &str, passed: bool, value: f64, threshold: f64) -> Self {
        Check {
            name: name.to_string(),
            passed,
            value: Some(value),
            threshold: Some(threshold),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub metrics: serde_json::Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Summary {
    pub fn new(experiment: &str, checks: Vec<Check>, metrics: serde_json::Value) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Summary {
            experiment: experiment.to_string(),
            passed,
            checks,
            metrics,
            warnings: Vec::new(),
        }
    }

    pub fn with_warnings(mut self, warnings: Vec<String>) -> Self {
        self.warnings = warnings;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub seed: u64,
    pub threads: Option<usize>,
    pub lenient: bool,
    pub started_unix_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    /// Verbatim echo of the configuration file.
    pub config: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.25), "2.5000000000000000e-1");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(f64::NAN), "nan");
        // Round-trips exactly.
        let x = std::f64::consts::PI * 1e-7;
        let s = fmt_f64(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_rows_are_lf_terminated() {
        let mut w = CsvWriter::new("a,b");
        w.row_f64(&[1.0, 2.0]);
        assert_eq!(
            w.body(),
            "a,b\n1.0000000000000000e0,2.0000000000000000e0\n"
        );
        assert!(!w.body().contains('\r'));
    }
}
