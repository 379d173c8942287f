//! Report envelope and its table, JSON and CSV renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ExtReal, Precision};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    ToleranceExceeded,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::ToleranceExceeded => 1,
            Status::Error => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::ToleranceExceeded => "tolerance-exceeded",
            Status::Error => "error",
        }
    }
}

/// One result line. Numbers are decimal strings carrying as many significant
/// digits as the working precision supports; fields that do not apply to a
/// row kind are absent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    /// `identity`, `riemann`, `extrapolation`, `oracle` or `cross-method`.
    pub kind: String,
    /// Identity family or integral target name.
    pub subject: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_residual: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<String>,
    pub pass: bool,
}

pub(crate) fn num(x: &ExtReal) -> Option<String> {
    Some(x.to_decimal())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub results: Vec<Row>,
    pub status: Status,
    pub timing_ms: u64,
}

impl ReportEnvelope {
    /// Envelope whose status follows from the rows: any failing row makes
    /// it `tolerance-exceeded`.
    pub fn from_rows(command: &str, parameters: BTreeMap<String, String>, results: Vec<Row>) -> Self {
        let status = if results.iter().all(|r| r.pass) {
            Status::Ok
        } else {
            Status::ToleranceExceeded
        };
        ReportEnvelope {
            command: command.to_string(),
            parameters,
            results,
            status,
            timing_ms: 0,
        }
    }

    pub fn failed(command: &str, parameters: BTreeMap<String, String>) -> Self {
        ReportEnvelope {
            command: command.to_string(),
            parameters,
            results: Vec::new(),
            status: Status::Error,
            timing_ms: 0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// RFC 4180 style rows with a header line and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for r in &self.results {
            let opt = |v: &Option<String>| v.clone().unwrap_or_default();
            let opt_n = |v: Option<u64>| v.map(|n| n.to_string()).unwrap_or_default();
            w.write_record([
                r.kind.clone(),
                r.subject.clone(),
                opt_n(r.n),
                opt(&r.theta),
                opt(&r.value),
                opt(&r.closed_form),
                opt(&r.residual),
                opt(&r.predicted_residual),
                opt(&r.error_estimate),
                opt_n(r.nodes),
                r.level.map(|l| l.to_string()).unwrap_or_default(),
                opt(&r.threshold),
                r.pass.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    /// Aligned columns for a terminal, numbers shortened to 12 digits. Empty
    /// columns are left out.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let params: Vec<String> = self.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(out, "{}  [{}]", self.command, params.join(" "));
        let cells: Vec<Vec<String>> = self
            .results
            .iter()
            .map(|r| {
                let short = |v: &Option<String>| v.as_deref().map(shorten).unwrap_or_default();
                vec![
                    r.kind.clone(),
                    r.subject.clone(),
                    r.n.map(|n| n.to_string()).unwrap_or_default(),
                    short(&r.theta),
                    short(&r.value),
                    short(&r.closed_form),
                    short(&r.residual),
                    short(&r.predicted_residual),
                    short(&r.error_estimate),
                    r.nodes.map(|n| n.to_string()).unwrap_or_default(),
                    r.level.map(|n| n.to_string()).unwrap_or_default(),
                    short(&r.threshold),
                    if r.pass { "pass" } else { "FAIL" }.to_string(),
                ]
            })
            .collect();
        let shown: Vec<usize> = (0..CSV_HEADER.len())
            .filter(|&c| cells.iter().any(|row| !row[c].is_empty()))
            .collect();
        let width = |c: usize| {
            cells
                .iter()
                .map(|row| row[c].len())
                .chain([CSV_HEADER[c].len()])
                .max()
                .unwrap_or(0)
        };
        let widths: Vec<usize> = shown.iter().map(|&c| width(c)).collect();
        let line = |values: Vec<&str>| {
            let padded: Vec<String> = values
                .iter()
                .zip(&widths)
                .map(|(v, w)| format!("{v:<w$}"))
                .collect();
            padded.join("  ").trim_end().to_string()
        };
        if !cells.is_empty() {
            let _ = writeln!(out, "{}", line(shown.iter().map(|&c| CSV_HEADER[c]).collect()));
            for row in &cells {
                let _ = writeln!(out, "{}", line(shown.iter().map(|&c| row[c].as_str()).collect()));
            }
        }
        let failures = self.results.iter().filter(|r| !r.pass).count();
        let _ = writeln!(
            out,
            "status: {}  rows: {}  failing: {}  time: {} ms",
            self.status.as_str(),
            self.results.len(),
            failures,
            self.timing_ms
        );
        out
    }
}

const CSV_HEADER: [&str; 13] = [
    "kind",
    "subject",
    "n",
    "theta",
    "value",
    "closed_form",
    "residual",
    "predicted_residual",
    "error_estimate",
    "nodes",
    "level",
    "threshold",
    "pass",
];

fn shorten(s: &str) -> String {
    match ExtReal::parse(s, Precision::HIGH) {
        Ok(x) => x.to_decimal_string(12),
        Err(_) => s.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ReportEnvelope {
        let mut params = BTreeMap::new();
        params.insert("precision_bits".into(), "128".into());
        let rows = vec![
            Row {
                kind: "identity".into(),
                subject: "sin".into(),
                n: Some(3),
                value: Some("7.5e-1".into()),
                closed_form: Some("7.5e-1".into()),
                residual: Some("0".into()),
                threshold: Some("8.8e-33".into()),
                pass: true,
                ..Row::default()
            },
            Row {
                kind: "oracle".into(),
                subject: "log-abs-sin-shifted".into(),
                theta: Some("1e0".into()),
                value: Some("-6.9314718055994530941723212145817656808e-1".into()),
                nodes: Some(400),
                level: Some(5),
                pass: false,
                ..Row::default()
            },
        ];
        ReportEnvelope::from_rows("test", params, rows)
    }

    #[test]
    fn status_follows_rows() {
        let env = sample();
        assert_eq!(env.status, Status::ToleranceExceeded);
        assert_eq!(env.status.exit_code(), 1);
        let ok = ReportEnvelope::from_rows("t", BTreeMap::new(), vec![]);
        assert_eq!(ok.status, Status::Ok);
    }

    #[test]
    fn json_round_trip() {
        let env = sample();
        let text = env.to_json();
        assert!(text.contains("\"status\": \"tolerance-exceeded\""));
        assert_eq!(ReportEnvelope::from_json(&text).unwrap(), env);
    }

    #[test]
    fn csv_has_header_and_lf_rows() {
        let text = sample().to_csv();
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "");
        assert!(!text.contains('\r'));
        assert!(lines[1].starts_with("identity,sin,3,,7.5e-1"));
        assert!(lines[2].ends_with(",400,5,,false"));
    }

    #[test]
    fn table_skips_empty_columns() {
        let text = sample().to_table();
        let header = text.lines().nth(1).unwrap();
        assert!(header.contains("nodes") && !header.contains("predicted_residual"));
        assert!(text.contains("FAIL"));
        assert!(text.contains("-6.93147180560e-1"));
        assert!(text.lines().last().unwrap().starts_with("status: tolerance-exceeded"));
    }
}
