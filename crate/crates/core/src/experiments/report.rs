use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

pub const CSV_HEADER: &str =
    "scenario,m,N,nu_c,nu_q,noise_lower,ns_lower,ns_upper,m_times_nu_q,wall_time_ms,witnesses";

/// One CSV row; absent fields are written empty.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ReportRow {
    pub scenario: String,
    pub m: Option<usize>,
    #[serde(rename = "N")]
    pub n: usize,
    pub nu_c: Option<f64>,
    pub nu_q: Option<f64>,
    pub noise_lower: Option<f64>,
    pub ns_lower: Option<f64>,
    pub ns_upper: Option<f64>,
    pub m_times_nu_q: Option<f64>,
    pub wall_time_ms: Option<f64>,
    /// `key=value` pairs joined by `|`; never contains commas or quotes.
    pub witnesses: String,
    /// Set when the row could not be computed.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub scenario: String,
    #[serde(skip)]
    pub rows: Vec<ReportRow>,
    pub verdicts: Vec<Verdict>,
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

/// Makes free text safe for an unquoted CSV field.
fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            ',' => ';',
            '"' => '\'',
            '\n' | '\r' => ' ',
            c => c,
        })
        .collect()
}

impl ReportRow {
    pub fn csv_line(&self) -> String {
        let mut witnesses = self.witnesses.clone();
        if let Some(e) = &self.error {
            if !witnesses.is_empty() {
                witnesses.push('|');
            }
            witnesses.push_str("error=");
            witnesses.push_str(e);
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.scenario,
            opt(&self.m),
            self.n,
            opt(&self.nu_c),
            opt(&self.nu_q),
            opt(&self.noise_lower),
            opt(&self.ns_lower),
            opt(&self.ns_upper),
            opt(&self.m_times_nu_q),
            opt(&self.wall_time_ms),
            sanitize(&witnesses)
        )
    }
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// Header plus one line per row, LF endings.
    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }

    /// `{scenario, verdicts: [{name, pass, detail}]}`.
    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Writes `<prefix>.csv` and `<prefix>.json`, returning both paths.
    pub fn write(&self, prefix: &Path) -> Result<(PathBuf, PathBuf)> {
        let csv = with_suffix(prefix, "csv");
        let json = with_suffix(prefix, "json");
        if let Some(dir) = csv.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&csv, self.to_csv())?;
        std::fs::write(&json, self.summary_json())?;
        Ok((csv, json))
    }
}

pub fn rows_to_csv(rows: &[ReportRow]) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        writeln!(s, "{}", r.csv_line()).unwrap();
    }
    s
}

fn with_suffix(prefix: &Path, ext: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(".");
    name.push(ext);
    PathBuf::from(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_fields_and_header() {
        let r = ReportRow {
            scenario: "x".into(),
            n: 3,
            nu_q: Some(0.5),
            witnesses: "x=+1;-1".into(),
            ..Default::default()
        };
        assert_eq!(r.csv_line(), "x,,3,,0.5,,,,,,x=+1;-1");
        let rep = Report {
            scenario: "x".into(),
            rows: vec![r],
            verdicts: vec![],
        };
        let csv = rep.to_csv();
        assert!(csv.starts_with(CSV_HEADER));
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
        assert_eq!(CSV_HEADER.split(',').count(), 11);
    }

    #[test]
    fn errors_are_sanitized() {
        let r = ReportRow {
            scenario: "s".into(),
            error: Some("bad, \"thing\"\nhere".into()),
            ..Default::default()
        };
        let line = r.csv_line();
        assert_eq!(line.split(',').count(), 11);
        assert!(line.ends_with("error=bad; 'thing' here"));
    }

    #[test]
    fn summary_shape() {
        let rep = Report {
            scenario: "s".into(),
            rows: vec![],
            verdicts: vec![Verdict::new("a", true, "ok")],
        };
        let v: serde_json::Value = serde_json::from_str(&rep.summary_json()).unwrap();
        assert_eq!(v["scenario"], "s");
        assert_eq!(v["verdicts"][0]["pass"], true);
        assert_eq!(v.as_object().unwrap().len(), 2);
    }

    #[test]
    fn suffixes() {
        assert_eq!(
            with_suffix(Path::new("out/run.v1"), "csv"),
            PathBuf::from("out/run.v1.csv")
        );
    }
}
