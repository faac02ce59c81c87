//! Certification reports: per-check records with verdicts, serialized as
//! JSON with lexicographically sorted keys. Everything that varies between
//! identical runs lives in [`ReportHeader`].

use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use crate::error::Result;

pub const SCHEMA: &str = "mcert/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Overall reading of a rigidity witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Classification {
    Consistent,
    Violated,
    Inconclusive,
}

/// Non-finite values become the strings `"inf"`, `"-inf"` or `"nan"`.
fn real<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn opt_real<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => real(x, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// Which statement the check exercises.
    pub anchor: String,
    #[serde(serialize_with = "real")]
    pub measured: f64,
    #[serde(serialize_with = "opt_real")]
    pub bound: Option<f64>,
    #[serde(serialize_with = "opt_real")]
    pub tolerance: Option<f64>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, anchor: impl Into<String>, measured: f64, verdict: Verdict) -> Self {
        CheckRecord {
            name: name.into(),
            anchor: anchor.into(),
            measured,
            bound: None,
            tolerance: None,
            verdict,
            note: None,
        }
    }

    /// PASS iff `measured <= bound + tolerance`.
    pub fn upper(
        name: impl Into<String>,
        anchor: impl Into<String>,
        measured: f64,
        bound: f64,
        tolerance: f64,
    ) -> Self {
        let ok = measured <= bound + tolerance;
        CheckRecord::new(name, anchor, measured, if ok { Verdict::Pass } else { Verdict::Fail })
            .with_bound(bound)
            .with_tolerance(tolerance)
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = Some(tolerance);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Run-dependent metadata, excluded from determinism comparisons.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportHeader {
    pub tool_version: String,
    pub generated_at_unix: u64,
    pub runtime_ms: u64,
}

/// A tabular artifact: column names plus rows of reals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// CSV with a header row; reals in shortest round-trip form.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:?}")))?;
        }
        let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| crate::Error::Io(e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificationReport {
    pub schema: String,
    pub command: String,
    pub header: ReportHeader,
    pub input_digest: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub seeds: Vec<u64>,
    pub records: Vec<CheckRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
    pub tables: BTreeMap<String, Table>,
    pub verdict: Verdict,
    #[serde(skip)]
    started: Option<Instant>,
}

impl CertificationReport {
    pub fn new(command: impl Into<String>) -> Self {
        CertificationReport {
            schema: SCHEMA.to_string(),
            command: command.into(),
            header: ReportHeader {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                generated_at_unix: 0,
                runtime_ms: 0,
            },
            input_digest: digest(b""),
            parameters: BTreeMap::new(),
            seeds: Vec::new(),
            records: Vec::new(),
            classification: None,
            tables: BTreeMap::new(),
            verdict: Verdict::Pass,
            started: Some(Instant::now()),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.parameters.insert(key.to_string(), v);
    }

    pub fn seed(&mut self, seed: u64) {
        if !self.seeds.contains(&seed) {
            self.seeds.push(seed);
        }
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.records.push(record);
        self.verdict = self.overall();
    }

    pub fn extend(&mut self, records: impl IntoIterator<Item = CheckRecord>) {
        for r in records {
            self.push(r);
        }
    }

    /// Digest of the canonical parameter block plus any extra input bytes.
    pub fn set_input_digest(&mut self, extra: &[u8]) {
        let mut bytes = serde_json::to_vec(&self.parameters).unwrap_or_default();
        bytes.extend_from_slice(extra);
        self.input_digest = digest(&bytes);
    }

    /// FAIL if any record fails, else INCONCLUSIVE if any record is, else PASS.
    pub fn overall(&self) -> Verdict {
        if self.records.iter().any(|r| r.verdict == Verdict::Fail) {
            Verdict::Fail
        } else if self.records.iter().any(|r| r.verdict == Verdict::Inconclusive) {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        }
    }

    /// Stamp the header with the wall clock and elapsed time.
    pub fn finish(&mut self) {
        self.verdict = self.overall();
        self.header.generated_at_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        if let Some(t) = self.started {
            self.header.runtime_ms = t.elapsed().as_millis() as u64;
        }
    }

    /// 0 unless some record failed, then 1.
    pub fn exit_code(&self) -> i32 {
        if self.overall() == Verdict::Fail {
            1
        } else {
            0
        }
    }

    pub fn record(&self, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// Pretty JSON with sorted keys.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        s.push('\n');
        s
    }

    /// JSON with the header block removed, for determinism comparisons.
    pub fn to_json_without_header(&self) -> String {
        let mut v = self.to_value();
        if let Some(obj) = v.as_object_mut() {
            obj.remove("header");
        }
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    /// Records as CSV.
    pub fn records_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "anchor", "measured", "bound", "tolerance", "verdict"])?;
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        for r in &self.records {
            let verdict = match r.verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
                Verdict::Inconclusive => "INCONCLUSIVE",
            };
            w.write_record([
                r.name.clone(),
                r.anchor.clone(),
                format!("{:?}", r.measured),
                fmt(r.bound),
                fmt(r.tolerance),
                verdict.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| crate::Error::Io(e.to_string()))
    }
}

/// Hex SHA-256.
pub fn digest(bytes: &[u8]) -> String {
    let out = Sha256::digest(bytes);
    out.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_sorted_and_header_is_isolated() {
        let mut r = CertificationReport::new("demo");
        r.param("zeta", 1);
        r.param("alpha", 2);
        r.push(CheckRecord::upper("x", "anchor", 1.0, 2.0, 0.0));
        r.finish();
        let json = r.to_json();
        let a = json.find("\"alpha\"").unwrap();
        let z = json.find("\"zeta\"").unwrap();
        assert!(a < z);
        assert!(json.find("\"command\"").unwrap() < json.find("\"records\"").unwrap());
        assert!(!r.to_json_without_header().contains("generated_at_unix"));
    }

    #[test]
    fn verdict_aggregation_and_exit_codes() {
        let mut r = CertificationReport::new("demo");
        assert_eq!(r.exit_code(), 0);
        r.push(CheckRecord::new("a", "", 0.0, Verdict::Inconclusive));
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert_eq!(r.exit_code(), 0);
        r.push(CheckRecord::upper("b", "", 3.0, 2.0, 0.5));
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn non_finite_values_serialize() {
        let rec = CheckRecord::new("a", "", f64::INFINITY, Verdict::Fail);
        let v = serde_json::to_value(&rec).unwrap();
        assert_eq!(v["measured"], "inf");
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(
            digest(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
