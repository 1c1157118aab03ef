use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Error;

/// Column order of the flat CSV report.
pub const CSV_COLUMNS: [&str; 5] = ["name", "params_hash", "measured", "bound", "pass"];

/// One check: what was measured, against which bound, under which parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub params: BTreeMap<String, Value>,
    pub params_hash: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Relative change of a fitted quantity between two resolutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftRecord {
    pub name: String,
    pub coarse: f64,
    pub fine: f64,
    pub relative_change: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub records: Vec<CheckRecord>,
    pub drifts: Vec<DriftRecord>,
    /// Set when some check failed because a solver did not converge.
    pub non_convergence: bool,
}

/// First 16 hex digits of the SHA-256 of the canonical (key-sorted) JSON.
pub fn params_hash(params: &BTreeMap<String, Value>) -> String {
    let text = serde_json::to_string(params).expect("JSON values always serialize");
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(&digest[..8])
}

/// `x` with 17 significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl VerificationReport {
    pub fn push(&mut self, name: impl Into<String>, params: BTreeMap<String, Value>, measured: f64, bound: f64, pass: bool) {
        let params_hash = params_hash(&params);
        self.records.push(CheckRecord {
            name: name.into(),
            params,
            params_hash,
            measured,
            bound,
            pass,
            error: None,
        });
    }

    /// Records a check that could not be evaluated.
    pub fn push_error(&mut self, name: impl Into<String>, params: BTreeMap<String, Value>, err: &Error) {
        if matches!(err, Error::NoConvergence { .. }) {
            self.non_convergence = true;
        }
        let params_hash = params_hash(&params);
        self.records.push(CheckRecord {
            name: name.into(),
            params,
            params_hash,
            measured: f64::NAN,
            bound: f64::NAN,
            pass: false,
            error: Some(err.to_string()),
        });
    }

    pub fn push_drift(&mut self, name: impl Into<String>, coarse: f64, fine: f64) {
        self.drifts.push(DriftRecord {
            name: name.into(),
            coarse,
            fine,
            relative_change: (fine / coarse - 1.0).abs(),
        });
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_COLUMNS)?;
        for r in &self.records {
            w.write_record([
                r.name.as_str(),
                r.params_hash.as_str(),
                &format_float(r.measured),
                &format_float(r.bound),
                if r.pass { "true" } else { "false" },
            ])?;
        }
        w.flush()
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    /// Writes `report.json` and `report.csv` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json())?;
        self.write_csv(std::fs::File::create(dir.join("report.csv"))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn params() -> BTreeMap<String, Value> {
        let mut p = BTreeMap::new();
        p.insert("seed".into(), json!(3));
        p.insert("grid".into(), json!({"dim": 1, "points_per_axis": 64}));
        p
    }

    #[test]
    fn hash_is_stable_and_order_free() {
        let a = params();
        let mut b = BTreeMap::new();
        b.insert("grid".into(), json!({"points_per_axis": 64, "dim": 1}));
        b.insert("seed".into(), json!(3));
        assert_eq!(params_hash(&a), params_hash(&b));
        assert_eq!(params_hash(&a).len(), 16);
        b.insert("seed".into(), json!(4));
        assert_ne!(params_hash(&a), params_hash(&b));
    }

    #[test]
    fn csv_layout_and_precision() {
        let mut r = VerificationReport::default();
        r.push("alpha", params(), 0.1, 1.0 / 3.0, true);
        r.push_error("beta", params(), &Error::NoConvergence { iterations: 4, context: "x".into() });
        assert!(!r.all_pass() && r.non_convergence);
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "name,params_hash,measured,bound,pass");
        assert!(lines[1].contains("1.0000000000000001e-1") && lines[1].contains("3.3333333333333331e-1"));
        assert!(lines[2].ends_with("NaN,NaN,false"));
        let parsed: f64 = lines[1].split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(parsed, 1.0 / 3.0);
    }

    #[test]
    fn json_round_trip() {
        let mut r = VerificationReport::default();
        r.push("alpha", params(), 0.25, 1.0, true);
        r.push_drift("k", 1.0, 1.05);
        let back: VerificationReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
