//! Machine-readable check reports and plot data.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::exact::ExactRational;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Flagged,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn is_fail(self) -> bool {
        self == Status::Fail
    }
}

/// Shortest round-trip decimal text for a float.
pub fn decimal(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:?}")
    }
}

/// Lossless text for an exact rational.
pub fn exact(q: &ExactRational) -> String {
    q.to_string()
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckReport {
    pub check_id: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance_or_radius: Option<String>,
    pub metadata: Map<String, Value>,
}

impl CheckReport {
    pub fn new(check_id: impl Into<String>, status: Status) -> Self {
        Self {
            check_id: check_id.into(),
            status,
            lhs: None,
            rhs: None,
            estimate: None,
            target: None,
            tolerance_or_radius: None,
            metadata: Map::new(),
        }
    }

    pub fn sides(mut self, lhs: String, rhs: String) -> Self {
        self.lhs = Some(lhs);
        self.rhs = Some(rhs);
        self
    }

    pub fn estimate_target(mut self, estimate: String, target: String) -> Self {
        self.estimate = Some(estimate);
        self.target = Some(target);
        self
    }

    pub fn radius(mut self, r: String) -> Self {
        self.tolerance_or_radius = Some(r);
        self
    }

    pub fn meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }
}

/// Top-level JSON document: `{"schema": 1, "command": ..., "reports": [...]}`.
pub fn to_json_document(command: &str, reports: &[CheckReport]) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        schema: u32,
        command: &'a str,
        passed: bool,
        reports: &'a [CheckReport],
    }
    let doc = Doc {
        schema: SCHEMA_VERSION,
        command,
        passed: reports.iter().all(|r| !r.status.is_fail()),
        reports,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("reports serialize");
    s.push('\n');
    s
}

/// One row of a running-mean series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatchPoint {
    pub batch: usize,
    pub running_mean: f64,
    pub running_se: f64,
}

/// CSV with header `batch,running_mean,running_se`.
pub fn emit_plot_data(series: &[BatchPoint]) -> String {
    let mut out = String::from("batch,running_mean,running_se\n");
    for p in series {
        out.push_str(&format!(
            "{},{},{}\n",
            p.batch,
            decimal(p.running_mean),
            decimal(p.running_se)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    #[test]
    fn csv_shapes() {
        assert_eq!(emit_plot_data(&[]), "batch,running_mean,running_se\n");
        let pts: Vec<_> = (0..10)
            .map(|b| BatchPoint {
                batch: b,
                running_mean: 1.0,
                running_se: 0.5,
            })
            .collect();
        let csv = emit_plot_data(&pts);
        assert_eq!(csv.lines().count(), 11);
        assert_eq!(csv, emit_plot_data(&pts));
        assert!(csv.contains("\n3,1.0,0.5\n"));
    }

    #[test]
    fn json_document_has_schema() {
        let r = CheckReport::new("x", Status::Pass)
            .sides(exact(&ratio(1, 3)), exact(&ratio(1, 3)))
            .meta("n", 3);
        let doc = to_json_document("demo", &[r]);
        let v: serde_json::Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["reports"][0]["lhs"], "1/3");
        assert_eq!(v["reports"][0]["status"], "pass");
        assert_eq!(v["passed"], true);
    }

    #[test]
    fn decimals_round_trip() {
        for x in [0.1, 1e-20, -3.0, 123456.789] {
            assert_eq!(decimal(x).parse::<f64>().unwrap(), x);
        }
    }
}
