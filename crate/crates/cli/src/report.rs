//! Audit records and their JSON and text renderings.
//!
//! Every float is printed with 17 significant digits so that reports can be
//! diffed across runs.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Finding,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Finding => "finding",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evidence {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    List(Vec<Evidence>),
}

impl From<f64> for Evidence {
    fn from(x: f64) -> Self {
        Evidence::Float(x)
    }
}

impl From<usize> for Evidence {
    fn from(x: usize) -> Self {
        Evidence::Int(x as i64)
    }
}

impl From<bool> for Evidence {
    fn from(x: bool) -> Self {
        Evidence::Bool(x)
    }
}

impl From<&str> for Evidence {
    fn from(x: &str) -> Self {
        Evidence::Text(x.to_string())
    }
}

impl From<String> for Evidence {
    fn from(x: String) -> Self {
        Evidence::Text(x)
    }
}

impl<T: Into<Evidence>> From<Vec<T>> for Evidence {
    fn from(v: Vec<T>) -> Self {
        Evidence::List(v.into_iter().map(Into::into).collect())
    }
}

pub fn float_text(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn float_value(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&float_text(x)).expect("formatted float is a JSON number"))
    } else {
        Value::String(float_text(x))
    }
}

impl Evidence {
    pub fn to_json(&self) -> Value {
        match self {
            Evidence::Float(x) => float_value(*x),
            Evidence::Int(i) => Value::from(*i),
            Evidence::Bool(b) => Value::Bool(*b),
            Evidence::Text(s) => Value::String(s.clone()),
            Evidence::List(v) => Value::Array(v.iter().map(Evidence::to_json).collect()),
        }
    }

    fn to_text(&self) -> String {
        match self {
            Evidence::Float(x) => float_text(*x),
            Evidence::Int(i) => i.to_string(),
            Evidence::Bool(b) => b.to_string(),
            Evidence::Text(s) => s.clone(),
            Evidence::List(v) => format!("[{}]", v.iter().map(Evidence::to_text).collect::<Vec<_>>().join(", ")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: String,
    pub anchor: String,
    pub status: Status,
    pub evidence: Vec<(String, Evidence)>,
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
}

impl Record {
    pub fn new(id: impl Into<String>, anchor: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            anchor: anchor.into(),
            status: Status::Pass,
            evidence: Vec::new(),
            tolerance: None,
            seed: None,
        }
    }

    pub fn status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with(mut self, key: &str, value: impl Into<Evidence>) -> Self {
        self.evidence.push((key.to_string(), value.into()));
        self
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("id".into(), Value::String(self.id.clone()));
        m.insert("anchor".into(), Value::String(self.anchor.clone()));
        m.insert("status".into(), Value::String(self.status.as_str().into()));
        let mut ev = Map::new();
        for (k, v) in &self.evidence {
            ev.insert(k.clone(), v.to_json());
        }
        m.insert("evidence".into(), Value::Object(ev));
        m.insert("tolerance".into(), self.tolerance.map_or(Value::Null, float_value));
        m.insert("seed".into(), self.seed.map_or(Value::Null, Value::from));
        Value::Object(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Undecided,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Inconsistent => "inconsistent",
            Verdict::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostulateVerdict {
    pub id: &'static str,
    pub statement: &'static str,
    pub verdict: Verdict,
    pub basis: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub theory: String,
    pub seed: u64,
    pub records: Vec<Record>,
    pub postulates: Vec<PostulateVerdict>,
}

impl AuditReport {
    pub fn record(&self, id: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn has_errors(&self) -> bool {
        self.records
            .iter()
            .any(|r| r.evidence.iter().any(|(k, _)| k == "error"))
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("theory".into(), Value::String(self.theory.clone()));
        m.insert("seed".into(), Value::from(self.seed));
        m.insert("records".into(), Value::Array(self.records.iter().map(Record::to_json).collect()));
        let mut p = Map::new();
        for v in &self.postulates {
            let mut e = Map::new();
            e.insert("statement".into(), Value::String(v.statement.into()));
            e.insert("verdict".into(), Value::String(v.verdict.as_str().into()));
            e.insert("basis".into(), Value::Array(v.basis.iter().cloned().map(Value::String).collect()));
            p.insert(v.id.into(), Value::Object(e));
        }
        m.insert("postulates".into(), Value::Object(p));
        Value::Object(m)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "theory: {}   seed: {}", self.theory, self.seed);
        let width = self.records.iter().map(|r| r.id.len()).max().unwrap_or(0);
        for r in &self.records {
            let _ = writeln!(out, "{:<width$}  {:<8}  {}", r.id, r.status.as_str(), r.anchor);
            for (k, v) in &r.evidence {
                let _ = writeln!(out, "{:<width$}    {k} = {}", "", v.to_text());
            }
            if let Some(t) = r.tolerance {
                let _ = writeln!(out, "{:<width$}    tolerance = {}", "", float_text(t));
            }
        }
        let _ = writeln!(out);
        for v in &self.postulates {
            let _ = writeln!(out, "{}  {:<12}  {}", v.id, v.verdict.as_str(), v.statement);
        }
        out
    }
}

/// Pretty JSON with a trailing newline.
pub fn render_json(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(float_text(0.1), "1.0000000000000001e-1");
        assert_eq!(float_text(1.0), "1.0000000000000000e0");
        assert_eq!(render_json(&float_value(0.5)), "5.0000000000000000e-1\n");
        assert_eq!(float_value(f64::INFINITY), Value::String("inf".into()));
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2f64.sqrt(), 1e-300, -7.25e12] {
            assert_eq!(float_text(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn record_json_layout() {
        let r = Record::new("x", "anchor").tolerance(1e-9).seed(3).with("n", 2usize);
        let text = serde_json::to_string(&r.to_json()).unwrap();
        assert_eq!(
            text,
            r#"{"id":"x","anchor":"anchor","status":"pass","evidence":{"n":2},"tolerance":1.0000000000000001e-9,"seed":3}"#
        );
    }
}
