//! Suite reports and their canonical JSON form.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};
use serde_json::Value;

use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub trials: usize,
    /// Smallest `bound − value` seen; negative means the inequality was
    /// exceeded.
    pub min_slack: f64,
    pub violations: usize,
    pub tolerance: f64,
    pub details: Value,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Accumulates slacks of one inequality across trials.
#[derive(Debug, Clone)]
pub struct Tally {
    name: String,
    tolerance: f64,
    trials: usize,
    min_slack: f64,
    violations: usize,
    worst: Option<u64>,
}

impl Tally {
    pub fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            tolerance,
            trials: 0,
            min_slack: f64::INFINITY,
            violations: 0,
            worst: None,
        }
    }

    /// Records one trial; NaN counts as a violation.
    pub fn record(&mut self, slack: f64, seed: u64) {
        let slack = slack + 0.0;
        self.trials += 1;
        if slack.is_nan() || slack < -self.tolerance {
            self.violations += 1;
        }
        if !self.min_slack.is_nan() && (slack.is_nan() || slack < self.min_slack) {
            self.min_slack = slack;
            self.worst = Some(seed);
        }
    }

    pub fn finish(self, mut details: Value) -> Check {
        if let (Value::Object(map), Some(seed)) = (&mut details, self.worst) {
            map.insert("worst_seed".into(), Value::from(seed));
        }
        Check {
            name: self.name,
            trials: self.trials,
            min_slack: if self.trials == 0 {
                f64::NAN
            } else {
                self.min_slack
            },
            violations: self.violations,
            tolerance: self.tolerance,
            details,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report<C: Serialize> {
    pub schema: u32,
    pub suite: String,
    pub config: C,
    pub checks: Vec<Check>,
}

impl<C: Serialize> Report<C> {
    pub fn new(suite: impl Into<String>, config: C, checks: Vec<Check>) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            suite: suite.into(),
            config,
            checks,
        }
    }

    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn to_canonical_json(&self) -> Result<String> {
        to_canonical_json(self)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("suite {} (schema {})\n", self.suite, self.schema);
        for c in &self.checks {
            out.push_str(&format!(
                "{:<4} {:<40} trials={:<5} min_slack={:<12} violations={} tol={:e}\n",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                c.trials,
                format_slack(c.min_slack),
                c.violations,
                c.tolerance
            ));
            if let Some(summary) = c.details.get("summary").and_then(Value::as_str) {
                out.push_str(&format!("     {summary}\n"));
            }
        }
        out.push_str(&format!("total violations: {}\n", self.violations()));
        out
    }
}

fn format_slack(s: f64) -> String {
    if s.is_finite() {
        format!("{s:.4e}")
    } else {
        "n/a".into()
    }
}

/// Compact JSON with every float written with 17 significant digits.
#[derive(Debug, Default, Clone, Copy)]
pub struct CanonicalFormatter;

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, CanonicalFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_have_seventeen_digits() {
        let s = to_canonical_json(&json!({"a": 0.1, "b": [1.0, -2.5e-300], "c": 3})).unwrap();
        assert_eq!(
            s,
            r#"{"a":1.0000000000000001e-1,"b":[1.0000000000000000e0,-2.5000000000000000e-300],"c":3}"#
        );
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn non_finite_is_null() {
        assert_eq!(
            to_canonical_json(&[f64::NAN, f64::INFINITY]).unwrap(),
            "[null,null]"
        );
    }

    #[test]
    fn tally_counts() {
        let mut t = Tally::new("x", 1e-9);
        t.record(0.5, 1);
        t.record(-1e-10, 2);
        t.record(-1e-3, 3);
        let c = t.finish(json!({}));
        assert_eq!(c.trials, 3);
        assert_eq!(c.violations, 1);
        assert_eq!(c.min_slack, -1e-3);
        assert_eq!(c.details["worst_seed"], 3);
        assert!(!c.passed());
        let empty = Tally::new("y", 1e-9).finish(json!({}));
        assert!(empty.min_slack.is_nan() && empty.passed());
    }
}
