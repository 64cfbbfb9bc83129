use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a check decides pass or fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Every residual below the tolerance.
    Residual,
    /// Every residual above the tolerance.
    LowerBound,
    /// A symbolic equality.
    Exact,
    /// Reported, never failing.
    Info,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub kind: CheckKind,
    /// Negative controls are expected to detect a planted defect.
    pub control: bool,
    pub samples: usize,
    pub max_residual: Option<f64>,
    pub median_residual: Option<f64>,
    pub min_residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub exact: Option<bool>,
    pub passed: bool,
    pub detail: Option<String>,
}

fn stats(values: &[f64]) -> (Option<f64>, Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None, None);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    (Some(v[v.len() - 1]), Some(v[v.len() / 2]), Some(v[0]))
}

impl CheckRecord {
    fn base(name: &str, kind: CheckKind) -> Self {
        CheckRecord {
            name: name.into(),
            kind,
            control: false,
            samples: 0,
            max_residual: None,
            median_residual: None,
            min_residual: None,
            tolerance: None,
            exact: None,
            passed: false,
            detail: None,
        }
    }

    /// Passes iff every value is finite and below `tol`.
    pub fn residual(name: &str, values: &[f64], tol: f64) -> Self {
        let (max, median, min) = stats(values);
        CheckRecord {
            samples: values.len(),
            max_residual: max,
            median_residual: median,
            min_residual: min,
            tolerance: Some(tol),
            passed: !values.is_empty() && values.iter().all(|v| v.is_finite() && *v < tol),
            ..Self::base(name, CheckKind::Residual)
        }
    }

    /// Passes iff every value exceeds `threshold`.
    pub fn lower_bound(name: &str, values: &[f64], threshold: f64) -> Self {
        let (max, median, min) = stats(values);
        CheckRecord {
            samples: values.len(),
            max_residual: max,
            median_residual: median,
            min_residual: min,
            tolerance: Some(threshold),
            passed: !values.is_empty() && values.iter().all(|v| *v > threshold),
            ..Self::base(name, CheckKind::LowerBound)
        }
    }

    pub fn exact(name: &str, holds: bool) -> Self {
        CheckRecord { samples: 1, exact: Some(holds), passed: holds, ..Self::base(name, CheckKind::Exact) }
    }

    /// A planted defect that must break an exact equality.
    pub fn exact_control(name: &str, still_holds: bool) -> Self {
        CheckRecord { control: true, passed: !still_holds, ..Self::exact(name, still_holds) }
    }

    pub fn info(name: &str, detail: impl Into<String>) -> Self {
        CheckRecord { passed: true, detail: Some(detail.into()), ..Self::base(name, CheckKind::Info) }
    }

    /// A check whose computation itself raised an error.
    pub fn errored(name: &str, kind: CheckKind, err: &Error) -> Self {
        CheckRecord { detail: Some(err.to_string()), ..Self::base(name, kind) }
    }

    pub fn as_control(mut self) -> Self {
        self.control = true;
        self
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

/// Outcome of one named, seeded verification campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub params: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<CheckRecord>,
    pub passed: bool,
    /// Wall-clock time in milliseconds; `None` once stripped for comparison.
    pub duration_ms: Option<f64>,
}

impl SuiteReport {
    pub fn new(suite: &str, seed: u64) -> Self {
        SuiteReport {
            suite: suite.into(),
            seed,
            params: BTreeMap::new(),
            checks: Vec::new(),
            passed: true,
            duration_ms: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(key.into(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
        self
    }

    pub fn push(&mut self, c: CheckRecord) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    pub fn finish(mut self, elapsed: Duration) -> Self {
        self.passed = self.checks.iter().all(|c| c.passed);
        self.duration_ms = Some(elapsed.as_secs_f64() * 1e3);
        self
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// The same report with timing removed.
    pub fn without_timing(&self) -> Self {
        SuiteReport { duration_ms: None, ..self.clone() }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// One line per check.
    pub fn summary(&self) -> String {
        let mut out =
            format!("suite {} (seed {}): {}\n", self.suite, self.seed, if self.passed { "PASS" } else { "FAIL" });
        for c in &self.checks {
            let verdict = if c.passed { "pass" } else { "FAIL" };
            let value = match (c.kind, c.exact, c.max_residual, c.min_residual) {
                (CheckKind::Exact, Some(e), _, _) => format!("exact={e}"),
                (CheckKind::LowerBound, _, _, Some(m)) => format!("min={m:.3e}"),
                (_, _, Some(m), _) => format!("max={m:.3e}"),
                _ => String::new(),
            };
            let tol = c.tolerance.map(|t| format!(" tol={t:.0e}")).unwrap_or_default();
            let ctl = if c.control { " [control]" } else { "" };
            out.push_str(&format!("  {verdict:4} {}{ctl} {value}{tol}", c.name));
            if let Some(d) = &c.detail {
                out.push_str(&format!(" ({d})"));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_aggregate_and_decide() {
        let r = CheckRecord::residual("a", &[1e-12, 3e-10, 2e-11], 1e-9);
        assert!(r.passed);
        assert_eq!(r.max_residual, Some(3e-10));
        assert_eq!(r.median_residual, Some(2e-11));
        assert!(!CheckRecord::residual("b", &[f64::NAN], 1.0).passed);
        assert!(!CheckRecord::residual("c", &[], 1.0).passed);
        assert!(CheckRecord::lower_bound("d", &[0.5, 0.2], 1e-3).passed);
        assert!(CheckRecord::exact_control("e", false).passed);
        assert!(!CheckRecord::exact_control("e", true).passed);
    }

    #[test]
    fn report_roundtrips_and_strips_timing() {
        let mut r = SuiteReport::new("x", 7).param("n", 3);
        r.push(CheckRecord::exact("ok", true));
        r.push(CheckRecord::residual("bad", &[1.0], 1e-3));
        let r = r.finish(Duration::from_millis(5));
        assert!(!r.passed);
        assert_eq!(r.failures().count(), 1);
        let back = SuiteReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(r.without_timing().duration_ms, None);
        assert!(r.summary().contains("FAIL bad"));
    }
}
