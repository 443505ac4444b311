use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{NdpoError, Result};

/// One comparison: the largest deviation seen and the input that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub case: String,
    pub check: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_input: Option<String>,
    /// Set when the check could not run; skipped checks count as passed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl CheckEntry {
    pub fn skipped(case: &str, check: &str, tolerance: f64, reason: impl Into<String>) -> Self {
        Self {
            case: case.into(),
            check: check.into(),
            max_deviation: 0.0,
            tolerance,
            passed: true,
            worst_input: None,
            skipped: Some(reason.into()),
        }
    }
}

/// Running maximum of |deviation| that remembers where it happened.
/// A NaN deviation always wins, so a broken engine cannot pass silently.
#[derive(Debug, Clone)]
pub struct Worst {
    dev: f64,
    input: Option<String>,
}

impl Default for Worst {
    fn default() -> Self {
        Self { dev: 0.0, input: None }
    }
}

impl Worst {
    pub fn offer(&mut self, dev: f64, input: impl FnOnce() -> String) {
        let dev = dev.abs();
        let replace = if self.dev.is_nan() {
            false
        } else {
            self.input.is_none() || dev.is_nan() || dev > self.dev
        };
        if replace {
            self.dev = dev;
            self.input = Some(input());
        }
    }

    pub fn value(&self) -> f64 {
        self.dev
    }

    pub fn entry(self, case: &str, check: &str, tolerance: f64) -> CheckEntry {
        CheckEntry {
            case: case.into(),
            check: check.into(),
            passed: self.dev <= tolerance,
            max_deviation: self.dev,
            tolerance,
            worst_input: self.input,
            skipped: None,
        }
    }
}

/// Truncation diagnostics and timing for one case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseDiagnostics {
    pub case: String,
    /// Cutoffs used: one for the direct engine, (c, d) for normal modes.
    pub n_cut: Vec<usize>,
    pub max_tail: f64,
    /// Steady-state change between the last two cutoffs, when escalated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_bound: Option<f64>,
    pub wall_clock_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub version: String,
    pub entries: Vec<CheckEntry>,
    pub diagnostics: Vec<CaseDiagnostics>,
    pub wall_clock_s: f64,
}

impl Default for ValidationReport {
    fn default() -> Self {
        Self {
            version: crate::VERSION.into(),
            entries: Vec::new(),
            diagnostics: Vec::new(),
            wall_clock_s: 0.0,
        }
    }
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }

    pub fn entry(&self, case: &str, check: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.case == case && e.check == check)
    }

    /// Largest deviation of a check over all cases, skipped entries excluded.
    pub fn max_deviation(&self, check: &str) -> Option<f64> {
        self.entries
            .iter()
            .filter(|e| e.check == check && e.skipped.is_none())
            .map(|e| e.max_deviation)
            .reduce(|a, b| if a.is_nan() || b > a { b } else { a })
    }

    /// Combines reports in a canonical order, so the result does not depend
    /// on which case finished first.
    pub fn merge(reports: impl IntoIterator<Item = ValidationReport>) -> Self {
        let mut out = Self::default();
        for r in reports {
            out.entries.extend(r.entries);
            out.diagnostics.extend(r.diagnostics);
            out.wall_clock_s = out.wall_clock_s.max(r.wall_clock_s);
        }
        out.entries
            .sort_by(|a, b| (&a.case, &a.check).cmp(&(&b.case, &b.check)));
        out.diagnostics.sort_by(|a, b| a.case.cmp(&b.case));
        out
    }

    /// Keeps only the entries of cases whose tag satisfies `keep`.
    pub fn filter_cases(mut self, keep: impl Fn(&str) -> bool) -> Self {
        self.entries.retain(|e| keep(&e.case));
        self.diagnostics.retain(|d| keep(&d.case));
        self
    }

    /// The report with all timings zeroed; everything else is deterministic.
    pub fn without_timing(&self) -> Self {
        let mut out = self.clone();
        out.wall_clock_s = 0.0;
        for d in &mut out.diagnostics {
            d.wall_clock_s = 0.0;
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| NdpoError::Io(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| NdpoError::Parse(e.to_string()))
    }

    pub fn summary_table(&self) -> String {
        let case_w = self.entries.iter().map(|e| e.case.len()).max().unwrap_or(4).max(4);
        let check_w = self.entries.iter().map(|e| e.check.len()).max().unwrap_or(5).max(5);
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<case_w$}  {:<check_w$}  {:>10}  {:>10}  status",
            "case", "check", "max_dev", "tol"
        );
        for e in &self.entries {
            let status = match (&e.skipped, e.passed) {
                (Some(_), _) => "skip",
                (None, true) => "pass",
                (None, false) => "FAIL",
            };
            let _ = write!(
                s,
                "{:<case_w$}  {:<check_w$}  {:>10.3e}  {:>10.3e}  {status}",
                e.case, e.check, e.max_deviation, e.tolerance
            );
            match (&e.skipped, e.passed, &e.worst_input) {
                (Some(why), _, _) => {
                    let _ = write!(s, "  ({why})");
                }
                (None, false, Some(at)) => {
                    let _ = write!(s, "  at {at}");
                }
                _ => {}
            }
            s.push('\n');
        }
        let failed = self.failures().count();
        let _ = writeln!(
            s,
            "{} checks, {} failed, {:.2} s",
            self.entries.len(),
            failed,
            self.wall_clock_s
        );
        s
    }
}
