use std::fmt::{self, Write as _};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of one check.
///
/// `margin` is `1 - worst(measured / allowed)` over every sample the check
/// visited, so a check passes exactly when `margin >= 0`. Checks whose
/// natural output is not a ratio document their margin in `detail`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub status: Status,
    pub margin: f64,
    /// Relative slack granted on top of the exact bound.
    pub tolerance: f64,
    pub seconds: f64,
    /// Worst sample, or the reason for a skip.
    pub detail: String,
}

impl CheckEntry {
    pub fn skip(name: &str, reason: impl Into<String>) -> Self {
        CheckEntry {
            name: name.to_string(),
            status: Status::Skip,
            margin: f64::NAN,
            tolerance: f64::NAN,
            seconds: 0.0,
            detail: reason.into(),
        }
    }

    /// Pass iff `margin >= 0`.
    pub fn from_margin(name: &str, margin: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        CheckEntry {
            name: name.to_string(),
            status: if margin >= 0.0 { Status::Pass } else { Status::Fail },
            margin,
            tolerance,
            seconds: 0.0,
            detail: detail.into(),
        }
    }

    /// Entry for a run that errored out before the inequality could be tested.
    pub fn errored(name: &str, err: impl fmt::Display) -> Self {
        CheckEntry {
            name: name.to_string(),
            status: Status::Fail,
            margin: f64::NEG_INFINITY,
            tolerance: f64::NAN,
            seconds: 0.0,
            detail: format!("error: {err}"),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Runs `f` and stamps its wall time onto the entry.
pub fn timed(f: impl FnOnce() -> CheckEntry) -> CheckEntry {
    let start = Instant::now();
    let mut entry = f();
    entry.seconds = start.elapsed().as_secs_f64();
    entry
}

/// Tracks the sample with the largest `measured / allowed` ratio.
#[derive(Debug, Clone)]
pub(crate) struct Worst {
    ratio: f64,
    witness: String,
    samples: usize,
}

impl Worst {
    pub(crate) fn new() -> Self {
        Worst {
            ratio: f64::NEG_INFINITY,
            witness: String::new(),
            samples: 0,
        }
    }

    /// Records `measured <= allowed`; `witness` is only built for a new worst.
    pub(crate) fn observe(&mut self, measured: f64, allowed: f64, witness: impl FnOnce() -> String) {
        self.samples += 1;
        let ratio = if allowed == 0.0 {
            if measured <= 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else if measured.is_nan() || allowed.is_nan() {
            f64::INFINITY
        } else {
            measured / allowed
        };
        if ratio > self.ratio {
            self.ratio = ratio;
            self.witness = format!("{} (measured {measured:e}, allowed {allowed:e})", witness());
        }
    }

    pub(crate) fn margin(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            1.0 - self.ratio
        }
    }

    pub(crate) fn into_entry(self, name: &str, tolerance: f64, context: &str) -> CheckEntry {
        let detail = if self.samples == 0 {
            format!("{context}; no samples")
        } else {
            format!("{context}; {} samples; worst at {}", self.samples, self.witness)
        };
        CheckEntry::from_margin(name, self.margin(), tolerance, detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub params: ModelParams,
    pub seed: u64,
    pub dt: f64,
    pub c_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub metadata: ReportMetadata,
    pub entries: Vec<CheckEntry>,
}

impl VerificationReport {
    pub fn entry(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// True iff no non-skipped entry failed.
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| e.status == Status::Fail)
    }

    pub fn to_text(&self) -> String {
        let m = &self.metadata;
        let p = &m.params;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "parameters: h={} N={} alpha={:?} beta={:?} delta={} truncation={:?}",
            p.h, p.n_cells, p.alpha, p.beta, p.delta, p.truncation
        );
        let _ = writeln!(out, "seed={} dt={} c_tol={}", m.seed, m.dt, m.c_tol);
        let width = self.entries.iter().map(|e| e.name.len()).max().unwrap_or(5);
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{:<width$}  {:<4}  margin={:<12.4e} tol={:<10.3e} {:>8.3}s  {}",
                e.name, e.status, e.margin, e.tolerance, e.seconds, e.detail
            );
        }
        let failed = self.failures().count();
        let skipped = self.entries.iter().filter(|e| e.status == Status::Skip).count();
        let _ = writeln!(
            out,
            "{} checks: {} passed, {failed} failed, {skipped} skipped",
            self.entries.len(),
            self.entries.len() - failed - skipped
        );
        out
    }

    /// Rows of `check,status,margin,tolerance,seconds`.
    pub fn csv_rows(&self) -> Vec<[String; 5]> {
        self.entries
            .iter()
            .map(|e| {
                [
                    e.name.clone(),
                    e.status.to_string(),
                    format!("{:e}", e.margin),
                    format!("{:e}", e.tolerance),
                    format!("{:.6}", e.seconds),
                ]
            })
            .collect()
    }
}
