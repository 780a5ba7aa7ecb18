use serde::Serialize;
use thiserror::Error;

use crate::model::AgentId;

/// One checked inequality `lhs <= rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub t: u64,
    pub subject: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Parameters a check measured or was given.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CheckParameters {
    /// Contraction bound on leader degrees, or the ball radius in the
    /// consensus hypothesis.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Sup of the degree extremes over the hypothesis window.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// First step at which the hypothesis held.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypothesis_step: Option<u64>,
    /// Onset step `p` of the consensus bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub onset: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Outcome of one check over a trajectory. `passed` holds exactly when every
/// record's slack is at least `-tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremReport {
    pub check: String,
    pub tolerance: f64,
    pub parameters: CheckParameters,
    pub records: Vec<CheckRecord>,
    pub passed: bool,
}

impl TheoremReport {
    pub fn new(check: &str, tolerance: f64) -> Self {
        TheoremReport {
            check: check.to_string(),
            tolerance,
            parameters: CheckParameters::default(),
            records: Vec::new(),
            passed: true,
        }
    }

    /// Records `lhs <= rhs` with this report's tolerance.
    pub fn push(&mut self, t: u64, subject: impl Into<String>, lhs: f64, rhs: f64) {
        let tol = self.tolerance;
        self.push_with(t, subject, lhs, rhs, tol);
    }

    /// Records `lhs <= rhs` with a record-specific tolerance. NaN fails.
    pub fn push_with(&mut self, t: u64, subject: impl Into<String>, lhs: f64, rhs: f64, tol: f64) {
        let slack = rhs - lhs;
        let pass = slack >= -tol;
        self.passed &= pass;
        self.records.push(CheckRecord {
            t,
            subject: subject.into(),
            lhs,
            rhs,
            slack,
            pass,
        });
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.parameters.notes.push(note.into());
    }

    /// Smallest slack over all records.
    pub fn worst_slack(&self) -> Option<f64> {
        self.records.iter().map(|r| r.slack).reduce(f64::min)
    }

    pub fn worst(&self) -> Option<&CheckRecord> {
        self.records.iter().min_by(|a, b| a.slack.total_cmp(&b.slack))
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    /// Appends another report's records, prefixing their subjects.
    pub fn absorb(&mut self, prefix: &str, other: TheoremReport) {
        for r in other.records {
            self.push_with(r.t, format!("{prefix}{}", r.subject), r.lhs, r.rhs, other.tolerance);
        }
        for n in other.parameters.notes {
            self.note(format!("{prefix}{n}"));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("hypothesis unmet: {0}")]
    InapplicableHypothesis(String),
    #[error("limit undefined for agent {agent}: its leader degrees sum to zero")]
    UndefinedLimit { agent: AgentId },
    #[error("cross-subsystem interaction at t={t}: agents {a} and {b} are within epsilon")]
    CrossTalk { t: u64, a: AgentId, b: AgentId },
}
