use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::{TOOL, VERSION};
use crate::covering::{EntropyEstimate, InequalityCheck};
use crate::error::{Error, Result};
use crate::metric::FiniteSet;
use crate::width::WidthCertificate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub label: String,
    pub certificate: WidthCertificate,
    /// Result of re-checking the witness, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_verified: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEntry {
    pub label: String,
    pub estimate: EntropyEstimate,
}

/// A computation that raised an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: String,
    pub message: String,
}

/// Free-form structured output of a stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detail {
    pub label: String,
    pub value: serde_json::Value,
}

pub const TABLE_COLUMNS: [&str; 6] = ["section", "label", "n", "lower", "upper", "reference"];

/// Flat projection of the report for plotting.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub rows: Vec<[String; 6]>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(TABLE_COLUMNS).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    InequalityViolation,
    NumericFailure,
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::InequalityViolation => 2,
            Status::NumericFailure => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub audits: usize,
    pub passed: usize,
    pub violated: Vec<String>,
    pub failures: usize,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    /// Seconds; left out of the canonical form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
    pub certificates: Vec<CertificateEntry>,
    pub entropy: Vec<EntropyEntry>,
    pub audits: Vec<InequalityCheck>,
    pub failures: Vec<Failure>,
    pub details: Vec<Detail>,
    pub table: Table,
    pub summary: Summary,
}

impl RunReport {
    pub fn status(&self) -> Status {
        self.summary.status
    }

    pub fn exit_code(&self) -> i32 {
        self.summary.status.exit_code()
    }

    /// Pretty JSON including the wall clock.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// JSON without the wall clock and the output directory; identical for
    /// identical config, seed and version.
    pub fn canonical_json(&self) -> String {
        let mut r = self.clone();
        r.wall_clock_seconds = None;
        r.config.output.dir = None;
        r.to_json()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Canonical form of a serialized report.
pub fn canonicalize(text: &str) -> Result<String> {
    Ok(RunReport::from_json(text)?.canonical_json())
}

/// `f64` formatted for the table; empty when absent.
pub(crate) fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub(crate) struct Recorder {
    verify_witness: bool,
    certificates: Vec<CertificateEntry>,
    entropy: Vec<EntropyEntry>,
    audits: Vec<InequalityCheck>,
    failures: Vec<Failure>,
    details: Vec<Detail>,
    table: Table,
}

impl Recorder {
    pub fn new(verify_witness: bool) -> Self {
        Self {
            verify_witness,
            certificates: Vec::new(),
            entropy: Vec::new(),
            audits: Vec::new(),
            failures: Vec::new(),
            details: Vec::new(),
            table: Table::default(),
        }
    }

    /// Run a stage, recording an error as a failure.
    pub fn attempt<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Option<T> {
        match f(self) {
            Ok(v) => Some(v),
            Err(e) => {
                self.failures.push(Failure {
                    stage: stage.to_string(),
                    message: e.to_string(),
                });
                None
            }
        }
    }

    pub fn check(&mut self, c: InequalityCheck) {
        self.audits.push(c);
    }

    pub fn checks(&mut self, prefix: &str, cs: impl IntoIterator<Item = InequalityCheck>) {
        for mut c in cs {
            c.name = format!("{prefix}: {}", c.name);
            self.audits.push(c);
        }
    }

    /// Record a boolean fact as a check `1 >= 1` or `0 >= 1`.
    pub fn holds(&mut self, name: impl Into<String>, ok: bool) {
        self.audits
            .push(InequalityCheck::ge(name, if ok { 1.0 } else { 0.0 }, 1.0));
    }

    pub fn certificate(
        &mut self,
        label: impl Into<String>,
        cert: &WidthCertificate,
        set: Option<&FiniteSet>,
    ) {
        let label = label.into();
        let witness_verified = self.verify_witness.then(|| {
            let ok = cert.verify(set).is_ok();
            self.holds(format!("witness {label}"), ok);
            ok
        });
        let (lower, upper) = match cert.direction {
            crate::metric::Direction::Lower => (Some(cert.value), None),
            crate::metric::Direction::Upper => (None, Some(cert.value)),
            crate::metric::Direction::Exact => (Some(cert.value), Some(cert.value)),
        };
        self.row("certificate", &label, Some(cert.n), lower, upper, None);
        self.certificates.push(CertificateEntry {
            label,
            certificate: cert.clone(),
            witness_verified,
        });
    }

    pub fn entropy(
        &mut self,
        label: impl Into<String>,
        e: &EntropyEstimate,
        reference: Option<f64>,
    ) {
        let label = label.into();
        self.row(
            "entropy",
            &label,
            Some(e.n),
            Some(e.lower),
            Some(e.upper),
            reference,
        );
        self.entropy.push(EntropyEntry {
            label,
            estimate: e.clone(),
        });
    }

    pub fn entropy_upper(&self, label: &str) -> Option<f64> {
        self.entropy
            .iter()
            .find(|e| e.label == label)
            .map(|e| e.estimate.upper)
    }

    pub fn detail<T: Serialize>(&mut self, label: impl Into<String>, value: &T) {
        self.details.push(Detail {
            label: label.into(),
            value: serde_json::to_value(value).expect("detail serializes"),
        });
    }

    pub fn row(
        &mut self,
        section: &str,
        label: &str,
        n: Option<u32>,
        lower: Option<f64>,
        upper: Option<f64>,
        reference: Option<f64>,
    ) {
        self.table.rows.push([
            section.to_string(),
            label.to_string(),
            n.map(|n| n.to_string()).unwrap_or_default(),
            cell(lower),
            cell(upper),
            cell(reference),
        ]);
    }

    pub fn finish(self, config: ExperimentConfig, seconds: f64) -> RunReport {
        let violated: Vec<String> = self
            .audits
            .iter()
            .filter(|c| !c.holds)
            .map(|c| c.name.clone())
            .collect();
        let status = if !self.failures.is_empty() {
            Status::NumericFailure
        } else if !violated.is_empty() {
            Status::InequalityViolation
        } else {
            Status::Pass
        };
        RunReport {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            config,
            wall_clock_seconds: Some(seconds),
            summary: Summary {
                audits: self.audits.len(),
                passed: self.audits.len() - violated.len(),
                violated,
                failures: self.failures.len(),
                status,
            },
            certificates: self.certificates,
            entropy: self.entropy,
            audits: self.audits,
            failures: self.failures,
            details: self.details,
            table: self.table,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::Command;

    #[test]
    fn status_precedence() {
        let cfg = ExperimentConfig::new(Command::AuditAll);
        let mut r = Recorder::new(false);
        r.holds("ok", true);
        assert_eq!(r.finish(cfg.clone(), 0.0).exit_code(), 0);

        let mut r = Recorder::new(false);
        r.holds("bad", false);
        let rep = r.finish(cfg.clone(), 0.0);
        assert_eq!(rep.exit_code(), 2);
        assert_eq!(rep.summary.violated, vec!["bad".to_string()]);

        let mut r = Recorder::new(false);
        r.holds("bad", false);
        r.attempt("stage", |_| -> Result<()> {
            Err(Error::Numeric("x".into()))
        });
        assert_eq!(r.finish(cfg, 0.0).exit_code(), 3);
    }

    #[test]
    fn canonical_drops_clock() {
        let cfg = ExperimentConfig::new(Command::AuditAll);
        let a = Recorder::new(false).finish(cfg.clone(), 1.5);
        let b = Recorder::new(false).finish(cfg, 2.5);
        assert_ne!(a.to_json(), b.to_json());
        assert_eq!(a.canonical_json(), b.canonical_json());
        assert_eq!(canonicalize(&a.to_json()).unwrap(), a.canonical_json());
        assert!(!a.canonical_json().contains("wall_clock"));
    }

    #[test]
    fn csv_quotes_commas() {
        let mut r = Recorder::new(false);
        r.row("s", "a, b", Some(2), Some(0.5), None, None);
        let csv = r
            .finish(ExperimentConfig::new(Command::AuditAll), 0.0)
            .table
            .to_csv();
        assert_eq!(
            csv,
            "section,label,n,lower,upper,reference\ns,\"a, b\",2,0.5,,\n"
        );
    }
}
