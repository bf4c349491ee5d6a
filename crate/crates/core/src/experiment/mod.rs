//! Experiment configs, dispatch and deterministic reports.

mod audit;
mod cases;
mod commands;
mod config;
mod report;

pub use audit::audit_all;
pub use cases::run_case_study;
pub use config::{
    CaseStudy, Command, ExperimentConfig, Format, GammaSpec, NRange, NSpec, OutputSpec, Params,
    Target,
};
pub use report::{
    canonicalize, CertificateEntry, Detail, EntropyEntry, Failure, RunReport, Status, Summary,
    Table, TABLE_COLUMNS,
};

use std::time::Instant;

use crate::error::Result;
use report::Recorder;

pub const TOOL: &str = "lipwidth";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit code for an invalid config or command line.
pub const EXIT_USAGE: i32 = 1;

/// Validate the config and run it. Only config problems surface as `Err`;
/// everything raised while computing is recorded in the report.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    let mut rec = Recorder::new(config.params.verify_witness);
    match config.command {
        Command::AuditAll => audit::audit_into(&mut rec, config.seed),
        Command::CaseStudy => {
            let Some(Target::CaseStudy(name)) = &config.target else {
                unreachable!("validated")
            };
            cases::case_study_into(&mut rec, *name, &config.params, config.seed)?
        }
        _ => commands::command_into(&mut rec, config)?,
    }
    Ok(rec.finish(config.clone(), start.elapsed().as_secs_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn audit_all_passes() {
        let r = audit_all(7);
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        assert_eq!(r.status(), Status::Pass, "{:?}", r.summary.violated);
        assert!(r.summary.audits > 50);
    }

    #[test]
    fn hilbert_entropy_command() {
        let cfg = ExperimentConfig::from_json(
            r#"{"command":"entropy","target":{"hilbert":{"m":4}},"params":{"n":[1,4,5]}}"#,
        )
        .unwrap();
        let r = run(&cfg).unwrap();
        assert_eq!(r.exit_code(), 0);
        assert_eq!(r.entropy.len(), 3);
        assert_eq!(r.entropy[2].estimate.upper, 0.0);
        assert_eq!(r.entropy[1].estimate.upper, std::f64::consts::SQRT_2);
    }
}
