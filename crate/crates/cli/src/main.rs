use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lipwidth_core::experiment::{
    self, CaseStudy, Command, ExperimentConfig, Format, GammaSpec, NSpec, RunReport, Target,
    EXIT_USAGE,
};
use lipwidth_core::relu::ReLUNetConfig;

/// Certified bounds on Lipschitz widths, entropy numbers and Kolmogorov widths.
#[derive(Debug, Parser)]
#[command(name = "lipwidth", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Args)]
struct Global {
    /// JSON experiment config.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Size of the worker pool (defaults to the number of cores).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Directory for report.json / report.csv; stdout when absent.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Re-check every certificate from its witness.
    #[arg(long, global = true)]
    verify_witness: bool,
    /// Comma-separated list of n values.
    #[arg(long, global = true, value_delimiter = ',', value_name = "N")]
    n: Option<Vec<u32>>,
    /// Constant Lipschitz bound.
    #[arg(long, global = true, value_name = "GAMMA")]
    gamma: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Both,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
            FormatArg::Both => Format::Both,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run whatever command the config names.
    Run,
    Entropy,
    Packing,
    WidthUpper,
    WidthLower,
    Kolmogorov,
    /// Named case studies.
    CaseStudy {
        #[command(subcommand)]
        action: CaseAction,
    },
    /// ReLU network Lipschitz checks.
    Relu {
        #[command(subcommand)]
        action: ReluAction,
    },
    /// Run the invariant suite.
    AuditAll,
}

#[derive(Debug, Subcommand)]
enum CaseAction {
    Run { name: String },
    List,
}

#[derive(Debug, Subcommand)]
enum ReluAction {
    Verify {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
    },
}

struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Usage> {
    let text = fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
    Ok(ExperimentConfig::from_json(&text)?)
}

fn with_command(global: &Global, command: Command) -> Result<ExperimentConfig, Usage> {
    match &global.config {
        Some(path) => {
            let cfg = load_config(path)?;
            if cfg.command != command {
                return Err(Usage(format!(
                    "config command `{}` does not match `{}`",
                    cfg.command.name(),
                    command.name()
                )));
            }
            Ok(cfg)
        }
        None if matches!(command, Command::AuditAll) => Ok(ExperimentConfig::new(command)),
        None => Err(Usage(format!("{} needs --config", command.name()))),
    }
}

fn build_config(cli: &Cli) -> Result<Option<ExperimentConfig>, Usage> {
    let g = &cli.global;
    let mut cfg = match &cli.command {
        Cmd::Run => match &g.config {
            Some(p) => load_config(p)?,
            None => return Err(Usage("run needs --config".into())),
        },
        Cmd::Entropy => with_command(g, Command::Entropy)?,
        Cmd::Packing => with_command(g, Command::Packing)?,
        Cmd::WidthUpper => with_command(g, Command::WidthUpper)?,
        Cmd::WidthLower => with_command(g, Command::WidthLower)?,
        Cmd::Kolmogorov => with_command(g, Command::Kolmogorov)?,
        Cmd::AuditAll => with_command(g, Command::AuditAll)?,
        Cmd::CaseStudy {
            action: CaseAction::List,
        } => {
            for c in CaseStudy::ALL {
                println!("{c}");
            }
            return Ok(None);
        }
        Cmd::CaseStudy {
            action: CaseAction::Run { name },
        } => {
            let name = CaseStudy::parse(name)?;
            let mut cfg = match &g.config {
                Some(p) => load_config(p)?,
                None => ExperimentConfig::new(Command::CaseStudy),
            };
            if cfg.command != Command::CaseStudy {
                return Err(Usage("config is not a case-study config".into()));
            }
            cfg.target = Some(Target::CaseStudy(name));
            cfg
        }
        Cmd::Relu {
            action:
                ReluAction::Verify {
                    d,
                    width,
                    depth,
                    trials,
                },
        } => {
            let mut cfg = match &g.config {
                Some(p) => load_config(p)?,
                None => ExperimentConfig::new(Command::ReluVerify),
            };
            if cfg.command != Command::ReluVerify {
                return Err(Usage("config is not a relu-verify config".into()));
            }
            let current = match &cfg.target {
                Some(Target::Relu(r)) => Some(*r),
                _ => None,
            };
            let pick = |flag: Option<usize>, from: Option<usize>, what: &str| {
                flag.or(from)
                    .ok_or_else(|| Usage(format!("relu verify needs --{what}")))
            };
            let net = ReLUNetConfig::new(
                pick(*d, current.map(|c| c.d), "d")?,
                pick(*width, current.map(|c| c.width), "width")?,
                pick(*depth, current.map(|c| c.depth), "depth")?,
            )?;
            cfg.target = Some(Target::Relu(net));
            if trials.is_some() {
                cfg.params.trials = *trials;
            }
            cfg
        }
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(n) = &g.n {
        cfg.params.n = Some(NSpec::List(n.clone()));
    }
    if let Some(gamma) = g.gamma {
        cfg.params.gamma = Some(GammaSpec::Constant { gamma });
    }
    if g.verify_witness {
        cfg.params.verify_witness = true;
    }
    if let Some(out) = &g.out {
        cfg.output.dir = Some(out.clone());
    }
    if let Some(f) = g.format {
        cfg.output.format = Some(f.into());
    }
    cfg.validate()?;
    Ok(Some(cfg))
}

fn write_outputs(report: &RunReport) -> Result<(), Usage> {
    let format = report.config.output.format.unwrap_or_default();
    let json = matches!(format, Format::Json | Format::Both);
    let csv = matches!(format, Format::Csv | Format::Both);
    match &report.config.output.dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Usage(format!("{}: {e}", dir.display())))?;
            if json {
                fs::write(dir.join("report.json"), report.to_json())?;
            }
            if csv {
                fs::write(dir.join("report.csv"), report.table.to_csv())?;
            }
        }
        None => {
            if json {
                print!("{}", report.to_json());
            }
            if csv {
                print!("{}", report.table.to_csv());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    if let Some(w) = cli.global.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    }
    let cfg = match build_config(&cli) {
        Ok(Some(c)) => c,
        Ok(None) => return ExitCode::SUCCESS,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let report = match experiment::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    if let Err(Usage(msg)) = write_outputs(&report) {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    let s = &report.summary;
    eprintln!(
        "{}: {} audits, {} violated, {} failures ({:?})",
        cfg.command.name(),
        s.audits,
        s.violated.len(),
        s.failures,
        s.status
    );
    for v in &s.violated {
        eprintln!("  violated: {v}");
    }
    for f in &report.failures {
        eprintln!("  failed: {}: {}", f.stage, f.message);
    }
    ExitCode::from(report.exit_code() as u8)
}
