use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::cases::{DiagonalSetSpec, SequenceSetSpec, TransportSpec};
use crate::error::{Error, Result};
use crate::metric::FiniteSet;
use crate::relu::{ReLUNetConfig, Sampling};
use crate::width::{GammaSchedule, Subspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Entropy,
    Packing,
    WidthUpper,
    WidthLower,
    Kolmogorov,
    CaseStudy,
    ReluVerify,
    AuditAll,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Entropy => "entropy",
            Command::Packing => "packing",
            Command::WidthUpper => "width-upper",
            Command::WidthLower => "width-lower",
            Command::Kolmogorov => "kolmogorov",
            Command::CaseStudy => "case-study",
            Command::ReluVerify => "relu-verify",
            Command::AuditAll => "audit-all",
        }
    }
}

/// Named case studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseStudy {
    /// Sequence set with `sigma_j = 1 / log2(j + 1)`: width far below entropy.
    Separation,
    /// Sequence set with `sigma_j = j^(-c)`: width collapses in `N`.
    Collapse,
    Hilbert,
    Transport,
    Diagonal,
    Stechkin,
    SequenceEntropy,
}

impl CaseStudy {
    pub const ALL: [CaseStudy; 7] = [
        CaseStudy::Separation,
        CaseStudy::Collapse,
        CaseStudy::Hilbert,
        CaseStudy::Transport,
        CaseStudy::Diagonal,
        CaseStudy::Stechkin,
        CaseStudy::SequenceEntropy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CaseStudy::Separation => "separation",
            CaseStudy::Collapse => "collapse",
            CaseStudy::Hilbert => "hilbert",
            CaseStudy::Transport => "transport",
            CaseStudy::Diagonal => "diagonal",
            CaseStudy::Stechkin => "stechkin",
            CaseStudy::SequenceEntropy => "sequence-entropy",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| {
                let known: Vec<_> = Self::ALL.iter().map(|c| c.name()).collect();
                Error::Config(format!(
                    "unknown case study `{name}` (known: {})",
                    known.join(", ")
                ))
            })
    }
}

impl fmt::Display for CaseStudy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a command runs on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Target {
    Set(FiniteSet),
    /// Path to a JSON `FiniteSet`, resolved against the working directory.
    SetFile(PathBuf),
    Sequence(SequenceSetSpec),
    Transport(TransportSpec),
    Diagonal(DiagonalSetSpec),
    Octahedron {
        n: u32,
    },
    Hilbert {
        m: u32,
    },
    CaseStudy(CaseStudy),
    Relu(ReLUNetConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NRange {
    pub from: u32,
    pub to: u32,
}

/// A single `n`, a list, or an inclusive range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NSpec {
    One(u32),
    List(Vec<u32>),
    Range(NRange),
}

impl NSpec {
    pub fn values(&self) -> Vec<u32> {
        match self {
            NSpec::One(n) => vec![*n],
            NSpec::List(v) => v.clone(),
            NSpec::Range(r) => (r.from..=r.to).collect(),
        }
    }
}

/// Lipschitz constant: fixed, `2^k rad(K)`, or `c' n^delta lambda^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GammaSpec {
    Constant {
        gamma: f64,
    },
    TwoKRad,
    Exponential {
        c_prime: f64,
        delta: f64,
        lambda: f64,
    },
}

impl GammaSpec {
    /// The schedule, if it does not depend on the set.
    pub fn schedule(&self) -> Option<GammaSchedule> {
        match *self {
            GammaSpec::Constant { gamma } => Some(GammaSchedule::Constant { gamma }),
            GammaSpec::TwoKRad => None,
            GammaSpec::Exponential {
                c_prime,
                delta,
                lambda,
            } => Some(GammaSchedule::Exponential {
                c_prime,
                delta,
                lambda,
            }),
        }
    }

    pub fn constant(&self) -> Option<f64> {
        match self {
            GammaSpec::Constant { gamma } => Some(*gamma),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<NSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<GammaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    /// Sample pairs for empirical Lipschitz checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    /// Decay exponent for the collapse study.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Width index `s` for the Hilbert study.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace: Option<Subspace>,
    /// Use the untruncated sequence set for lower bounds.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub untruncated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_per_axis: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<Sampling>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub verify_witness: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Both,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Target>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            target: None,
            params: Params::default(),
            seed: 0,
            output: OutputSpec::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(config_err("empty config"));
        }
        let cfg: Self = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// `params.n`, required and positive.
    pub fn n_values(&self) -> Result<Vec<u32>> {
        let ns = self
            .params
            .n
            .as_ref()
            .ok_or_else(|| config_err(format!("{} needs params.n", self.command.name())))?
            .values();
        if ns.is_empty() {
            return Err(config_err("params.n is empty"));
        }
        Ok(ns)
    }

    /// Structural checks that do not need any computation.
    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        if let Some(n) = &p.n {
            let values = n.values();
            if values.is_empty() {
                return Err(config_err("params.n is empty"));
            }
            if values.contains(&0) {
                return Err(config_err("params.n values must be positive"));
            }
        }
        if p.k == Some(0) {
            return Err(config_err("params.k must be positive"));
        }
        if let Some(eps) = &p.eps {
            if eps.is_empty() || eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
                return Err(config_err(
                    "params.eps must be a nonempty list of positive values",
                ));
            }
        }
        if let Some(g) = &p.gamma {
            let ok = match *g {
                GammaSpec::Constant { gamma } => gamma.is_finite() && gamma > 0.0,
                GammaSpec::TwoKRad => true,
                GammaSpec::Exponential {
                    c_prime,
                    delta,
                    lambda,
                } => c_prime > 0.0 && delta.is_finite() && lambda > 0.0,
            };
            if !ok {
                return Err(config_err("params.gamma must be positive"));
            }
        }
        if p.pairs == Some(0) || p.trials == Some(0) {
            return Err(config_err("pairs and trials must be positive"));
        }
        let target = self.target.as_ref();
        let needs = |what: &str| config_err(format!("{} needs {what}", self.command.name()));
        match self.command {
            Command::AuditAll => {
                if target.is_some() {
                    return Err(config_err("audit-all takes no target"));
                }
            }
            Command::CaseStudy => {
                if !matches!(target, Some(Target::CaseStudy(_))) {
                    return Err(needs("a case_study target"));
                }
            }
            Command::ReluVerify => {
                let Some(Target::Relu(cfg)) = target else {
                    return Err(needs("a relu target"));
                };
                cfg.validate()?;
            }
            Command::Entropy | Command::WidthUpper | Command::Kolmogorov => {
                self.set_target()?;
                self.n_values()?;
                if self.command == Command::WidthUpper && p.k.is_none() {
                    return Err(needs("params.k"));
                }
            }
            Command::Packing => {
                self.set_target()?;
                if p.eps.is_none() {
                    return Err(needs("params.eps"));
                }
            }
            Command::WidthLower => {
                self.set_target()?;
                self.n_values()?;
                match &p.gamma {
                    None => return Err(needs("params.gamma")),
                    Some(GammaSpec::TwoKRad) if p.k.is_none() => {
                        return Err(config_err("gamma two_k_rad needs params.k"))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    fn set_target(&self) -> Result<&Target> {
        match &self.target {
            Some(Target::CaseStudy(_)) | Some(Target::Relu(_)) | None => Err(config_err(format!(
                "{} needs a set target",
                self.command.name()
            ))),
            Some(t) => Ok(t),
        }
    }
}
