//! Certified upper and lower bounds on Lipschitz and Kolmogorov widths.

mod carl;
mod kolmogorov;
mod lipschitz;

pub use carl::{carl_transfer_check, CarlReport, GammaSchedule, WidthBound};
pub use kolmogorov::{kolmogorov_upper, tk_comparison, Subspace};
pub use lipschitz::{
    best_upper_at, default_eps_grid, fixed_width_upper, width_lower_certified,
    width_upper_from_entropy, DEFAULT_GRID_POINTS,
};

use serde::{Deserialize, Serialize};

use crate::cases::{refr_condition, Count, RefrCondition, Sigma};
use crate::covering::PACKING_SLACK;
use crate::error::{Error, Result};
use crate::maps::LipschitzMapSpec;
use crate::metric::{BoundValue, Direction, FiniteSet, MetricSet};

/// Slack when re-checking a stored value against a recomputation.
const RECHECK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    LipschitzWidth,
    KolmogorovWidth,
}

/// What a certificate rests on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A map together with one domain point per set point.
    Map {
        map: LipschitzMapSpec,
        candidates: Vec<Vec<f64>>,
    },
    /// Volume condition behind the sequence-set bump map.
    RefrVolume {
        sigma: Sigma,
        gamma: f64,
        n: u32,
        count: Count,
        condition: RefrCondition,
        materialized: usize,
    },
    /// A `4 eps` packing larger than `(3 gamma / eps)^n`, counts in `log2`.
    Packing {
        eps: f64,
        packing_eps: f64,
        log2_count: f64,
        log2_threshold: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        indices: Option<Vec<usize>>,
    },
    Subspace {
        subspace: Subspace,
    },
    /// A strict inequality `lhs > rhs` that triggers a known lower bound.
    Inequality {
        statement: String,
        lhs: f64,
        rhs: f64,
    },
    /// Vacuous bound.
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthCertificate {
    pub quantity: Quantity,
    pub n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub value: f64,
    pub direction: Direction,
    pub witness: Witness,
}

impl WidthCertificate {
    pub fn bound(&self) -> BoundValue {
        BoundValue {
            value: self.value,
            direction: self.direction,
        }
    }

    /// Re-derive the bound from the witness alone. Witnesses that refer to
    /// set points need `set`; without it only their internal consistency is
    /// checked.
    pub fn verify(&self, set: Option<&FiniteSet>) -> Result<()> {
        let fail = |msg: String| Err(Error::Numeric(msg));
        if !(self.value >= 0.0) {
            return fail(format!("value {} is negative", self.value));
        }
        match &self.witness {
            Witness::Map { map, candidates } => {
                if self.direction != Direction::Upper {
                    return fail("map witnesses certify upper bounds".into());
                }
                map.validate()?;
                let declared = map.declared_lipschitz();
                let gamma = self.gamma.unwrap_or(f64::INFINITY);
                if declared > gamma * (1.0 + RECHECK_TOL) {
                    return fail(format!(
                        "declared constant {declared} exceeds gamma {gamma}"
                    ));
                }
                if let Some(set) = set {
                    let recomputed = lipschitz::max_residual(set, map, candidates)?;
                    if recomputed > self.value * (1.0 + RECHECK_TOL) + RECHECK_TOL {
                        return fail(format!(
                            "recomputed error {recomputed} exceeds certified {}",
                            self.value
                        ));
                    }
                }
                Ok(())
            }
            Witness::RefrVolume {
                sigma,
                gamma,
                n,
                count,
                condition,
                ..
            } => {
                let again = refr_condition(sigma, *gamma, *n, *count)?;
                if !again.holds || again != *condition {
                    return fail("volume condition does not re-verify".into());
                }
                let sigma_n = count
                    .sigma_at(sigma)
                    .ok_or_else(|| Error::Unsupported("sigma_N has no closed form".into()))?;
                if (sigma_n - self.value).abs() > RECHECK_TOL * sigma_n {
                    return fail(format!(
                        "sigma_N = {sigma_n} but certificate says {}",
                        self.value
                    ));
                }
                Ok(())
            }
            Witness::Packing {
                eps,
                packing_eps,
                log2_count,
                log2_threshold,
                indices,
            } => {
                let gamma = self
                    .gamma
                    .ok_or_else(|| Error::Precondition("packing witness needs gamma".into()))?;
                let threshold = self.n as f64 * (3.0 * gamma / eps).log2();
                if (threshold - log2_threshold).abs() > RECHECK_TOL * threshold.abs().max(1.0)
                    || !(log2_count > log2_threshold)
                    || *packing_eps != 4.0 * eps
                    || self.value > *eps
                {
                    return fail("packing witness does not re-verify".into());
                }
                if let (Some(set), Some(idx)) = (set, indices) {
                    if ((idx.len() as f64).log2() - log2_count).abs() > RECHECK_TOL {
                        return fail("packing size does not match its count".into());
                    }
                    for (a, &i) in idx.iter().enumerate() {
                        for &j in &idx[a + 1..] {
                            if !(set.distance(i, j) > packing_eps * (1.0 + PACKING_SLACK)) {
                                return fail(format!("points {i} and {j} are too close"));
                            }
                        }
                    }
                }
                Ok(())
            }
            Witness::Subspace { subspace } => {
                if let Some(set) = set {
                    let again = kolmogorov_upper(set, subspace)?;
                    if (again.value - self.value).abs() > RECHECK_TOL * (1.0 + self.value) {
                        return fail(format!(
                            "recomputed residual {} differs from {}",
                            again.value, self.value
                        ));
                    }
                }
                Ok(())
            }
            Witness::Inequality { lhs, rhs, .. } => {
                if lhs > rhs {
                    Ok(())
                } else {
                    fail(format!("{lhs} > {rhs} is false"))
                }
            }
            Witness::Trivial => {
                if self.direction == Direction::Lower && self.value == 0.0 {
                    Ok(())
                } else {
                    fail("only the zero lower bound is trivial".into())
                }
            }
        }
    }
}
