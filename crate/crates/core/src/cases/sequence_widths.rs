use serde::{Deserialize, Serialize};

use super::sequence::{
    integral_tail_bound, power_n0, refr_condition, Count, InfiniteSequenceSet, Sigma,
};
use crate::covering::InequalityCheck;
use crate::error::{Error, Result};
use crate::maps::{build_refr_map, empirical_lipschitz, LipschitzMapSpec, RefrMap};
use crate::metric::Direction;
use crate::width::{width_lower_certified, Quantity, WidthCertificate, Witness};

/// Upper certificate `sigma_N` from the bump map onto the first `N` points.
fn refr_certificate(refr: &RefrMap, sigma: &Sigma) -> WidthCertificate {
    WidthCertificate {
        quantity: Quantity::LipschitzWidth,
        n: refr.n,
        gamma: Some(refr.gamma),
        value: refr.error_bound,
        direction: Direction::Upper,
        witness: Witness::RefrVolume {
            sigma: sigma.clone(),
            gamma: refr.gamma,
            n: refr.n,
            count: refr.count,
            condition: refr.condition.clone(),
            materialized: refr.materialized,
        },
    }
}

/// Spot checks on a materialised prefix: the first bumps reproduce
/// `sigma_j e_j` at their centers and the sampled ratio stays below gamma.
fn audit_prefix(refr: &RefrMap, sigma: &Sigma, seed: u64, pairs: usize) -> Result<f64> {
    refr.allocation.audit()?;
    let map = LipschitzMapSpec::BumpSum(refr.map.clone());
    let probe = refr.materialized.min(64);
    for j in 0..probe {
        let v = map.evaluate(refr.allocation.center(j))?;
        if v[j] != sigma.term(j + 1) || v.iter().enumerate().any(|(i, x)| i != j && *x != 0.0) {
            return Err(Error::Numeric(format!(
                "bump {j} does not reproduce its point"
            )));
        }
    }
    let ratio = empirical_lipschitz(&map, seed, pairs)?;
    if ratio > refr.gamma * (1.0 + 1e-9) {
        return Err(Error::Numeric(format!(
            "sampled ratio {ratio} exceeds gamma"
        )));
    }
    Ok(ratio)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub n: u32,
    pub gamma: f64,
    pub count: Count,
    pub upper: WidthCertificate,
    pub lower: WidthCertificate,
    /// `sigma_(2^n) = 1 / log2(2^n + 1)`.
    pub entropy_exact: f64,
    /// `1 / n`.
    pub entropy_reference: f64,
    /// `1 / (n log2(n + 1))`.
    pub upper_reference: f64,
    /// `upper / entropy_reference`.
    pub ratio: f64,
    /// `1 / log2(n + 1)`.
    pub ratio_bound: f64,
    pub materialized: usize,
    pub sampled_ratio: f64,
    pub checks: Vec<InequalityCheck>,
}

/// Width certificates for `K(sigma)`, `sigma_j = 1 / log2(j + 1)`: upper
/// `sigma_N` with `N = (n + 1)^n`, lower from packings of the full set.
pub fn separation_certificates(n: u32, gamma: f64, seed: u64) -> Result<SeparationReport> {
    if n < 5 {
        return Err(Error::Precondition(format!("n = {n} is below 5")));
    }
    if !(gamma >= 3.0) {
        return Err(Error::Precondition(format!("gamma = {gamma} is below 3")));
    }
    let sigma = Sigma::LogInv;
    let count = Count::power_count(n);
    let refr = build_refr_map(&sigma, gamma, n, count, crate::maps::DEFAULT_MATERIALIZE)?;
    let sampled_ratio = audit_prefix(&refr, &sigma, seed, 10_000)?;
    let upper = refr_certificate(&refr, &sigma);
    let lower = width_lower_certified(
        &InfiniteSequenceSet {
            sigma: sigma.clone(),
        },
        n,
        gamma,
        None,
    )?;

    let nf = n as f64;
    let entropy_exact = 1.0 / ((nf).exp2() + 1.0).log2();
    let entropy_reference = 1.0 / nf;
    let upper_reference = 1.0 / (nf * (nf + 1.0).log2());
    let ratio = upper.value / entropy_reference;
    let ratio_bound = 1.0 / (nf + 1.0).log2();
    let checks = vec![
        InequalityCheck::le_tol(
            "upper <= 1/(n log2(n+1))",
            upper.value,
            upper_reference,
            1e-6,
        ),
        InequalityCheck::le_tol("upper / (1/n) <= 1/log2(n+1)", ratio, ratio_bound, 1e-6),
        InequalityCheck::ge("lower > 0", lower.value, f64::MIN_POSITIVE),
        InequalityCheck::le("lower <= upper", lower.value, upper.value),
        InequalityCheck::le("upper < entropy", upper.value, entropy_exact),
    ];
    Ok(SeparationReport {
        n,
        gamma,
        count,
        upper,
        lower,
        entropy_exact,
        entropy_reference,
        upper_reference,
        ratio,
        ratio_bound,
        materialized: refr.materialized,
        sampled_ratio,
        checks,
    })
}

/// One row of the `n1` scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailScanRow {
    pub n: u32,
    pub bound: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// First `n >= n0 + 1` with `c n > 1` and `m0 + m0 / (c n - 1) <= (gamma/2)^n`.
/// The left side decreases and the right side increases in `n`, so the
/// inequality then holds for every larger `n`.
pub fn collapse_n1(c: f64, gamma: f64) -> Result<(u32, Vec<TailScanRow>)> {
    if !(c > 0.0 && c.is_finite()) || !(gamma > 2.0 && gamma.is_finite()) {
        return Err(Error::Precondition("need c > 0 and gamma > 2".into()));
    }
    let rhs = |n: u32| (gamma / 2.0).powi(n as i32);
    let mut rows = Vec::new();
    let start = power_n0(c).saturating_add(1);
    for n in start..start.saturating_add(1_000_000) {
        let Some(bound) = integral_tail_bound(c, n) else {
            continue;
        };
        let holds = bound <= rhs(n);
        rows.push(TailScanRow {
            n,
            bound,
            rhs: rhs(n),
            holds,
        });
        if holds {
            return Ok((n, rows));
        }
    }
    Err(Error::Numeric("no n1 within the scan range".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub c: f64,
    pub gamma: f64,
    pub n1: u32,
    pub scan: Vec<TailScanRow>,
    /// `(N, certificate)` pairs at `n = n1`.
    pub certificates: Vec<(u64, WidthCertificate)>,
    pub checks: Vec<InequalityCheck>,
}

/// `n1` together with upper certificates `N^(-c)` at `n = n1` for each `N`.
pub fn collapse_certificates(
    c: f64,
    gamma: f64,
    counts: &[u64],
    seed: u64,
) -> Result<CollapseReport> {
    let (n1, scan) = collapse_n1(c, gamma)?;
    let sigma = Sigma::Power { c };
    let mut certificates = Vec::with_capacity(counts.len());
    let mut checks = Vec::new();
    for &big_n in counts {
        let count = Count::Exact(big_n);
        let cond = refr_condition(&sigma, gamma, n1, count)?;
        checks.push(InequalityCheck::le(
            format!("sum_(j<={big_n}) sigma_j^n1 <= (gamma/2)^n1"),
            cond.lhs_upper,
            cond.rhs,
        ));
        let refr = build_refr_map(&sigma, gamma, n1, count, crate::maps::DEFAULT_MATERIALIZE)?;
        audit_prefix(&refr, &sigma, seed, 2_000)?;
        certificates.push((big_n, refr_certificate(&refr, &sigma)));
    }
    Ok(CollapseReport {
        c,
        gamma,
        n1,
        scan,
        certificates,
        checks,
    })
}
