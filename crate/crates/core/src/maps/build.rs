use serde::{Deserialize, Serialize};

use super::bump::{BumpSum, Directions};
use super::dyadic::{allocate_dyadic_cubes, CubeAllocation};
use super::{LipschitzMapSpec, PathMap};
use crate::cases::{refr_condition, Count, RefrCondition, Sigma};
use crate::error::{Error, Result};
use crate::metric::{FiniteSet, NormedSpace};

/// Largest `k * n` accepted by [`build_entropy_map`].
pub const ENTROPY_GRID_GUARD: u32 = 24;

/// Bumps materialised by [`build_refr_map`] unless told otherwise.
pub const DEFAULT_MATERIALIZE: usize = 1_000_000;

/// Path through the points in order, knots equally spaced on `[-1, 1]`.
pub fn build_path_map(points: &FiniteSet) -> Result<LipschitzMapSpec> {
    let k = points.points.len();
    if k < 2 {
        return Err(Error::Precondition("a path needs at least 2 points".into()));
    }
    let knots = (0..k)
        .map(|j| -1.0 + 2.0 * j as f64 / (k - 1) as f64)
        .collect();
    Ok(LipschitzMapSpec::PiecewiseLinearPath(PathMap {
        target: points.space.clone(),
        knots,
        values: points.points.clone(),
    }))
}

/// Center of grid cube `j` among the `2^(kn)` cubes of side `2^(1-k)`;
/// the first coordinate varies fastest.
pub fn entropy_grid_center(j: usize, k: u32, n: u32) -> Vec<f64> {
    let per_axis = 1usize << k;
    let side = (1.0 - k as f64).exp2();
    let mut rest = j;
    (0..n)
        .map(|_| {
            let i = rest % per_axis;
            rest /= per_axis;
            -1.0 + (i as f64 + 0.5) * side
        })
        .collect()
}

/// One bump per grid cube of `[-1, 1]^n`, cube `j` carrying covering center
/// `j`: radius `2^-k`, amplitude `||f_j||`, direction `f_j / ||f_j||`.
pub fn build_entropy_map(centers: &FiniteSet, k: u32, n: u32) -> Result<BumpSum> {
    if k == 0 || n == 0 {
        return Err(Error::Precondition("k and n must be positive".into()));
    }
    if k * n > ENTROPY_GRID_GUARD {
        return Err(Error::SizeGuard(format!(
            "k n = {} exceeds {ENTROPY_GRID_GUARD}",
            k * n
        )));
    }
    let count = 1usize << (k * n);
    if centers.points.len() != count {
        return Err(Error::CenterCount {
            expected: count,
            got: centers.points.len(),
        });
    }
    let space = &centers.space;
    let mut grid = Vec::with_capacity(count * n as usize);
    let mut amplitudes = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count * space.dim);
    for (j, f) in centers.points.iter().enumerate() {
        grid.extend(entropy_grid_center(j, k, n));
        let a = space.norm(f)?;
        if a > 0.0 {
            amplitudes.push(a);
            vectors.extend(f.iter().map(|c| c / a));
        } else {
            amplitudes.push(0.0);
            vectors.extend(space.unit_vector());
        }
    }
    let map = BumpSum {
        domain: NormedSpace::linf(n as usize),
        target: space.clone(),
        centers: grid,
        radii: vec![(-(k as f64)).exp2(); count],
        amplitudes,
        directions: Directions::Dense { vectors },
        offset: None,
    };
    Ok(map)
}

/// `l_j` with `2^(-l_j - 1) < 2 sigma_j / gamma <= 2^(-l_j)`.
pub fn refr_levels(sigma: &Sigma, gamma: f64, count: usize) -> Result<Vec<u32>> {
    (1..=count)
        .map(|j| {
            let r = 2.0 * sigma.term(j) / gamma;
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::Precondition(format!(
                    "2 sigma_{j} / gamma = {r} is outside (0, 1]"
                )));
            }
            let mut l = (-r.log2()).floor().max(0.0) as i64;
            while l > 0 && r > (-(l as f64)).exp2() {
                l -= 1;
            }
            while r <= (-(l as f64) - 1.0).exp2() {
                l += 1;
            }
            Ok(l as u32)
        })
        .collect()
}

/// Bump map onto the first `materialized` points of `K(sigma)`, with the
/// volume condition certified for the full count `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefrMap {
    pub map: BumpSum,
    pub allocation: CubeAllocation,
    pub condition: RefrCondition,
    pub gamma: f64,
    pub n: u32,
    pub count: Count,
    pub materialized: usize,
    /// `sigma_N`, the approximation error bound on `K(sigma)`.
    pub error_bound: f64,
}

/// Build `Phi(y) = sum_j sigma_j (1 - 2^(l_j + 1) ||y_j - y||_inf)_+ e_j`
/// after checking `sigma_1 <= gamma / 2` and `sum_{j<=N} sigma_j^n <=
/// (gamma/2)^n`.
pub fn build_refr_map(
    sigma: &Sigma,
    gamma: f64,
    n: u32,
    count: Count,
    materialize_cap: usize,
) -> Result<RefrMap> {
    let condition = refr_condition(sigma, gamma, n, count)?;
    if !condition.holds {
        return Err(Error::Precondition(format!(
            "volume condition fails: sum sigma_j^n <= {} but (gamma/2)^n = {}",
            condition.lhs_upper, condition.rhs
        )));
    }
    let error_bound = count
        .sigma_at(sigma)
        .ok_or_else(|| Error::Unsupported("sigma_N has no closed form".into()))?;
    let materialized = match count {
        Count::Exact(k) => (k as usize).min(materialize_cap),
        Count::Log2(_) => materialize_cap,
    };
    if let Some(a) = sigma.available() {
        if materialized > a {
            return Err(Error::InvalidSequence(format!("only {a} terms listed")));
        }
    }
    let levels = refr_levels(sigma, gamma, materialized)?;
    let allocation = allocate_dyadic_cubes(n as usize, &levels)?;
    let map = BumpSum {
        domain: NormedSpace::linf(n as usize),
        target: NormedSpace::linf(materialized.max(1)),
        centers: allocation.centers.clone(),
        radii: levels.iter().map(|l| (-(*l as f64) - 1.0).exp2()).collect(),
        amplitudes: (1..=materialized).map(|j| sigma.term(j)).collect(),
        directions: Directions::Basis {
            indices: (0..materialized).collect(),
        },
        offset: None,
    };
    let declared = map.declared_lipschitz();
    if declared > gamma * (1.0 + 1e-12) {
        return Err(Error::Numeric(format!(
            "declared constant {declared} exceeds gamma {gamma}"
        )));
    }
    Ok(RefrMap {
        map,
        allocation,
        condition,
        gamma,
        n,
        count,
        materialized,
        error_bound,
    })
}
