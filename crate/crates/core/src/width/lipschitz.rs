use rayon::prelude::*;

use super::{Quantity, WidthCertificate, Witness};
use crate::covering::{inner_entropy, PackingBound};
use crate::error::{Error, Result};
use crate::maps::{build_entropy_map, entropy_grid_center, LipschitzMapSpec, ENTROPY_GRID_GUARD};
use crate::metric::{radius_upper, Direction, FiniteSet};

/// Size of the default eps grid.
pub const DEFAULT_GRID_POINTS: usize = 64;

/// `max_f ||f - Phi(y(f))||`.
pub(crate) fn max_residual(
    set: &FiniteSet,
    map: &LipschitzMapSpec,
    candidates: &[Vec<f64>],
) -> Result<f64> {
    if candidates.len() != set.points.len() {
        return Err(Error::DimensionMismatch {
            expected: set.points.len(),
            got: candidates.len(),
        });
    }
    if map.target() != set.space {
        return Err(Error::InvalidMap(
            "map target differs from the set's space".into(),
        ));
    }
    let images = map.evaluate_many(candidates)?;
    Ok(set
        .points
        .iter()
        .zip(&images)
        .map(|(f, g)| set.space.distance_unchecked(f, g))
        .fold(0.0, f64::max))
}

/// Upper bound on the fixed Lipschitz width from one candidate per point.
pub fn fixed_width_upper(
    set: &FiniteSet,
    map: &LipschitzMapSpec,
    candidates: &[Vec<f64>],
) -> Result<WidthCertificate> {
    map.validate()?;
    let value = max_residual(set, map, candidates)?;
    Ok(WidthCertificate {
        quantity: Quantity::LipschitzWidth,
        n: map.domain_dim() as u32,
        gamma: Some(map.declared_lipschitz()),
        value,
        direction: Direction::Upper,
        witness: Witness::Map {
            map: map.clone(),
            candidates: candidates.to_vec(),
        },
    })
}

/// Bump map through an inner covering with `2^(kn)` centers, one per grid
/// cube, so the width with `gamma = 2^k rad` is at most the covering radius.
pub fn width_upper_from_entropy(set: &FiniteSet, k: u32, n: u32) -> Result<WidthCertificate> {
    if k == 0 || n == 0 {
        return Err(Error::Precondition("k and n must be positive".into()));
    }
    if k.saturating_mul(n) > ENTROPY_GRID_GUARD {
        return Err(Error::SizeGuard(format!(
            "k n = {} exceeds {ENTROPY_GRID_GUARD}",
            k.saturating_mul(n)
        )));
    }
    let rad = radius_upper(set)?;
    let shifted = set.translated(&rad.center)?;
    let est = inner_entropy(&shifted, k * n)?;
    let centers = &est.centers;
    let count = 1usize << (k * n);
    let padded: Vec<usize> = (0..count).map(|j| centers[j % centers.len()]).collect();
    let mut bump = build_entropy_map(&shifted.select(&padded), k, n)?;
    bump.offset = Some(rad.center.clone());

    let candidates: Vec<Vec<f64>> = shifted
        .points
        .iter()
        .map(|f| {
            let (slot, _) = centers
                .iter()
                .enumerate()
                .map(|(s, &c)| (s, shifted.space.distance_unchecked(f, &shifted.points[c])))
                .fold((0, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b });
            entropy_grid_center(slot, k, n)
        })
        .collect();
    let mut cert = fixed_width_upper(set, &LipschitzMapSpec::BumpSum(bump), &candidates)?;
    cert.gamma = Some((k as f64).exp2() * rad.upper);
    Ok(cert)
}

/// `DEFAULT_GRID_POINTS` log-spaced values from `diam / 2^16` to `diam`.
pub fn default_eps_grid(diam: f64) -> Vec<f64> {
    let last = (DEFAULT_GRID_POINTS - 1) as f64;
    (0..DEFAULT_GRID_POINTS)
        .map(|i| diam * (16.0 * (i as f64 / last - 1.0)).exp2())
        .collect()
}

/// Largest grid eps with a `4 eps` packing of more than `(3 gamma / eps)^n`
/// points; such a packing forces `N_{2 eps} > (3 gamma / eps)^n`, so the
/// width is at least eps.
pub fn width_lower_certified<P: PackingBound + Sync + ?Sized>(
    set: &P,
    n: u32,
    gamma: f64,
    eps_grid: Option<&[f64]>,
) -> Result<WidthCertificate> {
    if n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Precondition(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let grid = match eps_grid {
        Some(g) => g.to_vec(),
        None => default_eps_grid(set.diameter_upper()),
    };
    if grid.is_empty() {
        return Err(Error::Precondition("empty eps grid".into()));
    }
    if grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::Precondition("eps values must be positive".into()));
    }
    let best = grid
        .par_iter()
        .filter_map(|&eps| {
            let log2_count = set.packing_log2_lower(4.0 * eps);
            let log2_threshold = n as f64 * (3.0 * gamma / eps).log2();
            (log2_count > log2_threshold).then_some((eps, log2_count, log2_threshold))
        })
        .max_by(|a, b| a.0.total_cmp(&b.0));
    let (value, witness) = match best {
        Some((eps, log2_count, log2_threshold)) => (
            eps,
            Witness::Packing {
                eps,
                packing_eps: 4.0 * eps,
                log2_count,
                log2_threshold,
                indices: set.packing_indices(4.0 * eps),
            },
        ),
        None => (0.0, Witness::Trivial),
    };
    Ok(WidthCertificate {
        quantity: Quantity::LipschitzWidth,
        n,
        gamma: Some(gamma),
        value,
        direction: Direction::Lower,
        witness,
    })
}

/// Smallest upper certificate usable at `gamma`, i.e. among those built
/// with a constant at most `gamma`.
pub fn best_upper_at(certs: &[WidthCertificate], gamma: f64) -> Option<f64> {
    certs
        .iter()
        .filter(|c| c.direction == Direction::Upper && c.gamma.is_some_and(|g| g <= gamma))
        .map(|c| c.value)
        .min_by(f64::total_cmp)
}
