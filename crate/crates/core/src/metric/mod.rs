//! Normed spaces, point clouds, distances, diameter and radius bounds.

mod norm;
mod set;
mod step;

pub use norm::{Norm, NormedSpace, REL_TOL, TAU_ZERO};
pub use set::{DistanceTable, FiniteSet, MetricSet};
pub use step::StepFunction;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Upper,
    Lower,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub direction: Direction,
}

impl BoundValue {
    pub fn upper(value: f64) -> Self {
        Self {
            value,
            direction: Direction::Upper,
        }
    }

    pub fn lower(value: f64) -> Self {
        Self {
            value,
            direction: Direction::Lower,
        }
    }

    /// True when `self` (a lower bound) does not exceed `upper`, up to
    /// [`REL_TOL`].
    pub fn consistent_with(&self, upper: &BoundValue) -> bool {
        self.value <= upper.value + REL_TOL * upper.value.abs().max(1.0)
    }
}

/// Exact diameter by an `O(m^2)` scan (or the set's closed form).
pub fn diameter<S: MetricSet + ?Sized>(set: &S) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(set.max_distance())
}

/// Where the radius upper bound came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterKind {
    SetPoint(usize),
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusBounds {
    /// `max_f ||f - center||`, an upper bound on the Chebyshev radius.
    pub upper: f64,
    /// `diameter / 2`.
    pub lower: f64,
    pub center: Vec<f64>,
    pub center_kind: CenterKind,
}

/// Candidate-center upper bound on `rad(K)`, paired with `diam(K)/2`.
///
/// Candidates are every set point and the coordinate-wise mean; the first
/// minimiser wins.
pub fn radius_upper(set: &FiniteSet) -> Result<RadiusBounds> {
    if set.points.is_empty() {
        return Err(Error::EmptySet);
    }
    let m = set.points.len();
    let dim = set.dim();
    let mut mean = vec![0.0; dim];
    for p in &set.points {
        for (acc, c) in mean.iter_mut().zip(p) {
            *acc += c;
        }
    }
    mean.iter_mut().for_each(|c| *c /= m as f64);

    let spread = |c: &[f64]| {
        set.points
            .iter()
            .map(|p| set.space.distance_unchecked(p, c))
            .fold(0.0, f64::max)
    };

    let spreads: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| spread(&set.points[i]))
        .collect();
    let mut best = (f64::INFINITY, CenterKind::Mean);
    for (i, r) in spreads.into_iter().enumerate() {
        if r < best.0 {
            best = (r, CenterKind::SetPoint(i));
        }
    }
    let r_mean = spread(&mean);
    if r_mean < best.0 {
        best = (r_mean, CenterKind::Mean);
    }
    let center = match best.1 {
        CenterKind::SetPoint(i) => set.points[i].clone(),
        CenterKind::Mean => mean,
    };
    Ok(RadiusBounds {
        upper: best.0,
        lower: diameter(set)? / 2.0,
        center,
        center_kind: best.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(m: usize) -> FiniteSet {
        let pts = (0..m)
            .map(|i| {
                let mut e = vec![0.0; m];
                e[i] = 1.0;
                e
            })
            .collect();
        FiniteSet::new(NormedSpace::l2(m), pts).unwrap()
    }

    #[test]
    fn diameter_of_basis_set() {
        assert!((diameter(&basis(5)).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn singleton_and_empty() {
        let s = FiniteSet::new(NormedSpace::l2(2), vec![vec![1.0, 2.0]]).unwrap();
        assert_eq!(diameter(&s).unwrap(), 0.0);
        let r = radius_upper(&s).unwrap();
        assert_eq!((r.upper, r.lower), (0.0, 0.0));
        let e = FiniteSet::new(NormedSpace::l2(2), vec![]).unwrap();
        assert_eq!(diameter(&e), Err(Error::EmptySet));
        assert_eq!(radius_upper(&e), Err(Error::EmptySet));
    }

    #[test]
    fn symmetric_pair_uses_mean() {
        let s = FiniteSet::new(NormedSpace::linf(1), vec![vec![-1.0], vec![1.0]]).unwrap();
        let r = radius_upper(&s).unwrap();
        assert_eq!(r.upper, 1.0);
        assert_eq!(r.lower, 1.0);
        assert_eq!(r.center_kind, CenterKind::Mean);
    }

    #[test]
    fn basis_radius_candidates() {
        // Oracle: evaluate every candidate by hand. Set points give sqrt(2);
        // the mean (0.2, ..., 0.2) gives sqrt(0.8^2 + 4 * 0.2^2) = sqrt(0.8).
        let r = radius_upper(&basis(5)).unwrap();
        assert!((r.upper - 0.8f64.sqrt()).abs() < 1e-15);
        assert!(r.upper <= 2f64.sqrt());
        assert!((r.lower - 2f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn bound_value_consistency() {
        assert!(BoundValue::lower(1.0).consistent_with(&BoundValue::upper(1.0)));
        assert!(!BoundValue::lower(1.1).consistent_with(&BoundValue::upper(1.0)));
    }
}
