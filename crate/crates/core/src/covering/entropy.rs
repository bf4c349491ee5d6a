use serde::{Deserialize, Serialize};

use super::cover::{covering_capped, realised_radius, CoveringResult};
use super::packing::greedy_packing_capped;
use crate::error::{Error, Result};
use crate::metric::{radius_upper, DistanceTable, FiniteSet, MetricSet};

/// Iteration cap of the continuous bisection.
pub const BISECTION_STEPS: usize = 60;
/// Absolute bracket width at which the continuous bisection stops.
pub const BISECTION_WIDTH: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub n: u32,
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    /// Centers of the cover realising `upper`.
    #[serde(skip)]
    pub centers: Vec<usize>,
}

impl EntropyEstimate {
    pub fn contains(&self, x: f64, rel: f64) -> bool {
        let slack = rel * x.abs().max(self.upper.abs());
        self.lower - slack <= x && x <= self.upper + slack
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

pub(crate) fn capacity(n: u32) -> usize {
    if n >= usize::BITS - 1 {
        usize::MAX
    } else {
        1usize << n
    }
}

/// Certified bracket on the inner entropy number: the least eps for which
/// `2^n` closed eps-balls centred in the set cover it.
pub fn inner_entropy<S: MetricSet + ?Sized>(set: &S, n: u32) -> Result<EntropyEstimate> {
    let m = set.len();
    if m == 0 {
        return Err(Error::EmptySet);
    }
    let cap = capacity(n);
    if m <= cap {
        return Ok(EntropyEstimate {
            n,
            lower: 0.0,
            upper: 0.0,
            exact: true,
            centers: (0..m).collect(),
        });
    }
    if let Some(levels) = set.distance_levels() {
        return Ok(discrete_search(set, levels, n, cap));
    }
    if m <= DistanceTable::<S>::MAX_POINTS {
        let table = DistanceTable::build(set);
        let levels = pairwise_levels(&table);
        Ok(discrete_search(&table, levels, n, cap))
    } else {
        Ok(continuous_search(set, n, cap))
    }
}

fn pairwise_levels<S: MetricSet + ?Sized>(set: &S) -> Vec<f64> {
    let m = set.len();
    let mut d: Vec<f64> = Vec::with_capacity(m * (m - 1) / 2 + 1);
    d.push(0.0);
    for i in 0..m {
        for j in (i + 1)..m {
            d.push(set.distance(i, j));
        }
    }
    d.sort_by(f64::total_cmp);
    d.dedup();
    d
}

/// Bisection over the sorted pairwise distances. The entropy number of a
/// finite set is one of them, so both ends snap to attained values.
fn discrete_search<S: MetricSet + ?Sized>(
    set: &S,
    levels: Vec<f64>,
    n: u32,
    cap: usize,
) -> EntropyEstimate {
    let top = levels.len() - 1;
    let cover = |k: usize| covering_capped(set, levels[k], cap);

    // Upper: smallest level whose cover fits in 2^n balls.
    let mut best: CoveringResult = cover(top);
    let (mut lo, mut hi) = (0usize, top);
    let c0 = cover(0);
    let exact = c0.exact;
    if c0.size() <= cap {
        best = c0;
        hi = 0;
    }
    while hi > lo + 1 {
        let mid = (lo + hi) / 2;
        let c = cover(mid);
        if c.size() <= cap {
            hi = mid;
            best = c;
        } else {
            lo = mid;
        }
    }
    let upper = realised_radius(set, &best.center_indices);

    // Lower: a level whose certified covering count exceeds 2^n sits strictly
    // below the entropy number, so the next level is a lower bound.
    let lower = if covering_capped(set, levels[0], cap).lower_bound <= cap {
        0.0
    } else {
        let (mut lo, mut hi) = (0usize, top);
        while hi > lo + 1 {
            let mid = (lo + hi) / 2;
            if covering_capped(set, levels[mid], cap).lower_bound > cap {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        levels[hi]
    };
    EntropyEstimate {
        n,
        lower: lower.min(upper),
        upper,
        exact,
        centers: best.center_indices,
    }
}

fn continuous_search<S: MetricSet + ?Sized>(set: &S, n: u32, cap: usize) -> EntropyEstimate {
    let diam = set.max_distance();
    let mut best = covering_capped(set, diam, cap);
    let exact = best.exact;
    let (mut lo, mut hi) = (0.0, diam);
    for _ in 0..BISECTION_STEPS {
        if hi - lo <= BISECTION_WIDTH {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let c = covering_capped(set, mid, cap);
        if c.size() <= cap {
            hi = mid;
            best = c;
        } else {
            lo = mid;
        }
    }
    let upper = realised_radius(set, &best.center_indices);

    let (mut lo, mut hi) = (0.0, upper);
    for _ in 0..BISECTION_STEPS {
        if hi - lo <= BISECTION_WIDTH {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if covering_capped(set, mid, cap).lower_bound > cap {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    EntropyEstimate {
        n,
        lower: lo,
        upper,
        exact,
        centers: best.center_indices,
    }
}

/// One checked inequality `lhs >= rhs` (or `lhs <= rhs`), with its numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalityCheck {
    pub fn ge(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            holds: lhs >= rhs,
        }
    }

    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            holds: lhs <= rhs,
        }
    }

    /// `lhs <= rhs` up to a relative tolerance.
    pub fn le_tol(name: impl Into<String>, lhs: f64, rhs: f64, rel: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            holds: lhs <= rhs + rel * rhs.abs().max(lhs.abs()).max(1e-300),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub eps: f64,
    /// Greedy maximal eps-packing size.
    pub packing_eps: usize,
    /// Inner covering size at eps.
    pub covering_eps: usize,
    pub covering_exact: bool,
    /// Greedy maximal 2eps-packing size.
    pub packing_2eps: usize,
    pub checks: Vec<InequalityCheck>,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Check both sandwich chains on `set`: packing/covering counts at `eps`, and
/// inner/outer entropy numbers for every `n` with `2^n` below the set size.
///
/// Outer entropy numbers are bracketed from independent witnesses: the
/// Chebyshev centers of the clusters of the inner cover (upper) and a greedy
/// packing with more than `2^n` points (lower).
pub fn sandwich_audit(set: &FiniteSet, eps: f64) -> Result<SandwichReport> {
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if set.points.is_empty() {
        return Err(Error::EmptySet);
    }
    let m = set.points.len();
    let p1 = greedy_packing_capped(set, eps, usize::MAX).size;
    let cov = covering_capped(set, eps, usize::MAX);
    let p2 = greedy_packing_capped(set, 2.0 * eps, usize::MAX).size;
    let mut checks = vec![InequalityCheck::ge(
        "packing_eps >= covering_eps",
        p1 as f64,
        cov.size() as f64,
    )];
    if cov.exact {
        checks.push(InequalityCheck::ge(
            "covering_eps >= packing_2eps",
            cov.size() as f64,
            p2 as f64,
        ));
    } else {
        checks.push(InequalityCheck::ge(
            "covering_eps >= covering_lower_bound",
            cov.size() as f64,
            cov.lower_bound as f64,
        ));
    }

    let levels = pairwise_levels(set);
    let mut n = 0u32;
    while capacity(n) < m {
        let inner = inner_entropy(set, n)?;
        let outer_up = cluster_radius(set, &inner.centers)?;
        let outer_lo = outer_lower(set, &levels, capacity(n));
        checks.push(InequalityCheck::le_tol(
            format!("outer_upper <= inner_upper (n={n})"),
            outer_up,
            inner.upper,
            1e-12,
        ));
        checks.push(InequalityCheck::le_tol(
            format!("inner_lower <= 2 * outer_upper (n={n})"),
            inner.lower,
            2.0 * outer_up,
            1e-12,
        ));
        checks.push(InequalityCheck::le_tol(
            format!("outer_lower <= inner_upper (n={n})"),
            outer_lo,
            inner.upper,
            1e-12,
        ));
        n += 1;
    }
    Ok(SandwichReport {
        eps,
        packing_eps: p1,
        covering_eps: cov.size(),
        covering_exact: cov.exact,
        packing_2eps: p2,
        checks,
    })
}

/// Largest outer radius of the clusters induced by `centers`, each cluster
/// re-centred at its best candidate center.
fn cluster_radius(set: &FiniteSet, centers: &[usize]) -> Result<f64> {
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
    for i in 0..set.points.len() {
        let mut best = (f64::INFINITY, 0usize);
        for (g, &c) in centers.iter().enumerate() {
            let d = if c == i { 0.0 } else { set.distance(i, c) };
            if d < best.0 {
                best = (d, g);
            }
        }
        groups[best.1].push(i);
    }
    let mut worst = 0.0f64;
    for g in groups.iter().filter(|g| !g.is_empty()) {
        worst = worst.max(radius_upper(&set.select(g))?.upper);
    }
    Ok(worst)
}

/// Largest `d / 2` over pairwise levels `d` at which a greedy `d`-packing has
/// more than `cap` points; two such points never share a ball of radius `d/2`.
fn outer_lower(set: &FiniteSet, levels: &[f64], cap: usize) -> f64 {
    let mut best = 0.0;
    for &d in levels.iter().filter(|d| **d > 0.0) {
        if greedy_packing_capped(set, d, cap + 1).size > cap {
            best = d / 2.0;
        } else {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::NormedSpace;

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
    fn basis_entropy_is_sqrt2_until_capacity() {
        let s = basis(5);
        for n in 0..3 {
            let e = inner_entropy(&s, n).unwrap();
            assert!(e.exact);
            assert_eq!(e.lower, 2f64.sqrt());
            assert_eq!(e.upper, 2f64.sqrt());
        }
        let e = inner_entropy(&s, 3).unwrap();
        assert_eq!((e.lower, e.upper), (0.0, 0.0));
    }

    #[test]
    fn line_entropy_exact() {
        // Five points 0..4 in l1^1: two centers at 1 and 3 (or 4) give 1,
        // one center at 2 gives 2.
        let s =
            FiniteSet::new(NormedSpace::l1(1), (0..5).map(|i| vec![i as f64]).collect()).unwrap();
        assert_eq!(inner_entropy(&s, 0).unwrap().upper, 2.0);
        let e = inner_entropy(&s, 1).unwrap();
        assert_eq!((e.lower, e.upper), (1.0, 1.0));
        assert_eq!(inner_entropy(&s, 2).unwrap().upper, 1.0);
    }

    #[test]
    fn greedy_bracket_on_a_long_line() {
        let s = FiniteSet::new(
            NormedSpace::l1(1),
            (0..64).map(|i| vec![i as f64]).collect(),
        )
        .unwrap();
        // 64 points, 8 centers: each covers 8 consecutive points, radius 4
        // on one side; optimum is 4 (centers at 4, 12, ...), and a radius
        // 3 ball holds 7 points so 3 is infeasible.
        let e = inner_entropy(&s, 3).unwrap();
        assert!(!e.exact);
        assert!(e.lower <= 4.0 && 4.0 <= e.upper, "{e:?}");
        assert!(e.lower > 3.0 - 1e-12);
    }

    #[test]
    fn sandwich_on_basis() {
        let r = sandwich_audit(&basis(5), 1.0).unwrap();
        assert_eq!((r.packing_eps, r.covering_eps, r.packing_2eps), (5, 5, 1));
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn sandwich_on_singleton() {
        let s = FiniteSet::new(NormedSpace::l2(2), vec![vec![0.5, 0.5]]).unwrap();
        let r = sandwich_audit(&s, 0.1).unwrap();
        assert_eq!((r.packing_eps, r.covering_eps, r.packing_2eps), (1, 1, 1));
        assert!(r.passed());
    }

    #[test]
    fn estimate_json_shape() {
        let e = EntropyEstimate {
            n: 2,
            lower: 0.5,
            upper: 0.75,
            exact: false,
            centers: vec![1, 2],
        };
        let v = serde_json::to_value(&e).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"n": 2, "lower": 0.5, "upper": 0.75, "exact": false})
        );
    }
}
