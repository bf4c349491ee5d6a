use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::packing::greedy_packing_capped;
use crate::error::{Error, Result};
use crate::metric::MetricSet;

/// Largest set for which the covering is solved exactly.
pub const EXACT_COVER_MAX: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringResult {
    pub eps: f64,
    pub center_indices: Vec<usize>,
    /// True when the cover is a minimum cover (exhaustive search).
    pub exact: bool,
    /// Certified lower bound on the minimal inner covering number.
    pub lower_bound: usize,
}

impl CoveringResult {
    pub fn size(&self) -> usize {
        self.center_indices.len()
    }
}

/// Minimal inner eps-covering: exact for at most [`EXACT_COVER_MAX`] points,
/// greedy with a packing-based lower bound above that.
pub fn minimal_inner_covering<S: MetricSet + ?Sized>(set: &S, eps: f64) -> Result<CoveringResult> {
    if !(eps >= 0.0) {
        return Err(Error::Precondition(format!(
            "eps must be nonnegative, got {eps}"
        )));
    }
    if set.is_empty() {
        return Ok(CoveringResult {
            eps,
            center_indices: vec![],
            exact: true,
            lower_bound: 0,
        });
    }
    Ok(covering_capped(set, eps, usize::MAX))
}

/// Cover at `eps`. The lower bound computation stops counting at `cap + 1`.
pub(crate) fn covering_capped<S: MetricSet + ?Sized>(
    set: &S,
    eps: f64,
    cap: usize,
) -> CoveringResult {
    if set.len() <= EXACT_COVER_MAX {
        let centers = exact_cover(set, eps);
        let k = centers.len();
        CoveringResult {
            eps,
            center_indices: centers,
            exact: true,
            lower_bound: k,
        }
    } else {
        let centers = greedy_cover(set, eps);
        let lower_bound = covering_lower_bound(set, eps, cap.saturating_add(1));
        CoveringResult {
            eps,
            center_indices: centers,
            exact: false,
            lower_bound,
        }
    }
}

/// Lexicographically smallest minimum cover, found by exhaustive search over
/// subset sizes in ascending order.
pub fn exact_cover<S: MetricSet + ?Sized>(set: &S, eps: f64) -> Vec<usize> {
    let m = set.len();
    assert!(m <= 32, "exact cover is limited to small sets");
    if m == 0 {
        return vec![];
    }
    let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    let masks: Vec<u32> = (0..m)
        .map(|i| {
            set.neighbors_within(i, eps)
                .into_iter()
                .fold(0u32, |acc, j| acc | (1 << j))
        })
        .collect();
    let mut suffix = vec![0u32; m + 1];
    for i in (0..m).rev() {
        suffix[i] = suffix[i + 1] | masks[i];
    }

    for size in 1..=m {
        let found: Vec<Option<Vec<usize>>> = (0..m)
            .into_par_iter()
            .map(|first| {
                let mut chosen = vec![first];
                if search(
                    &masks,
                    &suffix,
                    full,
                    size,
                    masks[first],
                    first + 1,
                    &mut chosen,
                ) {
                    Some(chosen)
                } else {
                    None
                }
            })
            .collect();
        if let Some(c) = found.into_iter().flatten().next() {
            return c;
        }
    }
    (0..m).collect()
}

fn search(
    masks: &[u32],
    suffix: &[u32],
    full: u32,
    size: usize,
    covered: u32,
    start: usize,
    chosen: &mut Vec<usize>,
) -> bool {
    if covered == full {
        return true;
    }
    if chosen.len() == size || covered | suffix[start] != full {
        return false;
    }
    for i in start..masks.len() {
        if covered | suffix[i] != full {
            break;
        }
        chosen.push(i);
        if search(masks, suffix, full, size, covered | masks[i], i + 1, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Greedy set cover: repeatedly pick the point covering the most uncovered
/// points, lowest index on ties.
pub fn greedy_cover<S: MetricSet + ?Sized>(set: &S, eps: f64) -> Vec<usize> {
    let m = set.len();
    let mut covered = vec![false; m];
    let mut remaining = m;
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> = (0..m)
        .map(|i| (set.count_within(i, eps), Reverse(i)))
        .collect();
    let mut centers = Vec::new();
    while remaining > 0 {
        let Some((stale, Reverse(i))) = heap.pop() else {
            break;
        };
        let nbrs = set.neighbors_within(i, eps);
        let fresh = nbrs.iter().filter(|&&j| !covered[j]).count();
        if fresh == 0 {
            continue;
        }
        if fresh == stale {
            for j in nbrs {
                if !covered[j] {
                    covered[j] = true;
                    remaining -= 1;
                }
            }
            centers.push(i);
        } else {
            heap.push((fresh, Reverse(i)));
        }
    }
    centers
}

/// Certified lower bound on the minimal inner eps-covering number, capped at
/// `cap`.
///
/// Two witnesses: a greedy 2eps-packing, and a family of points whose
/// eps-neighbourhoods in the set are pairwise disjoint (each needs its own
/// center).
pub fn covering_lower_bound<S: MetricSet + ?Sized>(set: &S, eps: f64, cap: usize) -> usize {
    let packing = if eps > 0.0 {
        greedy_packing_capped(set, 2.0 * eps, cap).size
    } else {
        0
    };
    if packing >= cap {
        return packing;
    }
    packing.max(disjoint_neighbourhoods(set, eps, cap))
}

/// Greedy count of points with pairwise disjoint closed eps-neighbourhoods.
pub fn disjoint_neighbourhoods<S: MetricSet + ?Sized>(set: &S, eps: f64, cap: usize) -> usize {
    let m = set.len();
    let mut used = vec![false; m];
    let mut count = 0;
    for i in 0..m {
        if count >= cap {
            break;
        }
        if used[i] {
            continue;
        }
        let nbrs = set.neighbors_within(i, eps);
        if nbrs.iter().any(|&j| used[j]) {
            continue;
        }
        for j in nbrs {
            used[j] = true;
        }
        count += 1;
    }
    count
}

/// `max_f min_c d(f, c)` over the set.
pub fn realised_radius<S: MetricSet + ?Sized>(set: &S, centers: &[usize]) -> f64 {
    (0..set.len())
        .map(|i| {
            centers
                .iter()
                .map(|&c| if c == i { 0.0 } else { set.distance(i, c) })
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// True when every set point lies within `eps` of a center.
pub fn is_cover<S: MetricSet + ?Sized>(set: &S, centers: &[usize], eps: f64) -> bool {
    (0..set.len()).all(|i| centers.iter().any(|&c| c == i || set.distance(i, c) <= eps))
}
