//! Packings, inner coverings and inner entropy numbers.

mod cover;
mod entropy;
mod packing;

pub use cover::{
    covering_lower_bound, disjoint_neighbourhoods, exact_cover, greedy_cover, is_cover,
    minimal_inner_covering, realised_radius, CoveringResult, EXACT_COVER_MAX,
};
pub use entropy::{
    inner_entropy, sandwich_audit, EntropyEstimate, InequalityCheck, SandwichReport,
    BISECTION_STEPS, BISECTION_WIDTH,
};
pub(crate) use packing::greedy_packing_capped;
pub use packing::{greedy_packing, is_maximal_packing, PackingResult, PACKING_SLACK};

use crate::metric::{FiniteSet, MetricSet};

/// Sets with a certified lower bound on their eps-packing numbers.
///
/// Counts are reported as `log2` so that closed-form bounds for infinite
/// sets stay representable.
pub trait PackingBound {
    /// `log2` of a number of points with pairwise distances `> eps`;
    /// `-inf` when none is known.
    fn packing_log2_lower(&self, eps: f64) -> f64;

    /// An upper bound on the diameter, used to place default eps grids.
    fn diameter_upper(&self) -> f64;

    /// Indices of a packing realising the count, when the set is explicit.
    fn packing_indices(&self, _eps: f64) -> Option<Vec<usize>> {
        None
    }
}

impl PackingBound for FiniteSet {
    fn packing_log2_lower(&self, eps: f64) -> f64 {
        if self.points.is_empty() || !(eps > 0.0) {
            return f64::NEG_INFINITY;
        }
        (packing::greedy_packing_capped(self, eps, usize::MAX).size as f64).log2()
    }

    fn diameter_upper(&self) -> f64 {
        self.max_distance()
    }

    fn packing_indices(&self, eps: f64) -> Option<Vec<usize>> {
        (eps > 0.0).then(|| packing::greedy_packing_capped(self, eps, usize::MAX).indices)
    }
}
