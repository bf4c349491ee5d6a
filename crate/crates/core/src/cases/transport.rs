use serde::{Deserialize, Serialize};

use crate::covering::{greedy_packing_capped, PackingBound};
use crate::error::{Error, Result};
use crate::metric::{FiniteSet, MetricSet, Norm, NormedSpace};

/// Breakpoints closer than this are merged.
const MERGE_TOL: f64 = 1e-12;

/// Parameter sampling of `{chi_[a, a+1] : a in [0, 1]}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportSpec {
    pub grid: usize,
}

impl Default for TransportSpec {
    fn default() -> Self {
        Self { grid: 1024 }
    }
}

impl TransportSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid < 2 {
            return Err(Error::Precondition(
                "transport grid needs at least 2 samples".into(),
            ));
        }
        Ok(())
    }

    /// `a_i = i / (grid - 1)`.
    pub fn params(&self) -> Vec<f64> {
        let last = (self.grid - 1) as f64;
        (0..self.grid).map(|i| i as f64 / last).collect()
    }
}

/// The sampled manifold through its closed-form distances
/// `||chi_a - chi_b||_L1 = 2 |a - b|`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportParams {
    pub params: Vec<f64>,
}

pub fn transport_params(spec: &TransportSpec) -> Result<TransportParams> {
    spec.validate()?;
    Ok(TransportParams {
        params: spec.params(),
    })
}

impl MetricSet for TransportParams {
    fn len(&self) -> usize {
        self.params.len()
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        2.0 * (self.params[i] - self.params[j]).abs()
    }

    fn max_distance(&self) -> f64 {
        let lo = self.params.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self
            .params
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if self.params.is_empty() {
            0.0
        } else {
            2.0 * (hi - lo)
        }
    }
}

impl PackingBound for TransportParams {
    fn packing_log2_lower(&self, eps: f64) -> f64 {
        if self.params.is_empty() || !(eps > 0.0) {
            return f64::NEG_INFINITY;
        }
        (greedy_packing_capped(self, eps, usize::MAX).size as f64).log2()
    }

    fn diameter_upper(&self) -> f64 {
        self.max_distance()
    }

    fn packing_indices(&self, eps: f64) -> Option<Vec<usize>> {
        (eps > 0.0).then(|| greedy_packing_capped(self, eps, usize::MAX).indices)
    }
}

/// Step-function representation on `[0, 2]`. The partition contains every
/// `a_i`, `a_i + 1` and the cell edges `2j/n` for each requested `n`.
pub fn transport_set(spec: &TransportSpec, cell_counts: &[usize]) -> Result<FiniteSet> {
    spec.validate()?;
    let params = spec.params();
    let mut breaks: Vec<f64> = params.iter().flat_map(|a| [*a, a + 1.0]).collect();
    for &n in cell_counts {
        if n == 0 {
            return Err(Error::Precondition("cell counts must be positive".into()));
        }
        breaks.extend((0..=n).map(|j| 2.0 * j as f64 / n as f64));
    }
    breaks.push(2.0);
    breaks.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::with_capacity(breaks.len());
    for b in breaks {
        match merged.last() {
            Some(&l) if b - l <= MERGE_TOL => {}
            _ => merged.push(b),
        }
    }
    let dim = merged.len() - 1;
    let find = |x: f64| {
        let i = merged.partition_point(|b| *b < x - MERGE_TOL);
        debug_assert!((merged[i] - x).abs() <= MERGE_TOL);
        i
    };
    let points = params
        .iter()
        .map(|&a| {
            let mut p = vec![0.0; dim];
            p[find(a)..find(a + 1.0)].iter_mut().for_each(|v| *v = 1.0);
            p
        })
        .collect();
    let labels = params.iter().map(|a| format!("a={a}")).collect();
    FiniteSet::new(
        NormedSpace::new(
            dim,
            Norm::L1Step {
                breakpoints: merged,
            },
        )?,
        points,
    )?
    .with_labels(labels)
}

/// Closed-form reference values for the transport manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportReference {
    pub grid: usize,
}

impl TransportReference {
    /// `2^(-n+1)`, the inner entropy value stated for the manifold.
    pub fn entropy(&self, n: u32) -> f64 {
        (1.0 - n as f64).exp2()
    }

    /// `2^(-n)`: `2^n` parameter intervals of length `2^-n` with centers
    /// at their midpoints cover at `L1` radius `2^-n`, and no `2^n` closed
    /// balls of smaller radius do.
    pub fn entropy_sharp(&self, n: u32) -> f64 {
        (-(n as f64)).exp2()
    }

    pub fn kolmogorov_upper(&self, n: u32) -> f64 {
        4.0 / n as f64
    }

    pub fn kolmogorov_lower(&self, n: u32) -> f64 {
        1.0 / (n as f64 + 1.0)
    }

    /// Inner entropy of the sampled grid itself: `2^n` runs of consecutive
    /// samples, each of at most `ceil(grid / 2^n)` points, covered from
    /// the middle.
    pub fn grid_entropy(&self, n: u32) -> f64 {
        let per = self.grid.div_ceil(1usize << n.min(63));
        let steps = per / 2;
        2.0 * steps as f64 / (self.grid - 1) as f64
    }
}

pub fn transport_reference(spec: &TransportSpec) -> TransportReference {
    TransportReference { grid: spec.grid }
}
