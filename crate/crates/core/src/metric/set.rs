use serde::{Deserialize, Serialize};

use super::norm::NormedSpace;
use crate::error::{Error, Result};

/// Read access to the pairwise distances of an indexed point cloud.
///
/// Dense coordinate sets and closed-form distance oracles (sequence sets,
/// basis sets, parametrised manifolds) both implement this; covering and
/// packing code only ever goes through it. Points are identified by index,
/// and index order is the tie-breaking order everywhere downstream.
pub trait MetricSet: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn distance(&self, i: usize, j: usize) -> f64;

    /// Indices `j` (ascending, including `i`) with `d(i, j) <= eps`.
    fn neighbors_within(&self, i: usize, eps: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| j == i || self.distance(i, j) <= eps)
            .collect()
    }

    fn count_within(&self, i: usize, eps: f64) -> usize {
        self.neighbors_within(i, eps).len()
    }

    /// Sorted distinct pairwise distances including 0, when known in closed
    /// form.
    fn distance_levels(&self) -> Option<Vec<f64>> {
        None
    }

    /// Largest pairwise distance; 0 for sets with fewer than two points.
    fn max_distance(&self) -> f64 {
        let m = self.len();
        let mut best = 0.0f64;
        for i in 0..m {
            for j in (i + 1)..m {
                best = best.max(self.distance(i, j));
            }
        }
        best
    }
}

/// Explicit point cloud in a normed space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSet {
    pub space: NormedSpace,
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl FiniteSet {
    pub fn new(space: NormedSpace, points: Vec<Vec<f64>>) -> Result<Self> {
        let set = Self {
            space,
            points,
            labels: None,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.points.len() {
            return Err(Error::Config(format!(
                "{} labels for {} points",
                labels.len(),
                self.points.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.space.validate()?;
        for p in &self.points {
            self.space.check_point(p)?;
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::Numeric("non-finite coordinate".into()));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.points.len() {
                return Err(Error::Config("label count mismatch".into()));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: FiniteSet =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        set.validate()?;
        Ok(set)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("finite set serializes")
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    /// `K - g`.
    pub fn translated(&self, g: &[f64]) -> Result<Self> {
        self.space.check_point(g)?;
        let points = self
            .points
            .iter()
            .map(|p| p.iter().zip(g).map(|(a, b)| a - b).collect())
            .collect();
        Ok(Self {
            space: self.space.clone(),
            points,
            labels: self.labels.clone(),
        })
    }

    /// Subset by index list, preserving the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            space: self.space.clone(),
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i].clone()).collect()),
        }
    }

    /// Distance from an arbitrary point of the space to set point `i`.
    pub fn distance_to(&self, i: usize, x: &[f64]) -> Result<f64> {
        self.space.distance(&self.points[i], x)
    }
}

impl MetricSet for FiniteSet {
    fn len(&self) -> usize {
        self.points.len()
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        self.space
            .distance_unchecked(&self.points[i], &self.points[j])
    }
}

/// Row-sorted distance cache for repeated neighbourhood queries at many radii.
pub struct DistanceTable<'a, S: MetricSet + ?Sized> {
    inner: &'a S,
    rows: Vec<Vec<(f64, u32)>>,
}

impl<'a, S: MetricSet + ?Sized> DistanceTable<'a, S> {
    /// Largest set size for which the full table is built.
    pub const MAX_POINTS: usize = 2048;

    pub fn build(inner: &'a S) -> Self {
        use rayon::prelude::*;
        let m = inner.len();
        let rows = (0..m)
            .into_par_iter()
            .map(|i| {
                let mut row: Vec<(f64, u32)> = (0..m)
                    .map(|j| (if i == j { 0.0 } else { inner.distance(i, j) }, j as u32))
                    .collect();
                row.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                row
            })
            .collect();
        Self { inner, rows }
    }
}

impl<S: MetricSet + ?Sized> MetricSet for DistanceTable<'_, S> {
    fn len(&self) -> usize {
        self.rows.len()
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        self.inner.distance(i, j)
    }

    fn neighbors_within(&self, i: usize, eps: f64) -> Vec<usize> {
        let row = &self.rows[i];
        let k = row.partition_point(|(d, _)| *d <= eps);
        let mut out: Vec<usize> = row[..k].iter().map(|(_, j)| *j as usize).collect();
        if !out.contains(&i) {
            out.push(i);
        }
        out.sort_unstable();
        out
    }

    fn count_within(&self, i: usize, eps: f64) -> usize {
        let row = &self.rows[i];
        row.partition_point(|(d, _)| *d <= eps).max(1)
    }

    fn max_distance(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.last().map(|x| x.0))
            .fold(0.0, f64::max)
    }
}
