use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Norm, NormedSpace};

/// Unit target vectors of the bumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Directions {
    /// Row-major, one target vector per bump.
    Dense { vectors: Vec<f64> },
    /// Bump `j` points along coordinate `indices[j]`.
    Basis { indices: Vec<usize> },
}

/// `Phi(y) = offset + sum_j sigma_j (1 - ||y_j - y|| / rho_j)_+ f_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSum {
    pub domain: NormedSpace,
    pub target: NormedSpace,
    /// Row-major bump centers `y_j`.
    pub centers: Vec<f64>,
    pub radii: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub directions: Directions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<Vec<f64>>,
}

/// Bumps above which disjointness is checked through the dyadic index only.
const PAIRWISE_CHECK_MAX: usize = 4096;

impl BumpSum {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn center(&self, j: usize) -> &[f64] {
        let n = self.domain.dim;
        &self.centers[j * n..(j + 1) * n]
    }

    pub fn direction(&self, j: usize) -> Vec<f64> {
        match &self.directions {
            Directions::Dense { vectors } => {
                let m = self.target.dim;
                vectors[j * m..(j + 1) * m].to_vec()
            }
            Directions::Basis { indices } => {
                let mut e = vec![0.0; self.target.dim];
                e[indices[j]] = 1.0;
                e
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.target.validate()?;
        let k = self.len();
        if self.centers.len() != k * self.domain.dim || self.amplitudes.len() != k {
            return Err(Error::InvalidMap(
                "bump arrays have inconsistent lengths".into(),
            ));
        }
        if self.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidMap("radii must be positive".into()));
        }
        if let Some(o) = &self.offset {
            self.target.check_point(o)?;
        }
        match &self.directions {
            Directions::Dense { vectors } => {
                if vectors.len() != k * self.target.dim {
                    return Err(Error::InvalidMap(
                        "direction array has the wrong length".into(),
                    ));
                }
                for j in 0..k {
                    let v = &vectors[j * self.target.dim..(j + 1) * self.target.dim];
                    let norm = self.target.norm(v)?;
                    if (norm - 1.0).abs() > 1e-9 {
                        return Err(Error::InvalidMap(format!(
                            "direction {j} has norm {norm}, expected 1"
                        )));
                    }
                }
            }
            Directions::Basis { indices } => {
                if indices.len() != k || indices.iter().any(|&i| i >= self.target.dim) {
                    return Err(Error::InvalidMap("basis index out of range".into()));
                }
                if !matches!(self.target.norm, Norm::L1 | Norm::L2 | Norm::LInf) {
                    return Err(Error::InvalidMap(
                        "basis directions need an unweighted target norm".into(),
                    ));
                }
            }
        }
        self.check_disjoint()
    }

    /// Open balls `B(y_j, rho_j)` pairwise disjoint: `||y_i - y_j|| >=
    /// rho_i + rho_j`.
    pub fn check_disjoint(&self) -> Result<()> {
        if let Some(index) = BumpIndex::build(self) {
            return index.check_disjoint();
        }
        if self.len() > PAIRWISE_CHECK_MAX {
            return Err(Error::SizeGuard(format!(
                "{} non-dyadic bumps is too many for a pairwise disjointness check",
                self.len()
            )));
        }
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let d = self
                    .domain
                    .distance_unchecked(self.center(i), self.center(j));
                let need = self.radii[i] + self.radii[j];
                if d < need * (1.0 - 1e-12) {
                    return Err(Error::InvalidMap(format!("bumps {i} and {j} overlap")));
                }
            }
        }
        Ok(())
    }

    /// `max_j |sigma_j| / rho_j`.
    pub fn declared_lipschitz(&self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&self.radii)
            .map(|(s, r)| s.abs() / r)
            .fold(0.0, f64::max)
    }

    /// `(bump index, weight)` for the bumps active at `y`.
    pub(crate) fn active(&self, y: &[f64], index: Option<&BumpIndex>) -> Vec<(usize, f64)> {
        let weight = |j: usize| {
            let d = self.domain.distance_unchecked(self.center(j), y);
            self.amplitudes[j] * (1.0 - d / self.radii[j]).max(0.0)
        };
        match index {
            Some(ix) => ix
                .candidates(y)
                .into_iter()
                .map(|j| (j, weight(j)))
                .filter(|(_, w)| *w != 0.0)
                .collect(),
            None => (0..self.len())
                .map(|j| (j, weight(j)))
                .filter(|(_, w)| *w != 0.0)
                .collect(),
        }
    }

    pub(crate) fn output(&self, y: &[f64], index: Option<&BumpIndex>) -> Output {
        let active = self.active(y, index);
        match &self.directions {
            Directions::Basis { indices } if self.offset.is_none() => {
                let mut terms: Vec<(usize, f64)> =
                    active.into_iter().map(|(j, w)| (indices[j], w)).collect();
                terms.sort_by_key(|t| t.0);
                Output::Sparse(terms)
            }
            _ => {
                let mut out = self
                    .offset
                    .clone()
                    .unwrap_or_else(|| vec![0.0; self.target.dim]);
                for (j, w) in active {
                    match &self.directions {
                        Directions::Dense { vectors } => {
                            let m = self.target.dim;
                            for (o, v) in out.iter_mut().zip(&vectors[j * m..(j + 1) * m]) {
                                *o += w * v;
                            }
                        }
                        Directions::Basis { indices } => out[indices[j]] += w,
                    }
                }
                Output::Dense(out)
            }
        }
    }
}

/// A map value, dense or as sorted `(coordinate, value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Output {
    Dense(Vec<f64>),
    Sparse(Vec<(usize, f64)>),
}

impl Output {
    pub(crate) fn into_dense(self, dim: usize) -> Vec<f64> {
        match self {
            Output::Dense(v) => v,
            Output::Sparse(t) => {
                let mut v = vec![0.0; dim];
                for (i, x) in t {
                    v[i] += x;
                }
                v
            }
        }
    }

    /// Target-norm distance between two outputs.
    pub(crate) fn distance(&self, other: &Output, target: &NormedSpace) -> f64 {
        match (self, other) {
            (Output::Dense(a), Output::Dense(b)) => target.distance_unchecked(a, b),
            (Output::Sparse(a), Output::Sparse(b)) => {
                let mut diff: Vec<f64> = Vec::with_capacity(a.len() + b.len());
                let (mut i, mut j) = (0, 0);
                while i < a.len() || j < b.len() {
                    if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                        diff.push(a[i].1);
                        i += 1;
                    } else if i == a.len() || b[j].0 < a[i].0 {
                        diff.push(-b[j].1);
                        j += 1;
                    } else {
                        diff.push(a[i].1 - b[j].1);
                        i += 1;
                        j += 1;
                    }
                }
                match target.norm {
                    Norm::L1 => diff.iter().map(|x| x.abs()).sum(),
                    Norm::L2 => diff.iter().map(|x| x * x).sum::<f64>().sqrt(),
                    _ => diff.iter().fold(0.0, |m, x| m.max(x.abs())),
                }
            }
            (a, b) => {
                let a = a.clone().into_dense(target.dim);
                let b = b.clone().into_dense(target.dim);
                target.distance_unchecked(&a, &b)
            }
        }
    }
}

/// Lookup table for bump sums whose balls are dyadic cubes of `[-1, 1]^n`
/// (sup-norm domain, `rho = 2^-(l+1)`, centers on the matching grid).
pub(crate) struct BumpIndex {
    levels: Vec<u32>,
    cells: HashMap<(u32, Vec<u64>), usize>,
    dim: usize,
}

fn dyadic_level(rho: f64) -> Option<u32> {
    let l = -rho.log2() - 1.0;
    if l >= 0.0 && l.fract() == 0.0 && l <= 60.0 && (-(l + 1.0)).exp2() == rho {
        Some(l as u32)
    } else {
        None
    }
}

impl BumpIndex {
    pub(crate) fn build(map: &BumpSum) -> Option<Self> {
        if map.domain.norm != Norm::LInf {
            return None;
        }
        let n = map.domain.dim;
        let mut cells = HashMap::with_capacity(map.len());
        let mut levels: Vec<u32> = Vec::new();
        for j in 0..map.len() {
            let l = dyadic_level(map.radii[j])?;
            let side = 2.0 * map.radii[j];
            let mut cell = Vec::with_capacity(n);
            for &c in map.center(j) {
                let k = (c + 1.0) / side - 0.5;
                if k < 0.0 || k.fract() != 0.0 || k >= (l as f64 + 1.0).exp2() {
                    return None;
                }
                cell.push(k as u64);
            }
            if cells.insert((l, cell), j).is_some() {
                // Duplicate cube: let the pairwise check report it.
                return None;
            }
            if !levels.contains(&l) {
                levels.push(l);
            }
        }
        levels.sort_unstable();
        Some(Self {
            levels,
            cells,
            dim: n,
        })
    }

    fn candidates(&self, y: &[f64]) -> Vec<usize> {
        let mut out = Vec::new();
        for &l in &self.levels {
            let cells_per_axis = (l as f64 + 1.0).exp2();
            let cell: Vec<u64> = y
                .iter()
                .map(|c| {
                    (((c + 1.0) / 2.0 * cells_per_axis).floor().max(0.0) as u64)
                        .min(cells_per_axis as u64 - 1)
                })
                .collect();
            if let Some(&j) = self.cells.get(&(l, cell)) {
                out.push(j);
            }
        }
        out
    }

    fn check_disjoint(&self) -> Result<()> {
        for ((l, cell), &j) in &self.cells {
            let mut level = *l;
            let mut c = cell.clone();
            while level > 0 {
                level -= 1;
                c.iter_mut().for_each(|x| *x /= 2);
                if let Some(&i) = self.cells.get(&(level, c.clone())) {
                    return Err(Error::InvalidMap(format!("bumps {i} and {j} overlap")));
                }
            }
        }
        debug_assert!(self.dim > 0);
        Ok(())
    }
}
