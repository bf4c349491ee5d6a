use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest allocation that also gets the brute-force pairwise audit.
pub const PAIRWISE_AUDIT_MAX: usize = 2000;

/// Axis-aligned dyadic cubes inside `[-1, 1]^n`. Cube `j` has side
/// `2^-levels[j]` and center `centers[j*n .. (j+1)*n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeAllocation {
    pub n: usize,
    pub levels: Vec<u32>,
    pub centers: Vec<f64>,
}

impl CubeAllocation {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn center(&self, j: usize) -> &[f64] {
        &self.centers[j * self.n..(j + 1) * self.n]
    }

    pub fn side(&self, j: usize) -> f64 {
        (-(self.levels[j] as f64)).exp2()
    }

    /// Integer cell coordinates of cube `j` on the grid of its own side.
    fn cell(&self, j: usize) -> Vec<u64> {
        let side = self.side(j);
        self.center(j)
            .iter()
            .map(|c| ((c + 1.0) / side - 0.5) as u64)
            .collect()
    }

    /// Check containment, dyadic alignment and pairwise disjointness.
    pub fn audit(&self) -> Result<()> {
        for j in 0..self.len() {
            let half = self.side(j) / 2.0;
            for &c in self.center(j) {
                if c - half < -1.0 || c + half > 1.0 {
                    return Err(Error::InvalidMap(format!("cube {j} leaves [-1, 1]^n")));
                }
                let k = (c + 1.0) / (2.0 * half) - 0.5;
                if k.fract() != 0.0 {
                    return Err(Error::InvalidMap(format!("cube {j} is not dyadic")));
                }
            }
        }
        // Dyadic cubes overlap iff one contains the other.
        let mut seen: HashSet<(u32, Vec<u64>)> = HashSet::with_capacity(self.len());
        for j in 0..self.len() {
            if !seen.insert((self.levels[j], self.cell(j))) {
                return Err(Error::InvalidMap(format!("cube {j} is allocated twice")));
            }
        }
        for j in 0..self.len() {
            let mut cell = self.cell(j);
            let mut level = self.levels[j];
            while level > 0 {
                level -= 1;
                cell.iter_mut().for_each(|c| *c /= 2);
                if seen.contains(&(level, cell.clone())) {
                    return Err(Error::InvalidMap(format!(
                        "cube {j} lies inside another cube"
                    )));
                }
            }
        }
        if self.len() <= PAIRWISE_AUDIT_MAX {
            self.audit_pairwise()?;
        }
        Ok(())
    }

    /// Brute-force open-interior overlap test on every pair.
    pub fn audit_pairwise(&self) -> Result<()> {
        for a in 0..self.len() {
            for b in (a + 1)..self.len() {
                let reach = (self.side(a) + self.side(b)) / 2.0;
                let separated = self
                    .center(a)
                    .iter()
                    .zip(self.center(b))
                    .any(|(x, y)| (x - y).abs() >= reach);
                if !separated {
                    return Err(Error::InvalidMap(format!("cubes {a} and {b} overlap")));
                }
            }
        }
        Ok(())
    }
}

/// Exact `sum_j 2^(-n l_j)` in units of the smallest requested cube, checked
/// against `2^n` prefix by prefix.
fn check_volume(n: usize, levels: &[u32]) -> Result<()> {
    let Some(&deepest) = levels.last() else {
        return Ok(());
    };
    let total_exp = n as u64 * (deepest as u64 + 1);
    let capacity = BigUint::one() << total_exp;
    let mut acc = BigUint::default();
    for (j, &l) in levels.iter().enumerate() {
        acc += BigUint::one() << (n as u64 * (deepest - l) as u64);
        if acc > capacity {
            let unit = (-(n as f64) * deepest as f64).exp2();
            return Err(Error::VolumeExceeded {
                index: j,
                partial_sum: acc.to_f64().unwrap_or(f64::INFINITY) * unit,
                capacity: (n as f64).exp2(),
            });
        }
    }
    Ok(())
}

/// Place cubes of side `2^-l_j` (levels non-decreasing) into `[-1, 1]^n`.
///
/// Free cubes are kept per depth; each request takes the smallest free cube
/// that can hold it and splits it down to the requested size, returning the
/// unused children to the free lists.
pub fn allocate_dyadic_cubes(n: usize, levels: &[u32]) -> Result<CubeAllocation> {
    if n == 0 {
        return Err(Error::Precondition("dimension must be positive".into()));
    }
    if levels.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("levels must be non-decreasing".into()));
    }
    if let Some(&deepest) = levels.last() {
        if deepest > 60 {
            return Err(Error::SizeGuard(format!("level {deepest} is too fine")));
        }
    }
    check_volume(n, levels)?;

    // Depth 0 is [-1, 1]^n (side 2); depth t has side 2^(1-t).
    let max_depth = levels.last().map_or(0, |l| *l as usize + 1);
    let mut free: Vec<Vec<Vec<u64>>> = vec![Vec::new(); max_depth + 1];
    free[0].push(vec![0; n]);
    let mut centers = Vec::with_capacity(levels.len() * n);
    for (j, &l) in levels.iter().enumerate() {
        let target = l as usize + 1;
        let Some(from) = (0..=target).rev().find(|&t| !free[t].is_empty()) else {
            return Err(Error::VolumeExceeded {
                index: j,
                partial_sum: f64::NAN,
                capacity: (n as f64).exp2(),
            });
        };
        let mut cell = free[from].pop().unwrap();
        for depth in from..target {
            // Children in reverse so the first child is taken next.
            for bits in (1..(1u64 << n)).rev() {
                free[depth + 1].push(
                    cell.iter()
                        .enumerate()
                        .map(|(i, c)| 2 * c + ((bits >> i) & 1))
                        .collect(),
                );
            }
            cell.iter_mut().for_each(|c| *c *= 2);
        }
        let side = (-(l as f64)).exp2();
        centers.extend(cell.iter().map(|&c| -1.0 + (c as f64 + 0.5) * side));
    }
    Ok(CubeAllocation {
        n,
        levels: levels.to_vec(),
        centers,
    })
}
