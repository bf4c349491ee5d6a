use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{FiniteSet, NormedSpace};
use crate::width::{kolmogorov_upper, Subspace, WidthCertificate};

/// Largest `n` for which all coordinate subspaces of the octahedron are
/// enumerated.
pub const OCTAHEDRON_MAX_N: u32 = 8;

/// Truncation of `{y in l2 : sum_j |y_j| sqrt(log2(j+1)) <= 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagonalSetSpec {
    pub truncation: usize,
}

/// `w_j = sqrt(log2(j + 1))`.
pub fn diagonal_weight(j: usize) -> f64 {
    ((j + 1) as f64).log2().sqrt()
}

/// `sum_j |y_j| w_j <= 1`.
pub fn diagonal_contains(y: &[f64]) -> bool {
    let s: f64 = y
        .iter()
        .enumerate()
        .map(|(i, v)| v.abs() * diagonal_weight(i + 1))
        .sum();
    s <= 1.0 + 1e-12
}

/// The extreme points `{+-e_j / w_j}_{j <= M}` in `l2^M`, in the order
/// `+e_1, -e_1, +e_2, ...`. Distances to linear subspaces are convex, so
/// the truncated body and its vertices have the same Kolmogorov bounds.
pub fn diagonal_set(spec: &DiagonalSetSpec) -> Result<FiniteSet> {
    let m = spec.truncation;
    if m < 1 {
        return Err(Error::Precondition("truncation must be positive".into()));
    }
    let mut points = Vec::with_capacity(2 * m);
    for j in 1..=m {
        for sign in [1.0, -1.0] {
            let mut p = vec![0.0; m];
            p[j - 1] = sign / diagonal_weight(j);
            points.push(p);
        }
    }
    FiniteSet::new(NormedSpace::l2(m), points)
}

/// `1 / sqrt(log2(n + 2))`, the distance of the set to `span{e_1..e_n}`.
pub fn diagonal_reference(n: u32) -> f64 {
    1.0 / ((n as f64 + 2.0).log2()).sqrt()
}

/// `span{e_i : i in coords}` in `R^dim`.
pub fn coordinate_subspace(dim: usize, coords: &[usize]) -> Subspace {
    Subspace::Span {
        basis: coords
            .iter()
            .map(|&i| {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                e
            })
            .collect(),
    }
}

/// `(1 / sqrt 2) (log2(2n + 1))^(-1/2)`.
pub fn stechkin_value(n: u32) -> f64 {
    std::f64::consts::FRAC_1_SQRT_2 / ((2.0 * n as f64 + 1.0).log2()).sqrt()
}

/// `{+-e_j / sqrt(log2(2n + 1))}_{j <= 2n}` in `l2^(2n)`.
pub fn octahedron_set(n: u32) -> Result<FiniteSet> {
    if n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    let dim = 2 * n as usize;
    let scale = 1.0 / ((2.0 * n as f64 + 1.0).log2()).sqrt();
    let mut points = Vec::with_capacity(2 * dim);
    for j in 0..dim {
        for sign in [1.0, -1.0] {
            let mut p = vec![0.0; dim];
            p[j] = sign * scale;
            points.push(p);
        }
    }
    FiniteSet::new(NormedSpace::l2(dim), points)
}

fn subsets(dim: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, dim: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            if dim - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, dim, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, dim, k, &mut Vec::new(), &mut out);
    out
}

/// Best Kolmogorov upper bound over all `n`-coordinate subspaces of the
/// octahedron's ambient space.
pub fn octahedron_coordinate_upper(n: u32) -> Result<WidthCertificate> {
    if n > OCTAHEDRON_MAX_N {
        return Err(Error::SizeGuard(format!(
            "n = {n} exceeds {OCTAHEDRON_MAX_N}"
        )));
    }
    let set = octahedron_set(n)?;
    let dim = set.dim();
    let mut best: Option<WidthCertificate> = None;
    for coords in subsets(dim, n as usize) {
        let c = kolmogorov_upper(&set, &coordinate_subspace(dim, &coords))?;
        if best.as_ref().is_none_or(|b| c.value < b.value) {
            best = Some(c);
        }
    }
    Ok(best.expect("at least one subspace"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stechkin_small_values() {
        assert_eq!(
            stechkin_value(1),
            std::f64::consts::FRAC_1_SQRT_2 / 3f64.log2().sqrt()
        );
        assert!((stechkin_value(4) - (0.5f64).sqrt() / 9f64.log2().sqrt()).abs() < 1e-16);
        for n in 1..100 {
            assert!(stechkin_value(n + 1) < stechkin_value(n));
        }
    }

    #[test]
    fn subset_count() {
        assert_eq!(subsets(8, 4).len(), 70);
        assert_eq!(subsets(4, 1).len(), 4);
    }

    #[test]
    fn diagonal_vertices_inside() {
        let s = diagonal_set(&DiagonalSetSpec { truncation: 10 }).unwrap();
        for p in &s.points {
            assert!(diagonal_contains(p));
        }
        assert!(!diagonal_contains(&[1.0, 0.1]));
    }

    #[test]
    fn diagonal_first_coordinates() {
        let s = diagonal_set(&DiagonalSetSpec { truncation: 40 }).unwrap();
        for n in [1u32, 4, 8, 16] {
            let c = kolmogorov_upper(
                &s,
                &coordinate_subspace(40, &(0..n as usize).collect::<Vec<_>>()),
            )
            .unwrap();
            assert!((c.value - diagonal_reference(n)).abs() < 1e-15, "{n}");
        }
    }

    #[test]
    fn octahedron_upper_at_least_stechkin() {
        for n in [1, 2, 4] {
            let c = octahedron_coordinate_upper(n).unwrap();
            assert!(c.value >= stechkin_value(n));
            // Each coordinate subspace misses n axes entirely.
            assert!((c.value - 1.0 / ((2.0 * n as f64 + 1.0).log2()).sqrt()).abs() < 1e-15);
        }
    }
}
