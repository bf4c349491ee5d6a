use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::MetricSet;

/// Relative slack applied to the strict packing inequality `d > eps`.
pub const PACKING_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingResult {
    pub eps: f64,
    pub indices: Vec<usize>,
    pub size: usize,
}

#[inline]
pub(crate) fn separated(d: f64, eps: f64) -> bool {
    d > eps * (1.0 + PACKING_SLACK)
}

/// Sequential maximal eps-packing: scan in index order, keep a point iff it is
/// farther than `eps` from everything kept so far.
pub fn greedy_packing<S: MetricSet + ?Sized>(set: &S, eps: f64) -> Result<PackingResult> {
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!(
            "eps must be positive, got {eps}"
        )));
    }
    Ok(greedy_packing_capped(set, eps, usize::MAX))
}

/// Greedy packing that stops once `cap` points have been admitted.
pub(crate) fn greedy_packing_capped<S: MetricSet + ?Sized>(
    set: &S,
    eps: f64,
    cap: usize,
) -> PackingResult {
    let mut indices: Vec<usize> = Vec::new();
    for i in 0..set.len() {
        if indices.len() >= cap {
            break;
        }
        if indices.iter().all(|&j| separated(set.distance(i, j), eps)) {
            indices.push(i);
        }
    }
    let size = indices.len();
    PackingResult { eps, indices, size }
}

/// True when `packing` is an eps-packing and no further set point can join it.
pub fn is_maximal_packing<S: MetricSet + ?Sized>(set: &S, packing: &[usize], eps: f64) -> bool {
    let valid = packing.iter().enumerate().all(|(a, &i)| {
        packing[a + 1..]
            .iter()
            .all(|&j| separated(set.distance(i, j), eps))
    });
    valid
        && (0..set.len()).all(|i| {
            packing.contains(&i) || packing.iter().any(|&j| !separated(set.distance(i, j), eps))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{FiniteSet, NormedSpace};

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
    fn basis_set_packs_fully_below_sqrt2() {
        let p = greedy_packing(&basis(5), 1.0).unwrap();
        assert_eq!(p.size, 5);
        assert_eq!(p.indices, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn eps_at_diameter_gives_one_point() {
        let p = greedy_packing(&basis(5), 2f64.sqrt()).unwrap();
        assert_eq!(p.size, 1);
    }

    #[test]
    fn rejects_non_positive_eps() {
        assert!(greedy_packing(&basis(2), 0.0).is_err());
        assert!(greedy_packing(&basis(2), f64::NAN).is_err());
    }

    #[test]
    fn greedy_result_is_maximal() {
        let s = FiniteSet::new(
            NormedSpace::l1(1),
            vec![vec![0.0], vec![0.3], vec![0.6], vec![0.65], vec![1.0]],
        )
        .unwrap();
        let p = greedy_packing(&s, 0.3).unwrap();
        // 0.3 - 0.0 is not > 0.3, so 0.3 is rejected; 0.6 admitted; 0.65 too
        // close; 1.0 admitted.
        assert_eq!(p.indices, vec![0, 2, 4]);
        assert!(is_maximal_packing(&s, &p.indices, 0.3));
        assert!(!is_maximal_packing(&s, &[0, 4], 0.3));
    }
}
