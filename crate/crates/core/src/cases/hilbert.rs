use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::covering::{inner_entropy, EntropyEstimate, PackingBound};
use crate::error::{Error, Result};
use crate::metric::{Direction, FiniteSet, MetricSet, NormedSpace};
use crate::width::{width_lower_certified, Quantity, WidthCertificate, Witness};

/// Largest `m` accepted by [`hilbert_example`].
pub const HILBERT_MAX_M: u32 = 16;

/// `{e_1, ..., e_count}` in `l2`, all pairwise distances `sqrt 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisSet {
    pub count: usize,
}

impl BasisSet {
    pub fn to_dense(&self) -> FiniteSet {
        let points = (0..self.count)
            .map(|i| {
                let mut e = vec![0.0; self.count];
                e[i] = 1.0;
                e
            })
            .collect();
        FiniteSet::new(NormedSpace::l2(self.count), points).expect("well-formed")
    }
}

impl MetricSet for BasisSet {
    fn len(&self) -> usize {
        self.count
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            SQRT_2
        }
    }

    fn neighbors_within(&self, i: usize, eps: f64) -> Vec<usize> {
        if eps >= SQRT_2 {
            (0..self.count).collect()
        } else {
            vec![i]
        }
    }

    fn count_within(&self, _i: usize, eps: f64) -> usize {
        if eps >= SQRT_2 {
            self.count
        } else {
            1
        }
    }

    fn distance_levels(&self) -> Option<Vec<f64>> {
        Some(if self.count > 1 {
            vec![0.0, SQRT_2]
        } else {
            vec![0.0]
        })
    }

    fn max_distance(&self) -> f64 {
        if self.count > 1 {
            SQRT_2
        } else {
            0.0
        }
    }
}

impl PackingBound for BasisSet {
    fn packing_log2_lower(&self, eps: f64) -> f64 {
        if self.count == 0 {
            f64::NEG_INFINITY
        } else if eps < SQRT_2 {
            (self.count as f64).log2()
        } else {
            0.0
        }
    }

    fn diameter_upper(&self) -> f64 {
        self.max_distance()
    }

    fn packing_indices(&self, eps: f64) -> Option<Vec<usize>> {
        Some(if eps < SQRT_2 {
            (0..self.count).collect()
        } else {
            vec![0]
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HilbertReport {
    pub m: u32,
    pub gamma: f64,
    pub s: u32,
    pub count: usize,
    /// Inner entropy brackets for `k = 1..=m`.
    pub entropy: Vec<EntropyEstimate>,
    pub entropy_is_sqrt2: bool,
    /// `sqrt 2 / (12 gamma)`.
    pub threshold_lhs: f64,
    /// `4 * 2^(-m/s)`.
    pub threshold_rhs: f64,
    pub threshold_holds: bool,
    /// `sqrt 2 / 3` when the threshold holds.
    pub lower: Option<WidthCertificate>,
    /// The generic packing certificate at `(s, gamma)`.
    pub packing_lower: WidthCertificate,
}

/// Entropy of `K_m = {e_1, ..., e_(2^m + 1)}` and the regime test
/// `sqrt 2 / (12 gamma) > 4 * 2^(-m/s)` under which `3 d_s^gamma >= sqrt 2`.
pub fn hilbert_example(m: u32, gamma: f64, s: u32) -> Result<HilbertReport> {
    if m == 0 || s == 0 || !(gamma > 0.0) {
        return Err(Error::Precondition(
            "m, s and gamma must be positive".into(),
        ));
    }
    if m > HILBERT_MAX_M {
        return Err(Error::SizeGuard(format!("m = {m} exceeds {HILBERT_MAX_M}")));
    }
    let set = BasisSet {
        count: (1usize << m) + 1,
    };
    let entropy = (1..=m)
        .map(|k| inner_entropy(&set, k))
        .collect::<Result<Vec<_>>>()?;
    let entropy_is_sqrt2 = entropy
        .iter()
        .all(|e| e.lower == SQRT_2 && e.upper == SQRT_2);
    let threshold_lhs = SQRT_2 / (12.0 * gamma);
    let threshold_rhs = 4.0 * (-(m as f64) / s as f64).exp2();
    let threshold_holds = threshold_lhs > threshold_rhs;
    let lower = threshold_holds.then(|| WidthCertificate {
        quantity: Quantity::LipschitzWidth,
        n: s,
        gamma: Some(gamma),
        value: SQRT_2 / 3.0,
        direction: Direction::Lower,
        witness: Witness::Inequality {
            statement: "sqrt2/(12 gamma) > 4 * 2^(-m/s)".into(),
            lhs: threshold_lhs,
            rhs: threshold_rhs,
        },
    });
    let packing_lower = width_lower_certified(&set, s, gamma, None)?;
    Ok(HilbertReport {
        m,
        gamma,
        s,
        count: set.count,
        entropy,
        entropy_is_sqrt2,
        threshold_lhs,
        threshold_rhs,
        threshold_holds,
        lower,
        packing_lower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_matches_dense() {
        let b = BasisSet { count: 9 };
        let d = b.to_dense();
        for i in 0..9 {
            for j in 0..9 {
                assert!((b.distance(i, j) - d.distance(i, j)).abs() < 1e-15);
            }
        }
        for k in 1..=3 {
            assert_eq!(inner_entropy(&b, k).unwrap(), inner_entropy(&d, k).unwrap());
        }
    }

    #[test]
    fn m14_regime() {
        let r = hilbert_example(14, 2.0 * SQRT_2, 2).unwrap();
        assert!((r.threshold_lhs - 1.0 / 24.0).abs() < 1e-15);
        assert_eq!(r.threshold_rhs, 1.0 / 32.0);
        assert!(r.threshold_holds && r.entropy_is_sqrt2);
        let lower = r.lower.unwrap();
        assert_eq!(lower.value, SQRT_2 / 3.0);
        lower.verify(None).unwrap();
        assert!(r.packing_lower.value > 0.0 && r.packing_lower.value < SQRT_2 / 4.0);
    }

    #[test]
    fn huge_gamma_no_claim() {
        let r = hilbert_example(3, 1e6, 1).unwrap();
        assert!(!r.threshold_holds);
        assert!(r.lower.is_none());
        assert!(r.entropy_is_sqrt2);
    }
}
