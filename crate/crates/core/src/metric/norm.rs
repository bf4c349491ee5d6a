use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute threshold below which a norm value counts as zero.
pub const TAU_ZERO: f64 = 1e-12;

/// Relative tolerance used when comparing certified bounds.
pub const REL_TOL: f64 = 1e-9;

/// Norm descriptor for a finite-dimensional space.
///
/// `L1Step` points are step functions on a fixed partition of `[0, 2]`:
/// coordinate `i` is the value on `[breakpoints[i], breakpoints[i + 1])`,
/// and the norm is the exact L1 integral, summed cell by cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Norm {
    L1,
    L2,
    #[serde(rename = "linf")]
    LInf,
    #[serde(rename = "weighted_linf")]
    WeightedLInf {
        weights: Vec<f64>,
    },
    L1Step {
        breakpoints: Vec<f64>,
    },
}

impl Norm {
    fn check(&self, dim: usize) -> Result<()> {
        match self {
            Norm::L1 | Norm::L2 | Norm::LInf => Ok(()),
            Norm::WeightedLInf { weights } => {
                if weights.len() != dim {
                    return Err(Error::InvalidNorm(format!(
                        "{} weights for dimension {dim}",
                        weights.len()
                    )));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(Error::InvalidNorm("weights must be positive".into()));
                }
                Ok(())
            }
            Norm::L1Step { breakpoints } => {
                if breakpoints.len() != dim + 1 {
                    return Err(Error::InvalidNorm(format!(
                        "{} breakpoints for {dim} cells",
                        breakpoints.len()
                    )));
                }
                if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidNorm(
                        "breakpoints must be strictly increasing".into(),
                    ));
                }
                if breakpoints[0] < 0.0 || breakpoints[dim] > 2.0 {
                    return Err(Error::InvalidNorm("step functions live on [0, 2]".into()));
                }
                Ok(())
            }
        }
    }
}

/// `(R^dim, norm)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormedSpace {
    pub dim: usize,
    pub norm: Norm,
}

impl NormedSpace {
    pub fn new(dim: usize, norm: Norm) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidNorm("dimension must be positive".into()));
        }
        norm.check(dim)?;
        Ok(Self { dim, norm })
    }

    pub fn l1(dim: usize) -> Self {
        Self::new(dim, Norm::L1).expect("positive dimension")
    }

    pub fn l2(dim: usize) -> Self {
        Self::new(dim, Norm::L2).expect("positive dimension")
    }

    pub fn linf(dim: usize) -> Self {
        Self::new(dim, Norm::LInf).expect("positive dimension")
    }

    /// Re-run the constructor checks, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidNorm("dimension must be positive".into()));
        }
        self.norm.check(self.dim)
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.norm_of(x.iter().copied()))
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.distance_unchecked(x, y))
    }

    /// Distance without the dimension check; callers guarantee conformity.
    #[inline]
    pub fn distance_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        self.norm_of(x.iter().zip(y).map(|(a, b)| a - b))
    }

    #[inline]
    pub(crate) fn norm_of<I: Iterator<Item = f64>>(&self, coords: I) -> f64 {
        match &self.norm {
            Norm::L1 => coords.map(f64::abs).sum(),
            Norm::L2 => coords.map(|c| c * c).sum::<f64>().sqrt(),
            Norm::LInf => coords.fold(0.0, |m, c| m.max(c.abs())),
            Norm::WeightedLInf { weights } => coords
                .zip(weights)
                .fold(0.0, |m, (c, w)| m.max(w * c.abs())),
            Norm::L1Step { breakpoints } => coords
                .zip(breakpoints.windows(2))
                .map(|(c, w)| c.abs() * (w[1] - w[0]))
                .sum(),
        }
    }

    pub fn is_zero(&self, x: &[f64]) -> Result<bool> {
        Ok(self.norm(x)? <= TAU_ZERO)
    }

    /// A unit-norm vector, used as a placeholder direction for zero amplitudes.
    pub fn unit_vector(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.dim];
        e[0] = 1.0;
        let n = self.norm_of(e.iter().copied());
        e[0] = 1.0 / n;
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_vectors_in_l2() {
        let s = NormedSpace::l2(5);
        let mut e1 = vec![0.0; 5];
        let mut e2 = vec![0.0; 5];
        e1[0] = 1.0;
        e2[1] = 1.0;
        let d = s.distance(&e1, &e2).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn identity_distance_is_zero() {
        for s in [NormedSpace::l1(3), NormedSpace::l2(3), NormedSpace::linf(3)] {
            let x = [0.3, -1.2, 4.0];
            assert_eq!(s.distance(&x, &x).unwrap(), 0.0);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let s = NormedSpace::l2(2);
        assert_eq!(
            s.distance(&[1.0, 2.0], &[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn weighted_linf_and_step_norms() {
        let s = NormedSpace::new(
            2,
            Norm::WeightedLInf {
                weights: vec![2.0, 0.5],
            },
        )
        .unwrap();
        assert_eq!(s.norm(&[1.0, 3.0]).unwrap(), 2.0);

        let s = NormedSpace::new(
            3,
            Norm::L1Step {
                breakpoints: vec![0.0, 0.5, 1.5, 2.0],
            },
        )
        .unwrap();
        assert_eq!(s.norm(&[1.0, -1.0, 2.0]).unwrap(), 0.5 + 1.0 + 1.0);
    }

    #[test]
    fn bad_descriptors_are_rejected() {
        assert!(NormedSpace::new(0, Norm::L2).is_err());
        assert!(NormedSpace::new(2, Norm::WeightedLInf { weights: vec![1.0] }).is_err());
        assert!(NormedSpace::new(
            2,
            Norm::WeightedLInf {
                weights: vec![1.0, 0.0]
            }
        )
        .is_err());
        assert!(NormedSpace::new(
            2,
            Norm::L1Step {
                breakpoints: vec![0.0, 1.0, 1.0]
            }
        )
        .is_err());
        assert!(NormedSpace::new(
            1,
            Norm::L1Step {
                breakpoints: vec![0.0, 2.5]
            }
        )
        .is_err());
    }

    #[test]
    fn unit_vector_has_unit_norm() {
        let s = NormedSpace::new(
            2,
            Norm::WeightedLInf {
                weights: vec![4.0, 1.0],
            },
        )
        .unwrap();
        assert!((s.norm(&s.unit_vector()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn norm_json_shape() {
        let s = NormedSpace::l2(3);
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v, serde_json::json!({"dim": 3, "norm": {"kind": "l2"}}));
        let back: NormedSpace = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }
}
