use crate::error::{Error, Result};

/// Piecewise-constant function on `[0, 2]`, zero outside its breakpoint range.
///
/// `values[i]` holds on `[breaks[i], breaks[i + 1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 {
            return Err(Error::InvalidNorm(format!(
                "{} breaks for {} values",
                breaks.len(),
                values.len()
            )));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidNorm(
                "breaks must be strictly increasing".into(),
            ));
        }
        Ok(Self { breaks, values })
    }

    /// Indicator of `[lo, hi)`.
    pub fn indicator(lo: f64, hi: f64) -> Self {
        Self {
            breaks: vec![lo, hi],
            values: vec![1.0],
        }
    }

    pub fn value_at(&self, x: f64) -> f64 {
        match self.breaks.partition_point(|b| *b <= x) {
            0 => 0.0,
            i if i >= self.breaks.len() => 0.0,
            i => self.values[i - 1],
        }
    }

    /// Exact `∫ |self - other|` by merging the two partitions.
    pub fn l1_distance(&self, other: &StepFunction) -> f64 {
        let mut cuts: Vec<f64> = self
            .breaks
            .iter()
            .chain(other.breaks.iter())
            .copied()
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                (self.value_at(mid) - other.value_at(mid)).abs() * (w[1] - w[0])
            })
            .sum()
    }

    /// Values on the cells of a fixed partition. The partition must refine
    /// this function's breakpoints for the result to be exact.
    pub fn sample_cells(&self, partition: &[f64]) -> Vec<f64> {
        partition
            .windows(2)
            .map(|w| self.value_at(0.5 * (w[0] + w[1])))
            .collect()
    }
}
