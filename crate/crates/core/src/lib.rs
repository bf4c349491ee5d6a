//! Certified upper and lower bounds on Lipschitz widths, entropy numbers,
//! covering and packing numbers, and Kolmogorov widths of compact sets,
//! computed on finite samplings.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cases;
pub mod covering;
pub mod error;
pub mod experiment;
pub mod maps;
pub mod metric;
pub mod relu;
pub mod width;

pub use error::{Error, Result};
pub use metric::{BoundValue, Direction, FiniteSet, MetricSet, Norm, NormedSpace};
