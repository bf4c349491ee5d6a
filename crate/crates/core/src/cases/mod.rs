//! Concrete compact sets with closed-form reference values.

mod diagonal;
mod hilbert;
mod sequence;
mod sequence_widths;
mod transport;

pub use diagonal::*;
pub use hilbert::*;
pub use sequence::*;
pub use sequence_widths::*;
pub use transport::*;
