//! Truncated cosimplicial complexes, their normalized and unnormalized cochains,
//! polynomial forms on simplices with exact integration, and the Thom–Sullivan
//! cochains together with the integration map to the normalized cochains.
//!
//! Everything lives over the truncated simplex category `Δ_{≤n_max}`; `n_max` is
//! carried in every report.

mod complex;
mod derham;
mod ts;

pub use complex::*;
pub use derham::*;
pub use ts::*;
