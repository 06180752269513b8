//! Polyvector fields and polydifferential operators on `Q[x_1..x_d]`: Schouten and
//! Gerstenhaber brackets, the Hochschild differential, the HKR map, finite windows
//! of `T_poly` and `D_poly`, and first-order star products.
//!
//! Internal degree counts `deg x_i = 1`, `deg ∂_i = -1`; both brackets and the
//! Hochschild differential preserve it (additively for brackets), which is what makes
//! the windows honest subcomplexes or quotients.

mod brackets;
mod hkr;
mod parse;
mod props;
mod star;
mod types;
mod windows;

pub use brackets::*;
pub use hkr::*;
pub use parse::*;
pub use props::*;
pub use star::*;
pub use types::*;
pub use windows::*;
