//! One-variable formal geometry: the truncated coordinate ring `Q[x_0, x_1^{±1}, …]`
//! with its Witt-algebra action, generating series `f̃`, the Maurer-Cartan form,
//! GL₁ invariants, and the explicit contracting homotopy of the affine-coordinate
//! De Rham complex together with its graded Poincaré pieces.

mod homotopy;
mod mc;
mod ring;

pub use homotopy::*;
pub use mc::*;
pub use ring::*;
