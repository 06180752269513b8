//! Coderivation calculus on `S(g[1])`: Koszul signs, Taylor towers of L∞
//! structures and morphisms, twisting by Maurer-Cartan elements and descent.
//!
//! All degrees here are degrees in `g[1]`: an element of degree `k` in `g` has
//! degree `k-1`. The shift enters only through [`ShiftedSpace::shift_of`].

mod descent;
mod tower;
mod twist;
mod words;

pub use descent::*;
pub use tower::*;
pub use twist::*;
pub use words::*;
