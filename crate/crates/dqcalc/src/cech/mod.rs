//! Finite covers with algebra or DG-Lie values, their ordered Čech cosimplicial
//! objects, Hochschild complexes of finite linear categories with restriction maps,
//! and the exactness check for the rows of the Čech double complex of categories.

mod category;
mod cover;
mod double;

pub use category::*;
pub use cover::*;
pub use double::*;
