//! Exact rational toolkit for DG-Lie and L∞ calculus, polyvector and
//! polydifferential complexes, cosimplicial normalization, Čech constructions and
//! one-variable coordinate-bundle computations.

#![forbid(unsafe_code)]
// Sparse tables keyed by index tuples are spelled out where they are built.
#![allow(clippy::type_complexity)]

pub mod catalog;
pub mod cech;
pub mod cli;
pub mod coordbundle;
pub mod cosimplicial;
pub mod dgla;
pub mod error;
pub mod json;
pub mod linfty;
pub mod linalg;
pub mod polyops;
pub mod rational;
pub mod sparse;

pub use error::{Error, Result};
pub use rational::Q;
