//! Numerical and exact tools for shift-like polynomial automorphisms of C^k.

// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod error;
pub mod filtration;
pub mod green;
pub mod io;
pub mod ktilde;
pub mod maps;
pub mod strips;
pub mod translation;
pub mod unstable;

pub use algebra::{CMatrix, CPoly, CVec, VecSeries};
pub use error::{Error, Result};
pub use maps::{ShiftComposition, ShiftFactor};
pub use num_complex::Complex64 as C64;
