//! Numeric kernels: vectors, polynomials, small matrices, truncated vector series.

pub mod cvec;
pub mod matrix;
pub mod poly;
pub mod series;

pub use cvec::CVec;
pub use matrix::{eigenvalues, sort_by_modulus, CMatrix};
pub use poly::{poly_eval, CPoly};
pub use series::{series_scale_arg, VecSeries, DEFAULT_ORDER};
