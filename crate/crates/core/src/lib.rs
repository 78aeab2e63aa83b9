pub mod affine;
pub mod certificate;
pub mod crosscheck;
pub mod error;
pub mod locus;
pub mod prune;
pub mod repro;
pub mod roots;
pub mod scalar;
pub mod scan;
pub mod series;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision evaluation result.
pub type Eval = series::EvalResult<f64>;
/// Exact evaluation result.
pub type ExactEval = series::EvalResult<num_rational::BigRational>;
/// Double-precision exclusion query.
pub type Query = prune::ExclusionQuery<f64>;
/// Double-precision plane vector.
pub type Point = affine::Vec2<f64>;
/// Double-precision plane matrix.
pub type Matrix = affine::Mat2<f64>;
