//! Exact scalars, truncated series, and Koszul-signed multilinear algebra.

pub mod contract;
pub mod exp;
pub mod forms;
pub mod graded;
pub mod matrix;
pub mod ring;
pub mod series;

pub use graded::{GradedMap, GradedSpace, MultiOp};
pub use matrix::Mat;
pub use ring::{int, parse_rational, rat, Field, GaussRational, Rational, Ring, Scalar};
pub use series::{Series, SeriesCtx};
