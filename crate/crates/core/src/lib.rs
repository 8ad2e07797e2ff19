// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::manual_is_multiple_of)]

pub mod analysis;
pub mod channel;
pub mod decoder;
pub mod error;
pub mod estimator;
pub mod fec;
pub mod harness;
pub mod modem;
pub mod pilots;
pub mod rng;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub type ComplexVec = Vec<Complex64>;
