#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod convolve;
pub mod density;
pub mod entropy;
pub mod error;
mod fit;
mod spectral;
pub mod taylor;
pub mod theorem1;

pub use error::{Error, Result};
