#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod error;
pub mod fit;
pub mod harness;
pub mod kzm;
pub mod lz;
pub mod ode;
pub mod open;
pub mod readout;
pub mod special;

pub use error::{Error, Result};
