//! Special functions: complex gamma and parabolic cylinder functions.

pub mod gamma;
pub mod pcf;

pub use gamma::{gamma, ln_gamma, rgamma};
pub use pcf::{pcf_d, pcf_d_scaled, Scaled};
