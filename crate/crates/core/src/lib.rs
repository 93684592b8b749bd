//! Link-level simulation of affine frequency division multiplexing (AFDM)
//! over doubly dispersive channels, with an MMSE reference detector, the
//! MRC-based decision-feedback detector and its soft-feedback variant.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod detect;
pub mod error;
pub mod modem;
pub mod numerics;
pub mod sim;

pub use error::{Error, Result};
pub use num_complex::Complex64;
