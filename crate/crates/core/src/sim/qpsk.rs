use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::ComplexVec;

/// Gray-mapped unit-energy QPSK: `(b1, b2) ↦ ((1-2b1) + j(1-2b2))/√2`.
pub fn map_qpsk(bits: &[bool]) -> Result<ComplexVec> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!(
            "QPSK needs an even number of bits, got {}",
            bits.len()
        )));
    }
    let level = |b: bool| if b { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    Ok(bits
        .chunks_exact(2)
        .map(|p| Complex64::new(level(p[0]), level(p[1])))
        .collect())
}

/// Sign slicer; an exact zero maps to bit 0.
pub fn demap_qpsk_hard(x_hat: &[Complex64]) -> Vec<bool> {
    x_hat.iter().flat_map(|v| [v.re < 0.0, v.im < 0.0]).collect()
}
