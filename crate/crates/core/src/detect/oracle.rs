use num_complex::Complex64;

use crate::channel::EffectiveChannel;
use crate::error::{check_len, Error, Result};
use crate::numerics::ComplexMat;

/// Sign of the noise covariance inside the variance oracle's inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseSign {
    /// `H·V·H^H + R`, the usual covariance of `y`.
    #[default]
    Plus,
    /// `H·V·H^H - R`.
    Minus,
}

/// Exact bit variance from the symbol variances `v`:
///
/// ```text
/// θ_c = h_c^H (H·diag(v)·H^H + N0·I)^{-1} h_c
/// σ²  = v_c²·θ_c·(1 - v_c·θ_c)
/// ```
///
/// Dense O(N³); limited to `N ≤ 64`.
pub fn exact_bit_variance_oracle(h: &EffectiveChannel, v: &[f64], n0: f64, c: usize) -> Result<f64> {
    exact_bit_variance_oracle_with_sign(h, v, n0, c, NoiseSign::Plus)
}

pub fn exact_bit_variance_oracle_with_sign(
    h: &EffectiveChannel,
    v: &[f64],
    n0: f64,
    c: usize,
    sign: NoiseSign,
) -> Result<f64> {
    let n = h.n();
    if n > 64 {
        return Err(Error::InvalidConfig(format!("variance oracle is limited to N <= 64, got {n}")));
    }
    check_len(n, v.len())?;
    if c >= n {
        return Err(Error::InvalidConfig(format!("column {c} out of range")));
    }
    let dense = h.dense();
    let s = match sign {
        NoiseSign::Plus => n0,
        NoiseSign::Minus => -n0,
    };
    let inner = ComplexMat::from_fn(n, n, |i, j| {
        let mut acc: Complex64 = (0..n).map(|k| dense[(i, k)] * v[k] * dense[(j, k)].conj()).sum();
        if i == j {
            acc += s;
        }
        acc
    });
    let col = dense.column(c);
    let z = inner.lu_solve(&col)?;
    let theta: f64 = col.iter().zip(&z).map(|(a, b)| a.conj() * b).sum::<Complex64>().re;
    let vc = v[c];
    Ok(vc * vc * theta * (1.0 - vc * theta))
}
