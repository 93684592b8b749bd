use num_complex::Complex64;

use super::{flops_model, mse, DetectionResult, DetectorConfig, DetectorKind};
use crate::channel::EffectiveChannel;
use crate::error::{check_len, Result};

/// Dense LMMSE: `x̂ = (H^H·H + γ^{-1}·I)^{-1}·H^H·y` on the full matrix.
pub fn detect_mmse(h: &EffectiveChannel, y: &[Complex64], cfg: &DetectorConfig) -> Result<DetectionResult> {
    detect_mmse_with(h, y, cfg, None)
}

pub fn detect_mmse_with(
    h: &EffectiveChannel,
    y: &[Complex64],
    cfg: &DetectorConfig,
    truth: Option<&[Complex64]>,
) -> Result<DetectionResult> {
    cfg.validate()?;
    let n = h.n();
    check_len(n, y.len())?;
    if let Some(t) = truth {
        check_len(n, t.len())?;
    }
    let dense = h.dense();
    let gram = dense.gram_plus_diag(cfg.inverse_snr());
    let matched = dense.adjoint_mul_vec(y)?;
    let x_hat = gram.cholesky_solve(&matched)?;
    Ok(DetectionResult {
        mse_trace: truth.map(|t| vec![mse(&x_hat, t)]),
        x_hat,
        iterations_used: 1,
        converged: true,
        flops_estimate: flops_model(DetectorKind::Mmse, n, h.bandwidth().max(1), 1)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::numerics::{dist, norm, sample_cscg, ComplexMat, RngStream};

    fn identity(n: usize) -> EffectiveChannel {
        EffectiveChannel::from_parts(ComplexMat::identity(n), (0..n).map(|c| vec![c]).collect(), 0.0).unwrap()
    }

    #[test]
    fn identity_limits() {
        let y = sample_cscg(&mut RngStream::new(4, 0), 8, 1.0).unwrap();
        let h = identity(8);
        let exact = detect_mmse(&h, &y, &DetectorConfig::new(f64::INFINITY)).unwrap();
        assert!(dist(&exact.x_hat, &y) < 1e-8 * norm(&y));
        let shrunk = detect_mmse(&h, &y, &DetectorConfig::new(3.0)).unwrap();
        for (a, b) in shrunk.x_hat.iter().zip(&y) {
            assert!((a - b * 0.75).norm() < 1e-12);
        }
        assert_eq!(shrunk.flops_estimate, 24 * 512);
        assert_eq!(shrunk.iterations_used, 1);
    }

    #[test]
    fn singular_noiseless_system_is_reported() {
        let h = EffectiveChannel::from_parts(
            ComplexMat::from_fn(4, 4, |r, _| if r == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }),
            (0..4).map(|_| vec![0]).collect(),
            0.0,
        )
        .unwrap();
        let y = vec![Complex64::new(1.0, 0.0); 4];
        assert!(matches!(
            detect_mmse(&h, &y, &DetectorConfig::new(f64::INFINITY)),
            Err(Error::Singular)
        ));
    }
}
