use num_complex::Complex64;

use super::soft::SoftState;
use super::{
    flops_model, mse, DetectionResult, DetectorConfig, DetectorKind, EnergyNormalization,
    IterationObserver, IterationSnapshot,
};
use crate::channel::EffectiveChannel;
use crate::error::{check_len, Result};
use crate::numerics::{dist, norm};

#[derive(Clone, Copy, PartialEq)]
enum Feedback {
    Estimate,
    Soft,
}

/// MRC-DFE: combine over each column's band, add back `d·x̂^(t-1)[c]`,
/// shrink by `d + γ^{-1}` and update the residual in place.
pub fn detect_mrc_dfe(h: &EffectiveChannel, y: &[Complex64], cfg: &DetectorConfig) -> Result<DetectionResult> {
    detect_mrc_dfe_with(h, y, cfg, None, &mut ())
}

pub fn detect_mrc_dfe_with(
    h: &EffectiveChannel,
    y: &[Complex64],
    cfg: &DetectorConfig,
    truth: Option<&[Complex64]>,
    observer: &mut dyn IterationObserver,
) -> Result<DetectionResult> {
    run(h, y, cfg, truth, observer, Feedback::Estimate)
}

/// Soft-feedback detector for QPSK.
///
/// Same sweep as MRC-DFE, except the value added back to the combiner output
/// is the soft symbol expectation from the previous iteration. After each
/// non-final iteration the bit LLRs, expectations and variances are updated.
pub fn detect_sfd(h: &EffectiveChannel, y: &[Complex64], cfg: &DetectorConfig) -> Result<DetectionResult> {
    detect_sfd_with(h, y, cfg, None, &mut ())
}

pub fn detect_sfd_with(
    h: &EffectiveChannel,
    y: &[Complex64],
    cfg: &DetectorConfig,
    truth: Option<&[Complex64]>,
    observer: &mut dyn IterationObserver,
) -> Result<DetectionResult> {
    run(h, y, cfg, truth, observer, Feedback::Soft)
}

fn run(
    h: &EffectiveChannel,
    y: &[Complex64],
    cfg: &DetectorConfig,
    truth: Option<&[Complex64]>,
    observer: &mut dyn IterationObserver,
    feedback: Feedback,
) -> Result<DetectionResult> {
    cfg.validate()?;
    let n = h.n();
    check_len(n, y.len())?;
    if let Some(t) = truth {
        check_len(n, t.len())?;
    }
    let inv_snr = cfg.inverse_snr();
    let energy: Vec<f64> = match cfg.energy {
        EnergyNormalization::Mean => vec![h.d(); n],
        EnergyNormalization::PerColumn => h.column_energy().to_vec(),
    };

    let mut x_hat = vec![Complex64::new(0.0, 0.0); n];
    let mut x_prev = x_hat.clone();
    let mut residual = y.to_vec();
    let mut soft = (feedback == Feedback::Soft).then(|| SoftState::new(n));
    let mut trace = truth.map(|_| Vec::with_capacity(cfg.t_max_iter));
    let mut converged = false;
    let mut iterations = 0;

    for t in 1..=cfg.t_max_iter {
        iterations = t;
        x_prev.copy_from_slice(&x_hat);
        for c in 0..n {
            let rows = &h.band_cols()[c];
            let vals = h.band_values(c);
            let mut g = Complex64::new(0.0, 0.0);
            for (&r, hv) in rows.iter().zip(vals) {
                g += hv.conj() * residual[r];
            }
            let fed_back = match &soft {
                Some(s) => s.e_sym[c],
                None => x_hat[c],
            };
            g += energy[c] * fed_back;
            let next = g / (energy[c] + inv_snr);
            let delta = next - x_hat[c];
            for (&r, hv) in rows.iter().zip(vals) {
                residual[r] -= hv * delta;
            }
            x_hat[c] = next;
        }
        if let (Some(tr), Some(truth)) = (trace.as_mut(), truth) {
            tr.push(mse(&x_hat, truth));
        }

        converged = dist(&x_hat, &x_prev) <= cfg.t_error * norm(&x_prev);
        if converged && cfg.stop_on_convergence {
            observer.observe(&IterationSnapshot {
                iteration: t,
                x_hat: &x_hat,
                residual: &residual,
                soft: None,
                converged,
            });
            break;
        }
        if let Some(s) = soft.as_mut() {
            s.update(&x_hat, cfg.eta, cfg.soft_symbol);
        }
        observer.observe(&IterationSnapshot {
            iteration: t,
            x_hat: &x_hat,
            residual: &residual,
            soft: soft.as_ref(),
            converged,
        });
    }

    let kind = match feedback {
        Feedback::Estimate => DetectorKind::MrcDfe,
        Feedback::Soft => DetectorKind::Sfd,
    };
    Ok(DetectionResult {
        x_hat,
        iterations_used: iterations,
        converged,
        mse_trace: trace,
        flops_estimate: flops_model(kind, n, h.bandwidth(), iterations)?,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;

    use super::*;
    use crate::channel::{build_effective_channel, generate_channel, ChannelRealization};
    use crate::detect::soft::{soft_expectation, variance_update};
    use crate::modem::AfdmConfig;
    use crate::numerics::{sample_cscg, ComplexMat, RngStream};

    fn identity_channel(n: usize) -> EffectiveChannel {
        EffectiveChannel::from_parts(ComplexMat::identity(n), (0..n).map(|c| vec![c]).collect(), 0.0).unwrap()
    }

    fn qpsk(n: usize, seed: u64) -> Vec<Complex64> {
        let g = sample_cscg(&mut RngStream::new(seed, 3), n, 1.0).unwrap();
        g.iter()
            .map(|v| Complex64::new(v.re.signum(), v.im.signum()) * FRAC_1_SQRT_2)
            .collect()
    }

    #[test]
    fn identity_channel_mrc_dfe_shrinks() {
        let h = identity_channel(16);
        let y = sample_cscg(&mut RngStream::new(1, 0), 16, 1.0).unwrap();
        let cfg = DetectorConfig::new(4.0);
        let out = detect_mrc_dfe(&h, &y, &cfg).unwrap();
        assert!(out.converged);
        assert!(out.iterations_used <= 2);
        for (a, b) in out.x_hat.iter().zip(&y) {
            assert!((a - b * 0.8).norm() < 1e-12);
        }
        assert_eq!(out.flops_estimate, (out.iterations_used * 16 * (16 + 17)) as u64);
    }

    #[test]
    fn zero_observation_is_a_fixed_point() {
        let h = identity_channel(8);
        let y = vec![Complex64::new(0.0, 0.0); 8];
        let mut seen = Vec::new();
        let out = detect_sfd_with(&h, &y, &DetectorConfig::new(10.0), None, &mut |s: &IterationSnapshot<'_>| {
            seen.push(s.soft.is_none())
        })
        .unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations_used, 1);
        assert!(out.x_hat.iter().all(|v| v.norm() == 0.0));
        assert_eq!(seen, vec![true]);
    }

    #[test]
    fn noiseless_identity_confidence_grows() {
        let n = 32;
        let h = identity_channel(n);
        let x = qpsk(n, 2);
        let mut cfg = DetectorConfig::new(f64::INFINITY);
        cfg.stop_on_convergence = false;
        cfg.t_max_iter = 6;
        let mut history: Vec<Vec<[f64; 2]>> = Vec::new();
        detect_sfd_with(&h, &x, &cfg, None, &mut |s: &IterationSnapshot<'_>| {
            history.push(s.soft.unwrap().l_post.clone())
        })
        .unwrap();
        assert_eq!(history.len(), 6);
        for w in history.windows(2) {
            for (a, b) in w[0].iter().zip(&w[1]) {
                for bit in 0..2 {
                    assert!(b[bit].abs() >= a[bit].abs());
                }
            }
        }
        for (l, sym) in history.last().unwrap().iter().zip(&x) {
            assert_eq!(l[0] > 0.0, sym.re > 0.0);
            assert_eq!(l[1] > 0.0, sym.im > 0.0);
        }
    }

    fn scenario(n: usize, seed: u64, snr_db: f64) -> (EffectiveChannel, Vec<Complex64>, Vec<Complex64>) {
        let cfg = AfdmConfig::new(n, 2.0, 2, 3).unwrap();
        let mut rng = RngStream::new(seed, 0);
        let ch = generate_channel(&mut rng, 4, 3, 2.0, false).unwrap();
        let n0 = 10f64.powf(-snr_db / 10.0);
        let h = build_effective_channel(&cfg, &ch, n0).unwrap();
        let x = qpsk(n, seed);
        let w = sample_cscg(&mut rng, n, n0).unwrap();
        let y: Vec<Complex64> = h.dense().mul_vec(&x).unwrap().iter().zip(&w).map(|(a, b)| a + b).collect();
        (h, x, y)
    }

    #[test]
    fn residual_tracks_recomputation() {
        let (h, _, y) = scenario(64, 7, 10.0);
        let cfg = DetectorConfig::new(10.0);
        for soft in [false, true] {
            let mut worst: f64 = 0.0;
            let mut check = |s: &IterationSnapshot<'_>| {
                let fresh = h.band_residual(&y, s.x_hat);
                worst = worst.max(dist(&fresh, s.residual) / norm(&fresh));
            };
            if soft {
                detect_sfd_with(&h, &y, &cfg, None, &mut check).unwrap();
            } else {
                detect_mrc_dfe_with(&h, &y, &cfg, None, &mut check).unwrap();
            }
            assert!(worst <= 1e-9, "relative residual drift {worst}");
        }
    }

    #[test]
    fn first_iteration_matches_between_detectors() {
        let (h, _, y) = scenario(64, 9, 12.0);
        let mut cfg = DetectorConfig::new(10f64.powf(1.2));
        cfg.t_max_iter = 1;
        let a = detect_mrc_dfe(&h, &y, &cfg).unwrap();
        let b = detect_sfd(&h, &y, &cfg).unwrap();
        assert_eq!(a.x_hat, b.x_hat);
    }

    #[test]
    fn soft_state_is_coupled_and_accumulates() {
        let (h, _, y) = scenario(64, 11, 10.0);
        let mut cfg = DetectorConfig::new(10.0);
        cfg.stop_on_convergence = false;
        cfg.t_max_iter = 5;
        cfg.eta = 2.0;
        let mut ext_sum = vec![[0.0f64; 2]; 64];
        let mut prev_var = vec![[1.0f64; 2]; 64];
        detect_sfd_with(&h, &y, &cfg, None, &mut |s: &IterationSnapshot<'_>| {
            let soft = s.soft.unwrap();
            for c in 0..64 {
                let e = soft_expectation((soft.l_post[c][0], soft.l_post[c][1]));
                assert_eq!(soft.e_sym[c], e);
                assert!(soft.e_sym[c].norm() <= 1.0);
                assert_eq!(soft.var_bit[c][0], variance_update(e, cfg.eta));
                assert!(soft.var_bit[c][0] > 0.0 && soft.var_bit[c][0] <= cfg.eta);
                let ext = [
                    std::f64::consts::SQRT_2 / prev_var[c][0] * s.x_hat[c].re,
                    std::f64::consts::SQRT_2 / prev_var[c][1] * s.x_hat[c].im,
                ];
                for b in 0..2 {
                    ext_sum[c][b] += ext[b];
                    if ext_sum[c][b].abs() < 30.0 {
                        assert!((soft.l_post[c][b] - ext_sum[c][b]).abs() <= 1e-9 * ext_sum[c][b].abs().max(1.0));
                    }
                }
            }
            prev_var = soft.var_bit.clone();
        })
        .unwrap();
    }

    #[test]
    fn convergence_rule_fires_at_first_small_step() {
        let (h, _, y) = scenario(64, 13, 14.0);
        let cfg = DetectorConfig::new(10f64.powf(1.4));
        let mut free = cfg.clone();
        free.stop_on_convergence = false;
        let mut steps = Vec::new();
        let mut prev = vec![Complex64::new(0.0, 0.0); 64];
        detect_mrc_dfe_with(&h, &y, &free, None, &mut |s: &IterationSnapshot<'_>| {
            steps.push(dist(s.x_hat, &prev) <= cfg.t_error * norm(&prev));
            prev = s.x_hat.to_vec();
        })
        .unwrap();
        let expected = steps.iter().position(|&b| b).map(|i| i + 1).unwrap_or(cfg.t_max_iter);
        let out = detect_mrc_dfe(&h, &y, &cfg).unwrap();
        assert_eq!(out.iterations_used, expected);
    }

    #[test]
    fn trace_and_length_checks() {
        let (h, x, y) = scenario(32, 5, 16.0);
        let mut cfg = DetectorConfig::new(10f64.powf(1.6));
        cfg.stop_on_convergence = false;
        let out = detect_sfd_with(&h, &y, &cfg, Some(&x), &mut ()).unwrap();
        let trace = out.mse_trace.unwrap();
        assert_eq!(trace.len(), cfg.t_max_iter);
        assert!(trace.iter().all(|v| *v >= 0.0));
        assert!(detect_sfd(&h, &y[..31], &cfg).is_err());
    }

    #[test]
    fn per_column_energy_is_selectable() {
        let (h, x, y) = scenario(64, 21, 16.0);
        let mut cfg = DetectorConfig::new(10f64.powf(1.6));
        cfg.energy = EnergyNormalization::PerColumn;
        let out = detect_mrc_dfe_with(&h, &y, &cfg, Some(&x), &mut ()).unwrap();
        assert!(out.mse_trace.unwrap().last().unwrap() < &0.5);
        let flat = build_effective_channel(
            &AfdmConfig::new(16, 0.0, 0, 0).unwrap(),
            &ChannelRealization::identity(),
            0.0,
        )
        .unwrap();
        assert_eq!(flat.column_energy().len(), 16);
    }
}
