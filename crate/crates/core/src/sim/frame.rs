use num_complex::Complex64;
use rand::Rng;

use super::config::SimConfig;
use super::qpsk::{demap_qpsk_hard, map_qpsk};
use crate::channel::{
    apply_channel, build_effective_channel, generate_channel, ChannelRealization, EffectiveChannel,
};
use crate::detect::{
    detect_mmse_with, detect_mrc_dfe_with, detect_sfd_with, DetectionResult, DetectorConfig,
    DetectorKind,
};
use crate::error::{Error, Result};
use crate::modem::{add_cpp, demodulate, modulate, remove_cpp, AfdmConfig};
use crate::numerics::{splitmix64, ComplexVec, RngStream};

/// Outcome of one detector on one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorFrameStats {
    pub detector: DetectorKind,
    pub bit_errors: u64,
    pub iterations: usize,
    pub flops: u64,
    pub mse_trace: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameStats {
    pub bits_sent: u64,
    pub detectors: Vec<DetectorFrameStats>,
}

/// `N0 = 10^{-snr_db/10}` for unit symbol energy; zero at `+∞`.
pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// RNG stream index for one frame of one SNR point.
pub fn frame_stream(snr_db: f64, frame_index: u64) -> u64 {
    splitmix64(snr_db.to_bits()) ^ frame_index
}

pub fn modem_config(cfg: &SimConfig) -> Result<AfdmConfig> {
    if cfg.awgn {
        AfdmConfig::new(cfg.n, 0.0, cfg.xi_nu, 0)
    } else {
        AfdmConfig::new(cfg.n, cfg.alpha_max, cfg.xi_nu, cfg.l_max)
    }
}

pub fn detector_config(cfg: &SimConfig, snr_db: f64) -> DetectorConfig {
    DetectorConfig {
        t_max_iter: cfg.t_max_iter,
        t_error: cfg.t_error,
        eta: cfg.eta,
        stop_on_convergence: !cfg.trace_mse,
        ..DetectorConfig::from_snr_db(snr_db)
    }
}

/// One received frame, ready for detection.
#[derive(Debug, Clone)]
pub struct Frame {
    pub bits: Vec<bool>,
    pub x: ComplexVec,
    pub y: ComplexVec,
    pub h: EffectiveChannel,
}

/// Draws bits, channel and noise for one frame and runs the receiver front
/// end up to the effective channel.
pub fn prepare_frame(cfg: &SimConfig, snr_db: f64, frame_index: u64) -> Result<Frame> {
    let modem = modem_config(cfg)?;
    let mut rng = RngStream::new(cfg.seed, frame_stream(snr_db, frame_index));

    let bits: Vec<bool> = (0..2 * cfg.n).map(|_| rng.random()).collect();
    let x = map_qpsk(&bits)?;
    let s_cpp = add_cpp(&modem, &modulate(&modem, &x)?)?;
    let channel = if cfg.awgn {
        ChannelRealization::identity()
    } else {
        generate_channel(&mut rng, cfg.paths, cfg.l_max, cfg.alpha_max, cfg.integer_doppler)?
    };
    let n0 = noise_variance(snr_db);
    let r = apply_channel(&modem, &channel, &s_cpp, n0, &mut rng)?;
    let y = demodulate(&modem, &remove_cpp(&modem, &r)?)?;
    let h = build_effective_channel(&modem, &channel, n0)?;
    Ok(Frame { bits, x, y, h })
}

impl Frame {
    pub fn bit_errors(&self, x_hat: &[Complex64]) -> u64 {
        let decided = demap_qpsk_hard(x_hat);
        decided.iter().zip(&self.bits).filter(|(a, b)| a != b).count() as u64
    }

    pub fn detect(&self, kind: DetectorKind, cfg: &DetectorConfig, trace: bool) -> Result<DetectorFrameStats> {
        let truth = trace.then_some(self.x.as_slice());
        let res = run_detector(kind, &self.h, &self.y, cfg, truth)?;
        Ok(DetectorFrameStats {
            detector: kind,
            bit_errors: self.bit_errors(&res.x_hat),
            iterations: res.iterations_used,
            flops: res.flops_estimate,
            mse_trace: res.mse_trace,
        })
    }
}

/// Runs one frame through the full link. Every requested detector sees the
/// same bits, channel and noise.
pub fn run_frame(cfg: &SimConfig, snr_db: f64, frame_index: u64) -> Result<FrameStats> {
    let frame = prepare_frame(cfg, snr_db, frame_index)?;
    let det_cfg = detector_config(cfg, snr_db);
    let detectors = cfg
        .detectors
        .iter()
        .map(|&kind| frame.detect(kind, &det_cfg, cfg.trace_mse))
        .collect::<Result<_>>()?;
    Ok(FrameStats {
        bits_sent: frame.bits.len() as u64,
        detectors,
    })
}

pub fn run_detector(
    kind: DetectorKind,
    h: &EffectiveChannel,
    y: &[Complex64],
    cfg: &DetectorConfig,
    truth: Option<&[Complex64]>,
) -> Result<DetectionResult> {
    match kind {
        DetectorKind::Mmse => detect_mmse_with(h, y, cfg, truth),
        DetectorKind::MrcDfe => detect_mrc_dfe_with(h, y, cfg, truth, &mut ()),
        DetectorKind::Sfd => detect_sfd_with(h, y, cfg, truth, &mut ()),
        DetectorKind::MfMp => Err(Error::UnknownDetector(format!(
            "{kind} has no runnable implementation"
        ))),
    }
}
