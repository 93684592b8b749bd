use rayon::prelude::*;

use super::config::SimConfig;
use super::frame::{detector_config, prepare_frame, run_frame, FrameStats};
use crate::detect::DetectorKind;
use crate::error::{Error, Result};

/// Aggregate over all frames of one (SNR, detector) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub snr_db: f64,
    pub detector: DetectorKind,
    pub frames: usize,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub mean_iterations: f64,
    pub mean_flops: f64,
    pub eta: f64,
    /// Per-iteration MSE averaged over frames, when tracing.
    pub mse_trace: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Sorted by SNR, then detector.
    pub cells: Vec<CellResult>,
}

impl SimResult {
    pub fn cell(&self, snr_db: f64, detector: DetectorKind) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.snr_db == snr_db && c.detector == detector)
    }

    /// Cells of one detector in SNR order.
    pub fn curve(&self, detector: DetectorKind) -> Vec<&CellResult> {
        self.cells.iter().filter(|c| c.detector == detector).collect()
    }
}

/// Runs frames in parallel and returns their stats in frame order.
fn run_frames(cfg: &SimConfig, snr_db: f64) -> Result<Vec<FrameStats>> {
    (0..cfg.frames as u64)
        .into_par_iter()
        .map(|f| run_frame(cfg, snr_db, f))
        .collect()
}

fn aggregate(cfg: &SimConfig, snr_db: f64, frames: &[FrameStats]) -> Vec<CellResult> {
    let count = frames.len();
    cfg.detectors
        .iter()
        .enumerate()
        .map(|(k, &detector)| {
            let mut bits_sent = 0;
            let mut bit_errors = 0;
            let mut iterations = 0u64;
            let mut flops = 0u128;
            let mut trace: Option<Vec<f64>> = None;
            for frame in frames {
                let d = &frame.detectors[k];
                bits_sent += frame.bits_sent;
                bit_errors += d.bit_errors;
                iterations += d.iterations as u64;
                flops += d.flops as u128;
                if let Some(t) = &d.mse_trace {
                    let acc = trace.get_or_insert_with(|| vec![0.0; t.len()]);
                    acc.iter_mut().zip(t).for_each(|(a, v)| *a += v);
                }
            }
            if let Some(t) = trace.as_mut() {
                t.iter_mut().for_each(|v| *v /= count as f64);
            }
            CellResult {
                snr_db,
                detector,
                frames: count,
                bits_sent,
                bit_errors,
                ber: bit_errors as f64 / bits_sent as f64,
                mean_iterations: iterations as f64 / count as f64,
                mean_flops: flops as f64 / count as f64,
                eta: cfg.eta,
                mse_trace: trace,
            }
        })
        .collect()
}

/// Monte Carlo sweep over every SNR point and detector. Frames run in
/// parallel; aggregation is done in frame order, so the result does not
/// depend on scheduling.
pub fn run_sweep(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &snr in &cfg.snr_db_list {
        let frames = run_frames(cfg, snr)?;
        cells.extend(aggregate(cfg, snr, &frames));
    }
    cells.sort_by(|a, b| {
        a.snr_db
            .total_cmp(&b.snr_db)
            .then_with(|| a.detector.tag().cmp(b.detector.tag()))
    });
    Ok(SimResult { cells })
}

/// Mean per-iteration MSE of each detector at one SNR, with early stopping
/// disabled so every trace has `t_max_iter` entries.
pub fn trace_convergence(cfg: &SimConfig, snr_db: f64) -> Result<Vec<(DetectorKind, Vec<f64>)>> {
    for needed in [DetectorKind::MrcDfe, DetectorKind::Sfd] {
        if !cfg.detectors.contains(&needed) {
            return Err(Error::InvalidConfig(format!("trace requires the {needed} detector")));
        }
    }
    let cfg = SimConfig {
        trace_mse: true,
        snr_db_list: vec![snr_db],
        ..cfg.clone()
    };
    let result = run_sweep(&cfg)?;
    Ok(result
        .cells
        .into_iter()
        .map(|c| (c.detector, c.mse_trace.unwrap_or_default()))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtaCalibration {
    pub eta: f64,
    pub snr_db: f64,
    pub frames: usize,
    /// `(η, bit errors, bits sent)` per grid value.
    pub points: Vec<(f64, u64, u64)>,
}

/// SFD BER at each grid value over `max(frames/10, 200)` frames; returns the
/// minimizer, ties going to the smaller η. All grid values see the same frames.
pub fn calibrate_eta(cfg: &SimConfig, snr_db: f64, grid: &[f64]) -> Result<EtaCalibration> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(bad) = grid.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidConfig(format!("eta grid values must be positive, got {bad}")));
    }
    let frames = (cfg.frames / 10).max(200);
    let base = SimConfig {
        frames,
        trace_mse: false,
        ..cfg.clone()
    };
    base.validate()?;
    let det_cfgs: Vec<_> = grid
        .iter()
        .map(|&eta| {
            let mut d = detector_config(&base, snr_db);
            d.eta = eta;
            d
        })
        .collect();
    let per_frame: Vec<Vec<u64>> = (0..frames as u64)
        .into_par_iter()
        .map(|f| {
            let frame = prepare_frame(&base, snr_db, f)?;
            det_cfgs
                .iter()
                .map(|d| Ok(frame.detect(DetectorKind::Sfd, d, false)?.bit_errors))
                .collect()
        })
        .collect::<Result<_>>()?;
    let bits = (frames * 2 * cfg.n) as u64;
    let points: Vec<(f64, u64, u64)> = grid
        .iter()
        .enumerate()
        .map(|(k, &eta)| (eta, per_frame.iter().map(|e| e[k]).sum(), bits))
        .collect();
    let best = points
        .iter()
        .min_by(|a, b| a.1.cmp(&b.1).then(a.0.total_cmp(&b.0)))
        .map(|p| p.0)
        .unwrap_or(grid[0]);
    Ok(EtaCalibration {
        eta: best,
        snr_db,
        frames,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig {
            n: 32,
            frames: 20,
            snr_db_list: vec![4.0, 10.0],
            ..SimConfig::default()
        }
    }

    #[test]
    fn conservation_and_ordering() {
        let res = run_sweep(&small()).unwrap();
        assert_eq!(res.cells.len(), 6);
        for c in &res.cells {
            assert_eq!(c.bits_sent, 20 * 64);
            assert_eq!(c.ber, c.bit_errors as f64 / c.bits_sent as f64);
        }
        let keys: Vec<_> = res.cells.iter().map(|c| (c.snr_db, c.detector.tag())).collect();
        assert_eq!(keys[0], (4.0, "mmse"));
        assert_eq!(keys[1], (4.0, "mrc-dfe"));
        assert_eq!(keys[5], (10.0, "sfd"));
    }

    #[test]
    fn sweep_matches_serial_frames() {
        let cfg = small();
        let res = run_sweep(&cfg).unwrap();
        let serial: u64 = (0..cfg.frames as u64)
            .map(|f| run_frame(&cfg, 4.0, f).unwrap().detectors[2].bit_errors)
            .sum();
        assert_eq!(res.cell(4.0, DetectorKind::Sfd).unwrap().bit_errors, serial);
    }

    #[test]
    fn mean_flops_follow_the_model() {
        // at N = 64 the path windows never overlap, so L = 20 on every frame
        let res = run_sweep(&SimConfig { n: 64, ..small() }).unwrap();
        for c in &res.cells {
            let per_iter = crate::detect::flops_model(c.detector, 64, 20, 1).unwrap() as f64;
            let expected = match c.detector {
                DetectorKind::Mmse => per_iter,
                _ => per_iter * c.mean_iterations,
            };
            assert!((c.mean_flops - expected).abs() <= 1e-9 * expected, "{c:?}");
        }
    }

    #[test]
    fn calibration_rules() {
        let cfg = small();
        assert_eq!(calibrate_eta(&cfg, 12.0, &[0.5]).unwrap().eta, 0.5);
        assert!(matches!(calibrate_eta(&cfg, 12.0, &[]), Err(Error::EmptyGrid)));
        let awgn = SimConfig { awgn: true, ..cfg };
        let cal = calibrate_eta(&awgn, f64::INFINITY, &[0.9, 0.3, 0.6]).unwrap();
        assert!(cal.points.iter().all(|p| p.1 == 0));
        assert_eq!(cal.eta, 0.3);
        assert_eq!(cal.frames, 200);
    }

    #[test]
    fn identity_trace_is_exact_after_one_iteration() {
        let cfg = SimConfig {
            awgn: true,
            t_max_iter: 4,
            ..small()
        };
        let traces = trace_convergence(&cfg, f64::INFINITY).unwrap();
        for (kind, t) in traces {
            if kind != DetectorKind::Mmse {
                assert_eq!(t.len(), 4);
            }
            assert!(t[0] <= 1e-10, "{kind}: {t:?}");
        }
        let missing = SimConfig {
            detectors: vec![DetectorKind::Sfd],
            ..small()
        };
        assert!(trace_convergence(&missing, 10.0).is_err());
    }
}
