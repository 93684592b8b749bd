//! Monte Carlo link simulation: QPSK framing, the end-to-end frame pipeline,
//! BER/MSE aggregation, η calibration and CSV output.

mod config;
mod frame;
mod qpsk;
mod report;
mod sweep;

pub use config::{parse_detectors, parse_snr_list, ConfigFile, SimConfig};
pub use frame::{
    detector_config, frame_stream, modem_config, noise_variance, prepare_frame, run_detector, run_frame,
    DetectorFrameStats, Frame, FrameStats,
};
pub use qpsk::{demap_qpsk_hard, map_qpsk};
pub use report::{
    fmt_float, write_eta_csv, write_file, write_run_csv, write_trace_csv, ETA_HEADER, RUN_HEADER, TRACE_HEADER,
};
pub use sweep::{calibrate_eta, run_sweep, trace_convergence, CellResult, EtaCalibration, SimResult};
