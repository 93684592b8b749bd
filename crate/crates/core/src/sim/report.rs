use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::sweep::{EtaCalibration, SimResult};
use crate::detect::DetectorKind;
use crate::error::{Error, Result};

pub const RUN_HEADER: &str = "snr_db,detector,frames,bits_sent,bit_errors,ber,mean_iterations,mean_flops,eta";
pub const TRACE_HEADER: &str = "snr_db,detector,iteration,mse";
pub const ETA_HEADER: &str = "snr_db,eta,frames,bits_sent,bit_errors,ber";

/// Formats a float with 10 significant digits, dropping trailing zeros.
/// Exponential notation is used below 1e-5 and from 1e10 upwards.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if (-5..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn write_run_csv(result: &SimResult, out: &mut (impl Write + ?Sized)) -> std::io::Result<()> {
    writeln!(out, "{RUN_HEADER}")?;
    for c in &result.cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt_float(c.snr_db),
            c.detector,
            c.frames,
            c.bits_sent,
            c.bit_errors,
            fmt_float(c.ber),
            fmt_float(c.mean_iterations),
            fmt_float(c.mean_flops),
            fmt_float(c.eta),
        )?;
    }
    Ok(())
}

pub fn write_trace_csv(snr_db: f64, traces: &[(DetectorKind, Vec<f64>)], out: &mut (impl Write + ?Sized)) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for (kind, trace) in traces {
        for (t, mse) in trace.iter().enumerate() {
            writeln!(out, "{},{kind},{},{}", fmt_float(snr_db), t + 1, fmt_float(*mse))?;
        }
    }
    Ok(())
}

pub fn write_eta_csv(cal: &EtaCalibration, out: &mut (impl Write + ?Sized)) -> std::io::Result<()> {
    writeln!(out, "{ETA_HEADER}")?;
    for &(eta, errors, bits) in &cal.points {
        writeln!(
            out,
            "{},{},{},{bits},{errors},{}",
            fmt_float(cal.snr_db),
            fmt_float(eta),
            cal.frames,
            fmt_float(errors as f64 / bits as f64)
        )?;
    }
    Ok(())
}

/// Creates `path` and hands a buffered writer to `write`, attaching the path
/// to any I/O error.
pub fn write_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let ctx = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(ctx)?);
    write(&mut w).map_err(ctx)?;
    w.flush().map_err(ctx)
}
