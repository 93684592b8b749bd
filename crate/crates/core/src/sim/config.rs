use std::path::Path;

use serde::Deserialize;

use crate::detect::DetectorKind;
use crate::error::{Error, Result};

/// Scenario and run parameters for a Monte Carlo sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub paths: usize,
    pub l_max: usize,
    pub alpha_max: f64,
    pub xi_nu: usize,
    pub snr_db_list: Vec<f64>,
    pub frames: usize,
    pub detectors: Vec<DetectorKind>,
    pub eta: f64,
    pub t_error: f64,
    pub t_max_iter: usize,
    pub seed: u64,
    pub integer_doppler: bool,
    /// Record per-iteration MSE and disable early stopping.
    pub trace_mse: bool,
    /// Replace the random channel with a single unit-gain path.
    pub awgn: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 512,
            paths: 4,
            l_max: 3,
            alpha_max: 2.0,
            xi_nu: 2,
            snr_db_list: vec![10.0],
            frames: 1000,
            detectors: vec![DetectorKind::Mmse, DetectorKind::MrcDfe, DetectorKind::Sfd],
            eta: 0.5,
            t_error: 0.01,
            t_max_iter: 20,
            seed: 0,
            integer_doppler: false,
            trace_mse: false,
            awgn: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.frames == 0 {
            return bad("frames must be at least 1".into());
        }
        if self.snr_db_list.is_empty() {
            return bad("at least one SNR point is required".into());
        }
        if self.snr_db_list.iter().any(|s| s.is_nan()) {
            return bad("SNR values must not be NaN".into());
        }
        if self.detectors.is_empty() {
            return bad("at least one detector is required".into());
        }
        if let Some(d) = self.detectors.iter().find(|d| !d.is_simulable()) {
            return Err(Error::UnknownDetector(format!("{d} (complexity model only)")));
        }
        if self.paths == 0 {
            return bad("paths must be at least 1".into());
        }
        if !(self.eta > 0.0) {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.t_error > 0.0 && self.t_error < 1.0) {
            return bad(format!("t_error must lie in (0, 1), got {}", self.t_error));
        }
        if self.t_max_iter == 0 {
            return bad("max-iter must be positive".into());
        }
        Ok(())
    }

    /// Applies the values present in a JSON config file.
    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let file: ConfigFile = serde_json::from_str(&text).map_err(|source| Error::ConfigFile {
            path: path.to_path_buf(),
            source,
        })?;
        file.apply(self)
    }
}

/// JSON mirror of the command-line flags. Keys use the flag spelling.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub n: Option<usize>,
    pub paths: Option<usize>,
    pub lmax: Option<usize>,
    pub alpha_max: Option<f64>,
    pub xi: Option<usize>,
    pub snr_db: Option<SnrSpec>,
    pub frames: Option<usize>,
    pub detectors: Option<DetectorSpec>,
    pub eta: Option<f64>,
    pub t_error: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub integer_doppler: Option<bool>,
    pub awgn: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum SnrSpec {
    List(Vec<f64>),
    Single(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum DetectorSpec {
    List(Vec<String>),
    Text(String),
}

impl ConfigFile {
    pub fn apply(self, cfg: &mut SimConfig) -> Result<()> {
        macro_rules! set {
            ($src:ident => $dst:ident) => {
                if let Some(v) = self.$src {
                    cfg.$dst = v;
                }
            };
        }
        set!(n => n);
        set!(paths => paths);
        set!(lmax => l_max);
        set!(alpha_max => alpha_max);
        set!(xi => xi_nu);
        set!(frames => frames);
        set!(eta => eta);
        set!(t_error => t_error);
        set!(max_iter => t_max_iter);
        set!(seed => seed);
        set!(integer_doppler => integer_doppler);
        set!(awgn => awgn);
        if let Some(s) = self.snr_db {
            cfg.snr_db_list = match s {
                SnrSpec::List(v) => v,
                SnrSpec::Single(v) => vec![v],
                SnrSpec::Text(t) => parse_snr_list(&t)?,
            };
        }
        if let Some(d) = self.detectors {
            cfg.detectors = match d {
                DetectorSpec::List(v) => v.iter().map(|s| s.parse()).collect::<Result<_>>()?,
                DetectorSpec::Text(t) => parse_detectors(&t)?,
            };
        }
        Ok(())
    }
}

/// Parses `start:step:stop` (inclusive) or a comma-separated list.
pub fn parse_snr_list(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidConfig(format!("invalid number `{t}` in `{s}`")))
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, step, stop] = parts[..] else {
            return Err(Error::InvalidConfig(format!("expected start:step:stop, got `{s}`")));
        };
        let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
            return Err(Error::InvalidConfig(format!("invalid range `{s}`")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|k| start + k as f64 * step).collect())
    } else {
        s.split(',').filter(|t| !t.trim().is_empty()).map(num).collect()
    }
}

pub fn parse_detectors(s: &str) -> Result<Vec<DetectorKind>> {
    let mut out: Vec<DetectorKind> = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}
