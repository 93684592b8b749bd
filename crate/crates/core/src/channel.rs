//! Doubly dispersive channel: path generation, time-varying convolution and
//! the DAFT-domain effective channel with its band structure.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::modem::{add_cpp, demodulate, modulate, remove_cpp, AfdmConfig};
use crate::numerics::{sample_cscg, ComplexMat, ComplexVec, RngStream};

/// One propagation path: complex gain, integer delay in samples and
/// normalized Doppler in cycles per frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPath {
    pub gain: Complex64,
    pub delay: usize,
    pub doppler: f64,
}

impl ChannelPath {
    pub fn new(gain: Complex64, delay: usize, doppler: f64) -> Self {
        Self {
            gain,
            delay,
            doppler,
        }
    }
}

/// One draw of the doubly dispersive channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    paths: Vec<ChannelPath>,
    l_max: usize,
    alpha_max: f64,
}

impl ChannelRealization {
    pub fn new(paths: Vec<ChannelPath>, l_max: usize, alpha_max: f64) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::InvalidConfig("a channel needs at least one path".into()));
        }
        for p in &paths {
            if p.delay > l_max {
                return Err(Error::InvalidConfig(format!(
                    "path delay {} exceeds l_max = {l_max}",
                    p.delay
                )));
            }
            if !(p.doppler.abs() <= alpha_max) {
                return Err(Error::InvalidConfig(format!(
                    "path Doppler {} exceeds alpha_max = {alpha_max}",
                    p.doppler
                )));
            }
        }
        Ok(Self {
            paths,
            l_max,
            alpha_max,
        })
    }

    /// Single unit-gain path without delay or Doppler.
    pub fn identity() -> Self {
        Self {
            paths: vec![ChannelPath::new(Complex64::new(1.0, 0.0), 0, 0.0)],
            l_max: 0,
            alpha_max: 0.0,
        }
    }

    pub fn paths(&self) -> &[ChannelPath] {
        &self.paths
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    pub fn max_delay(&self) -> usize {
        self.paths.iter().map(|p| p.delay).max().unwrap_or(0)
    }
}

/// Draws `paths` paths with distinct delays (path 0 at delay 0), gains
/// 𝒞𝒩(0, 1/P) and Dopplers uniform on `[-alpha_max, alpha_max]`.
pub fn generate_channel(
    rng: &mut RngStream,
    paths: usize,
    l_max: usize,
    alpha_max: f64,
    integer_doppler: bool,
) -> Result<ChannelRealization> {
    if paths == 0 {
        return Err(Error::InvalidConfig("a channel needs at least one path".into()));
    }
    if paths > l_max + 1 {
        return Err(Error::TooManyPaths { paths, l_max });
    }
    if !(alpha_max >= 0.0) || !alpha_max.is_finite() {
        return Err(Error::InvalidConfig(format!("invalid alpha_max {alpha_max}")));
    }
    let mut delays = vec![0usize];
    if paths > 1 {
        delays.extend(index::sample(rng, l_max, paths - 1).into_iter().map(|d| d + 1));
    }
    let gains = sample_cscg(rng, paths, 1.0 / paths as f64)?;
    let max_int = alpha_max.floor() as i64;
    let list = delays
        .into_iter()
        .zip(gains)
        .map(|(delay, gain)| {
            let doppler = if integer_doppler {
                rng.random_range(-max_int..=max_int) as f64
            } else if alpha_max > 0.0 {
                rng.random_range(-alpha_max..=alpha_max)
            } else {
                0.0
            };
            ChannelPath::new(gain, delay, doppler)
        })
        .collect();
    ChannelRealization::new(list, l_max, alpha_max)
}

fn check_prefix(cfg: &AfdmConfig, ch: &ChannelRealization) -> Result<()> {
    let delay = ch.max_delay();
    if delay > cfg.l_cpp() {
        return Err(Error::DelayExceedsPrefix {
            delay,
            prefix: cfg.l_cpp(),
        });
    }
    Ok(())
}

/// Doppler rotations `exp(-j2π·α_i·n/N)` per path over the prefixed frame.
fn path_rotations(cfg: &AfdmConfig, ch: &ChannelRealization) -> Vec<ComplexVec> {
    let n = cfg.n();
    let l_cpp = cfg.l_cpp();
    ch.paths()
        .iter()
        .map(|path| {
            let f = path.doppler / n as f64;
            (0..n + l_cpp)
                .map(|i| {
                    let t = i as f64 - l_cpp as f64;
                    Complex64::from_polar(1.0, -TAU * (f * t).rem_euclid(1.0))
                })
                .collect()
        })
        .collect()
}

fn propagate_with(ch: &ChannelRealization, rotations: &[ComplexVec], s_cpp: &[Complex64]) -> ComplexVec {
    let mut r = vec![Complex64::new(0.0, 0.0); s_cpp.len()];
    for (path, rot) in ch.paths().iter().zip(rotations) {
        for (i, out) in r.iter_mut().enumerate().skip(path.delay) {
            *out += path.gain * rot[i] * s_cpp[i - path.delay];
        }
    }
    r
}

/// Noiseless linear time-varying convolution of a prefixed frame. Output
/// index `i` corresponds to absolute time `n = i - L_cpp`; samples before the
/// start of the prefix are zero.
fn propagate(cfg: &AfdmConfig, ch: &ChannelRealization, s_cpp: &[Complex64]) -> Result<ComplexVec> {
    check_prefix(cfg, ch)?;
    check_len(cfg.n() + cfg.l_cpp(), s_cpp.len())?;
    Ok(propagate_with(ch, &path_rotations(cfg, ch), s_cpp))
}

/// Passes a prefixed frame through the channel and adds 𝒞𝒩(0, n0) noise.
///
/// Input and output both span `n = -L_cpp..N-1`. Output sample `n` is
/// `Σ_i h_i·exp(-j2π·α_i·n/N)·s[n - l_i]`, so for `0 ≤ n < l_i` a path reads
/// from the prefix.
pub fn apply_channel(
    cfg: &AfdmConfig,
    ch: &ChannelRealization,
    s_cpp: &[Complex64],
    n0: f64,
    rng: &mut RngStream,
) -> Result<ComplexVec> {
    if n0 < 0.0 || n0.is_nan() {
        return Err(Error::NegativeVariance(n0));
    }
    let mut r = propagate(cfg, ch, s_cpp)?;
    if n0 > 0.0 {
        let w = sample_cscg(rng, r.len(), n0)?;
        r.iter_mut().zip(w).for_each(|(a, b)| *a += b);
    }
    Ok(r)
}

/// Row and column index sets of the retained band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSupport {
    /// `cols[c]`: sorted row indices kept in column `c`.
    pub cols: Vec<Vec<usize>>,
    /// `rows[r]`: sorted column indices kept in row `r`.
    pub rows: Vec<Vec<usize>>,
    /// Largest column support size.
    pub bandwidth: usize,
}

/// Real position of a path in the DAFT domain, `2N·c1·l + α`.
pub fn path_position(cfg: &AfdmConfig, path: &ChannelPath) -> f64 {
    cfg.delay_step() * path.delay as f64 + path.doppler
}

/// Band support: for every path a window of half-width ξ_ν centred on the
/// rounded path position, united over paths.
///
/// A path at position `p` moves energy from column `c` to row `c - p`
/// (mod N) under the DAFT convention used in [`crate::modem`].
pub fn band_support(cfg: &AfdmConfig, ch: &ChannelRealization) -> BandSupport {
    let n = cfg.n() as i64;
    let xi = cfg.xi_nu() as i64;
    let offsets: Vec<i64> = ch
        .paths()
        .iter()
        .map(|p| path_position(cfg, p).round() as i64)
        .collect();
    let cols: Vec<Vec<usize>> = (0..n)
        .map(|c| {
            let mut set: Vec<usize> = offsets
                .iter()
                .flat_map(|o| (-xi..=xi).map(move |k| (c - o + k).rem_euclid(n) as usize))
                .collect();
            set.sort_unstable();
            set.dedup();
            set
        })
        .collect();
    let mut rows = vec![Vec::new(); n as usize];
    for (c, set) in cols.iter().enumerate() {
        for &r in set {
            rows[r].push(c);
        }
    }
    let bandwidth = cols.iter().map(Vec::len).max().unwrap_or(0);
    BandSupport {
        cols,
        rows,
        bandwidth,
    }
}

/// DAFT-domain channel: the exact dense matrix plus the banded view used by
/// the iterative detectors.
#[derive(Debug, Clone)]
pub struct EffectiveChannel {
    dense: ComplexMat,
    support: BandSupport,
    band_values: Vec<Vec<Complex64>>,
    column_energy: Vec<f64>,
    d: f64,
    noise_variance: f64,
}

impl EffectiveChannel {
    /// Assembles an effective channel from a dense matrix and its column
    /// supports.
    pub fn from_parts(dense: ComplexMat, band_cols: Vec<Vec<usize>>, noise_variance: f64) -> Result<Self> {
        let n = dense.cols();
        check_len(n, dense.rows())?;
        check_len(n, band_cols.len())?;
        let mut rows = vec![Vec::new(); n];
        let mut cols = Vec::with_capacity(n);
        for (c, mut set) in band_cols.into_iter().enumerate() {
            set.sort_unstable();
            set.dedup();
            if set.iter().any(|&r| r >= n) {
                return Err(Error::InvalidConfig(format!("row index out of range in column {c}")));
            }
            for &r in &set {
                rows[r].push(c);
            }
            cols.push(set);
        }
        let bandwidth = cols.iter().map(Vec::len).max().unwrap_or(0);
        let support = BandSupport {
            cols,
            rows,
            bandwidth,
        };
        let band_values: Vec<Vec<Complex64>> = support
            .cols
            .iter()
            .enumerate()
            .map(|(c, set)| set.iter().map(|&r| dense[(r, c)]).collect())
            .collect();
        let column_energy: Vec<f64> = band_values
            .iter()
            .map(|v| v.iter().map(Complex64::norm_sqr).sum())
            .collect();
        let d = column_energy.iter().sum::<f64>() / n as f64;
        if !(d > 0.0) {
            return Err(Error::InvalidConfig("effective channel has no band energy".into()));
        }
        Ok(Self {
            dense,
            support,
            band_values,
            column_energy,
            d,
            noise_variance,
        })
    }

    pub fn n(&self) -> usize {
        self.dense.cols()
    }

    pub fn dense(&self) -> &ComplexMat {
        &self.dense
    }

    pub fn band_cols(&self) -> &[Vec<usize>] {
        &self.support.cols
    }

    pub fn band_rows(&self) -> &[Vec<usize>] {
        &self.support.rows
    }

    /// `H[r, c]` for `r` in the support of column `c`, ordered like
    /// [`Self::band_cols`].
    pub fn band_values(&self, c: usize) -> &[Complex64] {
        &self.band_values[c]
    }

    pub fn bandwidth(&self) -> usize {
        self.support.bandwidth
    }

    /// Mean banded column energy.
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Banded energy of each column.
    pub fn column_energy(&self) -> &[f64] {
        &self.column_energy
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Fraction of each column's total energy captured by its band.
    pub fn band_energy_ratio(&self) -> Vec<f64> {
        (0..self.n())
            .map(|c| {
                let total: f64 = (0..self.n()).map(|r| self.dense[(r, c)].norm_sqr()).sum();
                if total == 0.0 {
                    1.0
                } else {
                    self.column_energy[c] / total
                }
            })
            .collect()
    }

    /// `y - H_band·x`: the residual recomputed from scratch over the band.
    pub fn band_residual(&self, y: &[Complex64], x: &[Complex64]) -> ComplexVec {
        let mut out = y.to_vec();
        for (c, (rows, vals)) in self.support.cols.iter().zip(&self.band_values).enumerate() {
            for (&r, h) in rows.iter().zip(vals) {
                out[r] -= h * x[c];
            }
        }
        out
    }
}

/// Builds the DAFT-domain channel by pushing every chirp-domain unit vector
/// through modulate, prefix insertion, the noiseless channel, prefix removal
/// and demodulation.
pub fn build_effective_channel(cfg: &AfdmConfig, ch: &ChannelRealization, n0: f64) -> Result<EffectiveChannel> {
    check_prefix(cfg, ch)?;
    let n = cfg.n();
    let rotations = path_rotations(cfg, ch);
    let columns = (0..n)
        .map(|c| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[c] = Complex64::new(1.0, 0.0);
            let s = add_cpp(cfg, &modulate(cfg, &e)?)?;
            let r = propagate_with(ch, &rotations, &s);
            demodulate(cfg, &remove_cpp(cfg, &r)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let dense = ComplexMat::from_columns(&columns)?;
    let support = band_support(cfg, ch);
    EffectiveChannel::from_parts(dense, support.cols, n0)
}
