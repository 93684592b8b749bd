//! Detectors for the DAFT-domain model `y = H·x + w`.
//!
//! * [`detect_mmse`]: dense linear MMSE reference.
//! * [`detect_mrc_dfe`]: MRC combining over the band with Gauss–Seidel
//!   residual updates, feeding back the previous estimates.
//! * [`detect_sfd`]: the same sweep, feeding back soft symbol expectations
//!   built from accumulated bit LLRs.

mod flops;
mod iterative;
mod mmse;
mod oracle;
mod soft;

use std::fmt;
use std::str::FromStr;

pub use flops::flops_model;
pub use iterative::{detect_mrc_dfe, detect_mrc_dfe_with, detect_sfd, detect_sfd_with};
pub use mmse::{detect_mmse, detect_mmse_with};
pub use oracle::{exact_bit_variance_oracle, exact_bit_variance_oracle_with_sign, NoiseSign};
pub use soft::{
    bit_projection, soft_expectation, soft_expectation_with, variance_update, SoftState, LLR_CLAMP,
    VARIANCE_FLOOR,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::ComplexVec;

/// Detector selector. `MfMp` only exists for complexity accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DetectorKind {
    Mmse,
    MfMp,
    MrcDfe,
    Sfd,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 4] = [Self::Mmse, Self::MfMp, Self::MrcDfe, Self::Sfd];

    pub fn tag(self) -> &'static str {
        match self {
            Self::Mmse => "mmse",
            Self::MfMp => "mf-mp",
            Self::MrcDfe => "mrc-dfe",
            Self::Sfd => "sfd",
        }
    }

    /// Whether the detector has a runnable implementation.
    pub fn is_simulable(self) -> bool {
        !matches!(self, Self::MfMp)
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.tag() == s.trim())
            .ok_or_else(|| Error::UnknownDetector(s.to_string()))
    }
}

/// Which bit-LLR scaling the soft symbol expectation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SoftSymbolRule {
    /// `tanh(L)`, as in the SFD update.
    #[default]
    FullLlr,
    /// `tanh(L/2)`, the textbook BPSK conditional mean.
    HalfLlr,
}

/// How the MRC energy normalization is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyNormalization {
    /// One constant `d`, the mean banded column energy.
    #[default]
    Mean,
    /// Each column's own banded energy `d_c`.
    PerColumn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    pub t_max_iter: usize,
    /// Relative convergence tolerance on successive estimates.
    pub t_error: f64,
    /// Scale of the simplified bit variance.
    pub eta: f64,
    /// Linear SNR γ = Es/N0. May be infinite.
    pub snr_linear: f64,
    pub soft_symbol: SoftSymbolRule,
    pub energy: EnergyNormalization,
    /// When false, iterate to `t_max_iter` regardless of convergence.
    pub stop_on_convergence: bool,
}

impl DetectorConfig {
    pub fn new(snr_linear: f64) -> Self {
        Self {
            t_max_iter: 20,
            t_error: 0.01,
            eta: 0.5,
            snr_linear,
            soft_symbol: SoftSymbolRule::default(),
            energy: EnergyNormalization::default(),
            stop_on_convergence: true,
        }
    }

    pub fn from_snr_db(snr_db: f64) -> Self {
        Self::new(10f64.powf(snr_db / 10.0))
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_max_iter == 0 {
            return Err(Error::InvalidConfig("t_max_iter must be positive".into()));
        }
        if !(self.t_error > 0.0 && self.t_error < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "t_error must lie in (0, 1), got {}",
                self.t_error
            )));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::InvalidConfig(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.snr_linear > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "snr must be positive, got {}",
                self.snr_linear
            )));
        }
        Ok(())
    }

    /// γ^{-1}, zero for an infinite SNR.
    pub fn inverse_snr(&self) -> f64 {
        1.0 / self.snr_linear
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub x_hat: ComplexVec,
    pub iterations_used: usize,
    pub converged: bool,
    /// Per-iteration `‖x̂ - x‖²/N`, present when ground truth was supplied.
    pub mse_trace: Option<Vec<f64>>,
    pub flops_estimate: u64,
}

/// State exposed to an [`IterationObserver`] after every outer iteration.
#[derive(Debug)]
pub struct IterationSnapshot<'a> {
    /// 1-based iteration index.
    pub iteration: usize,
    pub x_hat: &'a [Complex64],
    /// Residual maintained by the in-sweep updates.
    pub residual: &'a [Complex64],
    /// Soft feedback state after this iteration's update; `None` for
    /// MRC-DFE or when the iteration ended on convergence.
    pub soft: Option<&'a SoftState>,
    pub converged: bool,
}

/// Hook for instrumented runs.
pub trait IterationObserver {
    fn observe(&mut self, snapshot: &IterationSnapshot<'_>);
}

impl IterationObserver for () {
    fn observe(&mut self, _: &IterationSnapshot<'_>) {}
}

impl<F: FnMut(&IterationSnapshot<'_>)> IterationObserver for F {
    fn observe(&mut self, snapshot: &IterationSnapshot<'_>) {
        self(snapshot)
    }
}

pub(crate) fn mse(x_hat: &[Complex64], truth: &[Complex64]) -> f64 {
    x_hat
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        / x_hat.len() as f64
}
