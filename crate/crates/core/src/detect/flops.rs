use super::DetectorKind;
use crate::error::{Error, Result};

/// Approximate real-FLOP counts (one real add or multiply = 1 FLOP):
///
/// | detector | FLOPs                              |
/// |----------|------------------------------------|
/// | MMSE     | `24N³`                             |
/// | MF-MP    | `32NL² + N_iter(32NL + 120N)`      |
/// | MRC-DFE  | `N_iter·N(16L + 17)`               |
/// | SFD      | `N_iter·N(16L + 51)`               |
pub fn flops_model(detector: DetectorKind, n: usize, l: usize, n_iter: usize) -> Result<u64> {
    if n == 0 || l == 0 || n_iter == 0 {
        return Err(Error::InvalidConfig(format!(
            "complexity model needs positive N, L and iterations (got {n}, {l}, {n_iter})"
        )));
    }
    let (n, l, it) = (n as u64, l as u64, n_iter as u64);
    Ok(match detector {
        DetectorKind::Mmse => 24 * n * n * n,
        DetectorKind::MfMp => 32 * n * l * l + it * (32 * n * l + 120 * n),
        DetectorKind::MrcDfe => it * n * (16 * l + 17),
        DetectorKind::Sfd => it * n * (16 * l + 51),
    })
}
