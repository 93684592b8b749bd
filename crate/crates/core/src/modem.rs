//! AFDM modulation: the discrete affine Fourier transform pair and the
//! chirp-periodic prefix.
//!
//! Time-domain samples are indexed by `n`, chirp-domain symbols by `m`. The
//! transmit transform is
//!
//! ```text
//! s[n] = N^{-1/2} Σ_m x[m] exp(j2π(c1·n² + c2·m² + n·m/N))
//! ```
//!
//! and the receiver applies its exact inverse, so the DAFT matrix is
//! `A = Λ(c2)·F·Λ(c1)` with `Λ(c) = diag(exp(-j2π·c·n²))` and `F` the unitary
//! DFT. `c1` multiplies the time index and `c2` the chirp-domain index.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::numerics::{unitary_dft, unitary_idft, ComplexMat, ComplexVec};

/// Frame-level modulation parameters, with the chirp tables they imply.
#[derive(Debug, Clone)]
pub struct AfdmConfig {
    n: usize,
    alpha_max: f64,
    xi_nu: usize,
    c1: f64,
    c2: f64,
    l_cpp: usize,
    tables: Arc<ChirpTables>,
}

#[derive(Debug)]
struct ChirpTables {
    /// `exp(-j2π·c1·n²)`, `n = 0..N-1`
    c1: ComplexVec,
    /// `exp(-j2π·c2·m²)`, `m = 0..N-1`
    c2: ComplexVec,
    /// `exp(-j2π·c1·(N² + 2Nk))`, `k = -L_cpp..-1`
    prefix: ComplexVec,
}

impl PartialEq for AfdmConfig {
    fn eq(&self, other: &Self) -> bool {
        (self.n, self.alpha_max, self.xi_nu, self.c1, self.c2, self.l_cpp)
            == (other.n, other.alpha_max, other.xi_nu, other.c1, other.c2, other.l_cpp)
    }
}

impl AfdmConfig {
    /// Canonical configuration: `c1 = (2(α_max + ξ_ν) + 1) / 2N` and the
    /// default irrational `c2`.
    pub fn new(n: usize, alpha_max: f64, xi_nu: usize, l_cpp: usize) -> Result<Self> {
        let c1 = canonical_c1(n, alpha_max, xi_nu);
        Self::with_chirp_rates(n, alpha_max, xi_nu, c1, default_c2(n), l_cpp)
    }

    pub fn with_chirp_rates(
        n: usize,
        alpha_max: f64,
        xi_nu: usize,
        c1: f64,
        c2: f64,
        l_cpp: usize,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig(format!("N must be at least 2, got {n}")));
        }
        if !(alpha_max >= 0.0) || !alpha_max.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "alpha_max must be finite and non-negative, got {alpha_max}"
            )));
        }
        if !c1.is_finite() || !c2.is_finite() {
            return Err(Error::InvalidConfig("chirp rates must be finite".into()));
        }
        if l_cpp > n {
            return Err(Error::InvalidConfig(format!(
                "prefix length {l_cpp} exceeds N = {n}"
            )));
        }
        let ni = n as i64;
        let tables = ChirpTables {
            c1: (0..n).map(|t| chirp(c1, t)).collect(),
            c2: (0..n).map(|m| chirp(c2, m)).collect(),
            prefix: (-(l_cpp as i64)..0)
                .map(|k| phase(c1 * (ni * ni + 2 * ni * k) as f64))
                .collect(),
        };
        Ok(Self {
            n,
            alpha_max,
            xi_nu,
            c1,
            c2,
            l_cpp,
            tables: Arc::new(tables),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    pub fn xi_nu(&self) -> usize {
        self.xi_nu
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn l_cpp(&self) -> usize {
        self.l_cpp
    }

    /// Integer shift `2N·c1` contributed per sample of delay.
    pub fn delay_step(&self) -> f64 {
        2.0 * self.n as f64 * self.c1
    }
}

pub fn canonical_c1(n: usize, alpha_max: f64, xi_nu: usize) -> f64 {
    (2.0 * (alpha_max + xi_nu as f64) + 1.0) / (2.0 * n as f64)
}

/// Golden-ratio conjugate scaled like `c1`.
pub fn default_c2(n: usize) -> f64 {
    (5f64.sqrt() - 1.0) / 2.0 / (2.0 * n as f64)
}

/// `exp(-j2π·rate·k)` with the argument reduced modulo one first, which keeps
/// the phase accurate when `rate·k` is in the thousands of cycles.
fn phase(cycles: f64) -> Complex64 {
    Complex64::from_polar(1.0, -TAU * cycles.rem_euclid(1.0))
}

fn chirp(rate: f64, k: usize) -> Complex64 {
    let k = k as f64;
    phase(rate * k * k)
}

/// The N×N matrix `A` with `demodulate(r) = A·r`.
pub fn build_daft_matrix(cfg: &AfdmConfig) -> ComplexMat {
    let n = cfg.n;
    let scale = 1.0 / (n as f64).sqrt();
    let t = &cfg.tables;
    ComplexMat::from_fn(n, n, |m, k| {
        let dft = phase(((m * k) % n) as f64 / n as f64);
        t.c2[m] * dft * t.c1[k] * scale
    })
}

/// IDAFT: chirp-domain symbols to time-domain samples.
pub fn modulate(cfg: &AfdmConfig, x: &[Complex64]) -> Result<ComplexVec> {
    check_len(cfg.n, x.len())?;
    let pre: ComplexVec = x.iter().zip(&cfg.tables.c2).map(|(v, w)| v * w.conj()).collect();
    let mut s = unitary_idft(&pre)?;
    for (v, w) in s.iter_mut().zip(&cfg.tables.c1) {
        *v *= w.conj();
    }
    Ok(s)
}

/// DAFT: time-domain samples (prefix removed) to chirp-domain observations.
pub fn demodulate(cfg: &AfdmConfig, r: &[Complex64]) -> Result<ComplexVec> {
    check_len(cfg.n, r.len())?;
    let pre: ComplexVec = r.iter().zip(&cfg.tables.c1).map(|(v, w)| v * w).collect();
    let mut y = unitary_dft(&pre)?;
    for (v, w) in y.iter_mut().zip(&cfg.tables.c2) {
        *v *= w;
    }
    Ok(y)
}

/// Prepends the chirp-periodic prefix
/// `s[k] = s[N+k]·exp(-j2π·c1·(N² + 2Nk))` for `k = -L_cpp..-1`.
pub fn add_cpp(cfg: &AfdmConfig, s: &[Complex64]) -> Result<ComplexVec> {
    check_len(cfg.n, s.len())?;
    let tail = &s[cfg.n - cfg.l_cpp..];
    let mut out: ComplexVec = tail.iter().zip(&cfg.tables.prefix).map(|(v, w)| v * w).collect();
    out.extend_from_slice(s);
    Ok(out)
}

/// Drops the first `L_cpp` samples of a received frame.
pub fn remove_cpp(cfg: &AfdmConfig, r: &[Complex64]) -> Result<ComplexVec> {
    check_len(cfg.n + cfg.l_cpp, r.len())?;
    Ok(r[cfg.l_cpp..].to_vec())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::numerics::{dist, norm, sample_cscg, RngStream};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_qpsk(n: usize, seed: u64) -> ComplexVec {
        let g = sample_cscg(&mut RngStream::new(seed, 1), n, 1.0).unwrap();
        let a = std::f64::consts::FRAC_1_SQRT_2;
        g.iter()
            .map(|v| c(a * v.re.signum(), a * v.im.signum()))
            .collect()
    }

    #[test]
    fn canonical_c1_value() {
        let cfg = AfdmConfig::new(512, 2.0, 2, 3).unwrap();
        assert_eq!(cfg.c1(), 9.0 / 1024.0);
        assert_eq!(cfg.delay_step(), 9.0);
        assert!((cfg.c2() - 0.618_033_988_749_894_8 / 1024.0).abs() < 1e-18);
    }

    #[test]
    fn config_validation() {
        assert!(AfdmConfig::new(1, 0.0, 0, 0).is_err());
        assert!(AfdmConfig::new(8, -1.0, 0, 0).is_err());
        assert!(AfdmConfig::new(8, 0.0, 0, 9).is_err());
        assert!(AfdmConfig::with_chirp_rates(8, 0.0, 0, f64::NAN, 0.0, 0).is_err());
    }

    #[test]
    fn zero_rates_give_dft_matrix() {
        let cfg = AfdmConfig::with_chirp_rates(8, 0.0, 0, 0.0, 0.0, 0).unwrap();
        let a = build_daft_matrix(&cfg);
        for r in 0..8 {
            let mut e = vec![c(0.0, 0.0); 8];
            e[r] = c(1.0, 0.0);
            let col = unitary_dft(&e).unwrap();
            for m in 0..8 {
                assert!((a[(m, r)] - col[m]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hand_evaluated_entry() {
        let cfg = AfdmConfig::with_chirp_rates(4, 0.0, 0, 1.0 / 8.0, 0.0, 0).unwrap();
        let a = build_daft_matrix(&cfg);
        let expected = Complex64::from_polar(1.0, -PI / 4.0) * Complex64::from_polar(1.0, -PI / 2.0) / 2.0;
        assert!((a[(1, 1)] - expected).norm() < 1e-14);
    }

    #[test]
    fn daft_matrix_is_unitary_and_matches_transforms() {
        let cfg = AfdmConfig::new(64, 2.0, 2, 3).unwrap();
        let a = build_daft_matrix(&cfg);
        let prod = a.matmul(&a.adjoint()).unwrap();
        assert!(prod.max_abs_diff(&ComplexMat::identity(64)) < 1e-10);
        let r = sample_cscg(&mut RngStream::new(5, 0), 64, 1.0).unwrap();
        let y = demodulate(&cfg, &r).unwrap();
        assert!(dist(&y, &a.mul_vec(&r).unwrap()) < 1e-10 * norm(&r));
        let s = modulate(&cfg, &y).unwrap();
        assert!(dist(&s, &a.adjoint_mul_vec(&y).unwrap()) < 1e-10 * norm(&r));
    }

    #[test]
    fn zero_rates_reduce_to_idft() {
        let cfg = AfdmConfig::with_chirp_rates(4, 0.0, 0, 0.0, 0.0, 0).unwrap();
        let s = modulate(&cfg, &[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        for v in s {
            assert!((v - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_energy() {
        for (i, n) in [2usize, 16, 512].into_iter().enumerate() {
            let mut rng = RngStream::new(77, i as u64);
            let rates = sample_cscg(&mut rng, 1, 1.0).unwrap()[0];
            let cfg = AfdmConfig::with_chirp_rates(n, 0.0, 0, rates.re.abs(), rates.im.abs(), 0).unwrap();
            let x = random_qpsk(n, i as u64);
            let s = modulate(&cfg, &x).unwrap();
            assert!((norm(&s) - norm(&x)).abs() < 1e-10 * norm(&x));
            let y = demodulate(&cfg, &s).unwrap();
            assert!((norm(&y) - norm(&s)).abs() < 1e-10 * norm(&x));
            assert!(dist(&y, &x) < 1e-10 * norm(&x));
            // x = A·s ⇒ modulate returns s
            let back = modulate(&cfg, &demodulate(&cfg, &s).unwrap()).unwrap();
            assert!(dist(&back, &s) < 1e-10 * norm(&s));
        }
        let cfg = AfdmConfig::new(8, 1.0, 0, 0).unwrap();
        assert!(demodulate(&cfg, &[c(0.0, 0.0); 8]).unwrap().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn length_mismatch_rejected() {
        let cfg = AfdmConfig::new(8, 1.0, 0, 2).unwrap();
        assert!(matches!(
            modulate(&cfg, &[c(0.0, 0.0); 7]),
            Err(Error::LengthMismatch { expected: 8, actual: 7 })
        ));
        assert!(demodulate(&cfg, &[c(0.0, 0.0); 9]).is_err());
        assert!(add_cpp(&cfg, &[c(0.0, 0.0); 7]).is_err());
        assert!(remove_cpp(&cfg, &[c(0.0, 0.0); 8]).is_err());
    }

    #[test]
    fn prefix_examples() {
        let s: ComplexVec = (0..8).map(|i| c(i as f64, -(i as f64))).collect();

        let none = AfdmConfig::with_chirp_rates(8, 0.0, 0, 1.0 / 16.0, 0.0, 0).unwrap();
        assert_eq!(add_cpp(&none, &s).unwrap(), s);
        assert_eq!(remove_cpp(&none, &s).unwrap(), s);

        let cyclic = AfdmConfig::with_chirp_rates(8, 0.0, 0, 0.0, 0.0, 3).unwrap();
        let out = add_cpp(&cyclic, &s).unwrap();
        assert_eq!(out.len(), 11);
        assert_eq!(&out[..3], &s[5..]);

        let chirped = AfdmConfig::with_chirp_rates(8, 0.0, 0, 1.0 / 16.0, 0.0, 2).unwrap();
        let out = add_cpp(&chirped, &s).unwrap();
        let expected_last = s[7] * Complex64::from_polar(1.0, -TAU * (64.0 - 16.0) / 16.0);
        assert!((out[1] - expected_last).norm() < 1e-12);
        let expected_first = s[6] * Complex64::from_polar(1.0, -TAU * (64.0 - 32.0) / 16.0);
        assert!((out[0] - expected_first).norm() < 1e-12);
        assert_eq!(remove_cpp(&chirped, &out).unwrap(), s);
    }

    #[test]
    fn remove_cpp_slices_tail() {
        let cfg = AfdmConfig::with_chirp_rates(4, 0.0, 0, 0.0, 0.0, 2).unwrap();
        let r: ComplexVec = (0..6).map(|i| c(i as f64, 0.0)).collect();
        assert_eq!(remove_cpp(&cfg, &r).unwrap(), r[2..].to_vec());
    }

    #[test]
    fn prefix_continues_the_modulated_chirp() {
        // Evaluating the transmit sum at negative n must reproduce the prefix.
        let cfg = AfdmConfig::new(16, 1.0, 1, 4).unwrap();
        let x = random_qpsk(16, 3);
        let s = add_cpp(&cfg, &modulate(&cfg, &x).unwrap()).unwrap();
        let n = 16.0;
        for k in -4i64..0 {
            let direct: Complex64 = x
                .iter()
                .enumerate()
                .map(|(m, xm)| {
                    let kf = k as f64;
                    let mf = m as f64;
                    xm * Complex64::from_polar(1.0, TAU * (cfg.c1() * kf * kf + cfg.c2() * mf * mf + kf * mf / n))
                })
                .sum::<Complex64>()
                / n.sqrt();
            assert!((s[(k + 4) as usize] - direct).norm() < 1e-10);
        }
    }
}
