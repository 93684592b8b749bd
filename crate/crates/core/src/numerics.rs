//! Complex-valued numerical primitives: dense matrices, the unitary DFT pair,
//! reproducible random streams and circularly symmetric Gaussian sampling.

use std::cell::RefCell;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use crate::error::{check_len, Error, Result};

/// A plain complex signal vector.
pub type ComplexVec = Vec<Complex64>;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        check_len(rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from its columns.
    pub fn from_columns(columns: &[ComplexVec]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows, cols);
        for (c, col) in columns.iter().enumerate() {
            check_len(rows, col.len())?;
            for (r, v) in col.iter().enumerate() {
                m[(r, c)] = *v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> ComplexVec {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        check_len(self.cols, rhs.rows)?;
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, a) in self.row(i).iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Result<ComplexVec> {
        check_len(self.cols, x.len())?;
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `self^H · x`
    pub fn adjoint_mul_vec(&self, x: &[Complex64]) -> Result<ComplexVec> {
        check_len(self.rows, x.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (r, xr) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * xr;
            }
        }
        Ok(out)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `self^H · self + shift·I`, exploiting Hermitian symmetry.
    pub fn gram_plus_diag(&self, shift: f64) -> Self {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        // Row blocks of the Gram matrix stay cache resident while all rows of
        // `self` stream through.
        const BLOCK: usize = 32;
        for i0 in (0..n).step_by(BLOCK) {
            let i1 = (i0 + BLOCK).min(n);
            for r in 0..self.rows {
                let h_row = self.row(r);
                for i in i0..i1 {
                    let a = h_row[i].conj();
                    let g_row = &mut g.data[i * n..(i + 1) * n];
                    for (o, b) in g_row[i..].iter_mut().zip(&h_row[i..]) {
                        *o += a * b;
                    }
                }
            }
        }
        for i in 0..n {
            g[(i, i)] += shift;
            for j in 0..i {
                g[(i, j)] = g[(j, i)].conj();
            }
        }
        g
    }

    /// Solves `self · x = b` for Hermitian positive definite `self`.
    pub fn cholesky_solve(&self, b: &[Complex64]) -> Result<ComplexVec> {
        let n = self.rows;
        check_len(n, self.cols)?;
        check_len(n, b.len())?;
        // Lower factor stored row-major: self = L L^H.
        let mut l = self.data.clone();
        for j in 0..n {
            let (row_j, rest) = l[j * n..].split_at_mut(n);
            let mut diag = row_j[j].re;
            for v in &row_j[..j] {
                diag -= v.norm_sqr();
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::Singular);
            }
            let diag = diag.sqrt();
            row_j[j] = Complex64::new(diag, 0.0);
            for row_i in rest.chunks_exact_mut(n) {
                let mut s = row_i[j];
                for (a, b) in row_i[..j].iter().zip(&row_j[..j]) {
                    s -= a * b.conj();
                }
                row_i[j] = s / diag;
            }
        }
        // Forward solve L z = b.
        let mut z = b.to_vec();
        for i in 0..n {
            let row = &l[i * n..i * n + i];
            let s: Complex64 = row.iter().zip(&z[..i]).map(|(a, b)| a * b).sum();
            z[i] = (z[i] - s) / l[i * n + i].re;
        }
        // Back solve L^H x = z.
        for i in (0..n).rev() {
            z[i] /= l[i * n + i].re;
            let zi = z[i];
            for k in 0..i {
                z[k] -= l[i * n + k].conj() * zi;
            }
        }
        Ok(z)
    }

    /// Solves `self · x = b` with partially pivoted Gaussian elimination.
    pub fn lu_solve(&self, b: &[Complex64]) -> Result<ComplexVec> {
        let n = self.rows;
        check_len(n, self.cols)?;
        check_len(n, b.len())?;
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm()))
                .unwrap();
            if a[pivot * n + k].norm() <= scale * 1e-14 {
                return Err(Error::Singular);
            }
            if pivot != k {
                for c in 0..n {
                    a.swap(k * n + c, pivot * n + c);
                }
                x.swap(k, pivot);
            }
            let p = a[k * n + k];
            for i in (k + 1)..n {
                let f = a[i * n + k] / p;
                if f.re == 0.0 && f.im == 0.0 {
                    continue;
                }
                for c in k..n {
                    let v = a[k * n + c];
                    a[i * n + c] -= f * v;
                }
                let xk = x[k];
                x[i] -= f * xk;
            }
        }
        for i in (0..n).rev() {
            let s: Complex64 = ((i + 1)..n).map(|c| a[i * n + c] * x[c]).sum();
            x[i] = (x[i] - s) / a[i * n + i];
        }
        Ok(x)
    }
}

impl Index<(usize, usize)> for ComplexMat {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn transform(x: &[Complex64], inverse: bool) -> Result<ComplexVec> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = x.len();
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    let mut buf = x.to_vec();
    fft.process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
    Ok(buf)
}

/// Unitary DFT: `X[k] = N^{-1/2} Σ x[n] e^{-j2πkn/N}`.
pub fn unitary_dft(x: &[Complex64]) -> Result<ComplexVec> {
    transform(x, false)
}

/// Inverse of [`unitary_dft`].
pub fn unitary_idft(x: &[Complex64]) -> Result<ComplexVec> {
    transform(x, true)
}

pub fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// A reproducible random stream identified by `(master_seed, stream_index)`.
///
/// Every stream index selects a distinct ChaCha stream under the key derived
/// from the master seed, so streams never overlap and can be handed to
/// independent workers.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(master_seed));
        rng.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Draws `n` samples of 𝒞𝒩(0, variance).
pub fn sample_cscg(rng: &mut RngStream, n: usize, variance: f64) -> Result<ComplexVec> {
    if variance < 0.0 || variance.is_nan() {
        return Err(Error::NegativeVariance(variance));
    }
    if variance == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    let sigma = (variance / 2.0).sqrt();
    Ok((0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(sigma * re, sigma * im)
        })
        .collect())
}
