use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use num_complex::Complex64;

use super::SoftSymbolRule;

/// Lower bound on the bit variance; keeps `√2/σ²` finite.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// Posterior LLRs are clamped to `±LLR_CLAMP`. `tanh(38)` is already 1 in
/// double precision.
pub const LLR_CLAMP: f64 = 38.0;

/// Per-bit soft observations of a QPSK estimate: real and imaginary parts.
pub fn bit_projection(x_hat: Complex64) -> (f64, f64) {
    (x_hat.re, x_hat.im)
}

/// `(tanh(L1) + j·tanh(L2)) / √2`
pub fn soft_expectation(l_post: (f64, f64)) -> Complex64 {
    soft_expectation_with(l_post, SoftSymbolRule::FullLlr)
}

pub fn soft_expectation_with(l_post: (f64, f64), rule: SoftSymbolRule) -> Complex64 {
    let scale = match rule {
        SoftSymbolRule::FullLlr => 1.0,
        SoftSymbolRule::HalfLlr => 0.5,
    };
    let t = |l: f64| (scale * l.clamp(-LLR_CLAMP, LLR_CLAMP)).tanh();
    Complex64::new(t(l_post.0), t(l_post.1)) * FRAC_1_SQRT_2
}

/// `max(η·(1 - |E|²), VARIANCE_FLOOR)`
pub fn variance_update(e_sym: Complex64, eta: f64) -> f64 {
    (eta * (1.0 - e_sym.norm_sqr())).max(VARIANCE_FLOOR)
}

/// Per-symbol soft information carried between SFD iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftState {
    /// Posterior LLRs, one pair per symbol.
    pub l_post: Vec<[f64; 2]>,
    /// Prior LLRs used in the latest update (the previous posterior).
    pub l_pri: Vec<[f64; 2]>,
    /// Soft symbol expectations.
    pub e_sym: Vec<Complex64>,
    /// Bit variances used to scale the next extrinsic LLRs.
    pub var_bit: Vec<[f64; 2]>,
}

impl SoftState {
    /// Zero LLRs, zero expectations, unit variances.
    pub fn new(n: usize) -> Self {
        Self {
            l_post: vec![[0.0; 2]; n],
            l_pri: vec![[0.0; 2]; n],
            e_sym: vec![Complex64::new(0.0, 0.0); n],
            var_bit: vec![[1.0; 2]; n],
        }
    }

    /// Folds one round of estimates into the soft state:
    /// extrinsic LLRs `√2/σ²·x̂_bit`, posterior = extrinsic + prior, then the
    /// new expectations and variances.
    pub fn update(&mut self, x_hat: &[Complex64], eta: f64, rule: SoftSymbolRule) {
        for (c, &x) in x_hat.iter().enumerate() {
            let (b1, b2) = bit_projection(x);
            let var = self.var_bit[c];
            let ext = [SQRT_2 / var[0] * b1, SQRT_2 / var[1] * b2];
            let prior = self.l_post[c];
            self.l_pri[c] = prior;
            let post = [
                (ext[0] + prior[0]).clamp(-LLR_CLAMP, LLR_CLAMP),
                (ext[1] + prior[1]).clamp(-LLR_CLAMP, LLR_CLAMP),
            ];
            self.l_post[c] = post;
            let e = soft_expectation_with((post[0], post[1]), rule);
            self.e_sym[c] = e;
            let v = variance_update(e, eta);
            self.var_bit[c] = [v, v];
        }
    }
}
