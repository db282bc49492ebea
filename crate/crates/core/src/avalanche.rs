//! Avalanche principle for chains of 2×2 matrices.
//!
//! For `A_1, ..., A_n` with `|det A_j| ≤ 1`, `min ‖A_j‖ ≥ μ > n` and every
//! pair defect `log‖A_{j+1}‖ + log‖A_j‖ − log‖A_{j+1}A_j‖ < ½ log μ`,
//!
//! ```text
//! | log‖A_n···A_1‖ + Σ_{j=2}^{n−1} log‖A_j‖ − Σ_{j=1}^{n−1} log‖A_{j+1}A_j‖ | < C n / μ
//! ```
//!
//! for an absolute constant `C`. The verifier reports `lhs · μ / n` so the
//! constant can be observed; it never assumes a value for it.

use crate::cocycle::{orbit_products, CocycleSpec};
use crate::error::{Error, Result};
use crate::lyapunov::finite_scale_ladder;
use crate::mat2::{LogScaledMat2, Mat2};
use crate::sampler::PhaseSampler;
use serde::Serialize;

/// `|det A_j|` may exceed 1 by at most this much.
pub const DET_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApBlockChain {
    /// `log‖A_j‖`, `j = 1..n`.
    pub block_log_norms: Vec<f64>,
    /// `log‖A_{j+1}A_j‖`, `j = 1..n−1`.
    pub pair_log_norms: Vec<f64>,
    /// `log μ` with `μ = min_j ‖A_j‖`.
    pub log_mu: f64,
    pub n: usize,
    /// `log‖A_n···A_1‖`, computed directly.
    pub direct_log_norm: f64,
    /// `max_j [log‖A_{j+1}‖ + log‖A_j‖ − log‖A_{j+1}A_j‖]`.
    pub max_pair_defect: f64,
    /// `μ > n`.
    pub large_ok: bool,
    /// `max_pair_defect < ½ log μ`.
    pub diff_ok: bool,
    /// `μ` equals `n` to within 1e-12 relative; the strict inequality decides.
    pub borderline: bool,
}

impl ApBlockChain {
    pub fn mu(&self) -> f64 {
        self.log_mu.exp()
    }

    pub fn hypotheses_met(&self) -> bool {
        self.large_ok && self.diff_ok
    }

    /// Builds the chain from explicit matrices `A_1, ..., A_n` (`A_1` acts first).
    pub fn from_matrices(matrices: &[Mat2]) -> Result<Self> {
        for (j, m) in matrices.iter().enumerate() {
            if !m.0.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidInput(format!("matrix {} is not finite", j + 1)));
            }
        }
        let blocks = matrices
            .iter()
            .enumerate()
            .map(|(j, &m)| {
                LogScaledMat2::from_mat2(m).map_err(|_| {
                    Error::InvalidInput(format!("matrix {} is the zero matrix", j + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_blocks(&blocks)
    }

    /// Builds the chain from log-scaled blocks, with pair products and the
    /// full product accumulated in log-scaled form.
    pub fn from_blocks(blocks: &[LogScaledMat2]) -> Result<Self> {
        let n = blocks.len();
        if n < 3 {
            return Err(Error::InvalidInput(format!("chain length {n} < 3")));
        }
        let log_det_cap = DET_TOLERANCE.ln_1p();
        for (j, b) in blocks.iter().enumerate() {
            if b.log_abs_det() > log_det_cap {
                return Err(Error::DeterminantTooLarge {
                    index: j + 1,
                    det: b.log_abs_det().exp(),
                });
            }
        }
        let block_log_norms: Vec<f64> = blocks.iter().map(|b| b.log_norm()).collect();
        let pair_log_norms = blocks
            .windows(2)
            .map(|w| Ok(w[1].compose(&w[0])?.log_norm()))
            .collect::<Result<Vec<_>>>()?;
        let mut full = blocks[0];
        for b in &blocks[1..] {
            full = b.compose(&full)?;
        }
        let log_mu = block_log_norms.iter().copied().fold(f64::INFINITY, f64::min);
        let max_pair_defect = (0..n - 1)
            .map(|j| block_log_norms[j + 1] + block_log_norms[j] - pair_log_norms[j])
            .fold(f64::NEG_INFINITY, f64::max);
        let log_n = (n as f64).ln();
        Ok(Self {
            large_ok: log_mu > log_n,
            diff_ok: max_pair_defect < 0.5 * log_mu,
            borderline: (log_mu - log_n).abs() <= 1e-12,
            block_log_norms,
            pair_log_norms,
            log_mu,
            n,
            direct_log_norm: full.log_norm(),
            max_pair_defect,
        })
    }

    /// `Σ_{j=1}^{n−1} log‖A_{j+1}A_j‖ − Σ_{j=2}^{n−1} log‖A_j‖`.
    fn telescoped(&self) -> f64 {
        let pairs: f64 = self.pair_log_norms.iter().sum();
        let inner: f64 = self.block_log_norms[1..self.n - 1].iter().sum();
        pairs - inner
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApVerdict {
    pub lhs: f64,
    /// `lhs · μ / n`.
    pub bound_ratio: f64,
    pub hypotheses_met: bool,
    pub mu: f64,
    pub n: usize,
    pub max_pair_defect: f64,
    pub direct_log_norm: f64,
    pub borderline: bool,
}

impl ApVerdict {
    pub fn from_chain(chain: &ApBlockChain) -> Self {
        let lhs = (chain.direct_log_norm - chain.telescoped()).abs();
        let bound_ratio = if lhs == 0.0 {
            0.0
        } else {
            (lhs.ln() + chain.log_mu - (chain.n as f64).ln()).exp()
        };
        ApVerdict {
            lhs,
            bound_ratio,
            hypotheses_met: chain.hypotheses_met(),
            mu: chain.mu(),
            n: chain.n,
            max_pair_defect: chain.max_pair_defect,
            direct_log_norm: chain.direct_log_norm,
            borderline: chain.borderline,
        }
    }
}

pub fn ap_verify(matrices: &[Mat2]) -> Result<ApVerdict> {
    Ok(ApVerdict::from_chain(&ApBlockChain::from_matrices(matrices)?))
}

pub fn ap_verify_blocks(blocks: &[LogScaledMat2]) -> Result<ApVerdict> {
    Ok(ApVerdict::from_chain(&ApBlockChain::from_blocks(blocks)?))
}

/// Avalanche-principle approximation of `log‖A_n···A_1‖` from block and pair
/// norms only.
pub fn ap_estimate_log_norm(chain: &ApBlockChain) -> Result<f64> {
    if !chain.hypotheses_met() {
        return Err(Error::HypothesesNotMet(format!(
            "log μ = {:.6}, log n = {:.6}, max pair defect = {:.6}",
            chain.log_mu,
            (chain.n as f64).ln(),
            chain.max_pair_defect
        )));
    }
    Ok(chain.telescoped())
}

/// The blocks `M̃_N(x + (j−1)Nω)`, `j = 1..m`, whose ordered product is
/// `M̃_{mN}(x)`, from a single orbit walk of length `mN`.
pub fn cocycle_blocks(spec: &CocycleSpec, x: f64, block_len: usize, m: usize) -> Result<Vec<LogScaledMat2>> {
    if block_len == 0 || m == 0 {
        return Err(Error::InvalidInput("block length and count must be ≥ 1".into()));
    }
    let mut blocks = Vec::with_capacity(m);
    let mut start = x;
    for _ in 0..m {
        let o = orbit_products(spec, start, &[block_len], true)?[0];
        blocks.push(o.m_tilde());
        start = o.end_phase;
    }
    Ok(blocks)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiscaleResidual {
    /// `|L_{mN} + L_N − 2 L_{2N}|`.
    pub residual: f64,
    pub l_n: f64,
    pub l_2n: f64,
    pub l_mn: f64,
    pub std_err: f64,
}

/// Empirical residual of the multiscale combination at scales `N`, `2N`, `mN`.
pub fn multiscale_combination(
    spec: &CocycleSpec,
    n: usize,
    m: usize,
    sampler: &PhaseSampler,
) -> Result<MultiscaleResidual> {
    if m < 3 {
        return Err(Error::InvalidInput(format!("m = {m} < 3")));
    }
    if n == 0 {
        return Err(Error::InvalidInput("n must be ≥ 1".into()));
    }
    let ladder = finite_scale_ladder(spec, &[n, 2 * n, m * n], sampler)?;
    let (l_n, l_2n, l_mn) = (ladder[0], ladder[1], ladder[2]);
    Ok(MultiscaleResidual {
        residual: (l_mn.l_n + l_n.l_n - 2.0 * l_2n.l_n).abs(),
        l_n: l_n.l_n,
        l_2n: l_2n.l_n,
        l_mn: l_mn.l_n,
        std_err: l_mn.std_err + l_n.std_err + 2.0 * l_2n.std_err,
    })
}
