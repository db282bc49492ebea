//! Real trigonometric polynomials on the circle `T = R/Z`.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// `f(x) = c + Σ_k cos_k·cos(2πkx) + Σ_k sin_k·sin(2πkx)`, `k = 1, 2, ...`.
///
/// `cosine_coeffs[0]` multiplies `cos(2πx)`, `cosine_coeffs[1]` multiplies
/// `cos(4πx)` and so on; likewise for the sine coefficients.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FourierSeries {
    pub constant: f64,
    pub cosine_coeffs: Vec<f64>,
    pub sine_coeffs: Vec<f64>,
}

/// Number of grid points used for sup-norm estimates.
const SUP_GRID: usize = 4096;

impl FourierSeries {
    pub fn new(constant: f64, cosine_coeffs: Vec<f64>, sine_coeffs: Vec<f64>) -> Self {
        Self {
            constant,
            cosine_coeffs,
            sine_coeffs,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(c, Vec::new(), Vec::new())
    }

    /// `amplitude·cos(2πx)`.
    pub fn cosine(amplitude: f64) -> Self {
        Self::new(0.0, vec![amplitude], Vec::new())
    }

    /// `offset + amplitude·cos(2πx)`.
    pub fn shifted_cosine(offset: f64, amplitude: f64) -> Self {
        Self::new(offset, vec![amplitude], Vec::new())
    }

    pub fn degree(&self) -> usize {
        let last_nz = |v: &[f64]| v.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1);
        last_nz(&self.cosine_coeffs).max(last_nz(&self.sine_coeffs))
    }

    pub fn is_identically_zero(&self) -> bool {
        self.constant == 0.0
            && self.cosine_coeffs.iter().all(|&c| c == 0.0)
            && self.sine_coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn all_finite(&self) -> bool {
        self.constant.is_finite()
            && self.cosine_coeffs.iter().all(|c| c.is_finite())
            && self.sine_coeffs.iter().all(|c| c.is_finite())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = self.constant;
        if self.degree() == 0 {
            return acc;
        }
        let theta = TAU * x.rem_euclid(1.0);
        for (k, &c) in self.cosine_coeffs.iter().enumerate() {
            if c != 0.0 {
                acc += c * (theta * (k + 1) as f64).cos();
            }
        }
        for (k, &s) in self.sine_coeffs.iter().enumerate() {
            if s != 0.0 {
                acc += s * (theta * (k + 1) as f64).sin();
            }
        }
        acc
    }

    /// `|c| + Σ|cos_k| + Σ|sin_k|`, a certified bound on `sup |f|`.
    pub fn l1_norm(&self) -> f64 {
        self.constant.abs()
            + self.cosine_coeffs.iter().map(|c| c.abs()).sum::<f64>()
            + self.sine_coeffs.iter().map(|c| c.abs()).sum::<f64>()
    }

    /// Upper bound on `sup_x |f(x)|`.
    ///
    /// The maximum over a 4096-point grid is inflated by the Bernstein
    /// factor `1/(1 − πd/M)` (degree `d`, `M` points), which makes it a
    /// certified bound; the coefficient ℓ¹ norm is used when it is smaller.
    pub fn sup_bound(&self) -> f64 {
        let l1 = self.l1_norm();
        let d = self.degree();
        if d == 0 {
            return self.constant.abs();
        }
        let ratio = std::f64::consts::PI * d as f64 / SUP_GRID as f64;
        if ratio >= 1.0 {
            return l1;
        }
        let grid_max = (0..SUP_GRID)
            .map(|j| self.eval(j as f64 / SUP_GRID as f64).abs())
            .fold(0.0, f64::max);
        (grid_max / (1.0 - ratio)).min(l1)
    }

    /// Multiplies every coefficient by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            constant: self.constant * c,
            cosine_coeffs: self.cosine_coeffs.iter().map(|v| v * c).collect(),
            sine_coeffs: self.sine_coeffs.iter().map(|v| v * c).collect(),
        }
    }
}
