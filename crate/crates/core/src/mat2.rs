//! Real 2×2 matrices and an overflow-safe log-scaled product type.

use crate::error::{Error, Result};
use crate::reduce::CompensatedSum;
use serde::{Deserialize, Serialize};
use std::ops::Mul;

/// Row-major real 2×2 matrix `[[m[0], m[1]], [m[2], m[3]]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [f64; 4]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([1.0, 0.0, 0.0, 1.0]);
    pub const ZERO: Mat2 = Mat2([0.0; 4]);

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([a, b, c, d])
    }

    pub fn diag(d0: f64, d1: f64) -> Self {
        Mat2([d0, 0.0, 0.0, d1])
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Mat2([c, -s, s, c])
    }

    pub fn det(&self) -> f64 {
        let [a, b, c, d] = self.0;
        a * d - b * c
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Mat2(self.0.map(|v| v * s))
    }

    pub fn transpose(&self) -> Self {
        let [a, b, c, d] = self.0;
        Mat2([a, c, b, d])
    }

    /// Largest singular value, closed form
    /// `σ₁² = (‖M‖_F² + sqrt(‖M‖_F⁴ − 4 det²)) / 2`.
    ///
    /// Entries are pre-scaled by their largest magnitude so the squared
    /// quantities cannot overflow.
    pub fn op_norm(&self) -> f64 {
        let s = self.max_abs();
        if s == 0.0 || !s.is_finite() {
            return s;
        }
        let m = self.scale(1.0 / s);
        let f2 = m.frobenius_sq();
        let det = m.det();
        let disc = (f2 * f2 - 4.0 * det * det).max(0.0);
        s * ((f2 + disc.sqrt()) * 0.5).sqrt()
    }

    /// Frobenius distance, used to compare unit matrices.
    pub fn dist(&self, other: &Mat2) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, r: Mat2) -> Mat2 {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = r.0;
        Mat2([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }
}

/// A matrix `e^{log_scale} · unit` with `‖unit‖ = 1`.
///
/// The determinant is carried separately as `det_sign · e^{log_abs_det}`,
/// accumulated multiplicatively from the factors: for long hyperbolic
/// products the determinant of `unit` underflows and cannot be recovered
/// from its entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScaledMat2 {
    unit: Mat2,
    log_scale: CompensatedSum,
    log_abs_det: CompensatedSum,
    det_sign: f64,
}

impl LogScaledMat2 {
    pub fn identity() -> Self {
        Self {
            unit: Mat2::IDENTITY,
            log_scale: CompensatedSum::new(0.0),
            log_abs_det: CompensatedSum::new(0.0),
            det_sign: 1.0,
        }
    }

    /// Fails with [`Error::DegenerateProduct`] (step 0) on the zero matrix.
    pub fn from_mat2(m: Mat2) -> Result<Self> {
        let mut out = Self::identity();
        out.left_mul(m, 0)?;
        Ok(out)
    }

    pub fn unit(&self) -> Mat2 {
        self.unit
    }

    /// Natural log of the operator norm of the represented matrix.
    pub fn log_norm(&self) -> f64 {
        self.log_scale.value()
    }

    pub fn log_abs_det(&self) -> f64 {
        self.log_abs_det.value()
    }

    /// `+1`, `-1`, or `0` for a singular product.
    pub fn det_sign(&self) -> f64 {
        self.det_sign
    }

    /// The represented matrix, if it fits in an `f64`.
    pub fn to_mat2(&self) -> Mat2 {
        self.unit.scale(self.log_norm().exp())
    }

    fn renormalize(&mut self, step: usize) -> Result<()> {
        let norm = self.unit.op_norm();
        if norm == 0.0 {
            return Err(Error::DegenerateProduct { step });
        }
        self.unit = self.unit.scale(1.0 / norm);
        self.log_scale.add(norm.ln());
        Ok(())
    }

    fn absorb_det(&mut self, det: f64) {
        if det == 0.0 {
            self.det_sign = 0.0;
            self.log_abs_det = CompensatedSum::new(f64::NEG_INFINITY);
        } else {
            self.det_sign *= det.signum();
            self.log_abs_det.add(det.abs().ln());
        }
    }

    /// `self ← m · self`, renormalized. `step` labels the error.
    pub fn left_mul(&mut self, m: Mat2, step: usize) -> Result<()> {
        self.unit = m * self.unit;
        self.absorb_det(m.det());
        self.renormalize(step)
    }

    /// Product `self · rhs` (so `rhs` acts first).
    pub fn compose(&self, rhs: &LogScaledMat2) -> Result<LogScaledMat2> {
        let mut out = LogScaledMat2 {
            unit: self.unit * rhs.unit,
            log_scale: CompensatedSum::new(self.log_norm() + rhs.log_norm()),
            log_abs_det: CompensatedSum::new(self.log_abs_det() + rhs.log_abs_det()),
            det_sign: self.det_sign * rhs.det_sign,
        };
        out.renormalize(0)?;
        Ok(out)
    }

    /// Multiplies the represented matrix by the scalar `sign · e^{log_factor}`.
    pub fn scaled_by(&self, log_factor: f64, sign: f64) -> LogScaledMat2 {
        LogScaledMat2 {
            unit: if sign < 0.0 { self.unit.scale(-1.0) } else { self.unit },
            log_scale: CompensatedSum::new(self.log_norm() + log_factor),
            log_abs_det: CompensatedSum::new(self.log_abs_det() + 2.0 * log_factor),
            det_sign: self.det_sign,
        }
    }
}
