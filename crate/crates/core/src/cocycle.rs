//! Jacobi cocycles over the rotation `x ↦ x + ω` and their transfer products.
//!
//! For sampling functions `a`, `b`, frequency `ω` and energy `E` the one-step
//! matrices are
//!
//! ```text
//! B(x) = [[a(x) − E, −b(x)], [b(x + ω), 0]],     A(x) = B(x) / b(x + ω),
//! ```
//!
//! with `T_n(x) = B(x_{n−1})···B(x_0)`, `M_n(x) = A(x_{n−1})···A(x_0)` and the
//! unimodular `M̃_n = M_n / |det M_n|^{1/2}`, where `x_k = x + kω mod 1`.
//! All products are accumulated in [`LogScaledMat2`] form.
//!
//! Orbit points are generated by repeated addition `x_{k+1} = x_k + ω mod 1`,
//! so the phase error after `n` steps is `O(n·ulp)`.

use crate::error::{Error, Result};
use crate::mat2::{LogScaledMat2, Mat2};
use crate::reduce::CompensatedSum;
use crate::series::FourierSeries;
use serde::{Deserialize, Serialize};

/// Default lower bound on `|b|` along an orbit.
pub const DEFAULT_B_FLOOR: f64 = 1e-300;

/// `(√5 − 1)/2`.
pub const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// `√2 − 1`.
pub const SQRT2_MINUS_1: f64 = 0.414_213_562_373_095_03;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocycleSpec {
    pub a: FourierSeries,
    pub b: FourierSeries,
    pub omega: f64,
    pub energy: f64,
    /// Orbit points with `|b| < b_floor` are rejected by the normalized
    /// quantities.
    pub b_floor: f64,
}

impl CocycleSpec {
    pub fn new(a: FourierSeries, b: FourierSeries, omega: f64, energy: f64) -> Result<Self> {
        if b.is_identically_zero() {
            return Err(Error::InvalidInput("b is identically zero".into()));
        }
        if !(omega > 0.0 && omega < 1.0) {
            return Err(Error::InvalidInput(format!("omega {omega} not in (0, 1)")));
        }
        if !energy.is_finite() || !a.all_finite() || !b.all_finite() {
            return Err(Error::InvalidInput("non-finite coefficient or energy".into()));
        }
        Ok(Self {
            a,
            b,
            omega,
            energy,
            b_floor: DEFAULT_B_FLOOR,
        })
    }

    /// Almost-Mathieu cocycle: `a = 2λ cos(2πx)`, `b ≡ 1`.
    pub fn almost_mathieu(lambda: f64, omega: f64, energy: f64) -> Result<Self> {
        Self::new(
            FourierSeries::cosine(2.0 * lambda),
            FourierSeries::constant(1.0),
            omega,
            energy,
        )
    }

    /// `a ≡ 0`, `b ≡ 1`: `B = [[−E, −1], [1, 0]]` for every phase.
    pub fn free(omega: f64, energy: f64) -> Result<Self> {
        Self::new(
            FourierSeries::constant(0.0),
            FourierSeries::constant(1.0),
            omega,
            energy,
        )
    }

    pub fn with_energy(&self, energy: f64) -> Self {
        Self {
            energy,
            ..self.clone()
        }
    }

    pub fn with_b_floor(mut self, floor: f64) -> Self {
        self.b_floor = floor;
        self
    }

    /// `C = |E| + sup|a| + 2 sup|b|`, an upper bound on `‖B(x)‖` for all `x`.
    pub fn coupling_bound(&self) -> f64 {
        self.energy.abs() + self.a.sup_bound() + 2.0 * self.b.sup_bound()
    }

    /// True when neither `a` nor `b` depends on the phase.
    pub fn is_phase_independent(&self) -> bool {
        self.a.is_constant() && self.b.is_constant()
    }
}

/// `x + ω` reduced to `[0, 1)`.
#[inline]
pub fn advance(x: f64, omega: f64) -> f64 {
    let y = x + omega;
    if y >= 1.0 {
        y - 1.0
    } else {
        y
    }
}

/// `x_k` obtained by `k` successive calls to [`advance`].
pub fn orbit_phase(x: f64, omega: f64, k: usize) -> f64 {
    (0..k).fold(x.rem_euclid(1.0), |p, _| advance(p, omega))
}

pub fn eval_series(f: &FourierSeries, x: f64) -> f64 {
    f.eval(x)
}

/// `B(x) = [[a(x) − E, −b(x)], [b(x + ω), 0]]`.
pub fn step_matrix_b(spec: &CocycleSpec, x: f64) -> Mat2 {
    let x = x.rem_euclid(1.0);
    let b_next = spec.b.eval(advance(x, spec.omega));
    Mat2::new(spec.a.eval(x) - spec.energy, -spec.b.eval(x), b_next, 0.0)
}

/// `A(x) = B(x) / b(x + ω)`.
pub fn step_matrix_a(spec: &CocycleSpec, x: f64) -> Mat2 {
    let x = x.rem_euclid(1.0);
    let b_next = spec.b.eval(advance(x, spec.omega));
    step_matrix_b(spec, x).scale(1.0 / b_next)
}

/// State of a transfer product after `n` steps from phase `x_0`.
#[derive(Debug, Clone, Copy)]
pub struct OrbitProduct {
    pub n: usize,
    /// `T_n(x_0)`.
    pub t: LogScaledMat2,
    /// `Σ_{k=0}^{n} log|b(x_k)|`.
    pub sum_log_b: f64,
    pub log_b_start: f64,
    pub log_b_end: f64,
    /// `Π_{k=1}^{n} sign b(x_k)`.
    pub sign_b_tail: f64,
    /// `x_n`.
    pub end_phase: f64,
}

impl OrbitProduct {
    /// `Σ_{k=0}^{n−1} log|b(x_k) b(x_{k+1})|`.
    pub fn sum_log_bb(&self) -> f64 {
        2.0 * self.sum_log_b - self.log_b_start - self.log_b_end
    }

    /// `log‖M̃_n(x_0)‖`.
    pub fn normalized_log_norm(&self) -> f64 {
        self.t.log_norm() - 0.5 * self.sum_log_bb()
    }

    /// `log‖M_n(x_0)‖ = log‖T_n‖ − Σ_{k=1}^{n} log|b(x_k)|`.
    pub fn log_norm_m(&self) -> f64 {
        self.t.log_norm() - (self.sum_log_b - self.log_b_start)
    }

    /// `M̃_n(x_0)` in log-scaled form.
    pub fn m_tilde(&self) -> LogScaledMat2 {
        self.t.scaled_by(-0.5 * self.sum_log_bb(), self.sign_b_tail)
    }
}

/// Walks the orbit of `x` and records the product at every checkpoint
/// (ascending lengths). When `check_floor` is set, every visited `|b(x_k)|`,
/// `0 ≤ k ≤ n_max`, must reach `spec.b_floor`.
pub fn orbit_products(
    spec: &CocycleSpec,
    x: f64,
    checkpoints: &[usize],
    check_floor: bool,
) -> Result<Vec<OrbitProduct>> {
    if checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput("checkpoints must be ascending".into()));
    }
    let n_max = checkpoints.last().copied().unwrap_or(0);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next_cp = checkpoints.iter().copied().peekable();

    let check = |k: usize, phase: f64, value: f64| -> Result<()> {
        if check_floor && !(value.abs() >= spec.b_floor) {
            return Err(Error::NearSingularSamplingFunction {
                step: k,
                phase,
                value: value.abs(),
                floor: spec.b_floor,
            });
        }
        Ok(())
    };

    let mut phase = x.rem_euclid(1.0);
    let mut b_here = spec.b.eval(phase);
    check(0, phase, b_here)?;
    let log_b_start = b_here.abs().ln();
    let mut t = LogScaledMat2::identity();
    let mut sum_log_b = CompensatedSum::new(log_b_start);
    let mut sign_tail = 1.0;

    let mut record = |k: usize,
                      t: &LogScaledMat2,
                      sum_log_b: f64,
                      b_here: f64,
                      sign_tail: f64,
                      phase: f64,
                      out: &mut Vec<OrbitProduct>| {
        while next_cp.peek() == Some(&k) {
            next_cp.next();
            out.push(OrbitProduct {
                n: k,
                t: *t,
                sum_log_b,
                log_b_start,
                log_b_end: b_here.abs().ln(),
                sign_b_tail: sign_tail,
                end_phase: phase,
            });
        }
    };
    record(0, &t, sum_log_b.value(), b_here, sign_tail, phase, &mut out);

    for k in 0..n_max {
        let next_phase = advance(phase, spec.omega);
        let b_next = spec.b.eval(next_phase);
        check(k + 1, next_phase, b_next)?;
        let step = Mat2::new(spec.a.eval(phase) - spec.energy, -b_here, b_next, 0.0);
        t.left_mul(step, k)?;
        sum_log_b.add(b_next.abs().ln());
        sign_tail *= b_next.signum();
        phase = next_phase;
        b_here = b_next;
        record(k + 1, &t, sum_log_b.value(), b_here, sign_tail, phase, &mut out);
    }
    Ok(out)
}

fn single(spec: &CocycleSpec, x: f64, n: usize, check_floor: bool) -> Result<OrbitProduct> {
    Ok(orbit_products(spec, x, &[n], check_floor)?[0])
}

/// `T_n(x) = B(x_{n−1})···B(x_0)` in log-scaled form.
pub fn transfer_product_t(spec: &CocycleSpec, x: f64, n: usize) -> Result<LogScaledMat2> {
    if n == 0 {
        return Err(Error::InvalidInput("product length must be ≥ 1".into()));
    }
    Ok(single(spec, x, n, false)?.t)
}

/// `M̃_n(x)` in log-scaled form.
pub fn normalized_product(spec: &CocycleSpec, x: f64, n: usize) -> Result<LogScaledMat2> {
    Ok(single(spec, x, n, true)?.m_tilde())
}

/// `log‖M̃_n(x)‖ = log‖T_n(x)‖ − ½ Σ_{k<n} log|b(x_k) b(x_{k+1})|`.
pub fn normalized_log_norm(spec: &CocycleSpec, x: f64, n: usize) -> Result<f64> {
    Ok(single(spec, x, n, true)?.normalized_log_norm())
}

/// `log‖M̃_n(x)‖` for several ascending lengths from a single orbit walk.
pub fn normalized_log_norms_at(spec: &CocycleSpec, x: f64, lengths: &[usize]) -> Result<Vec<f64>> {
    Ok(orbit_products(spec, x, lengths, true)?
        .iter()
        .map(OrbitProduct::normalized_log_norm)
        .collect())
}

/// Relative residual of `det M_n(x) = b(x) / b(x + nω)`.
///
/// The left side is the determinant of the accumulated product divided by
/// `Π_{k=1}^{n} b(x_k)²`, evaluated in log space.
pub fn det_identity_residual(spec: &CocycleSpec, x: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("product length must be ≥ 1".into()));
    }
    let o = single(spec, x, n, true)?;
    let log_lhs = o.t.log_abs_det() - 2.0 * (o.sum_log_b - o.log_b_start);
    let sign_lhs = o.t.det_sign();
    let b0 = spec.b.eval(x.rem_euclid(1.0));
    let bn = spec.b.eval(o.end_phase);
    let log_rhs = b0.abs().ln() - bn.abs().ln();
    let sign_rhs = b0.signum() * bn.signum();
    Ok((sign_lhs * sign_rhs * (log_lhs - log_rhs).exp() - 1.0).abs())
}

/// Slack in a two-sided comparison `lower_bound ≤ g ≤ upper_bound`;
/// both slacks are non-negative when the inequality holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonSlack {
    pub g: f64,
    pub c1: f64,
    pub lower_slack: f64,
    pub upper_slack: f64,
}

impl ComparisonSlack {
    pub fn holds(&self) -> bool {
        self.lower_slack >= 0.0 && self.upper_slack >= 0.0
    }
}

/// One-step shift comparison of `g = log‖T_n(x)‖ − log‖T_n(x + ω)‖` against
///
/// ```text
/// −C₁ + log|b(x) b(x+ω)| ≤ g ≤ C₁ − log|b(x+(n−1)ω) b(x+nω)|,   C₁ = 2 log C.
/// ```
pub fn shift_comparison_residual(spec: &CocycleSpec, x: f64, n: usize) -> Result<ComparisonSlack> {
    k_step_comparison(spec, x, n, 1)
}

/// `k`-step version: `g = log‖T_n(x)‖ − log‖T_n(x + kω)‖` with
///
/// ```text
/// −kC₁ + Σ_{m<k} log|b(x_m) b(x_{m+1})| ≤ g ≤ kC₁ − Σ_{m<k} log|b(x_{n+m−1}) b(x_{n+m})|.
/// ```
pub fn k_step_comparison(spec: &CocycleSpec, x: f64, n: usize, k: usize) -> Result<ComparisonSlack> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidInput("n and k must be ≥ 1".into()));
    }
    let c1 = 2.0 * spec.coupling_bound().ln();
    let base = single(spec, x, n, true)?;
    let shifted = single(spec, orbit_phase(x, spec.omega, k), n, true)?;
    let g = base.t.log_norm() - shifted.t.log_norm();

    let mut log_b = Vec::with_capacity(n + k + 1);
    let mut phase = x.rem_euclid(1.0);
    for _ in 0..=n + k {
        log_b.push(spec.b.eval(phase).abs().ln());
        phase = advance(phase, spec.omega);
    }
    let head: f64 = (0..k).map(|m| log_b[m] + log_b[m + 1]).sum();
    let tail: f64 = (0..k).map(|m| log_b[n + m - 1] + log_b[n + m]).sum();
    let kc1 = k as f64 * c1;
    Ok(ComparisonSlack {
        g,
        c1,
        lower_slack: g - (-kc1 + head),
        upper_slack: (kc1 - tail) - g,
    })
}

/// Slack of `(1/n) log‖M_n(x)‖ ≤ log C − (1/n) Σ_{k=1}^{n} log|b(x_k)|`.
pub fn upper_bound_slack(spec: &CocycleSpec, x: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("product length must be ≥ 1".into()));
    }
    let o = single(spec, x, n, true)?;
    let nf = n as f64;
    let bound = spec.coupling_bound().ln() - (o.sum_log_b - o.log_b_start) / nf;
    Ok(bound - o.log_norm_m() / nf)
}
