//! Lyapunov exponents of quasi-periodic Jacobi cocycles.
//!
//! The operator
//!
//! ```text
//! (Hφ)(n) = −b(x+(n+1)ω) φ(n+1) − b(x+nω) φ(n−1) + a(x+nω) φ(n)
//! ```
//!
//! with trigonometric-polynomial `a`, `b` gives rise to the transfer-matrix
//! cocycle of [`cocycle`]. On top of it the crate provides
//!
//! * [`lyapunov`]: finite-scale exponents `L_N`, `J_N`, the accelerated limit
//!   `2L_{2N} − L_N` and a Hölder regression of `L` in the energy;
//! * [`avalanche`]: a verifier and estimator for the avalanche principle;
//! * [`ldt`]: empirical large-deviation sets, rate fits and uniform bounds;
//! * [`diophantine`]: continued fractions and Diophantine margins of `ω`.
//!
//! Phase averages run in parallel when the `parallel` feature is enabled
//! (default) and are bit-identical to the sequential build.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod avalanche;
pub mod cocycle;
pub mod diophantine;
pub mod error;
pub mod ldt;
pub mod lyapunov;
pub mod mat2;
pub mod reduce;
pub mod sampler;
pub mod series;

pub use cocycle::{CocycleSpec, GOLDEN, SQRT2_MINUS_1};
pub use error::{Error, Result};
pub use mat2::{LogScaledMat2, Mat2};
pub use sampler::{PhaseSampler, SamplerKind};
pub use series::FourierSeries;
