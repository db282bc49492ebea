//! Empirical large-deviation measurements.
//!
//! All measures are counting measures over the sampler phases. For the
//! equispaced grid the error against Lebesgue measure is `O(1/count)` for sets
//! made of `O(n)` intervals.

use crate::cocycle::{orbit_products, CocycleSpec};
use crate::error::{Error, Result};
use crate::lyapunov::{reference_d, sample_products};
use crate::reduce::{map_collect, mean_and_std_err};
use crate::sampler::PhaseSampler;
use serde::Serialize;

/// Default number of histogram bins.
pub const DEFAULT_BINS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationHistogram {
    pub n: usize,
    pub energy: f64,
    pub samples: usize,
    /// Deviations are measured from this value (the sample mean, ≈ `L_N`,
    /// unless a shared center was supplied).
    pub center: f64,
    /// Edges of the histogram of `ũ_N(x) − center`; `bins + 1` values.
    pub bin_edges: Vec<f64>,
    pub bin_counts: Vec<u64>,
    /// Sample mean of `ũ_N`.
    pub mean: f64,
    pub deltas: Vec<f64>,
    /// Number of samples with `|ũ_N − center| > δ`, per delta.
    pub deviation_counts: Vec<u64>,
    pub dropped_measure: f64,
}

impl DeviationHistogram {
    /// `(δ, measure)` pairs.
    pub fn deviation_measures(&self) -> Vec<(f64, f64)> {
        self.deltas
            .iter()
            .zip(&self.deviation_counts)
            .map(|(&d, &c)| (d, c as f64 / self.samples as f64))
            .collect()
    }

    pub fn measure_at(&self, delta: f64) -> Option<f64> {
        self.deltas
            .iter()
            .position(|&d| d == delta)
            .map(|i| self.deviation_counts[i] as f64 / self.samples as f64)
    }

    /// Bin-wise sum of two shards sharing edges, center and deltas.
    pub fn merge(&self, other: &DeviationHistogram) -> Result<DeviationHistogram> {
        if self.bin_edges != other.bin_edges
            || self.center != other.center
            || self.deltas != other.deltas
            || self.n != other.n
            || self.energy != other.energy
        {
            return Err(Error::InvalidInput("histograms are not compatible".into()));
        }
        let samples = self.samples + other.samples;
        let w = |h: &DeviationHistogram| h.samples as f64 / samples as f64;
        Ok(DeviationHistogram {
            n: self.n,
            energy: self.energy,
            samples,
            center: self.center,
            bin_edges: self.bin_edges.clone(),
            bin_counts: add_counts(&self.bin_counts, &other.bin_counts),
            mean: w(self) * self.mean + w(other) * other.mean,
            deltas: self.deltas.clone(),
            deviation_counts: add_counts(&self.deviation_counts, &other.deviation_counts),
            dropped_measure: w(self) * self.dropped_measure + w(other) * other.dropped_measure,
        })
    }
}

fn add_counts(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn validate_deltas(deltas: &[f64]) -> Result<()> {
    if deltas.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
        return Err(Error::InvalidInput("deltas must be positive".into()));
    }
    Ok(())
}

/// Samples of `ũ_N(x) = (1/N) log‖M̃_N(x)‖` and their retained phases.
pub fn normalized_samples(spec: &CocycleSpec, n: usize, sampler: &PhaseSampler) -> Result<(Vec<f64>, f64)> {
    let pp = sample_products(spec, &[n], sampler)?;
    Ok((pp.normalized(0), pp.dropped_measure()))
}

/// Histogram of `ũ_N − mean` and the deviation-set measures for each `δ`.
pub fn deviation_histogram(
    spec: &CocycleSpec,
    n: usize,
    sampler: &PhaseSampler,
    deltas: &[f64],
) -> Result<DeviationHistogram> {
    deviation_histogram_with(spec, n, sampler, deltas, None, DEFAULT_BINS)
}

/// As [`deviation_histogram`], optionally with a fixed `(center, edges)` so
/// shards computed separately can be merged.
pub fn deviation_histogram_with(
    spec: &CocycleSpec,
    n: usize,
    sampler: &PhaseSampler,
    deltas: &[f64],
    shared: Option<(f64, Vec<f64>)>,
    bins: usize,
) -> Result<DeviationHistogram> {
    validate_deltas(deltas)?;
    if bins == 0 {
        return Err(Error::InvalidInput("bins must be ≥ 1".into()));
    }
    let (values, dropped_measure) = normalized_samples(spec, n, sampler)?;
    let (mean, _) = mean_and_std_err(&values);
    let (center, bin_edges) = match shared {
        Some((c, edges)) => {
            if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::InvalidInput("bin edges must increase".into()));
            }
            (c, edges)
        }
        None => {
            let r = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
            let r = if r > 0.0 { r * (1.0 + 1e-12) } else { 1e-12 };
            let edges = (0..=bins)
                .map(|k| -r + 2.0 * r * k as f64 / bins as f64)
                .collect();
            (mean, edges)
        }
    };
    let nb = bin_edges.len() - 1;
    let (lo, hi) = (bin_edges[0], bin_edges[nb]);
    let mut bin_counts = vec![0u64; nb];
    for v in &values {
        let d = (v - center).clamp(lo, hi);
        let k = bin_edges[1..nb].partition_point(|&e| e <= d);
        bin_counts[k] += 1;
    }
    let deviation_counts = deltas
        .iter()
        .map(|&delta| values.iter().filter(|&&v| (v - center).abs() > delta).count() as u64)
        .collect();
    Ok(DeviationHistogram {
        n,
        energy: spec.energy,
        samples: values.len(),
        center,
        bin_edges,
        bin_counts,
        mean,
        deltas: deltas.to_vec(),
        deviation_counts,
        dropped_measure,
    })
}

/// One `(δ, N)` cell of a rate fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateCell {
    pub delta: f64,
    pub n: usize,
    pub measure: f64,
    pub samples: usize,
}

impl RateCell {
    pub fn is_censored(&self) -> bool {
        self.measure == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub deltas: Vec<f64>,
    pub n_values: Vec<usize>,
    /// Slope of `−log(measure)` against `δ²N` through the origin.
    pub fitted_c: f64,
    /// Uncentered coefficient of determination of the fit.
    pub fit_quality: f64,
    /// Root-mean-square residual in `−log(measure)`.
    pub residual_rms: f64,
    pub censored_cells: usize,
    /// Some cells were censored, so `fitted_c` is a lower bound.
    pub censored: bool,
    pub cells: Vec<RateCell>,
}

/// Fits `measure ≈ exp(−c δ² N)` over every `(δ, N)` cell of the histograms.
pub fn fit_deviation_rate(histograms: &[DeviationHistogram]) -> Result<RateFit> {
    let cells: Vec<RateCell> = histograms
        .iter()
        .flat_map(|h| {
            h.deviation_measures().into_iter().map(|(delta, measure)| RateCell {
                delta,
                n: h.n,
                measure,
                samples: h.samples,
            })
        })
        .collect();
    fit_rate_cells(&cells)
}

/// Least-squares fit on explicit cells. Zero measures are replaced by the
/// resolution floor `1/samples`.
pub fn fit_rate_cells(cells: &[RateCell]) -> Result<RateFit> {
    if cells.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} (δ, N) cell(s); at least 3 required",
            cells.len()
        )));
    }
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    let mut pts = Vec::with_capacity(cells.len());
    for c in cells {
        if !(c.delta > 0.0) || c.n == 0 || c.samples == 0 || !(0.0..=1.0).contains(&c.measure) {
            return Err(Error::InvalidInput(format!("invalid rate cell {c:?}")));
        }
        let m = if c.is_censored() { 1.0 / c.samples as f64 } else { c.measure };
        let x = c.delta * c.delta * c.n as f64;
        let y = -m.ln();
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        pts.push((x, y));
    }
    let fitted_c = sxy / sxx;
    let ssr: f64 = pts.iter().map(|(x, y)| (y - fitted_c * x).powi(2)).sum();
    let fit_quality = if syy == 0.0 { 1.0 } else { 1.0 - ssr / syy };
    let censored_cells = cells.iter().filter(|c| c.is_censored()).count();
    let mut deltas: Vec<f64> = cells.iter().map(|c| c.delta).collect();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    let mut n_values: Vec<usize> = cells.iter().map(|c| c.n).collect();
    n_values.sort_unstable();
    n_values.dedup();
    Ok(RateFit {
        deltas,
        n_values,
        fitted_c,
        fit_quality,
        residual_rms: (ssr / pts.len() as f64).sqrt(),
        censored_cells,
        censored: censored_cells > 0,
        cells: cells.to_vec(),
    })
}

/// Cells with measures exactly `exp(−c δ² N)`.
pub fn synthetic_cells(c: f64, deltas: &[f64], n_values: &[usize], samples: usize) -> Vec<RateCell> {
    n_values
        .iter()
        .flat_map(|&n| {
            deltas.iter().map(move |&delta| RateCell {
                delta,
                n,
                measure: (-c * delta * delta * n as f64).exp(),
                samples,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformBound {
    pub n: usize,
    /// `max_x (u_N(x) − J_N) · (N / log N)^{1/2}`.
    pub c_t: f64,
    /// `max_x (log‖M̃_N(x)‖ − N L_N + N F_N(x)) / (N log N)^{1/2}`.
    pub c_m_tilde: f64,
    pub j_n: f64,
    pub l_n: f64,
    pub d: f64,
}

/// Smallest constants making the sampled uniform upper bounds hold.
pub fn uniform_upper_bound_check(spec: &CocycleSpec, n: usize, sampler: &PhaseSampler) -> Result<UniformBound> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("n = {n} < 3")));
    }
    let d = reference_d(spec)?;
    let pp = sample_products(spec, &[n], sampler)?;
    let nf = n as f64;
    let u = pp.raw(0);
    let (j_n, _) = mean_and_std_err(&u);
    let log_mt: Vec<f64> = pp.products.iter().map(|p| p[0].normalized_log_norm()).collect();
    let (l_sum, _) = mean_and_std_err(&log_mt);
    let l_n = l_sum / nf;
    let c_t = u.iter().map(|v| v - j_n).fold(f64::NEG_INFINITY, f64::max) * (nf / nf.ln()).sqrt();
    let c_m_tilde = pp
        .products
        .iter()
        .zip(&log_mt)
        .map(|(p, &lm)| {
            let n_f = 0.5 * p[0].sum_log_bb() - nf * d;
            lm - nf * l_n + n_f
        })
        .fold(f64::NEG_INFINITY, f64::max)
        / (nf * nf.ln()).sqrt();
    Ok(UniformBound {
        n,
        c_t,
        c_m_tilde,
        j_n,
        l_n,
        d,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BirkhoffField {
    pub n: usize,
    pub d: f64,
    pub phases: Vec<f64>,
    /// `F_N(x) = (1/2N) Σ_{k<N} Q(x_k)`, `Q(x) = log|b(x) b(x+ω)| − 2D`.
    pub f_values: Vec<f64>,
    pub mean: f64,
    pub std_err: f64,
    pub min: f64,
    pub max: f64,
    pub deltas: Vec<f64>,
    /// Fraction of samples with `|F_N| > δ`.
    pub deviation_measures: Vec<f64>,
    pub dropped_measure: f64,
}

impl BirkhoffField {
    pub fn mean_within(&self, sigmas: f64) -> bool {
        self.mean.abs() <= sigmas * self.std_err || self.mean.abs() <= 1e-12
    }
}

/// `F_N(x)` for one phase.
pub fn birkhoff_value(spec: &CocycleSpec, x: f64, n: usize, d: f64) -> Result<f64> {
    let o = orbit_products(spec, x, &[n], true)?[0];
    Ok(o.sum_log_bb() / (2.0 * n as f64) - d)
}

/// Samples the field `F_N` over the sampler phases.
pub fn birkhoff_field(
    spec: &CocycleSpec,
    n: usize,
    sampler: &PhaseSampler,
    deltas: &[f64],
) -> Result<BirkhoffField> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be ≥ 1".into()));
    }
    validate_deltas(deltas)?;
    let d = reference_d(spec)?;
    let pp = sample_products(spec, &[n], sampler)?;
    let f_values: Vec<f64> = map_collect(&pp.products, |p| p[0].sum_log_bb() / (2.0 * n as f64) - d);
    let (mean, std_err) = mean_and_std_err(&f_values);
    let m = f_values.len() as f64;
    Ok(BirkhoffField {
        n,
        d,
        phases: pp.phases.clone(),
        mean,
        std_err,
        min: f_values.iter().copied().fold(f64::INFINITY, f64::min),
        max: f_values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        deltas: deltas.to_vec(),
        deviation_measures: deltas
            .iter()
            .map(|&delta| f_values.iter().filter(|v| v.abs() > delta).count() as f64 / m)
            .collect(),
        dropped_measure: pp.dropped_measure(),
        f_values,
    })
}

/// Slack of the shift-difference bound
///
/// ```text
/// |log‖M̃_N(x+kω)‖ − log‖M̃_N(x)‖| ≤ 2k L_k + 2 C (N log N)^{1/2} − k F_k(x) − k F_k(x+Nω)
/// ```
///
/// with `L_k`, `C` and `D` supplied by the caller (typically from
/// [`uniform_upper_bound_check`] at scale `k`).
pub fn shift_difference_slack(
    spec: &CocycleSpec,
    x: f64,
    n: usize,
    k: usize,
    l_k: f64,
    c_diag: f64,
    d: f64,
) -> Result<f64> {
    if n < 2 || k == 0 {
        return Err(Error::InvalidInput("need n ≥ 2 and k ≥ 1".into()));
    }
    let walk = orbit_products(spec, x, &[n], true)?[0];
    let shifted_start = crate::cocycle::orbit_phase(x, spec.omega, k);
    let shifted = orbit_products(spec, shifted_start, &[n], true)?[0];
    let lhs = (shifted.normalized_log_norm() - walk.normalized_log_norm()).abs();
    let kf = k as f64;
    let f_here = birkhoff_value(spec, x, k, d)?;
    let f_far = birkhoff_value(spec, walk.end_phase, k, d)?;
    let nf = n as f64;
    let rhs = 2.0 * kf * l_k + 2.0 * c_diag * (nf * nf.ln()).sqrt() - kf * f_here - kf * f_far;
    Ok(rhs - lhs)
}
