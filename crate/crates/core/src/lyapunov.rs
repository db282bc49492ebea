//! Finite-scale and limiting Lyapunov exponents, and the Hölder fit in energy.
//!
//! `L_N(E) = (1/N) ∫ log‖M̃_N(x, E)‖ dx` is estimated by averaging over the
//! phases of a [`PhaseSampler`]. Each phase is independent; the per-phase
//! values are collected in sampler order and reduced with a fixed tree, so
//! the estimates do not depend on the number of worker threads.

use crate::cocycle::{orbit_products, CocycleSpec, OrbitProduct};
use crate::error::{Error, Result};
use crate::reduce::{map_collect, mean_and_std_err};
use crate::sampler::PhaseSampler;
use serde::Serialize;

/// Largest tolerated fraction of degenerate phase samples.
pub const MAX_DROPPED_MEASURE: f64 = 0.01;

/// Grid size for the reference value of `D = ∫ log|b|`.
pub const REFERENCE_D_GRID: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleEstimate {
    pub n: usize,
    /// Estimate of `L_N(E)`.
    pub l_n: f64,
    pub std_err: f64,
    /// Fraction of phases dropped because `b` was too small on their orbit.
    pub dropped_measure: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogBMean {
    pub value: f64,
    pub dropped_measure: f64,
}

/// Per-phase orbit products at several scales, degenerate phases removed.
pub(crate) struct PhaseProducts {
    pub phases: Vec<f64>,
    /// `products[i][s]` is the product at `scales[s]` from `phases[i]`.
    pub products: Vec<Vec<OrbitProduct>>,
    pub dropped: usize,
    pub total: usize,
}

impl PhaseProducts {
    pub fn dropped_measure(&self) -> f64 {
        self.dropped as f64 / self.total as f64
    }

    /// `(1/n) log‖M̃_n(x)‖` at scale index `s` for every retained phase.
    pub fn normalized(&self, s: usize) -> Vec<f64> {
        self.products
            .iter()
            .map(|p| p[s].normalized_log_norm() / p[s].n as f64)
            .collect()
    }

    /// `(1/n) log‖T_n(x)‖` at scale index `s`.
    pub fn raw(&self, s: usize) -> Vec<f64> {
        self.products
            .iter()
            .map(|p| p[s].t.log_norm() / p[s].n as f64)
            .collect()
    }

    pub fn estimate(&self, s: usize, values: &[f64]) -> ScaleEstimate {
        let (l_n, std_err) = mean_and_std_err(values);
        ScaleEstimate {
            n: self.products.first().map_or(0, |p| p[s].n),
            l_n,
            std_err,
            dropped_measure: self.dropped_measure(),
            samples: values.len(),
        }
    }
}

pub(crate) fn sample_products(
    spec: &CocycleSpec,
    scales: &[usize],
    sampler: &PhaseSampler,
) -> Result<PhaseProducts> {
    if scales.is_empty() || scales.contains(&0) {
        return Err(Error::InvalidInput("scales must be ≥ 1".into()));
    }
    let phases = sampler.phases(spec.omega)?;
    let results = map_collect(&phases, |&x| orbit_products(spec, x, scales, true));
    let total = phases.len();
    let mut kept_phases = Vec::with_capacity(total);
    let mut products = Vec::with_capacity(total);
    let mut dropped = 0;
    for (x, r) in phases.into_iter().zip(results) {
        match r {
            Ok(p) => {
                kept_phases.push(x);
                products.push(p);
            }
            Err(e) if e.is_numerical_degeneracy() => dropped += 1,
            Err(e) => return Err(e),
        }
    }
    if dropped as f64 > MAX_DROPPED_MEASURE * total as f64 || products.is_empty() {
        return Err(Error::TooManyDegenerateSamples { dropped, total });
    }
    Ok(PhaseProducts {
        phases: kept_phases,
        products,
        dropped,
        total,
    })
}

/// Quadrature estimate of `D = ∫ log|b(θ)| dθ` over the sampler phases.
pub fn mean_log_b(spec: &CocycleSpec, sampler: &PhaseSampler) -> Result<LogBMean> {
    let phases = sampler.phases(spec.omega)?;
    let logs: Vec<Option<f64>> = map_collect(&phases, |&x| {
        let v = spec.b.eval(x).abs();
        (v >= spec.b_floor).then(|| v.ln())
    });
    let total = logs.len();
    let kept: Vec<f64> = logs.into_iter().flatten().collect();
    let dropped = total - kept.len();
    if dropped as f64 > MAX_DROPPED_MEASURE * total as f64 || kept.is_empty() {
        return Err(Error::TooManyDegenerateSamples { dropped, total });
    }
    let (value, _) = mean_and_std_err(&kept);
    Ok(LogBMean {
        value,
        dropped_measure: dropped as f64 / total as f64,
    })
}

/// `D` on a fixed fine grid, used where a sampler-independent value is needed.
pub fn reference_d(spec: &CocycleSpec) -> Result<f64> {
    if spec.b.is_constant() {
        return Ok(spec.b.constant.abs().ln());
    }
    Ok(mean_log_b(spec, &PhaseSampler::grid(REFERENCE_D_GRID))?.value)
}

/// Estimate of `L_N(E)`.
pub fn finite_scale_l(spec: &CocycleSpec, n: usize, sampler: &PhaseSampler) -> Result<ScaleEstimate> {
    Ok(finite_scale_ladder(spec, &[n], sampler)?[0])
}

/// Estimates of `L_N(E)` at several ascending scales from shared orbit walks.
pub fn finite_scale_ladder(
    spec: &CocycleSpec,
    scales: &[usize],
    sampler: &PhaseSampler,
) -> Result<Vec<ScaleEstimate>> {
    let pp = sample_products(spec, scales, sampler)?;
    Ok((0..scales.len())
        .map(|s| pp.estimate(s, &pp.normalized(s)))
        .collect())
}

/// `J_N(E) = (1/N) ∫ log‖T_N(x, E)‖ dx`, computed from the raw products.
pub fn finite_scale_j(spec: &CocycleSpec, n: usize, sampler: &PhaseSampler) -> Result<ScaleEstimate> {
    let pp = sample_products(spec, &[n], sampler)?;
    Ok(pp.estimate(0, &pp.raw(0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitEstimate {
    /// `2 L_{2N} − L_N`.
    pub l_inf: f64,
    pub std_err: f64,
    pub n_used: usize,
    /// `|L_N − L_{2N}|`.
    pub doubling_gap: f64,
    /// False when `L_N − L_{2N} > L_N / 10`.
    pub ap_regime: bool,
    /// `L_{2N} ≤ L_N + 2(σ_N + σ_{2N})`.
    pub ladder_monotone: bool,
    pub ladder: Vec<ScaleEstimate>,
}

pub fn accelerated_limit(spec: &CocycleSpec, n: usize, sampler: &PhaseSampler) -> Result<LimitEstimate> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be ≥ 1".into()));
    }
    let ladder = finite_scale_ladder(spec, &[n, 2 * n], sampler)?;
    Ok(combine_doubling(n, ladder))
}

/// Accelerated limits for several base scales, sharing one orbit walk per
/// phase across all of `N` and `2N`.
pub fn accelerated_limits(spec: &CocycleSpec, scales: &[usize], sampler: &PhaseSampler) -> Result<Vec<LimitEstimate>> {
    if scales.is_empty() || scales.contains(&0) {
        return Err(Error::InvalidInput("scales must be ≥ 1".into()));
    }
    let mut all: Vec<usize> = scales.iter().flat_map(|&n| [n, 2 * n]).collect();
    all.sort_unstable();
    all.dedup();
    let ladder = finite_scale_ladder(spec, &all, sampler)?;
    let at = |n: usize| ladder[all.binary_search(&n).expect("scale present")];
    Ok(scales
        .iter()
        .map(|&n| combine_doubling(n, vec![at(n), at(2 * n)]))
        .collect())
}

fn combine_doubling(n: usize, ladder: Vec<ScaleEstimate>) -> LimitEstimate {
    let (lo, hi) = (ladder[0], ladder[1]);
    let drop = lo.l_n - hi.l_n;
    LimitEstimate {
        l_inf: 2.0 * hi.l_n - lo.l_n,
        std_err: (4.0 * hi.std_err * hi.std_err + lo.std_err * lo.std_err).sqrt(),
        n_used: n,
        doubling_gap: drop.abs(),
        ap_regime: drop <= lo.l_n / 10.0,
        ladder_monotone: -drop <= 2.0 * (lo.std_err + hi.std_err),
        ladder,
    }
}

/// `|L_N(E₀) − L_N(E₁)|`.
pub fn energy_perturbation_probe(
    spec: &CocycleSpec,
    e0: f64,
    e1: f64,
    n: usize,
    sampler: &PhaseSampler,
) -> Result<f64> {
    let l0 = finite_scale_l(&spec.with_energy(e0), n, sampler)?;
    if e0 == e1 {
        return Ok(0.0);
    }
    let l1 = finite_scale_l(&spec.with_energy(e1), n, sampler)?;
    Ok((l0.l_n - l1.l_n).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderOptions {
    /// Grid values of `L` at or below this are treated as zero.
    pub positivity_tol: f64,
    /// Pairs with `|E − E′|` above this fraction of the grid span are ignored.
    pub pair_cap_fraction: f64,
    /// Pairs with `|L(E) − L(E′)|` at or below this many combined standard
    /// errors are treated as unresolved and left out of the regression.
    pub noise_sigmas: f64,
}

impl Default for HolderOptions {
    fn default() -> Self {
        Self {
            positivity_tol: 1e-2,
            pair_cap_fraction: 0.25,
            noise_sigmas: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderFit {
    /// Slope clamped to `[0, 1]`.
    pub beta: f64,
    pub raw_slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub pair_count: usize,
}

/// Energy grid with `L(E)` estimates, the input of the regression.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyProfile {
    pub energies: Vec<f64>,
    pub limits: Vec<LimitEstimate>,
}

impl EnergyProfile {
    pub fn compute(spec: &CocycleSpec, energies: &[f64], n: usize, sampler: &PhaseSampler) -> Result<Self> {
        let limits = energies
            .iter()
            .map(|&e| accelerated_limit(&spec.with_energy(e), n, sampler))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            energies: energies.to_vec(),
            limits,
        })
    }

    /// Energies where the limit estimate is not above `tol`.
    pub fn non_positive(&self, tol: f64) -> Vec<f64> {
        self.energies
            .iter()
            .zip(&self.limits)
            .filter(|(_, l)| !(l.l_inf > tol))
            .map(|(&e, _)| e)
            .collect()
    }
}

/// Fits `log|L(E) − L(E′)| ≈ β log|E − E′| + c` over nearby grid pairs.
pub fn holder_fit(
    spec: &CocycleSpec,
    energies: &[f64],
    n: usize,
    sampler: &PhaseSampler,
    opts: &HolderOptions,
) -> Result<HolderFit> {
    check_pairs_possible(energies)?;
    let profile = EnergyProfile::compute(spec, energies, n, sampler)?;
    fit_profile(&profile, opts)
}

fn check_pairs_possible(energies: &[f64]) -> Result<()> {
    if energies.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} energy grid point(s): no pairs",
            energies.len()
        )));
    }
    Ok(())
}

pub fn fit_profile(profile: &EnergyProfile, opts: &HolderOptions) -> Result<HolderFit> {
    check_pairs_possible(&profile.energies)?;
    let bad = profile.non_positive(opts.positivity_tol);
    if !bad.is_empty() {
        return Err(Error::PositivityViolated { energies: bad });
    }
    let values: Vec<f64> = profile.limits.iter().map(|l| l.l_inf).collect();
    let errs: Vec<f64> = profile.limits.iter().map(|l| l.std_err).collect();
    fit_holder_exponent(&profile.energies, &values, &errs, opts)
}

/// Regression on explicit `(E, L(E), σ)` triples.
pub fn fit_holder_exponent(
    energies: &[f64],
    values: &[f64],
    std_errs: &[f64],
    opts: &HolderOptions,
) -> Result<HolderFit> {
    check_pairs_possible(energies)?;
    let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cap = opts.pair_cap_fraction * (hi - lo);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..energies.len() {
        for j in i + 1..energies.len() {
            let de = (energies[i] - energies[j]).abs();
            let dl = (values[i] - values[j]).abs();
            let noise = opts.noise_sigmas * (std_errs[i] + std_errs[j]);
            if de > 0.0 && de <= cap && dl > noise && dl > 0.0 {
                xs.push(de.ln());
                ys.push(dl.ln());
            }
        }
    }
    let fit = least_squares(&xs, &ys).ok_or_else(|| {
        Error::InsufficientData(format!("{} usable energy pair(s)", xs.len()))
    })?;
    Ok(HolderFit {
        beta: fit.slope.clamp(0.0, 1.0),
        raw_slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        window: (lo, hi),
        pair_count: xs.len(),
    })
}

pub(crate) struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`; `None` for fewer than
/// two points or constant `x`.
pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    if xs.len() < 2 {
        return None;
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}
