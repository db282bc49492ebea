//! Command implementations. Each returns the text to emit and an exit code;
//! nothing is written until the whole computation has succeeded.

use crate::config::RunConfig;
use crate::CliError;
use qpjacobi::avalanche::{ap_verify, ApVerdict};
use qpjacobi::diophantine::{diophantine_margin, DiophantineReport};
use qpjacobi::ldt::{birkhoff_field, deviation_histogram_with, fit_rate_cells, synthetic_cells, RateCell, RateFit};
use qpjacobi::lyapunov::{accelerated_limits, fit_profile, EnergyProfile};
use qpjacobi::{Error, Mat2};
use serde::Serialize;
use std::fmt::Write as _;

/// What a successful (or verdict-bearing) command produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Main output: written to `--out` or standard output.
    pub primary: String,
    /// Secondary JSON document (the rate fit of `ldt`).
    pub secondary: Option<String>,
    pub exit_code: i32,
    /// Diagnostic for standard error when `exit_code` is non-zero.
    pub message: Option<String>,
}

impl Outcome {
    fn ok(primary: String) -> Self {
        Self {
            primary,
            secondary: None,
            exit_code: 0,
            message: None,
        }
    }
}

/// Floats in CSV output: 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub const LYAPUNOV_HEADER: &str = "energy,n,l_n,std_err,l_accel,doubling_gap,dropped_measure";

/// One row per `(E, N)`, energies ascending, scales in configured order.
pub fn lyapunov(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.cocycle()?;
    let sampler = cfg.sampler();
    let mut out = String::from(LYAPUNOV_HEADER);
    out.push('\n');
    for e in cfg.energies() {
        let limits = accelerated_limits(&spec.with_energy(e), &cfg.scales, &sampler)?;
        for lim in limits {
            let base = lim.ladder[0];
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_float(e),
                lim.n_used,
                fmt_float(base.l_n),
                fmt_float(base.std_err),
                fmt_float(lim.l_inf),
                fmt_float(lim.doubling_gap),
                fmt_float(base.dropped_measure.max(lim.ladder[1].dropped_measure)),
            );
        }
    }
    Ok(Outcome::ok(out))
}

#[derive(Debug, Serialize)]
struct HolderReport {
    beta: Option<f64>,
    intercept: Option<f64>,
    r_squared: Option<f64>,
    window: (f64, f64),
    pair_count: usize,
    positivity_ok: bool,
    raw_slope: Option<f64>,
    n: usize,
    offending_energies: Vec<f64>,
}

/// Hölder regression over the energy grid at the first configured scale.
pub fn holder(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let energies = cfg.energies();
    if energies.len() < 8 {
        return Err(CliError::Config(format!(
            "holder needs energy.count ≥ 8, got {}",
            energies.len()
        )));
    }
    let n = cfg.scales[0];
    let spec = cfg.cocycle()?;
    let profile = EnergyProfile::compute(&spec, &energies, n, &cfg.sampler())?;
    let window = (cfg.energy_low, cfg.energy_high);
    let bad = profile.non_positive(cfg.holder.positivity_tol);
    if !bad.is_empty() {
        let report = HolderReport {
            beta: None,
            intercept: None,
            r_squared: None,
            window,
            pair_count: 0,
            positivity_ok: false,
            raw_slope: None,
            n,
            offending_energies: bad.clone(),
        };
        return Ok(Outcome {
            primary: to_json(&report),
            secondary: None,
            exit_code: 4,
            message: Some(qpjacobi::Error::PositivityViolated { energies: bad }.to_string()),
        });
    }
    let fit = fit_profile(&profile, &cfg.holder)?;
    let report = HolderReport {
        beta: Some(fit.beta),
        intercept: Some(fit.intercept),
        r_squared: Some(fit.r_squared),
        window: fit.window,
        pair_count: fit.pair_count,
        positivity_ok: true,
        raw_slope: Some(fit.raw_slope),
        n,
        offending_energies: Vec::new(),
    };
    Ok(Outcome::ok(to_json(&report)))
}

pub const LDT_HEADER: &str = "n,delta,measure,samples";

fn single_energy(cfg: &RunConfig, command: &str) -> Result<(), CliError> {
    if cfg.energy_count != 1 {
        return Err(CliError::Config(format!("{command} runs at a single energy; set energy.count = 1")));
    }
    Ok(())
}

/// Deviation measures per `(N, δ)` and the fitted rate. With
/// `synthetic_rate = Some(c)` the measures are replaced by `exp(−cδ²N)` and
/// no cocycle is evaluated.
pub fn ldt(cfg: &RunConfig, synthetic_rate: Option<f64>) -> Result<Outcome, CliError> {
    single_energy(cfg, "ldt")?;
    if cfg.scales.len() < 2 {
        return Err(CliError::Config("ldt needs at least 2 scales".into()));
    }
    let cells: Vec<RateCell> = match synthetic_rate {
        Some(c) => {
            if !(c > 0.0) || !c.is_finite() {
                return Err(CliError::Config(format!("synthetic rate {c} must be positive")));
            }
            synthetic_cells(c, &cfg.deltas, &cfg.scales, cfg.sampler_count)
        }
        None => {
            let spec = cfg.cocycle()?;
            let sampler = cfg.sampler();
            let mut cells = Vec::new();
            for &n in &cfg.scales {
                let h = deviation_histogram_with(&spec, n, &sampler, &cfg.deltas, None, cfg.ldt_bins)?;
                cells.extend(h.deviation_measures().into_iter().map(|(delta, measure)| RateCell {
                    delta,
                    n,
                    measure,
                    samples: h.samples,
                }));
            }
            cells
        }
    };
    let fit: RateFit = fit_rate_cells(&cells)?;
    let mut csv = String::from(LDT_HEADER);
    csv.push('\n');
    for c in &cells {
        let _ = writeln!(csv, "{},{},{},{}", c.n, fmt_float(c.delta), fmt_float(c.measure), c.samples);
    }
    Ok(Outcome {
        primary: csv,
        secondary: Some(to_json(&fit)),
        exit_code: 0,
        message: None,
    })
}

pub fn diophantine(omega: f64, alpha: f64, n_max: u64) -> Result<Outcome, CliError> {
    let report: DiophantineReport = diophantine_margin(omega, alpha, n_max)?;
    Ok(Outcome::ok(to_json(&report)))
}

/// One matrix per line, four whitespace-separated entries in row-major
/// order. Blank lines and `#` comments are skipped.
pub fn parse_matrix_file(text: &str) -> Result<Vec<Mat2>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(|| CliError::Config(format!("matrix line {}: bad number", i + 1)))?;
        if vals.len() != 4 {
            return Err(CliError::Config(format!(
                "matrix line {}: expected 4 entries, got {}",
                i + 1,
                vals.len()
            )));
        }
        out.push(Mat2::new(vals[0], vals[1], vals[2], vals[3]));
    }
    Ok(out)
}

pub fn ap_verify_text(text: &str) -> Result<Outcome, CliError> {
    let matrices = parse_matrix_file(text)?;
    let verdict: ApVerdict = ap_verify(&matrices)?;
    Ok(Outcome::ok(to_json(&verdict)))
}

#[derive(Debug, Serialize)]
struct BirkhoffSummary {
    n: usize,
    energy: f64,
    d: f64,
    samples: usize,
    mean: f64,
    std_err: f64,
    min: f64,
    max: f64,
    deltas: Vec<f64>,
    deviation_measures: Vec<f64>,
    dropped_measure: f64,
}

/// Statistics of `F_N` at the first configured scale.
pub fn birkhoff(cfg: &RunConfig) -> Result<Outcome, CliError> {
    single_energy(cfg, "birkhoff")?;
    let spec = cfg.cocycle()?;
    let n = cfg.scales[0];
    let f = birkhoff_field(&spec, n, &cfg.sampler(), &cfg.deltas)?;
    let summary = BirkhoffSummary {
        n,
        energy: spec.energy,
        d: f.d,
        samples: f.f_values.len(),
        mean: f.mean,
        std_err: f.std_err,
        min: f.min,
        max: f.max,
        deltas: f.deltas,
        deviation_measures: f.deviation_measures,
        dropped_measure: f.dropped_measure,
    };
    Ok(Outcome::ok(to_json(&summary)))
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numerics(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(fmt_float(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_float(-0.0), "-0.0000000000000000e0");
    }

    #[test]
    fn matrix_file_parsing() {
        let m = parse_matrix_file("1 0 0 1\n# c\n\n2 0.5 -1 3e-1\n").unwrap();
        assert_eq!(m, vec![Mat2::IDENTITY, Mat2::new(2.0, 0.5, -1.0, 0.3)]);
        assert!(parse_matrix_file("1 0 0").is_err());
        assert!(parse_matrix_file("1 0 0 x").is_err());
    }

    #[test]
    fn rotation_row() {
        let cfg = RunConfig::parse("scales = 16\nsampler.count = 64").unwrap();
        let out = lyapunov(&cfg).unwrap();
        let lines: Vec<&str> = out.primary.lines().collect();
        assert_eq!(lines[0], LYAPUNOV_HEADER);
        let cols: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols[0], 0.0);
        assert!(cols[2].abs() <= 1e-12);
    }

    #[test]
    fn synthetic_ldt_recovers_rate() {
        let cfg = RunConfig::parse("scales = 128, 256, 512\ndeltas = 0.05, 0.1").unwrap();
        let out = ldt(&cfg, Some(0.5)).unwrap();
        let fit: serde_json::Value = serde_json::from_str(out.secondary.as_ref().unwrap()).unwrap();
        assert!((fit["fitted_c"].as_f64().unwrap() - 0.5).abs() <= 1e-6);
        assert_eq!(out.primary.lines().count(), 7);
    }
}
