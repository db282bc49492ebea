//! Flat `key = value` run configuration.
//!
//! One assignment per line; `#` starts a comment. Keys and defaults:
//!
//! | key | default |
//! |-----|---------|
//! | `cocycle.a.const`, `cocycle.a.cos.K`, `cocycle.a.sin.K` | `a ≡ 0` |
//! | `cocycle.b.const`, `cocycle.b.cos.K`, `cocycle.b.sin.K` | `b ≡ 1` when no `cocycle.b.*` key is given, otherwise unset coefficients are 0 |
//! | `cocycle.omega` (decimal, `golden` or `sqrt2m1`) | `golden` |
//! | `cocycle.alpha` | `2` |
//! | `cocycle.b_floor` | `1e-300` |
//! | `scales` (comma separated) | `64` |
//! | `energy.low`, `energy.high`, `energy.count` | `0`, `0`, `1` |
//! | `sampler.kind` (`grid`, `orbit`, `stratified`) | `grid` |
//! | `sampler.count` | `1024` |
//! | `sampler.offset` | `(√5 − 1)/(2·count)` for the grid, `0` otherwise |
//! | `sampler.seed` | value of `seed` |
//! | `deltas` (comma separated) | `0.05, 0.1, 0.2` |
//! | `output` | standard output |
//! | `seed` | `0` |
//! | `holder.positivity_tol`, `holder.pair_cap_fraction`, `holder.noise_sigmas` | `0.01`, `0.25`, `0` |
//! | `ldt.bins` | `64` |
//! | `diophantine.n_max` | `10000` |
//!
//! Unknown keys, repeated keys and unparsable values are errors.

use qpjacobi::lyapunov::HolderOptions;
use qpjacobi::sampler::default_offset;
use qpjacobi::{CocycleSpec, FourierSeries, PhaseSampler, SamplerKind, GOLDEN, SQRT2_MINUS_1};
use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("config line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub a: FourierSeries,
    pub b: FourierSeries,
    pub omega: f64,
    pub alpha: f64,
    pub b_floor: f64,
    pub scales: Vec<usize>,
    pub energy_low: f64,
    pub energy_high: f64,
    pub energy_count: usize,
    pub sampler_kind: SamplerKind,
    pub sampler_count: usize,
    pub sampler_offset: Option<f64>,
    pub sampler_seed: Option<u64>,
    pub deltas: Vec<f64>,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub holder: HolderOptions,
    pub ldt_bins: usize,
    pub n_max: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            a: FourierSeries::constant(0.0),
            b: FourierSeries::constant(1.0),
            omega: GOLDEN,
            alpha: 2.0,
            b_floor: qpjacobi::cocycle::DEFAULT_B_FLOOR,
            scales: vec![64],
            energy_low: 0.0,
            energy_high: 0.0,
            energy_count: 1,
            sampler_kind: SamplerKind::EquispacedGrid,
            sampler_count: 1024,
            sampler_offset: None,
            sampler_seed: None,
            deltas: vec![0.05, 0.1, 0.2],
            output: None,
            seed: 0,
            holder: HolderOptions::default(),
            ldt_bins: qpjacobi::ldt::DEFAULT_BINS,
            n_max: 10_000,
        }
    }
}

fn parse_f64(v: &str) -> Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
    if !x.is_finite() {
        return Err(format!("`{v}` is not finite"));
    }
    Ok(x)
}

fn parse_int<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("`{v}` is not a non-negative integer"))
}

fn parse_list<T>(v: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let items: Vec<T> = v.split(',').map(|s| item(s.trim())).collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

/// Decimal, `golden` or `sqrt2m1`.
pub fn parse_omega(v: &str) -> Result<f64, String> {
    match v {
        "golden" => Ok(GOLDEN),
        "sqrt2m1" => Ok(SQRT2_MINUS_1),
        _ => parse_f64(v),
    }
}

fn parse_kind(v: &str) -> Result<SamplerKind, String> {
    match v {
        "grid" => Ok(SamplerKind::EquispacedGrid),
        "orbit" => Ok(SamplerKind::OrbitBirkhoff),
        "stratified" => Ok(SamplerKind::StratifiedRandom),
        _ => Err(format!("unknown sampler kind `{v}`")),
    }
}

fn kind_name(k: SamplerKind) -> &'static str {
    match k {
        SamplerKind::EquispacedGrid => "grid",
        SamplerKind::OrbitBirkhoff => "orbit",
        SamplerKind::StratifiedRandom => "stratified",
    }
}

/// Sets coefficient `cos.K` / `sin.K` / `const` of a series.
fn set_coeff(series: &mut FourierSeries, rest: &str, value: f64) -> Result<(), String> {
    if rest == "const" {
        series.constant = value;
        return Ok(());
    }
    let (part, k) = rest
        .split_once('.')
        .ok_or_else(|| format!("unknown coefficient `{rest}`"))?;
    let k: usize = k.parse().map_err(|_| format!("bad frequency `{k}`"))?;
    if k == 0 {
        return Err("frequency must be ≥ 1; use `const`".into());
    }
    let coeffs = match part {
        "cos" => &mut series.cosine_coeffs,
        "sin" => &mut series.sine_coeffs,
        _ => return Err(format!("unknown coefficient `{rest}`")),
    };
    if coeffs.len() < k {
        coeffs.resize(k, 0.0);
    }
    coeffs[k - 1] = value;
    Ok(())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        let mut b_given = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError { line: i + 1, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(err(format!("key `{key}` given twice")));
            }
            if key.starts_with("cocycle.b.") && !b_given {
                b_given = true;
                cfg.b = FourierSeries::constant(0.0);
            }
            cfg.assign(key, value).map_err(err)?;
        }
        Ok(cfg)
    }

    fn assign(&mut self, key: &str, v: &str) -> Result<(), String> {
        if let Some(rest) = key.strip_prefix("cocycle.a.") {
            return set_coeff(&mut self.a, rest, parse_f64(v)?);
        }
        if let Some(rest) = key.strip_prefix("cocycle.b.") {
            return set_coeff(&mut self.b, rest, parse_f64(v)?);
        }
        match key {
            "cocycle.omega" => self.omega = parse_omega(v)?,
            "cocycle.alpha" => self.alpha = parse_f64(v)?,
            "cocycle.b_floor" => self.b_floor = parse_f64(v)?,
            "scales" => self.scales = parse_list(v, parse_int)?,
            "energy.low" => self.energy_low = parse_f64(v)?,
            "energy.high" => self.energy_high = parse_f64(v)?,
            "energy.count" => self.energy_count = parse_int(v)?,
            "sampler.kind" => self.sampler_kind = parse_kind(v)?,
            "sampler.count" => self.sampler_count = parse_int(v)?,
            "sampler.offset" => self.sampler_offset = Some(parse_f64(v)?),
            "sampler.seed" => self.sampler_seed = Some(parse_int(v)?),
            "deltas" => self.deltas = parse_list(v, parse_f64)?,
            "output" => self.output = Some(PathBuf::from(v)),
            "seed" => self.seed = parse_int(v)?,
            "holder.positivity_tol" => self.holder.positivity_tol = parse_f64(v)?,
            "holder.pair_cap_fraction" => self.holder.pair_cap_fraction = parse_f64(v)?,
            "holder.noise_sigmas" => self.holder.noise_sigmas = parse_f64(v)?,
            "ldt.bins" => self.ldt_bins = parse_int(v)?,
            "diophantine.n_max" => self.n_max = parse_int(v)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Every field written explicitly, so that `parse(to_text())` equals
    /// `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (name, f) in [("a", &self.a), ("b", &self.b)] {
            let _ = writeln!(s, "cocycle.{name}.const = {:?}", f.constant);
            for (k, c) in f.cosine_coeffs.iter().enumerate() {
                let _ = writeln!(s, "cocycle.{name}.cos.{} = {c:?}", k + 1);
            }
            for (k, c) in f.sine_coeffs.iter().enumerate() {
                let _ = writeln!(s, "cocycle.{name}.sin.{} = {c:?}", k + 1);
            }
        }
        let join = |v: Vec<String>| v.join(", ");
        let _ = writeln!(s, "cocycle.omega = {:?}", self.omega);
        let _ = writeln!(s, "cocycle.alpha = {:?}", self.alpha);
        let _ = writeln!(s, "cocycle.b_floor = {:?}", self.b_floor);
        let _ = writeln!(s, "scales = {}", join(self.scales.iter().map(|n| n.to_string()).collect()));
        let _ = writeln!(s, "energy.low = {:?}", self.energy_low);
        let _ = writeln!(s, "energy.high = {:?}", self.energy_high);
        let _ = writeln!(s, "energy.count = {}", self.energy_count);
        let _ = writeln!(s, "sampler.kind = {}", kind_name(self.sampler_kind));
        let _ = writeln!(s, "sampler.count = {}", self.sampler_count);
        if let Some(o) = self.sampler_offset {
            let _ = writeln!(s, "sampler.offset = {o:?}");
        }
        if let Some(seed) = self.sampler_seed {
            let _ = writeln!(s, "sampler.seed = {seed}");
        }
        let _ = writeln!(s, "deltas = {}", join(self.deltas.iter().map(|d| format!("{d:?}")).collect()));
        if let Some(p) = &self.output {
            let _ = writeln!(s, "output = {}", p.display());
        }
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "holder.positivity_tol = {:?}", self.holder.positivity_tol);
        let _ = writeln!(s, "holder.pair_cap_fraction = {:?}", self.holder.pair_cap_fraction);
        let _ = writeln!(s, "holder.noise_sigmas = {:?}", self.holder.noise_sigmas);
        let _ = writeln!(s, "ldt.bins = {}", self.ldt_bins);
        let _ = writeln!(s, "diophantine.n_max = {}", self.n_max);
        s
    }

    /// Cocycle at `energy.low`.
    pub fn cocycle(&self) -> qpjacobi::Result<CocycleSpec> {
        Ok(CocycleSpec::new(self.a.clone(), self.b.clone(), self.omega, self.energy_low)?
            .with_b_floor(self.b_floor))
    }

    pub fn sampler(&self) -> PhaseSampler {
        let offset = self.sampler_offset.unwrap_or(match self.sampler_kind {
            SamplerKind::EquispacedGrid => default_offset(self.sampler_count),
            _ => 0.0,
        });
        PhaseSampler {
            kind: self.sampler_kind,
            count: self.sampler_count,
            offset,
            seed: self.sampler_seed.unwrap_or(self.seed),
        }
    }

    /// `count` equispaced energies from `low` to `high` inclusive.
    pub fn energies(&self) -> Vec<f64> {
        match self.energy_count {
            0 => Vec::new(),
            1 => vec![self.energy_low],
            c => {
                let step = (self.energy_high - self.energy_low) / (c - 1) as f64;
                (0..c).map(|k| self.energy_low + step * k as f64).collect()
            }
        }
    }

    /// Checks that do not depend on the command.
    pub fn validate(&self) -> Result<(), String> {
        if self.scales.contains(&0) {
            return Err("scales must be ≥ 1".into());
        }
        if self.energy_count == 0 {
            return Err("energy.count must be ≥ 1".into());
        }
        if self.energy_high < self.energy_low {
            return Err("energy.high is below energy.low".into());
        }
        if self.sampler_count == 0 {
            return Err("sampler.count must be ≥ 1".into());
        }
        if !(self.b_floor >= 0.0) {
            return Err("cocycle.b_floor must be ≥ 0".into());
        }
        if self.deltas.iter().any(|&d| !(d > 0.0)) {
            return Err("deltas must be positive".into());
        }
        self.cocycle().map_err(|e| e.to_string())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_empty_text() {
        let c = RunConfig::parse("# nothing\n\n").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.energies(), vec![0.0]);
        assert_eq!(c.sampler().offset, GOLDEN / 1024.0);
    }

    #[test]
    fn parses_almost_mathieu() {
        let c = RunConfig::parse(
            "cocycle.a.cos.1 = 6.0\ncocycle.omega = golden  # λ = 3\nscales = 64, 128\n\
             energy.low = -8\nenergy.high = 8\nenergy.count = 161\n",
        )
        .unwrap();
        assert_eq!(c.a.cosine_coeffs, vec![6.0]);
        assert_eq!(c.b, FourierSeries::constant(1.0));
        assert_eq!(c.scales, vec![64, 128]);
        let e = c.energies();
        assert_eq!(e.len(), 161);
        assert_eq!((e[0], e[80], e[160]), (-8.0, 0.0, 8.0));
    }

    #[test]
    fn b_keys_replace_default() {
        let c = RunConfig::parse("cocycle.b.cos.2 = 0.5").unwrap();
        assert_eq!(c.b, FourierSeries::new(0.0, vec![0.0, 0.5], vec![]));
    }

    #[test]
    fn rejects_unknown_and_repeated_keys() {
        let e = RunConfig::parse("cocycle.c.const = 1").unwrap_err();
        assert!(e.message.contains("unknown"));
        assert_eq!(RunConfig::parse("seed = 1\nseed = 2").unwrap_err().line, 2);
        assert!(RunConfig::parse("scales = 64, x").is_err());
        assert!(RunConfig::parse("cocycle.a.cos.0 = 1").is_err());
        assert!(RunConfig::parse("energy.low = nan").is_err());
        assert!(RunConfig::parse("just words").is_err());
    }

    #[test]
    fn round_trip() {
        let text = "cocycle.a.const = 0.25\ncocycle.a.sin.3 = -1.5\ncocycle.b.const = 2\n\
                    cocycle.b.cos.1 = 1\ncocycle.omega = sqrt2m1\nsampler.kind = stratified\n\
                    sampler.seed = 9\nsampler.offset = 0.1\ndeltas = 0.3\noutput = out.csv\n\
                    holder.noise_sigmas = 2\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
        let d = RunConfig::default();
        assert_eq!(RunConfig::parse(&d.to_text()).unwrap(), d);
    }
}
