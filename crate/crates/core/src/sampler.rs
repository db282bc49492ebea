//! Phase samples discretizing integrals over the circle.

use crate::cocycle::{advance, GOLDEN};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    /// `offset + k/count mod 1`.
    EquispacedGrid,
    /// `offset + kω mod 1`, the Birkhoff orbit of the cocycle's rotation.
    OrbitBirkhoff,
    /// `offset + (k + U_k)/count mod 1`, `U_k` uniform from a seeded stream.
    StratifiedRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSampler {
    pub kind: SamplerKind,
    pub count: usize,
    pub offset: f64,
    pub seed: u64,
}

impl PhaseSampler {
    /// Equispaced grid with offset `(√5 − 1)/(2·count)`.
    pub fn grid(count: usize) -> Self {
        Self {
            kind: SamplerKind::EquispacedGrid,
            count,
            offset: default_offset(count),
            seed: 0,
        }
    }

    pub fn orbit(count: usize, start: f64) -> Self {
        Self {
            kind: SamplerKind::OrbitBirkhoff,
            count,
            offset: start,
            seed: 0,
        }
    }

    pub fn stratified(count: usize, seed: u64) -> Self {
        Self {
            kind: SamplerKind::StratifiedRandom,
            count,
            offset: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidInput("sampler count must be ≥ 1".into()));
        }
        if !self.offset.is_finite() {
            return Err(Error::InvalidInput("sampler offset must be finite".into()));
        }
        Ok(())
    }

    /// The sample phases in `[0, 1)`. `omega` is only used by the orbit kind.
    pub fn phases(&self, omega: f64) -> Result<Vec<f64>> {
        self.validate()?;
        let m = self.count as f64;
        let start = self.offset.rem_euclid(1.0);
        let phases = match self.kind {
            SamplerKind::EquispacedGrid => (0..self.count)
                .map(|k| (start + k as f64 / m).rem_euclid(1.0))
                .collect(),
            SamplerKind::OrbitBirkhoff => {
                let mut x = start;
                let mut out = Vec::with_capacity(self.count);
                for _ in 0..self.count {
                    out.push(x);
                    x = advance(x, omega);
                }
                out
            }
            SamplerKind::StratifiedRandom => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                (0..self.count)
                    .map(|k| {
                        let u: f64 = rng.gen();
                        (start + (k as f64 + u) / m).rem_euclid(1.0)
                    })
                    .collect()
            }
        };
        Ok(phases)
    }
}

pub fn default_offset(count: usize) -> f64 {
    GOLDEN / count.max(1) as f64
}
