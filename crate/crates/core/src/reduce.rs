//! Order-fixed summation and phase-parallel mapping.
//!
//! Sums use a fixed binary tree over the input slice, so the result depends
//! only on the data, never on how many threads evaluated it.

/// Slices at or below this length are summed left to right.
const LEAF: usize = 32;

/// Below this length the parallel tree falls back to the sequential one.
#[cfg(feature = "parallel")]
const PAR_SPLIT: usize = 1 << 13;

/// Running sum with Neumaier compensation, for long sequential
/// accumulations such as the log-scale of a transfer product.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new(v: f64) -> Self {
        Self { sum: v, comp: 0.0 }
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if !t.is_finite() {
            self.sum = t;
            self.comp = 0.0;
            return;
        }
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Pairwise (tree) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().fold(0.0, |acc, &v| acc + v);
    }
    let (lo, hi) = xs.split_at(xs.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}

/// Same tree as [`pairwise_sum`], with the two halves of large slices
/// summed concurrently. Bit-identical to the sequential version.
#[cfg(feature = "parallel")]
pub fn par_pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAR_SPLIT {
        return pairwise_sum(xs);
    }
    let (lo, hi) = xs.split_at(xs.len() / 2);
    let (a, b) = rayon::join(|| par_pairwise_sum(lo), || par_pairwise_sum(hi));
    a + b
}

#[cfg(not(feature = "parallel"))]
pub fn par_pairwise_sum(xs: &[f64]) -> f64 {
    pairwise_sum(xs)
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    par_pairwise_sum(xs) / xs.len() as f64
}

/// Sample mean and its standard error `s / √m`.
pub fn mean_and_std_err(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|v| (v - m) * (v - m)).collect();
    let var = par_pairwise_sum(&sq) / (xs.len() - 1) as f64;
    (m, (var / xs.len() as f64).sqrt())
}

/// Applies `f` to every input, preserving order. Runs on the current rayon
/// pool when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn map_collect<I, T, F>(inputs: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    use rayon::prelude::*;
    inputs.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<I, T, F>(inputs: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    map_collect_seq(inputs, f)
}

pub fn map_collect_seq<I, T, F>(inputs: &[I], f: F) -> Vec<T>
where
    F: Fn(&I) -> T,
{
    inputs.iter().map(f).collect()
}
