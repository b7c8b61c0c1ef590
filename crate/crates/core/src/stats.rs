//! Block averaging and jackknife error estimation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BLOCKS: usize = 50;

/// A mean with its one-standard-deviation error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_blocks: usize,
    /// Trailing samples dropped so every block has equal length.
    pub discarded: usize,
}

impl Estimate {
    /// Whether two estimates agree within `k` combined standard errors.
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        (self.mean - other.mean).abs() <= k * self.stderr.hypot(other.stderr)
    }
}

#[derive(Clone, Debug)]
pub struct BlockSeries<'a> {
    pub values: &'a [f64],
    pub n_blocks: usize,
}

impl<'a> BlockSeries<'a> {
    pub fn new(values: &'a [f64], n_blocks: usize) -> Result<Self> {
        if n_blocks == 0 || values.len() < n_blocks {
            return Err(Error::SeriesTooShort {
                len: values.len(),
                blocks: n_blocks,
            });
        }
        Ok(BlockSeries { values, n_blocks })
    }

    pub fn block_len(&self) -> usize {
        self.values.len() / self.n_blocks
    }

    pub fn discarded(&self) -> usize {
        self.values.len() - self.block_len() * self.n_blocks
    }

    pub fn block_means(&self) -> Vec<f64> {
        let b = self.block_len();
        self.values[..b * self.n_blocks]
            .chunks_exact(b)
            .map(|c| c.iter().sum::<f64>() / b as f64)
            .collect()
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean of block means and their standard deviation over √B.
pub fn block_stats(series: &BlockSeries) -> Estimate {
    let means = series.block_means();
    let b = means.len() as f64;
    let m = mean(&means);
    let stderr = if means.len() > 1 {
        let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1.0);
        (var / b).sqrt()
    } else {
        0.0
    };
    Estimate {
        mean: m,
        stderr,
        n_blocks: means.len(),
        discarded: series.discarded(),
    }
}

/// Convenience wrapper over [`block_stats`].
pub fn block_average(values: &[f64], n_blocks: usize) -> Result<Estimate> {
    Ok(block_stats(&BlockSeries::new(values, n_blocks)?))
}

/// Jackknife over blocks of a function of several series' means.
///
/// `f` receives the vector of means (one per series, same order as
/// `series`). The reported value is `f` of the full-sample means; the error
/// comes from the leave-one-block-out spread.
pub fn jackknife(
    series: &[&[f64]],
    n_blocks: usize,
    f: impl Fn(&[f64]) -> f64,
) -> Result<Estimate> {
    let len = series.first().map_or(0, |s| s.len());
    for s in series {
        if s.len() != len {
            return Err(Error::LengthMismatch(len, s.len()));
        }
    }
    let first = BlockSeries::new(series.first().copied().unwrap_or(&[]), n_blocks)?;
    let bl = first.block_len();
    let used = bl * n_blocks;
    let k = series.len();
    let mut block_sums = vec![vec![0.0; k]; n_blocks];
    let mut total = vec![0.0; k];
    for (s_idx, s) in series.iter().enumerate() {
        for (b, chunk) in s[..used].chunks_exact(bl).enumerate() {
            let sum: f64 = chunk.iter().sum();
            block_sums[b][s_idx] = sum;
            total[s_idx] += sum;
        }
    }
    let full: Vec<f64> = total.iter().map(|t| t / used as f64).collect();
    let value = f(&full);
    let mut est = Estimate {
        mean: value,
        stderr: 0.0,
        n_blocks,
        discarded: first.discarded(),
    };
    if n_blocks < 2 {
        return Ok(est);
    }
    let denom = (used - bl) as f64;
    // Leave-one-out sums are re-added from the other blocks rather than
    // subtracted from the total, which would cancel catastrophically when a
    // single block dominates (as in exponential averages).
    let loo: Vec<f64> = (0..n_blocks)
        .map(|skip| {
            let m: Vec<f64> = (0..k)
                .map(|s_idx| {
                    let sum: f64 = (0..n_blocks)
                        .filter(|&b| b != skip)
                        .map(|b| block_sums[b][s_idx])
                        .sum();
                    sum / denom
                })
                .collect();
            f(&m)
        })
        .collect();
    let lm = mean(&loo);
    let nb = n_blocks as f64;
    est.stderr = ((nb - 1.0) / nb * loo.iter().map(|x| (x - lm).powi(2)).sum::<f64>()).sqrt();
    Ok(est)
}

/// ⟨AB⟩ − ⟨A⟩⟨B⟩ with a jackknife-over-blocks error.
pub fn fluctuation_stats(a: &[f64], b: &[f64], n_blocks: usize) -> Result<Estimate> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    // Centering removes the large common offset before the cancellation.
    let ca = if a.is_empty() { 0.0 } else { mean(a) };
    let cb = if b.is_empty() { 0.0 } else { mean(b) };
    let a0: Vec<f64> = a.iter().map(|x| x - ca).collect();
    let b0: Vec<f64> = b.iter().map(|x| x - cb).collect();
    let ab: Vec<f64> = a0.iter().zip(&b0).map(|(x, y)| x * y).collect();
    jackknife(&[&a0, &b0, &ab], n_blocks, |m| m[2] - m[0] * m[1])
}

/// ln⟨e^x⟩ evaluated with a max-shift, plus the spread of the shifted
/// exponent so callers can flag overflow.
pub fn log_mean_exp(x: &[f64], n_blocks: usize) -> Result<(Estimate, f64)> {
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let e: Vec<f64> = x.iter().map(|v| (v - max).exp()).collect();
    let mut est = jackknife(&[&e], n_blocks, |m| m[0].ln())?;
    est.mean += max;
    Ok((est, max - min))
}
