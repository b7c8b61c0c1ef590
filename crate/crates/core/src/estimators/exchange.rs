//! Permutation-loop (symmetrization) terms: dimer and trimer.

use std::f64::consts::PI;

use super::{CorrectionResult, Method, QuantumParams};
use crate::error::{Error, Result};
use crate::stats::jackknife;
use crate::system::{minimum_image, CellList, Configuration, Vec3};

/// Pairs farther apart than 6Λ carry weight below e⁻²²⁶ and are skipped.
pub fn exchange_cutoff(r_cut: f64, lambda: f64) -> f64 {
    r_cut.min(6.0 * lambda)
}

fn cells_for(config: &Configuration, cutoff: f64) -> Result<CellList> {
    let c = cutoff.min(0.5 * config.box_edge * (1.0 - 1e-12));
    CellList::new(config, c)
}

/// sign · Σ_{j<k} exp(−2π q_jk²/Λ²) / V for one configuration.
pub fn dimer_zeroth(config: &Configuration, lambda: f64, sign: f64, cutoff: f64) -> Result<f64> {
    if !(lambda > 0.0) || !(cutoff > 0.0) {
        return Ok(0.0);
    }
    let cells = cells_for(config, cutoff)?;
    let k = 2.0 * PI / (lambda * lambda);
    let mut sum = 0.0;
    cells.for_each_pair(config, |_, _, r| sum += (-k * r.norm_squared()).exp());
    Ok(sign * sum / config.volume())
}

/// 2 · Σ_{j<k<l} exp(−π(q_jk² + q_kl² + q_jl²)/Λ²) / V for one configuration.
/// Both 3-cycles are even permutations, so no statistics sign enters.
pub fn trimer_zeroth(config: &Configuration, lambda: f64, cutoff: f64) -> Result<f64> {
    if !(lambda > 0.0) || !(cutoff > 0.0) {
        return Ok(0.0);
    }
    let cells = cells_for(config, cutoff)?;
    let rc2 = cells.r_cut().powi(2);
    let mut upper: Vec<Vec<(usize, f64)>> = vec![Vec::new(); config.len()];
    cells.for_each_pair(config, |i, j, r| upper[i].push((j, r.norm_squared())));
    for nb in &mut upper {
        nb.sort_unstable_by_key(|e| e.0);
    }
    let k = PI / (lambda * lambda);
    let mut sum = 0.0;
    for nb in &upper {
        for (a, &(j, rij2)) in nb.iter().enumerate() {
            for &(l, ril2) in &nb[a + 1..] {
                let rjl2 =
                    minimum_image(config.positions[j] - config.positions[l], config.box_edge)
                        .norm_squared();
                if rjl2 <= rc2 {
                    sum += (-k * (rij2 + ril2 + rjl2)).exp();
                }
            }
        }
    }
    Ok(2.0 * sum / config.volume())
}

/// Per-configuration ingredients of the weighted dimer: the B2 monomer
/// exponent and the pair sum with effective gradients.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DimerWeightedSample {
    pub exponent: f64,
    pub pair_sum: f64,
}

/// Pair sum Σ_{j<k} exp(−2πr²/Λ² + (β/2)(∇_jU − ∇_kU)·q_jk), together with
/// the monomer exponent `b2_exponent`.
pub fn dimer_weighted_sample(
    config: &Configuration,
    grad: &[Vec3],
    b2_exponent: f64,
    q: &QuantumParams,
    cutoff: f64,
) -> Result<DimerWeightedSample> {
    let lambda_sq = q.lambda_sq();
    if !(lambda_sq > 0.0) || !(cutoff > 0.0) {
        return Ok(DimerWeightedSample {
            exponent: b2_exponent,
            pair_sum: 0.0,
        });
    }
    let cells = cells_for(config, cutoff)?;
    let k = 2.0 * PI / lambda_sq;
    let half_beta = 0.5 * q.beta;
    let mut sum = 0.0;
    cells.for_each_pair(config, |i, j, r| {
        sum += (-k * r.norm_squared() + half_beta * (grad[i] - grad[j]).dot(&r)).exp();
    });
    Ok(DimerWeightedSample {
        exponent: b2_exponent,
        pair_sum: sum,
    })
}

/// sign · ⟨e^x S⟩ / ⟨e^x⟩ / V with a max-shift on x.
pub fn dimer_weighted(
    samples: &[DimerWeightedSample],
    sign: f64,
    volume: f64,
    n_blocks: usize,
    state: &str,
) -> Result<CorrectionResult> {
    let max = samples
        .iter()
        .map(|s| s.exponent)
        .fold(f64::NEG_INFINITY, f64::max);
    let min = samples
        .iter()
        .map(|s| s.exponent)
        .fold(f64::INFINITY, f64::min);
    if max - min > super::expansion_b::MAX_EXPONENT_RANGE {
        return Err(Error::Overflow {
            method: "dimerW",
            state: state.to_string(),
            range: max - min,
        });
    }
    if let Some(bad) = samples.iter().find(|s| !s.pair_sum.is_finite()) {
        return Err(Error::Overflow {
            method: "dimerW",
            state: state.to_string(),
            range: bad.pair_sum,
        });
    }
    let w: Vec<f64> = samples.iter().map(|s| (s.exponent - max).exp()).collect();
    let ws: Vec<f64> = samples
        .iter()
        .zip(&w)
        .map(|(s, w)| w * s.pair_sum)
        .collect();
    let est = jackknife(&[&ws, &w], n_blocks, |m| sign * m[0] / m[1] / volume)?;
    Ok(CorrectionResult::from_estimate(Method::DimerW, est))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_dimer(c: &Configuration, lambda: f64) -> f64 {
        let mut s = 0.0;
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                s += (-2.0 * PI * c.separation(i, j).norm_squared() / (lambda * lambda)).exp();
            }
        }
        s / c.volume()
    }

    #[test]
    fn coincident_pair_contributes_sign() {
        let p = Vec3::new(1.0, 1.0, 1.0);
        let c = Configuration::new(vec![p, p], 10.0).unwrap();
        assert!((dimer_zeroth(&c, 0.5, -1.0, 3.0).unwrap() * 1000.0 + 1.0).abs() < 1e-12);
    }

    #[test]
    fn coincident_triple_contributes_two() {
        let p = Vec3::new(1.0, 1.0, 1.0);
        let c = Configuration::new(vec![p, p, p], 10.0).unwrap();
        assert!((trimer_zeroth(&c, 0.5, 3.0).unwrap() * 1000.0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn classical_limit_kills_exchange() {
        let c = Configuration::simple_cubic(27, 3.0).unwrap();
        assert_eq!(dimer_zeroth(&c, 0.0, 1.0, 1.4).unwrap(), 0.0);
        assert_eq!(trimer_zeroth(&c, 0.0, 1.4).unwrap(), 0.0);
    }

    #[test]
    fn matches_brute_force_with_wide_cutoff() {
        let mut c = Configuration::simple_cubic(64, 6.0).unwrap();
        for (k, p) in c.positions.iter_mut().enumerate() {
            *p += Vec3::new(
                0.13 * (k % 5) as f64,
                -0.07 * (k % 3) as f64,
                0.05 * (k % 7) as f64,
            );
        }
        let c = Configuration::new(c.positions, 6.0).unwrap();
        let lambda = 0.4;
        let cut = 0.5 * c.box_edge * (1.0 - 1e-12);
        let a = dimer_zeroth(&c, lambda, 1.0, cut).unwrap();
        let b = brute_dimer(&c, lambda);
        assert!((a - b).abs() <= 1e-14 * b.abs().max(1e-300));
    }

    #[test]
    fn free_weighted_dimer_reduces_to_zeroth() {
        let c = Configuration::simple_cubic(64, 5.0).unwrap();
        let q = QuantumParams::new(1.0, 1.0, 0.6);
        let lambda = q.lambda_sq().sqrt();
        let grad = vec![Vec3::zeros(); 64];
        let s = dimer_weighted_sample(&c, &grad, 0.0, &q, 2.0).unwrap();
        let d0 = dimer_zeroth(&c, lambda, 1.0, 2.0).unwrap();
        let res = dimer_weighted(&vec![s; 50], 1.0, c.volume(), 50, "").unwrap();
        assert!((res.value - d0).abs() < 1e-15 * d0.abs());
    }
}
