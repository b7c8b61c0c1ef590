//! Expansion A: the classical phase-space average of e^w, log-expanded.
//!
//! Odd-order terms are carried as real factors (w1 = i v1, w3 = i v3), so
//! products such as w1² become −v1² and no complex arithmetic is needed.

use super::{CorrectionResult, Method, WeightTerms};
use crate::error::{Error, Result};
use crate::stats::jackknife;

/// Phase-space averages entering the A2/A4 assembly.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AMoments {
    pub w2: f64,
    pub v1_sq: f64,
    /// ⟨w2²⟩ − ⟨w2⟩²
    pub w2_var: f64,
    pub v1_4: f64,
    pub w4: f64,
    pub v1_v3: f64,
    /// ⟨v1² w2⟩ − ⟨v1²⟩⟨w2⟩
    pub v1_sq_w2_cov: f64,
}

/// Returns (A2, A4) for the given averages.
pub fn a_assemble(m: &AMoments, hbar: f64) -> (f64, f64) {
    let h2 = hbar * hbar;
    let h4 = h2 * h2;
    let a2 = h2 * (m.w2 - 0.5 * m.v1_sq);
    let fourth = 0.5 * m.w2_var + m.v1_4 / 24.0 - m.v1_sq * m.v1_sq / 8.0 + m.w4
        - m.v1_v3
        - 0.5 * m.v1_sq_w2_cov;
    (a2, a2 + h4 * fourth)
}

/// `samples[s][r]` holds the weight terms of snapshot `s`, momentum replica `r`.
pub fn expansion_a(
    samples: &[Vec<WeightTerms>],
    order: u8,
    hbar: f64,
    volume: f64,
    n_blocks: usize,
) -> Result<CorrectionResult> {
    let method = match order {
        2 => Method::A2,
        4 => Method::A4,
        _ => {
            return Err(Error::invalid(
                "order",
                format!("expansion A supports 2 or 4, got {order}"),
            ))
        }
    };
    let replicas = samples.iter().map(|s| s.len()).min().unwrap_or(0);
    if replicas == 0 {
        return Err(Error::invalid("momentum_replicas", "no momentum samples"));
    }
    if order == 4 && replicas < 2 {
        return Err(Error::invalid(
            "momentum_replicas",
            "order 4 needs at least 2 momentum replicas per configuration",
        ));
    }

    let count = samples.iter().map(|s| s.len()).sum::<usize>() as f64;
    let centre = samples.iter().flatten().map(|w| w.w2).sum::<f64>() / count;

    let mut cols = vec![Vec::with_capacity(samples.len()); 8];
    for snap in samples {
        let k = snap.len() as f64;
        let mut acc = [0.0; 8];
        for w in snap {
            let v1sq = w.v1 * w.v1;
            let w2c = w.w2 - centre;
            acc[0] += w.w2;
            acc[1] += v1sq;
            acc[2] += w2c * w2c;
            acc[3] += v1sq * v1sq;
            acc[4] += w.w4;
            acc[5] += w.v1 * w.v3;
            acc[6] += v1sq * w2c;
            acc[7] += w2c;
        }
        for (c, a) in cols.iter_mut().zip(acc) {
            c.push(a / k);
        }
    }
    let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    let est = jackknife(&refs, n_blocks, |m| {
        let moments = AMoments {
            w2: m[0],
            v1_sq: m[1],
            w2_var: m[2] - m[7] * m[7],
            v1_4: m[3],
            w4: m[4],
            v1_v3: m[5],
            v1_sq_w2_cov: m[6] - m[1] * m[7],
        };
        let (a2, a4) = a_assemble(&moments, hbar);
        if order == 2 {
            a2 / volume
        } else {
            a4 / volume
        }
    })?;
    Ok(CorrectionResult::from_estimate(method, est))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_particles_give_zero() {
        let s = vec![vec![WeightTerms::default(); 4]; 100];
        assert_eq!(expansion_a(&s, 2, 0.5, 10.0, 50).unwrap().value, 0.0);
        assert_eq!(expansion_a(&s, 4, 0.5, 10.0, 50).unwrap().value, 0.0);
    }

    #[test]
    fn single_replica_rejected_at_fourth_order() {
        let s = vec![vec![WeightTerms::default(); 1]; 100];
        assert!(expansion_a(&s, 4, 0.5, 10.0, 50).is_err());
        assert!(expansion_a(&s, 2, 0.5, 10.0, 50).is_ok());
        assert!(expansion_a(&s, 3, 0.5, 10.0, 50).is_err());
    }
}
