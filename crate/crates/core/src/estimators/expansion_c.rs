//! Expansion C: cumulant expansion of the momentum-averaged exponent.

use super::{tilde_terms_with, CorrectionResult, Method, QuantumParams, TildeCoefficients};
use crate::error::{Error, Result};
use crate::fields::FieldScalars;
use crate::stats::jackknife;

/// Returns (C2, C4) from ⟨w̃2⟩, Var(w̃2) and ⟨w̃4⟩.
pub fn c_assemble(mean_tw2: f64, var_tw2: f64, mean_tw4: f64, hbar: f64) -> (f64, f64) {
    let h2 = hbar * hbar;
    let c2 = h2 * mean_tw2;
    (c2, c2 + h2 * h2 * (0.5 * var_tw2 + mean_tw4))
}

pub fn expansion_c(
    series: &[FieldScalars],
    order: u8,
    q: &QuantumParams,
    volume: f64,
    n_blocks: usize,
) -> Result<CorrectionResult> {
    expansion_c_with(series, order, q, volume, n_blocks, &TildeCoefficients::default())
}

/// [`expansion_c`] with explicit ħ⁴ prefactors.
pub fn expansion_c_with(
    series: &[FieldScalars],
    order: u8,
    q: &QuantumParams,
    volume: f64,
    n_blocks: usize,
    coeffs: &TildeCoefficients,
) -> Result<CorrectionResult> {
    let method = match order {
        2 => Method::C2,
        4 => Method::C4,
        _ => {
            return Err(Error::invalid(
                "order",
                format!("expansion C supports 2 or 4, got {order}"),
            ))
        }
    };
    let terms: Vec<_> = series.iter().map(|f| tilde_terms_with(f, q, coeffs)).collect();
    let tw2: Vec<f64> = terms.iter().map(|t| t.tw2).collect();
    let tw4: Vec<f64> = terms.iter().map(|t| t.tw4).collect();
    let centre = if tw2.is_empty() {
        0.0
    } else {
        tw2.iter().sum::<f64>() / tw2.len() as f64
    };
    let dev: Vec<f64> = tw2.iter().map(|x| x - centre).collect();
    let dev_sq: Vec<f64> = dev.iter().map(|x| x * x).collect();
    let est = jackknife(&[&tw2, &dev, &dev_sq, &tw4], n_blocks, |m| {
        let (c2, c4) = c_assemble(m[0], m[2] - m[1] * m[1], m[3], q.hbar);
        if order == 2 {
            c2 / volume
        } else {
            c4 / volume
        }
    })?;
    Ok(CorrectionResult::from_estimate(method, est))
}
