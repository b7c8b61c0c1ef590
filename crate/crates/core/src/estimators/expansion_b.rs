//! Expansion B: the momentum-averaged exponent, exponentiated and averaged
//! over positions with a max-shift.

use super::{tilde_terms, CorrectionResult, Method, QuantumParams};
use crate::error::{Error, Result};
use crate::fields::FieldScalars;
use crate::stats::log_mean_exp;

/// Largest tolerated spread of the exponent across the series.
pub const MAX_EXPONENT_RANGE: f64 = 700.0;

/// Per-configuration exponent of B1, B2 or B4.
pub fn b_exponent(f: &FieldScalars, order: u8, q: &QuantumParams) -> f64 {
    let h2 = q.hbar * q.hbar;
    match order {
        1 => -h2 * q.beta.powi(3) / (8.0 * q.mass) * f.grad_sq,
        2 => h2 * tilde_terms(f, q).tw2,
        _ => {
            let t = tilde_terms(f, q);
            h2 * t.tw2 + h2 * h2 * t.tw4
        }
    }
}

pub fn expansion_b(
    series: &[FieldScalars],
    order: u8,
    q: &QuantumParams,
    volume: f64,
    n_blocks: usize,
    state: &str,
) -> Result<CorrectionResult> {
    let method = match order {
        1 => Method::B1,
        2 => Method::B2,
        4 => Method::B4,
        _ => {
            return Err(Error::invalid(
                "order",
                format!("expansion B supports 1, 2 or 4, got {order}"),
            ))
        }
    };
    let x: Vec<f64> = series.iter().map(|f| b_exponent(f, order, q)).collect();
    let (mut est, range) = log_mean_exp(&x, n_blocks)?;
    if !(range <= MAX_EXPONENT_RANGE) || !est.mean.is_finite() {
        return Err(Error::Overflow {
            method: method.as_str(),
            state: state.to_string(),
            range,
        });
    }
    est.mean /= volume;
    est.stderr /= volume;
    Ok(CorrectionResult::from_estimate(method, est))
}
