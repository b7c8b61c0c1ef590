use super::{CorrectionResult, Method};
use crate::error::Result;
use crate::fields::FieldScalars;
use crate::potential::tail_pressure_correction;
use crate::stats::block_average;

/// Classical βpσ³ = ρ − β⟨Σ r u'⟩/(3V) plus the long-range tail.
/// Pass `r_cut = None` to omit the tail (e.g. for non-LJ potentials).
pub fn virial_pressure(
    series: &[FieldScalars],
    rho_star: f64,
    t_star: f64,
    volume: f64,
    r_cut: Option<f64>,
    n_blocks: usize,
) -> Result<CorrectionResult> {
    let beta = 1.0 / t_star;
    let tail = r_cut.map_or(0.0, |rc| beta * tail_pressure_correction(rho_star, rc));
    let vals: Vec<f64> = series
        .iter()
        .map(|f| rho_star - beta * f.virial / (3.0 * volume) + tail)
        .collect();
    Ok(CorrectionResult::from_estimate(
        Method::Virial,
        block_average(&vals, n_blocks)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_gas_pressure_is_density() {
        let s = vec![FieldScalars::default(); 50];
        let p = virial_pressure(&s, 0.3, 1.2, 100.0, None, 50).unwrap();
        assert!((p.value - 0.3).abs() < 1e-14);
        assert!(p.stderr < 1e-14);
    }
}
