//! Expansion coefficients of the non-commutativity exponent.
//!
//! With ħ factored out, w = iħ v1 + ħ² w2 + iħ³ v3 + ħ⁴ w4 per phase-space
//! point, and after the Gaussian momentum average the exponent becomes
//! ħ² w̃2 + ħ⁴ w̃4.

use serde::{Deserialize, Serialize};

use crate::fields::{FieldScalars, MomentumContractions};

/// Inverse temperature, particle mass and dimensionless Planck constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumParams {
    pub beta: f64,
    pub mass: f64,
    pub hbar: f64,
}

impl QuantumParams {
    pub fn new(t_star: f64, mass: f64, hbar: f64) -> Self {
        QuantumParams {
            beta: 1.0 / t_star,
            mass,
            hbar,
        }
    }

    /// Λ² = 2πħ²β/m.
    pub fn lambda_sq(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.hbar * self.hbar * self.beta / self.mass
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightTerms {
    pub v1: f64,
    pub w2: f64,
    pub v3: f64,
    pub w4: f64,
}

pub fn weight_terms(f: &FieldScalars, c: &MomentumContractions, q: &QuantumParams) -> WeightTerms {
    let b = q.beta;
    let m = q.mass;
    let (b2, b3, b4, b5) = (b * b, b * b * b, b.powi(4), b.powi(5));
    let (m2, m3, m4) = (m * m, m * m * m, m.powi(4));
    WeightTerms {
        v1: -b2 / (2.0 * m) * c.p_grad,
        w2: b3 / (6.0 * m2) * c.pp_hess + b3 / (6.0 * m) * f.grad_sq - b2 / (4.0 * m) * f.lap,
        v3: b4 / (24.0 * m3) * c.ppp_d3 + 5.0 * b4 / (24.0 * m2) * c.p_hess_grad
            - b3 / (6.0 * m2) * c.p_gradlap,
        w4: -b5 / (120.0 * m4) * c.pppp_d4
            - 3.0 * b5 / (40.0 * m3) * c.grad_pp_d3
            - b5 / (15.0 * m2) * f.gug
            + 5.0 * b4 / (48.0 * m2) * f.grad_dot_gradlap
            + b4 / (24.0 * m2) * f.hess_frob
            + b4 / (16.0 * m3) * c.pp_hesslap
            - b3 / (24.0 * m2) * f.biharmonic
            - b5 / (15.0 * m3) * c.p_hess_sq,
    }
}

/// Rational prefactors of the four ħ⁴ terms of the momentum-averaged
/// exponent. Exposed so oracle checks can confirm their sensitivity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TildeCoefficients {
    /// × β⁴/m² (∇∇U):(∇∇U)
    pub hess_frob: f64,
    /// × β⁵/m² ∇U∇U:∇∇U
    pub gug: f64,
    /// × β⁴/m² ∇U·∇∇²U
    pub grad_dot_gradlap: f64,
    /// × β³/m² ∇²∇²U
    pub biharmonic: f64,
}

impl Default for TildeCoefficients {
    fn default() -> Self {
        TildeCoefficients {
            hess_frob: 1.0 / 360.0,
            gug: -1.0 / 240.0,
            grad_dot_gradlap: 1.0 / 120.0,
            biharmonic: -1.0 / 240.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TildeTerms {
    pub tw2: f64,
    pub tw4: f64,
}

pub fn tilde_terms_with(f: &FieldScalars, q: &QuantumParams, k: &TildeCoefficients) -> TildeTerms {
    let b = q.beta;
    let m = q.mass;
    let m2 = m * m;
    TildeTerms {
        tw2: b.powi(3) / (24.0 * m) * f.grad_sq - b * b / (12.0 * m) * f.lap,
        tw4: (k.hess_frob * b.powi(4) * f.hess_frob
            + k.gug * b.powi(5) * f.gug
            + k.grad_dot_gradlap * b.powi(4) * f.grad_dot_gradlap
            + k.biharmonic * b.powi(3) * f.biharmonic)
            / m2,
    }
}

pub fn tilde_terms(f: &FieldScalars, q: &QuantumParams) -> TildeTerms {
    tilde_terms_with(f, q, &TildeCoefficients::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuantumParams {
        QuantumParams::new(0.8, 1.3, 0.4)
    }

    fn sample_fields() -> FieldScalars {
        FieldScalars::from_array([-3.0, 2.0, 5.0, 7.0, -1.5, 0.7, 11.0, -2.0])
    }

    fn sample_contractions(sign: f64) -> MomentumContractions {
        MomentumContractions {
            p_grad: 0.3 * sign,
            pp_hess: 1.1,
            ppp_d3: -0.4 * sign,
            pppp_d4: 2.2,
            p_hess_sq: 0.9,
            p_gradlap: 0.25 * sign,
            p_hess_grad: -0.6 * sign,
            grad_pp_d3: 0.8,
            pp_hesslap: -0.35,
        }
    }

    #[test]
    fn vanish_for_free_particles() {
        let z = weight_terms(
            &FieldScalars::default(),
            &MomentumContractions::default(),
            &q(),
        );
        assert_eq!(z, WeightTerms::default());
        assert_eq!(
            tilde_terms(&FieldScalars::default(), &q()),
            TildeTerms::default()
        );
    }

    #[test]
    fn parity_under_momentum_reversal() {
        let f = sample_fields();
        let a = weight_terms(&f, &sample_contractions(1.0), &q());
        let b = weight_terms(&f, &sample_contractions(-1.0), &q());
        assert_eq!(a.v1, -b.v1);
        assert_eq!(a.v3, -b.v3);
        assert_eq!(a.w2, b.w2);
        assert_eq!(a.w4, b.w4);
    }

    #[test]
    fn tilde_coefficients_pinned() {
        let qp = QuantumParams::new(1.0, 1.0, 1.0);
        let unit = |k: usize| {
            let mut a = [0.0; 8];
            a[k] = 1.0;
            tilde_terms(&FieldScalars::from_array(a), &qp)
        };
        assert_eq!(unit(1).tw2, 1.0 / 24.0);
        assert_eq!(unit(2).tw2, -1.0 / 12.0);
        assert_eq!(unit(3).tw4, 1.0 / 360.0);
        assert_eq!(unit(4).tw4, -1.0 / 240.0);
        assert_eq!(unit(5).tw4, 1.0 / 120.0);
        assert_eq!(unit(6).tw4, -1.0 / 240.0);
    }

    #[test]
    fn b1_exponent_matches_wavelength_form() {
        // −ħ²β³/(8m) |∇U|² equals −β²Λ²|∇U|²/(16π).
        let qp = q();
        let lhs = -qp.hbar.powi(2) * qp.beta.powi(3) / (8.0 * qp.mass);
        let rhs = -qp.beta.powi(2) * qp.lambda_sq() / (16.0 * std::f64::consts::PI);
        assert!((lhs - rhs).abs() < 1e-15 * lhs.abs());
    }
}
