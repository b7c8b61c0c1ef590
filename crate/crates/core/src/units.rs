//! Reduced-unit bookkeeping for the three noble-gas elements.
//!
//! Everything downstream works with σ = ε = k_B = m = 1. Planck's constant
//! survives only as the dimensionless `hbar_star = ħ/(σ√(mε))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// CODATA 2018 Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// CODATA 2018 atomic mass constant, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementParams {
    pub name: String,
    /// Lennard-Jones diameter in nm.
    pub sigma: f64,
    /// Position of the potential minimum in nm.
    pub r_min: f64,
    /// Well depth over k_B in K.
    pub eps_over_kb: f64,
    /// Atomic mass in amu.
    pub mass: f64,
}

impl ElementParams {
    pub fn new(name: &str, sigma: f64, r_min: f64, eps_over_kb: f64, mass: f64) -> Result<Self> {
        let e = ElementParams {
            name: name.to_string(),
            sigma,
            r_min,
            eps_over_kb,
            mass,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("sigma", self.sigma),
            ("r_min", self.r_min),
            ("eps_over_kb", self.eps_over_kb),
            ("mass", self.mass),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(
                    "element",
                    format!("{field} must be positive, got {v}"),
                ));
            }
        }
        Ok(())
    }

    /// Dimensionless ħ/(σ√(mε)).
    pub fn hbar_star(&self) -> f64 {
        let sigma = self.sigma * 1e-9;
        let mass = self.mass * AMU;
        let eps = self.eps_over_kb * K_B;
        HBAR / (sigma * (mass * eps).sqrt())
    }
}

pub fn element_table() -> Vec<ElementParams> {
    vec![
        ElementParams {
            name: "He".into(),
            sigma: 0.2556,
            r_min: 0.2869,
            eps_over_kb: 10.22,
            mass: 4.002602,
        },
        ElementParams {
            name: "Ne".into(),
            sigma: 0.2789,
            r_min: 0.3131,
            eps_over_kb: 35.7,
            mass: 20.1797,
        },
        ElementParams {
            name: "Ar".into(),
            sigma: 0.3418,
            r_min: 0.3837,
            eps_over_kb: 124.0,
            mass: 39.948,
        },
    ]
}

/// Case-insensitive lookup by chemical symbol.
pub fn lookup(name: &str) -> Result<ElementParams> {
    element_table()
        .into_iter()
        .find(|e| e.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::UnknownElement(name.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub t_star: f64,
    pub rho_star: f64,
    pub n_particles: usize,
}

impl ReducedState {
    pub fn new(t_star: f64, rho_star: f64, n_particles: usize) -> Result<Self> {
        if !(t_star.is_finite() && t_star > 0.0) {
            return Err(Error::invalid(
                "t_star",
                format!("must be > 0, got {t_star}"),
            ));
        }
        if !(rho_star.is_finite() && rho_star > 0.0) {
            return Err(Error::invalid(
                "rho_star",
                format!("must be > 0, got {rho_star}"),
            ));
        }
        if n_particles < 2 {
            return Err(Error::invalid(
                "n_particles",
                format!("must be at least 2, got {n_particles}"),
            ));
        }
        Ok(ReducedState {
            t_star,
            rho_star,
            n_particles,
        })
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.t_star
    }

    pub fn box_edge(&self) -> f64 {
        (self.n_particles as f64 / self.rho_star).cbrt()
    }

    pub fn volume(&self) -> f64 {
        self.n_particles as f64 / self.rho_star
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumScale {
    pub hbar_star: f64,
    pub lambda_star: f64,
}

/// Λ/σ = ħ*·√(2π/T*).
pub fn lambda_from_hbar(hbar_star: f64, t_star: f64) -> f64 {
    hbar_star * (2.0 * std::f64::consts::PI / t_star).sqrt()
}

pub fn thermal_wavelength(element: &ElementParams, t_star: f64) -> Result<f64> {
    if !(t_star.is_finite() && t_star > 0.0) {
        return Err(Error::invalid(
            "t_star",
            format!("must be > 0, got {t_star}"),
        ));
    }
    Ok(lambda_from_hbar(element.hbar_star(), t_star))
}

pub fn quantum_scale(element: &ElementParams, t_star: f64) -> Result<QuantumScale> {
    let lambda_star = thermal_wavelength(element, t_star)?;
    Ok(QuantumScale {
        hbar_star: element.hbar_star(),
        lambda_star,
    })
}
