//! Pair potentials with radial derivatives through fourth order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Separations below this are treated as hard overlaps by the sampler.
pub const OVERLAP_RADIUS: f64 = 0.5;

/// u(r) and its first four radial derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RadialDerivatives {
    pub u: f64,
    pub du: f64,
    pub d2u: f64,
    pub d3u: f64,
    pub d4u: f64,
}

/// A spherically symmetric, truncated pair interaction.
pub trait PairPotential: Send + Sync {
    fn r_cut(&self) -> f64;

    /// Energy at squared separation `r2`; zero beyond the cutoff.
    fn energy_r2(&self, r2: f64) -> f64;

    /// All radial derivatives at `r > 0`; zero beyond the cutoff.
    fn derivatives(&self, r: f64) -> RadialDerivatives;

    /// Trial moves closer than this to any particle are rejected outright.
    fn overlap_radius(&self) -> f64 {
        0.0
    }

    /// Energy without the cutoff test; callers apply the cutoff themselves.
    #[inline]
    fn energy_r2_uncut(&self, r2: f64) -> f64 {
        self.energy_r2(r2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LennardJones {
    pub epsilon: f64,
    pub sigma: f64,
    pub r_cut: f64,
}

impl LennardJones {
    pub fn new(epsilon: f64, sigma: f64, r_cut: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma", format!("must be > 0, got {sigma}")));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(
                "epsilon",
                format!("must be >= 0, got {epsilon}"),
            ));
        }
        if !(r_cut > sigma && r_cut.is_finite()) {
            return Err(Error::invalid(
                "r_cut",
                format!("must exceed sigma = {sigma}, got {r_cut}"),
            ));
        }
        Ok(LennardJones {
            epsilon,
            sigma,
            r_cut,
        })
    }

    /// Reduced-unit LJ (ε = σ = 1) with the given cutoff.
    pub fn reduced(r_cut: f64) -> Result<Self> {
        Self::new(1.0, 1.0, r_cut)
    }

    /// The uncut potential, used by quadrature oracles.
    pub fn full_energy(&self, r: f64) -> f64 {
        let s6 = (self.sigma / r).powi(6);
        4.0 * self.epsilon * (s6 * s6 - s6)
    }
}

impl PairPotential for LennardJones {
    fn r_cut(&self) -> f64 {
        self.r_cut
    }

    fn overlap_radius(&self) -> f64 {
        if self.epsilon > 0.0 {
            OVERLAP_RADIUS * self.sigma
        } else {
            0.0
        }
    }

    #[inline]
    fn energy_r2(&self, r2: f64) -> f64 {
        if r2 > self.r_cut * self.r_cut {
            return 0.0;
        }
        let s2 = self.sigma * self.sigma / r2;
        let s6 = s2 * s2 * s2;
        4.0 * self.epsilon * (s6 * s6 - s6)
    }

    #[inline]
    fn energy_r2_uncut(&self, r2: f64) -> f64 {
        let s2 = self.sigma * self.sigma / r2;
        let s6 = s2 * s2 * s2;
        4.0 * self.epsilon * (s6 * s6 - s6)
    }

    #[inline]
    fn derivatives(&self, r: f64) -> RadialDerivatives {
        if r > self.r_cut {
            return RadialDerivatives::default();
        }
        let s6 = (self.sigma / r).powi(6);
        let s12 = s6 * s6;
        let e4 = 4.0 * self.epsilon;
        let ir = 1.0 / r;
        RadialDerivatives {
            u: e4 * (s12 - s6),
            du: e4 * (-12.0 * s12 + 6.0 * s6) * ir,
            d2u: e4 * (156.0 * s12 - 42.0 * s6) * ir * ir,
            d3u: e4 * (-2184.0 * s12 + 336.0 * s6) * ir * ir * ir,
            d4u: e4 * (32760.0 * s12 - 3024.0 * s6) * ir * ir * ir * ir,
        }
    }
}

/// Piecewise-constant potential on radial shells, for sampler tests.
/// Shell `k` covers `[edges[k], edges[k+1])`; beyond the last edge u = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct StepPotential {
    pub edges: Vec<f64>,
    pub levels: Vec<f64>,
}

impl StepPotential {
    pub fn new(edges: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if edges.len() != levels.len() + 1 || levels.is_empty() {
            return Err(Error::invalid("edges", "need one more edge than levels"));
        }
        if edges.windows(2).any(|w| w[1] <= w[0]) || edges[0] < 0.0 {
            return Err(Error::invalid(
                "edges",
                "must be increasing and non-negative",
            ));
        }
        Ok(StepPotential { edges, levels })
    }

    pub fn level_at(&self, r: f64) -> f64 {
        if r < self.edges[0] || r >= *self.edges.last().unwrap() {
            return 0.0;
        }
        let k = self.edges.partition_point(|&e| e <= r) - 1;
        self.levels[k]
    }
}

impl PairPotential for StepPotential {
    fn r_cut(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    fn energy_r2(&self, r2: f64) -> f64 {
        self.level_at(r2.sqrt())
    }

    fn derivatives(&self, r: f64) -> RadialDerivatives {
        RadialDerivatives {
            u: self.level_at(r),
            ..Default::default()
        }
    }
}

/// Checked entry point for a single radial evaluation.
pub fn pair_derivatives(r: f64, params: &LennardJones) -> Result<RadialDerivatives> {
    if !(r > 0.0) {
        return Err(Error::invalid("r", format!("must be > 0, got {r}")));
    }
    Ok(params.derivatives(r))
}

/// Long-range pressure correction for reduced LJ with g(r) = 1 beyond `r_cut`:
/// p_tail = (16π/3) ρ² [ (2/3) r_c⁻⁹ − r_c⁻³ ].
pub fn tail_pressure_correction(rho_star: f64, r_cut: f64) -> f64 {
    let ir3 = r_cut.powi(-3);
    16.0 * std::f64::consts::PI / 3.0 * rho_star * rho_star * (2.0 / 3.0 * ir3 * ir3 * ir3 - ir3)
}
