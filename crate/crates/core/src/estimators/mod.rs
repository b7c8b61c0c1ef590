//! Quantum-correction estimators built from stored fields and momenta.

mod exchange;
mod expansion_a;
mod expansion_b;
mod expansion_c;
mod virial;
pub mod weights;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::stats::Estimate;

pub use exchange::{
    dimer_weighted, dimer_weighted_sample, dimer_zeroth, exchange_cutoff, trimer_zeroth,
    DimerWeightedSample,
};
pub use expansion_a::{a_assemble, expansion_a, AMoments};
pub use expansion_b::{b_exponent, expansion_b};
pub use expansion_c::{c_assemble, expansion_c, expansion_c_with};
pub use virial::virial_pressure;
pub use weights::{
    tilde_terms, tilde_terms_with, weight_terms, QuantumParams, TildeCoefficients, TildeTerms,
    WeightTerms,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    A2,
    A4,
    B1,
    B2,
    B4,
    C2,
    C4,
    #[serde(rename = "dimer0")]
    Dimer0,
    #[serde(rename = "dimerW")]
    DimerW,
    #[serde(rename = "trimer0")]
    Trimer0,
    #[serde(rename = "virial")]
    Virial,
}

impl Method {
    pub const ALL: [Method; 11] = [
        Method::A2,
        Method::A4,
        Method::B1,
        Method::B2,
        Method::B4,
        Method::C2,
        Method::C4,
        Method::Dimer0,
        Method::DimerW,
        Method::Trimer0,
        Method::Virial,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::A2 => "A2",
            Method::A4 => "A4",
            Method::B1 => "B1",
            Method::B2 => "B2",
            Method::B4 => "B4",
            Method::C2 => "C2",
            Method::C4 => "C4",
            Method::Dimer0 => "dimer0",
            Method::DimerW => "dimerW",
            Method::Trimer0 => "trimer0",
            Method::Virial => "virial",
        }
    }

    pub fn needs_momenta(&self) -> bool {
        matches!(self, Method::A2 | Method::A4)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Method::ALL
            .iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .copied()
            .ok_or_else(|| Error::invalid("estimators", format!("unknown estimator `{s}`")))
    }
}

/// A per-volume correction (or βpσ³ for `virial`) with its error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionResult {
    pub method: Method,
    pub value: f64,
    pub stderr: f64,
}

impl CorrectionResult {
    pub(crate) fn from_estimate(method: Method, e: Estimate) -> Self {
        CorrectionResult {
            method,
            value: e.mean,
            stderr: e.stderr,
        }
    }

    pub fn agrees_with(&self, other: &CorrectionResult, k: f64) -> bool {
        (self.value - other.value).abs() <= k * self.stderr.hypot(other.stderr)
    }
}
