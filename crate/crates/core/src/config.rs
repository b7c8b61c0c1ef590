//! Flat `key = value` run configuration.
//!
//! Recognised keys (defaults in brackets):
//!
//! | key | meaning |
//! |-----|---------|
//! | `element` | He, Ne or Ar [Ar] |
//! | `sigma`, `r_min`, `eps_over_kb`, `mass` | override the element's table row |
//! | `hbar_star` | override the dimensionless Planck constant directly |
//! | `t_star`, `rho_star`, `n_particles` | state point [1.5, 0.5, 250] |
//! | `r_cut` | potential cutoff [3.5] |
//! | `step_length`, `cycles_equil`, `cycles_prod`, `snapshot_interval`, `tune_interval`, `max_equil_extensions` | sampler [0.2, 2000, 400000, 20, 10, 4] |
//! | `seed` | RNG seed [1] |
//! | `momentum_replicas` | momentum draws per snapshot for expansion A [32] |
//! | `estimators` | comma list of A2,A4,B1,B2,B4,C2,C4,dimer0,dimerW,trimer0,virial [B1,B2,B4,C2,C4,dimer0,trimer0,virial] |
//! | `sign` | +1 bosons, −1 fermions [+1] |
//! | `n_blocks` | blocks for error estimation [50] |
//! | `output` | output directory [run] |
//!
//! Blank lines and text after `#` are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::Method;
use crate::mc::McParams;
use crate::units::{lookup, ElementParams, ReducedState};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub element: ElementParams,
    pub hbar_star_override: Option<f64>,
    pub t_star: f64,
    pub rho_star: f64,
    pub n_particles: usize,
    pub r_cut: f64,
    pub mc: McParams,
    pub momentum_replicas: u32,
    pub estimators: Vec<Method>,
    pub sign: f64,
    pub n_blocks: usize,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            element: lookup("Ar").expect("table row"),
            hbar_star_override: None,
            t_star: 1.5,
            rho_star: 0.5,
            n_particles: 250,
            r_cut: 3.5,
            mc: McParams::default(),
            momentum_replicas: 32,
            estimators: vec![
                Method::B1,
                Method::B2,
                Method::B4,
                Method::C2,
                Method::C4,
                Method::Dimer0,
                Method::Trimer0,
                Method::Virial,
            ],
            sign: 1.0,
            n_blocks: crate::stats::DEFAULT_BLOCKS,
            output: PathBuf::from("run"),
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Parse {
        location: format!("key `{key}`"),
        reason: format!("cannot parse `{v}`"),
    })
}

impl RunConfig {
    /// Parse `key = value` text on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut pairs = BTreeMap::new();
        let mut order = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                location: format!("line {}", ln + 1),
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            let k = k.trim().to_string();
            order.push(k.clone());
            pairs.insert(k, v.trim().to_string());
        }
        let mut cfg = RunConfig::default();
        // Element first so per-field overrides apply on top of it.
        if let Some(e) = pairs.get("element") {
            cfg.element = lookup(e)?;
        }
        for k in order {
            let v = pairs[&k].clone();
            cfg.set(&k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply one key; used by both the file parser and CLI flags.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "element" => {
                if !self.element.name.eq_ignore_ascii_case(v) {
                    self.element = lookup(v)?;
                }
            }
            "sigma" => self.element.sigma = parse_value(key, v)?,
            "r_min" => self.element.r_min = parse_value(key, v)?,
            "eps_over_kb" => self.element.eps_over_kb = parse_value(key, v)?,
            "mass" => self.element.mass = parse_value(key, v)?,
            "hbar_star" => self.hbar_star_override = Some(parse_value(key, v)?),
            "t_star" => self.t_star = parse_value(key, v)?,
            "rho_star" => self.rho_star = parse_value(key, v)?,
            "n_particles" => self.n_particles = parse_value(key, v)?,
            "r_cut" => self.r_cut = parse_value(key, v)?,
            "step_length" => self.mc.step_length = parse_value(key, v)?,
            "cycles_equil" | "equil_cycles" => self.mc.cycles_equil = parse_value(key, v)?,
            "cycles_prod" | "prod_cycles" => self.mc.cycles_prod = parse_value(key, v)?,
            "snapshot_interval" => self.mc.snapshot_interval = parse_value(key, v)?,
            "tune_interval" => self.mc.tune_interval = parse_value(key, v)?,
            "max_equil_extensions" => self.mc.max_equil_extensions = parse_value(key, v)?,
            "seed" => self.mc.rng_seed = parse_value(key, v)?,
            "momentum_replicas" => self.momentum_replicas = parse_value(key, v)?,
            "estimators" => self.estimators = parse_estimators(v)?,
            "sign" => self.sign = parse_value(key, v)?,
            "n_blocks" => self.n_blocks = parse_value(key, v)?,
            "output" => self.output = PathBuf::from(v),
            _ => {
                return Err(Error::Parse {
                    location: format!("key `{key}`"),
                    reason: "unknown key".into(),
                })
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.element.validate()?;
        let state = self.state()?;
        if let Some(h) = self.hbar_star_override {
            if !(h >= 0.0 && h.is_finite()) {
                return Err(Error::invalid(
                    "hbar_star",
                    format!("must be >= 0, got {h}"),
                ));
            }
        }
        if !(self.r_cut > 1.0) {
            return Err(Error::invalid(
                "r_cut",
                format!("must exceed sigma = 1, got {}", self.r_cut),
            ));
        }
        let l = state.box_edge();
        if self.r_cut >= 0.5 * l {
            return Err(Error::invalid(
                "r_cut",
                format!(
                    "must be below half the box edge ({:.4}), got {}",
                    0.5 * l,
                    self.r_cut
                ),
            ));
        }
        self.mc.validate()?;
        if self.sign != 1.0 && self.sign != -1.0 {
            return Err(Error::invalid(
                "sign",
                format!("must be +1 or -1, got {}", self.sign),
            ));
        }
        if self.n_blocks == 0 {
            return Err(Error::invalid("n_blocks", "must be at least 1"));
        }
        if self.momentum_replicas == 0 && self.estimators.iter().any(|m| m.needs_momenta()) {
            return Err(Error::invalid(
                "momentum_replicas",
                "expansion A needs at least 1",
            ));
        }
        if self.momentum_replicas < 2 && self.estimators.contains(&Method::A4) {
            return Err(Error::invalid("momentum_replicas", "A4 needs at least 2"));
        }
        Ok(())
    }

    pub fn state(&self) -> Result<ReducedState> {
        ReducedState::new(self.t_star, self.rho_star, self.n_particles)
    }

    pub fn hbar_star(&self) -> f64 {
        self.hbar_star_override
            .unwrap_or_else(|| self.element.hbar_star())
    }

    pub fn lambda_star(&self) -> f64 {
        crate::units::lambda_from_hbar(self.hbar_star(), self.t_star)
    }

    pub fn wants(&self, m: Method) -> bool {
        self.estimators.contains(&m)
    }

    /// Canonical `key = value` rendering, parseable by [`RunConfig::from_text`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let e = &self.element;
        let _ = writeln!(s, "element = {}", e.name);
        let _ = writeln!(s, "sigma = {}", e.sigma);
        let _ = writeln!(s, "r_min = {}", e.r_min);
        let _ = writeln!(s, "eps_over_kb = {}", e.eps_over_kb);
        let _ = writeln!(s, "mass = {}", e.mass);
        if let Some(h) = self.hbar_star_override {
            let _ = writeln!(s, "hbar_star = {h}");
        }
        let _ = writeln!(s, "t_star = {}", self.t_star);
        let _ = writeln!(s, "rho_star = {}", self.rho_star);
        let _ = writeln!(s, "n_particles = {}", self.n_particles);
        let _ = writeln!(s, "r_cut = {}", self.r_cut);
        let m = &self.mc;
        let _ = writeln!(s, "step_length = {}", m.step_length);
        let _ = writeln!(s, "cycles_equil = {}", m.cycles_equil);
        let _ = writeln!(s, "cycles_prod = {}", m.cycles_prod);
        let _ = writeln!(s, "snapshot_interval = {}", m.snapshot_interval);
        let _ = writeln!(s, "tune_interval = {}", m.tune_interval);
        let _ = writeln!(s, "max_equil_extensions = {}", m.max_equil_extensions);
        let _ = writeln!(s, "seed = {}", m.rng_seed);
        let _ = writeln!(s, "momentum_replicas = {}", self.momentum_replicas);
        let names: Vec<&str> = self.estimators.iter().map(|m| m.as_str()).collect();
        let _ = writeln!(s, "estimators = {}", names.join(","));
        let _ = writeln!(s, "sign = {}", self.sign);
        let _ = writeln!(s, "n_blocks = {}", self.n_blocks);
        let _ = writeln!(s, "output = {}", self.output.display());
        s
    }
}

pub fn parse_estimators(v: &str) -> Result<Vec<Method>> {
    let mut out: Vec<Method> = Vec::new();
    for tok in v.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let m: Method = tok.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_roundtrip() {
        let text =
            "element = Ne\n# comment\nt_star = 1.0  # trailing\nrho_star=0.3\nn_particles = 108\n\
                    r_cut = 2.5\nestimators = C4, B2,virial\nsign = -1\n";
        let c = RunConfig::from_text(text).unwrap();
        assert_eq!(c.element.name, "Ne");
        assert_eq!(c.t_star, 1.0);
        assert_eq!(c.estimators, vec![Method::B2, Method::C4, Method::Virial]);
        assert_eq!(c.sign, -1.0);
        let again = RunConfig::from_text(&c.to_text()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn field_level_errors() {
        let e = RunConfig::from_text("t_star = -1").unwrap_err();
        assert!(e.to_string().contains("t_star"));
        let e = RunConfig::from_text("n_particles = 32\nrho_star = 0.8").unwrap_err();
        assert!(e.to_string().contains("r_cut"));
        assert!(RunConfig::from_text("bogus = 1").is_err());
        assert!(RunConfig::from_text("estimators = A3").is_err());
        assert!(RunConfig::from_text("element = Kr").is_err());
        assert!(RunConfig::from_text("estimators = A4\nmomentum_replicas = 1").is_err());
    }

    #[test]
    fn overrides_apply_after_element() {
        let c = RunConfig::from_text("mass = 2.0\nelement = He").unwrap();
        assert_eq!(c.element.name, "He");
        assert_eq!(c.element.mass, 2.0);
    }
}
