//! Canonical Metropolis sampler with single-particle moves.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PairPotential;
use crate::stats::block_average;
use crate::system::{fold, CellList, Configuration, Vec3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McParams {
    pub step_length: f64,
    pub cycles_equil: u64,
    pub cycles_prod: u64,
    pub snapshot_interval: u64,
    pub rng_seed: u64,
    /// Cycles between step-length adjustments during equilibration.
    pub tune_interval: u64,
    /// Extra equilibration windows allowed when the virial drifts.
    pub max_equil_extensions: u32,
}

impl Default for McParams {
    fn default() -> Self {
        McParams {
            step_length: 0.2,
            cycles_equil: 2000,
            cycles_prod: 400_000,
            snapshot_interval: 20,
            rng_seed: 1,
            tune_interval: 10,
            max_equil_extensions: 4,
        }
    }
}

impl McParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_length > 0.0 && self.step_length.is_finite()) {
            return Err(Error::invalid(
                "step_length",
                format!("must be > 0, got {}", self.step_length),
            ));
        }
        if self.snapshot_interval == 0 {
            return Err(Error::invalid("snapshot_interval", "must be at least 1"));
        }
        if self.tune_interval == 0 {
            return Err(Error::invalid("tune_interval", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct McStats {
    pub attempted: u64,
    pub accepted: u64,
}

impl McStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.accepted as f64 / self.attempted as f64
        }
    }

    pub fn merge(&mut self, other: McStats) {
        self.attempted += other.attempted;
        self.accepted += other.accepted;
    }
}

/// Multiplicative control toward 50 % acceptance.
pub fn tune_step(history: &McStats, step: f64) -> f64 {
    let a = history.acceptance_rate();
    if a > 0.55 {
        step * 1.05
    } else if a < 0.45 {
        step * 0.95
    } else {
        step
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibrationReport {
    pub cycles: u64,
    pub converged: bool,
    pub step_length: f64,
    pub acceptance_rate: f64,
}

/// Everything needed to continue a production run bit-identically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerState {
    pub step_length: f64,
    /// ChaCha word position, stored as decimal text.
    pub rng_word_pos: String,
    pub production_cycles: u64,
    pub production_stats: McStats,
}

pub struct Sampler<P: PairPotential> {
    config: Configuration,
    cells: CellList,
    potential: P,
    beta: f64,
    params: McParams,
    step: f64,
    rng: ChaCha8Rng,
    production_cycles: u64,
    production_stats: McStats,
}

impl<P: PairPotential> Sampler<P> {
    pub fn new(config: Configuration, potential: P, t_star: f64, params: McParams) -> Result<Self> {
        params.validate()?;
        if !(t_star >= 0.0) {
            return Err(Error::invalid(
                "t_star",
                format!("must be >= 0, got {t_star}"),
            ));
        }
        let cells = CellList::new(&config, potential.r_cut())?;
        let rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
        Ok(Sampler {
            step: params.step_length.min(0.5 * config.box_edge),
            config,
            cells,
            potential,
            beta: 1.0 / t_star,
            params,
            rng,
            production_cycles: 0,
            production_stats: McStats::default(),
        })
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn cells(&self) -> &CellList {
        &self.cells
    }

    pub fn potential(&self) -> &P {
        &self.potential
    }

    pub fn step_length(&self) -> f64 {
        self.step
    }

    pub fn production_stats(&self) -> McStats {
        self.production_stats
    }

    pub fn production_cycles(&self) -> u64 {
        self.production_cycles
    }

    pub fn state(&self) -> SamplerState {
        SamplerState {
            step_length: self.step,
            rng_word_pos: self.rng.get_word_pos().to_string(),
            production_cycles: self.production_cycles,
            production_stats: self.production_stats,
        }
    }

    /// Continue from a stored snapshot and sampler state.
    pub fn restore(&mut self, config: Configuration, state: &SamplerState) -> Result<()> {
        let pos: u128 = state.rng_word_pos.parse().map_err(|_| Error::Parse {
            location: "manifest".into(),
            reason: format!("bad rng_word_pos `{}`", state.rng_word_pos),
        })?;
        self.cells = CellList::new(&config, self.potential.r_cut())?;
        self.config = config;
        self.rng = ChaCha8Rng::seed_from_u64(self.params.rng_seed);
        self.rng.set_word_pos(pos);
        self.step = state.step_length;
        self.production_cycles = state.production_cycles;
        self.production_stats = state.production_stats;
        Ok(())
    }

    /// Energies of particle `i` at `trial` and at its current position.
    /// When both positions share a candidate set the two sums come from one
    /// pass. `None` if the trial overlaps another particle.
    fn move_energies(&self, i: usize, trial: &Vec3) -> Option<(f64, f64)> {
        let l = self.config.box_edge;
        let half = 0.5 * l;
        let ov2 = self.potential.overlap_radius().powi(2);
        let rc2 = self.potential.r_cut().powi(2);
        let pot = &self.potential;
        let r2_of = |a: &Vec3, b: &Vec3| {
            let mut d = a - b;
            for c in d.iter_mut() {
                if *c >= half {
                    *c -= l;
                } else if *c < -half {
                    *c += l;
                }
            }
            d.norm_squared()
        };
        // Branch-free cut: pairs beyond the cutoff are multiplied by zero.
        let energy = |r2: f64| pot.energy_r2_uncut(r2) * f64::from(u8::from(r2 <= rc2));
        let pos = &self.config.positions;
        let old = pos[i];
        let home = self.cells.cell_of(i);
        let (mut e_new, mut e_old) = (0.0, 0.0);
        let mut overlap = false;
        if self.cells.is_all_pairs() || self.cells.cell_index(trial) == home {
            self.cells.for_each_candidate_of_cell(home, i, |j| {
                let r2 = r2_of(trial, &pos[j]);
                overlap |= r2 < ov2;
                e_new += energy(r2);
                e_old += energy(r2_of(&old, &pos[j]));
            });
        } else {
            self.cells.for_each_candidate(trial, i, |j| {
                let r2 = r2_of(trial, &pos[j]);
                overlap |= r2 < ov2;
                e_new += energy(r2);
            });
            if overlap {
                return None;
            }
            self.cells
                .for_each_candidate_of_cell(home, i, |j| e_old += energy(r2_of(&old, &pos[j])));
        }
        (!overlap).then_some((e_new, e_old))
    }

    /// One attempted move per particle, in index order.
    pub fn sweep(&mut self) -> McStats {
        let n = self.config.len();
        let mut stats = McStats::default();
        for i in 0..n {
            stats.attempted += 1;
            let old = self.config.positions[i];
            let mut disp = Vec3::zeros();
            for c in disp.iter_mut() {
                *c = (2.0 * self.rng.random::<f64>() - 1.0) * self.step;
            }
            let trial = fold(old + disp, self.config.box_edge);
            let Some((e_new, e_old)) = self.move_energies(i, &trial) else {
                continue;
            };
            let du = e_new - e_old;
            let accept = du <= 0.0 || self.rng.random::<f64>() < (-self.beta * du).exp();
            if accept {
                stats.accepted += 1;
                self.cells.relocate(i, &trial);
                self.config.positions[i] = trial;
            }
        }
        stats
    }

    pub fn total_energy(&self) -> f64 {
        let mut e = 0.0;
        self.cells.for_each_pair(&self.config, |_, _, r| {
            e += self.potential.energy_r2(r.norm_squared())
        });
        e
    }

    /// Σ r u'(r) over interacting pairs.
    pub fn virial_sum(&self) -> f64 {
        let mut w = 0.0;
        self.cells.for_each_pair(&self.config, |_, _, r| {
            let d = r.norm();
            w += d * self.potential.derivatives(d).du;
        });
        w
    }

    fn rebuild(&mut self) {
        self.cells.rebuild(&self.config);
    }

    /// Tuned equilibration in windows of `cycles_equil`; a window passes
    /// when the virial means of its two halves agree within 2 stderr.
    pub fn equilibrate(&mut self) -> EquilibrationReport {
        let window = self.params.cycles_equil;
        let tune = self.params.tune_interval;
        let mut total = 0;
        let mut converged = window == 0;
        let mut last = McStats::default();
        let mut windows = 0;
        while !converged && windows <= self.params.max_equil_extensions {
            windows += 1;
            let mut block = McStats::default();
            let mut virials = Vec::new();
            for c in 1..=window {
                block.merge(self.sweep());
                if c % tune == 0 {
                    self.step = tune_step(&block, self.step).min(0.5 * self.config.box_edge);
                    last = block;
                    block = McStats::default();
                    virials.push(self.virial_sum());
                }
            }
            total += window;
            converged = halves_agree(&virials);
        }
        self.rebuild();
        EquilibrationReport {
            cycles: total,
            converged,
            step_length: self.step,
            acceptance_rate: last.acceptance_rate(),
        }
    }

    /// Production cycles with a frozen step; `on_snapshot` sees every
    /// `snapshot_interval`-th configuration, stamped with its cycle index.
    pub fn produce(
        &mut self,
        mut on_snapshot: impl FnMut(&Configuration, &Self) -> Result<()>,
    ) -> Result<McStats> {
        while self.production_cycles < self.params.cycles_prod {
            let s = self.sweep();
            self.production_stats.merge(s);
            self.production_cycles += 1;
            if self.production_cycles % self.params.snapshot_interval == 0 {
                self.rebuild();
                self.config.cycle = self.production_cycles;
                let snap = self.config.clone();
                on_snapshot(&snap, self)?;
            }
        }
        Ok(self.production_stats)
    }
}

fn halves_agree(v: &[f64]) -> bool {
    let half = v.len() / 2;
    if half < 4 {
        return true;
    }
    let blocks = (half / 2).min(10);
    match (
        block_average(&v[..half], blocks),
        block_average(&v[half..2 * half], blocks),
    ) {
        (Ok(a), Ok(b)) => a.agrees_with(&b, 2.0),
        _ => true,
    }
}

/// Simple-cubic start, equilibration, then the full production snapshot list.
pub fn run<P: PairPotential>(
    state: &crate::units::ReducedState,
    params: &McParams,
    potential: P,
) -> Result<(Vec<Configuration>, McStats)> {
    let config = Configuration::simple_cubic(state.n_particles, state.box_edge())?;
    let mut sampler = Sampler::new(config, potential, state.t_star, params.clone())?;
    sampler.equilibrate();
    let mut out = Vec::new();
    let stats = sampler.produce(|c, _| {
        out.push(c.clone());
        Ok(())
    })?;
    Ok((out, stats))
}
