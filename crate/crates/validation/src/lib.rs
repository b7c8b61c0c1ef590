//! Shared machinery for the acceptance suite in `tests/acceptance.rs`:
//! reduced-scale Lennard-Jones trajectories analysed for several elements,
//! and the one-line criterion reports.

use std::io::Write as _;

use ljq_core::analysis::{
    analyze_records, make_record, AnalysisSetup, RecordOptions, ReportRow, SnapshotRecord,
};
use ljq_core::estimators::Method;
use ljq_core::mc::{McParams, Sampler};
use ljq_core::potential::LennardJones;
use ljq_core::stats::Estimate;
use ljq_core::system::Configuration;
use ljq_core::units::lookup;

pub const R_CUT: f64 = 3.5;
pub const T_STAR: f64 = 1.5;
pub const SNAPSHOT_INTERVAL: u64 = 20;
pub const REPLICAS: u32 = 8;
pub const BLOCKS: usize = 50;

/// Write one criterion line past the test harness's output capture.
pub fn report(criterion: u8, ok: bool, detail: &str) {
    let mark = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "{mark} criterion {criterion:>2}: {detail}"
    );
}

/// Production snapshots of one state point at T* = 1.5, with momentum
/// weights for [`REPLICAS`] replicas and per-particle gradients kept.
pub struct Trajectory {
    pub rho_star: f64,
    pub n: usize,
    pub records: Vec<SnapshotRecord>,
    pub acceptance: f64,
}

impl Trajectory {
    pub fn generate(rho_star: f64, n: usize, snapshots: u64, seed: u64) -> Trajectory {
        let edge = (n as f64 / rho_star).cbrt();
        let start = Configuration::simple_cubic(n, edge).unwrap();
        let params = McParams {
            cycles_prod: snapshots * SNAPSHOT_INTERVAL,
            snapshot_interval: SNAPSHOT_INTERVAL,
            rng_seed: seed,
            ..McParams::default()
        };
        let lj = LennardJones::reduced(R_CUT).unwrap();
        let mut s = Sampler::new(start, lj, T_STAR, params).unwrap();
        s.equilibrate();
        let opts = RecordOptions {
            t_star: T_STAR,
            replicas: REPLICAS,
            run_seed: seed,
            keep_grad: true,
        };
        let mut records = Vec::with_capacity(snapshots as usize);
        s.produce(|c, s| {
            records.push(make_record(c, s.cells(), s.potential(), &opts));
            Ok(())
        })
        .unwrap();
        let acceptance = s.production_stats().acceptance_rate();
        Trajectory {
            rho_star,
            n,
            records,
            acceptance,
        }
    }

    pub fn setup(&self, element: &str, estimators: &[Method]) -> AnalysisSetup {
        AnalysisSetup {
            element: element.into(),
            t_star: T_STAR,
            rho_star: self.rho_star,
            n_particles: self.n,
            r_cut: R_CUT,
            hbar_star: lookup(element).unwrap().hbar_star(),
            sign: 1.0,
            n_blocks: BLOCKS,
            estimators: estimators.to_vec(),
            tail_correction: true,
        }
    }

    pub fn analyze(&self, element: &str, estimators: &[Method]) -> ReportRow {
        analyze_records(&self.records, &self.setup(element, estimators)).unwrap()
    }
}

/// A correction from a report row; panics with the recorded estimator error.
pub fn est(row: &ReportRow, m: Method) -> Estimate {
    let r = row.get(m).unwrap_or_else(|| {
        let why = row
            .corrections
            .iter()
            .find(|o| o.method == m)
            .and_then(|o| o.error.clone());
        panic!(
            "{m:?} unavailable for {} rho={}: {why:?}",
            row.element, row.rho_star
        )
    });
    Estimate {
        mean: r.value,
        stderr: r.stderr,
        n_blocks: BLOCKS,
        discarded: 0,
    }
}

pub fn exps(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn fmt(e: &Estimate) -> String {
    format!("{:.4e}±{:.1e}", e.mean, e.stderr)
}
