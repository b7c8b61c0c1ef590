//! Per-snapshot records and their reduction into a report row.
//!
//! A [`SnapshotRecord`] carries everything the estimators need from one
//! configuration. Field scalars and momentum weights do not depend on ħ, so
//! one set of records can be analysed for several elements.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::estimators::{
    b_exponent, dimer_weighted, dimer_weighted_sample, dimer_zeroth, exchange_cutoff, expansion_a,
    expansion_b, expansion_c, tilde_terms, trimer_zeroth, virial_pressure, weight_terms,
    CorrectionResult, Method, QuantumParams, WeightTerms,
};
use crate::fields::{compute_fields_with_cells, momentum_contractions, FieldScalars};
use crate::momentum::{draw_momenta, MomentumSeed};
use crate::potential::PairPotential;
use crate::stats::block_average;
use crate::system::{CellList, Configuration, Vec3};
use crate::units::lambda_from_hbar;

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotRecord {
    pub config: Configuration,
    pub scalars: FieldScalars,
    /// Per-particle gradient; empty unless the weighted dimer is wanted.
    pub grad: Vec<Vec3>,
    /// One entry per momentum replica; empty unless expansion A is wanted.
    pub weights: Vec<WeightTerms>,
}

#[derive(Clone, Copy, Debug)]
pub struct RecordOptions {
    pub t_star: f64,
    pub replicas: u32,
    pub run_seed: u64,
    pub keep_grad: bool,
}

impl RecordOptions {
    pub fn for_config(cfg: &RunConfig) -> Self {
        RecordOptions {
            t_star: cfg.t_star,
            replicas: if cfg.wants(Method::A2) || cfg.wants(Method::A4) {
                cfg.momentum_replicas
            } else {
                0
            },
            run_seed: cfg.mc.rng_seed,
            keep_grad: cfg.wants(Method::DimerW),
        }
    }
}

/// Fields, momentum weights and (optionally) gradients of one configuration.
/// Momentum replicas are seeded by the configuration's cycle index.
pub fn make_record<P: PairPotential + ?Sized>(
    config: &Configuration,
    cells: &CellList,
    potential: &P,
    opts: &RecordOptions,
) -> SnapshotRecord {
    let (fields, pairs) = compute_fields_with_cells(config, cells, potential);
    let scalars = fields.scalars();
    // Weight terms are independent of ħ; the value here is a placeholder.
    let q = QuantumParams::new(opts.t_star, 1.0, 1.0);
    let weights = (0..opts.replicas)
        .map(|r| {
            let seed = MomentumSeed {
                run_seed: opts.run_seed,
                snapshot: config.cycle,
                replica: r,
            };
            let p = draw_momenta(config.len(), opts.t_star, 1.0, seed);
            let c = momentum_contractions(&pairs, &fields, &p.momenta);
            weight_terms(&scalars, &c, &q)
        })
        .collect();
    SnapshotRecord {
        config: config.clone(),
        scalars,
        grad: if opts.keep_grad {
            fields.grad
        } else {
            Vec::new()
        },
        weights,
    }
}

/// Everything about a state point the reduction needs besides the records.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisSetup {
    pub element: String,
    pub t_star: f64,
    pub rho_star: f64,
    pub n_particles: usize,
    pub r_cut: f64,
    pub hbar_star: f64,
    pub sign: f64,
    pub n_blocks: usize,
    pub estimators: Vec<Method>,
    /// Add the Lennard-Jones tail to the pressure; off for non-LJ records.
    pub tail_correction: bool,
}

impl AnalysisSetup {
    pub fn from_config(cfg: &RunConfig) -> Self {
        AnalysisSetup {
            element: cfg.element.name.clone(),
            t_star: cfg.t_star,
            rho_star: cfg.rho_star,
            n_particles: cfg.n_particles,
            r_cut: cfg.r_cut,
            hbar_star: cfg.hbar_star(),
            sign: cfg.sign,
            n_blocks: cfg.n_blocks,
            estimators: cfg.estimators.clone(),
            tail_correction: true,
        }
    }

    pub fn lambda_star(&self) -> f64 {
        lambda_from_hbar(self.hbar_star, self.t_star)
    }

    fn label(&self) -> String {
        format!(
            "{} t_star={} rho_star={}",
            self.element, self.t_star, self.rho_star
        )
    }
}

/// One estimator's outcome; failures keep their message instead of a value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub method: Method,
    pub value: Option<f64>,
    pub stderr: Option<f64>,
    pub error: Option<String>,
}

impl Outcome {
    fn from_result(method: Method, r: Result<CorrectionResult>) -> Self {
        match r {
            Ok(c) => Outcome {
                method,
                value: Some(c.value),
                stderr: Some(c.stderr),
                error: None,
            },
            Err(e) => Outcome {
                method,
                value: None,
                stderr: None,
                error: Some(format!("kind={} message={e}", e.kind())),
            },
        }
    }

    pub fn result(&self) -> Option<CorrectionResult> {
        Some(CorrectionResult {
            method: self.method,
            value: self.value?,
            stderr: self.stderr?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub element: String,
    pub t_star: f64,
    pub rho_star: f64,
    pub n_particles: usize,
    pub hbar_star: f64,
    pub lambda_star: f64,
    pub snapshots: usize,
    pub discarded: usize,
    pub beta_p_cl: Option<f64>,
    pub beta_p_cl_err: Option<f64>,
    pub corrections: Vec<Outcome>,
    pub error: Option<String>,
}

impl ReportRow {
    pub fn get(&self, m: Method) -> Option<CorrectionResult> {
        if m == Method::Virial {
            return Some(CorrectionResult {
                method: m,
                value: self.beta_p_cl?,
                stderr: self.beta_p_cl_err?,
            });
        }
        self.corrections.iter().find(|o| o.method == m)?.result()
    }

    /// A row standing for a state point whose run failed outright.
    pub fn failed(setup: &AnalysisSetup, e: &Error) -> Self {
        ReportRow {
            element: setup.element.clone(),
            t_star: setup.t_star,
            rho_star: setup.rho_star,
            n_particles: setup.n_particles,
            hbar_star: setup.hbar_star,
            lambda_star: setup.lambda_star(),
            snapshots: 0,
            discarded: 0,
            beta_p_cl: None,
            beta_p_cl_err: None,
            corrections: Vec::new(),
            error: Some(format!("kind={} message={e}", e.kind())),
        }
    }
}

/// Reduce the records into one report row. Individual estimator failures
/// (for example exponent overflow) are recorded in the row, not raised.
pub fn analyze_records(records: &[SnapshotRecord], setup: &AnalysisSetup) -> Result<ReportRow> {
    let first = records.first().ok_or(Error::SeriesTooShort {
        len: 0,
        blocks: setup.n_blocks,
    })?;
    let volume = first.config.volume();
    let nb = setup.n_blocks;
    let scalars: Vec<FieldScalars> = records.iter().map(|r| r.scalars).collect();
    let q = QuantumParams::new(setup.t_star, 1.0, setup.hbar_star);
    let lambda = setup.lambda_star();
    let cutoff = exchange_cutoff(setup.r_cut, lambda);
    let state = setup.label();

    let bp = virial_pressure(
        &scalars,
        setup.rho_star,
        setup.t_star,
        volume,
        setup.tail_correction.then_some(setup.r_cut),
        nb,
    )?;

    let mut corrections = Vec::new();
    for &m in &setup.estimators {
        let r = match m {
            Method::Virial => continue,
            Method::A2 | Method::A4 => {
                let w: Vec<Vec<WeightTerms>> = records.iter().map(|r| r.weights.clone()).collect();
                expansion_a(
                    &w,
                    if m == Method::A2 { 2 } else { 4 },
                    setup.hbar_star,
                    volume,
                    nb,
                )
            }
            Method::B1 => expansion_b(&scalars, 1, &q, volume, nb, &state),
            Method::B2 => expansion_b(&scalars, 2, &q, volume, nb, &state),
            Method::B4 => expansion_b(&scalars, 4, &q, volume, nb, &state),
            Method::C2 => expansion_c(&scalars, 2, &q, volume, nb),
            Method::C4 => expansion_c(&scalars, 4, &q, volume, nb),
            Method::Dimer0 => records
                .iter()
                .map(|r| dimer_zeroth(&r.config, lambda, setup.sign, cutoff))
                .collect::<Result<Vec<f64>>>()
                .and_then(|v| block_average(&v, nb))
                .map(|e| CorrectionResult {
                    method: m,
                    value: e.mean,
                    stderr: e.stderr,
                }),
            Method::Trimer0 => records
                .iter()
                .map(|r| trimer_zeroth(&r.config, lambda, cutoff))
                .collect::<Result<Vec<f64>>>()
                .and_then(|v| block_average(&v, nb))
                .map(|e| CorrectionResult {
                    method: m,
                    value: e.mean,
                    stderr: e.stderr,
                }),
            Method::DimerW => records
                .iter()
                .map(|r| {
                    if r.grad.len() != r.config.len() {
                        return Err(Error::MissingColumn {
                            column: "grad",
                            estimator: m.as_str(),
                        });
                    }
                    dimer_weighted_sample(
                        &r.config,
                        &r.grad,
                        b_exponent(&r.scalars, 2, &q),
                        &q,
                        cutoff,
                    )
                })
                .collect::<Result<Vec<_>>>()
                .and_then(|s| dimer_weighted(&s, setup.sign, volume, nb, &state)),
        };
        corrections.push(Outcome::from_result(m, r));
    }

    Ok(ReportRow {
        element: setup.element.clone(),
        t_star: setup.t_star,
        rho_star: setup.rho_star,
        n_particles: setup.n_particles,
        hbar_star: setup.hbar_star,
        lambda_star: lambda,
        snapshots: records.len(),
        discarded: records.len() % nb,
        beta_p_cl: Some(bp.value),
        beta_p_cl_err: Some(bp.stderr),
        corrections,
        error: None,
    })
}

/// Per-snapshot estimator inputs as a named-column text table.
pub fn snapshot_table(records: &[SnapshotRecord], setup: &AnalysisSetup) -> Result<String> {
    let q = QuantumParams::new(setup.t_star, 1.0, setup.hbar_star);
    let lambda = setup.lambda_star();
    let cutoff = exchange_cutoff(setup.r_cut, lambda);
    let want = |m: Method| setup.estimators.contains(&m);
    let mut out = String::from("cycle beta_p");
    let mut cols: Vec<&str> = Vec::new();
    for (m, c) in [
        (Method::B1, "b1_exponent"),
        (Method::B2, "b2_exponent"),
        (Method::B4, "b4_exponent"),
        (Method::C2, "tw2"),
        (Method::C4, "tw4"),
        (Method::A2, "w2_mean"),
        (Method::A2, "v1_sq_mean"),
        (Method::Dimer0, "dimer0"),
        (Method::Trimer0, "trimer0"),
        (Method::DimerW, "dimer_pair_sum"),
    ] {
        let on = want(m)
            || (m == Method::A2 && want(Method::A4))
            || (m == Method::C2 && want(Method::C4));
        if on && !cols.contains(&c) {
            cols.push(c);
            out.push(' ');
            out.push_str(c);
        }
    }
    out.push('\n');
    for r in records {
        let v = r.config.volume();
        let f = &r.scalars;
        let tail =
            crate::potential::tail_pressure_correction(setup.rho_star, setup.r_cut) / setup.t_star;
        let bp = setup.rho_star - f.virial / (3.0 * v * setup.t_star) + tail;
        let _ = write!(out, "{} {bp:e}", r.config.cycle);
        let tt = tilde_terms(f, &q);
        let n_rep = r.weights.len().max(1) as f64;
        for c in &cols {
            let x = match *c {
                "b1_exponent" => b_exponent(f, 1, &q),
                "b2_exponent" => b_exponent(f, 2, &q),
                "b4_exponent" => b_exponent(f, 4, &q),
                "tw2" => tt.tw2,
                "tw4" => tt.tw4,
                "w2_mean" => r.weights.iter().map(|w| w.w2).sum::<f64>() / n_rep,
                "v1_sq_mean" => r.weights.iter().map(|w| w.v1 * w.v1).sum::<f64>() / n_rep,
                "dimer0" => dimer_zeroth(&r.config, lambda, setup.sign, cutoff)?,
                "trimer0" => trimer_zeroth(&r.config, lambda, cutoff)?,
                _ => {
                    if r.grad.len() == r.config.len() {
                        dimer_weighted_sample(&r.config, &r.grad, 0.0, &q, cutoff)?.pair_sum
                    } else {
                        f64::NAN
                    }
                }
            };
            let _ = write!(out, " {x:e}");
        }
        out.push('\n');
    }
    Ok(out)
}

pub const CSV_VERSION: &str = "# ljq-report v1";

/// Correction columns in the CSV, in a fixed order.
pub const CSV_METHODS: [Method; 10] = [
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
];

fn cell(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

/// Fixed-schema CSV: every correction column is present; cells for
/// estimators that were not requested or failed are empty.
pub fn to_csv(rows: &[ReportRow]) -> String {
    let mut s = String::from(CSV_VERSION);
    s.push('\n');
    s.push_str("element,t_star,rho_star,n_particles,hbar_star,lambda_star,snapshots,discarded,beta_p_cl,beta_p_cl_err");
    for m in CSV_METHODS {
        let _ = write!(s, ",{0},{0}_err", m.as_str());
    }
    s.push_str(",notes\n");
    for r in rows {
        let _ = write!(
            s,
            "{},{},{},{},{:e},{:e},{},{},{},{}",
            r.element,
            r.t_star,
            r.rho_star,
            r.n_particles,
            r.hbar_star,
            r.lambda_star,
            r.snapshots,
            r.discarded,
            cell(r.beta_p_cl),
            cell(r.beta_p_cl_err)
        );
        let mut notes: Vec<String> = r.error.iter().cloned().collect();
        for m in CSV_METHODS {
            let o = r.corrections.iter().find(|o| o.method == m);
            let _ = write!(
                s,
                ",{},{}",
                cell(o.and_then(|o| o.value)),
                cell(o.and_then(|o| o.stderr))
            );
            if let Some(e) = o.and_then(|o| o.error.as_ref()) {
                notes.push(format!("{}: {e}", m.as_str()));
            }
        }
        let joined = notes.join("; ").replace('"', "'");
        let _ = writeln!(s, ",\"{joined}\"");
    }
    s
}
