//! The four user-facing commands: `simulate`, `analyze`, `verify` and
//! `sweep`. Each is a plain function so tests can drive it without a
//! subprocess; `main.rs` only parses flags and prints.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use crate::analysis::{
    analyze_records, make_record, snapshot_table, to_csv, AnalysisSetup, RecordOptions, ReportRow,
    SnapshotRecord,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::estimators::{Method, QuantumParams, TildeCoefficients};
use crate::fields::{compute_fields, momentum_contractions, FieldScalars, MomentumContractions};
use crate::mc::Sampler;
use crate::oracle;
use crate::persist::{
    fields_header, open_truncated, read_fields, read_vectors, write_fields_row, write_vectors,
    FileOffsets, Manifest, RunStatus, FIELDS_FILE, MANIFEST_FILE, MANIFEST_FORMAT, TRAJECTORY_FILE,
    VECTORS_FILE,
};
use crate::potential::LennardJones;
use crate::system::{build_cell_list, read_frames, write_frame, Configuration};
use crate::units::{element_table, thermal_wavelength};

/// Result of `simulate`: the final manifest and the last stored snapshot.
#[derive(Clone, Debug)]
pub struct SimulationOutcome {
    pub manifest: Manifest,
    pub last: Option<Configuration>,
}

pub fn run_id(cfg: &RunConfig) -> String {
    format!(
        "{}-t{}-rho{}-n{}-seed{}",
        cfg.element.name, cfg.t_star, cfg.rho_star, cfg.n_particles, cfg.mc.rng_seed
    )
}

fn wants_vectors(cfg: &RunConfig) -> bool {
    cfg.wants(Method::A2) || cfg.wants(Method::A4) || cfg.wants(Method::DimerW)
}

/// The frame stored in bytes `start..end` of the trajectory file.
fn read_last_frame(path: &Path, run_id: &str, start: u64, end: u64) -> Result<Configuration> {
    let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
    f.seek(SeekFrom::Start(start))
        .map_err(|e| Error::io(path, e))?;
    let frames = read_frames(
        BufReader::new(f.take(end - start)),
        &path.display().to_string(),
    )?;
    let mut config = frames
        .into_iter()
        .last()
        .map(|f| f.config)
        .ok_or_else(|| Error::Parse {
            location: path.display().to_string(),
            reason: format!("no frame at byte {start}"),
        })?;
    config.run_id = run_id.to_string();
    Ok(config)
}

/// Run a simulation from a simple-cubic start.
pub fn simulate(cfg: &RunConfig) -> Result<SimulationOutcome> {
    simulate_from(cfg, None)
}

/// Run (or resume) a simulation, starting from `initial` when given.
///
/// If the output directory already holds a manifest for the same
/// configuration, a complete run is returned as is and an interrupted one
/// continues from its last consistent snapshot.
pub fn simulate_from(cfg: &RunConfig, initial: Option<Configuration>) -> Result<SimulationOutcome> {
    cfg.validate()?;
    let dir = cfg.output.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let id = run_id(cfg);
    let traj_path = dir.join(TRAJECTORY_FILE);
    let fields_path = dir.join(FIELDS_FILE);
    let vec_path = dir.join(VECTORS_FILE);
    let vectors = wants_vectors(cfg);
    let state = cfg.state()?;
    let potential = LennardJones::reduced(cfg.r_cut)?;

    let previous = Manifest::load(&dir)?;
    if let Some(m) = &previous {
        if m.config != *cfg {
            return Err(Error::invalid(
                "output",
                format!(
                    "{} holds a run with a different configuration",
                    dir.display()
                ),
            ));
        }
        if m.status == RunStatus::Complete {
            let last = if m.snapshots > 0 {
                Some(read_last_frame(
                    &traj_path,
                    &id,
                    m.offsets.last_frame,
                    m.offsets.trajectory,
                )?)
            } else {
                None
            };
            return Ok(SimulationOutcome {
                manifest: m.clone(),
                last,
            });
        }
    }
    let resume = previous.filter(|m| m.sampler.is_some() && m.snapshots > 0);

    let persist = |cycle: u64| {
        let id = id.clone();
        move |e: std::io::Error| Error::Persistence {
            run_id: id.clone(),
            cycle,
            source: e,
        }
    };

    let mut manifest;
    let mut sampler;
    let (mut traj, mut fields, mut vecs);
    if let Some(m) = resume {
        manifest = m;
        let off = manifest.offsets;
        let last = read_last_frame(&traj_path, &id, off.last_frame, off.trajectory)?;
        traj = open_truncated(&traj_path, off.trajectory).map_err(persist(last.cycle))?;
        fields = open_truncated(&fields_path, off.fields).map_err(persist(last.cycle))?;
        vecs = if vectors {
            Some(open_truncated(&vec_path, off.vectors).map_err(persist(last.cycle))?)
        } else {
            None
        };
        sampler = Sampler::new(last.clone(), potential, cfg.t_star, cfg.mc.clone())?;
        let saved = manifest
            .sampler
            .clone()
            .expect("resume requires sampler state");
        sampler.restore(last, &saved)?;
    } else {
        let mut start = match initial {
            Some(c) => {
                if c.len() != cfg.n_particles
                    || (c.box_edge - state.box_edge()).abs() > 1e-9 * state.box_edge()
                {
                    return Err(Error::invalid(
                        "initial",
                        "starting configuration does not match n_particles and rho_star",
                    ));
                }
                c
            }
            None => Configuration::simple_cubic(cfg.n_particles, state.box_edge())?,
        };
        start.run_id = id.clone();
        start.cycle = 0;
        let header = fields_header() + "\n";
        traj = open_truncated(&traj_path, 0).map_err(persist(0))?;
        fields = open_truncated(&fields_path, 0).map_err(persist(0))?;
        fields.write_all(header.as_bytes()).map_err(persist(0))?;
        vecs = if vectors {
            Some(open_truncated(&vec_path, 0).map_err(persist(0))?)
        } else {
            let _ = fs::remove_file(&vec_path);
            None
        };
        sampler = Sampler::new(start, potential, cfg.t_star, cfg.mc.clone())?;
        let report = sampler.equilibrate();
        manifest = Manifest {
            format: MANIFEST_FORMAT.into(),
            run_id: id.clone(),
            element: cfg.element.name.clone(),
            hbar_star: cfg.hbar_star(),
            lambda_star: cfg.lambda_star(),
            box_edge: state.box_edge(),
            status: RunStatus::Running,
            snapshots: 0,
            equilibration: Some(report),
            acceptance_rate: report.acceptance_rate,
            sampler: Some(sampler.state()),
            offsets: FileOffsets {
                fields: header.len() as u64,
                ..FileOffsets::default()
            },
            config: cfg.clone(),
        };
        manifest.store(&dir).map_err(persist(0))?;
    }

    let mut last: Option<Configuration> = None;
    let t_star = cfg.t_star;
    let rho_star = cfg.rho_star;
    sampler.produce(|c, s| {
        let err = persist(c.cycle);
        let (sample, _) = crate::fields::compute_fields_with_cells(c, s.cells(), s.potential());
        let mut tb = Vec::new();
        write_frame(&mut tb, c, t_star, rho_star).map_err(&err)?;
        let mut fb = Vec::new();
        write_fields_row(&mut fb, c.cycle, &sample.scalars()).map_err(&err)?;
        traj.write_all(&tb).map_err(&err)?;
        fields.write_all(&fb).map_err(&err)?;
        let mut vlen = 0;
        if let Some(v) = vecs.as_mut() {
            let mut vb = Vec::new();
            write_vectors(&mut vb, c.cycle, &sample).map_err(&err)?;
            v.write_all(&vb).map_err(&err)?;
            vlen = vb.len() as u64;
        }
        let o = &mut manifest.offsets;
        o.last_frame = o.trajectory;
        o.trajectory += tb.len() as u64;
        o.fields += fb.len() as u64;
        o.vectors += vlen;
        manifest.snapshots += 1;
        manifest.sampler = Some(s.state());
        manifest.acceptance_rate = s.production_stats().acceptance_rate();
        manifest.store(&dir).map_err(&err)?;
        last = Some(c.clone());
        Ok(())
    })?;
    manifest.status = RunStatus::Complete;
    manifest.acceptance_rate = sampler.production_stats().acceptance_rate();
    manifest
        .store(&dir)
        .map_err(persist(sampler.production_cycles()))?;
    if last.is_none() && manifest.snapshots > 0 {
        last = Some(read_last_frame(
            &traj_path,
            &id,
            manifest.offsets.last_frame,
            manifest.offsets.trajectory,
        )?);
    }
    Ok(SimulationOutcome { manifest, last })
}

/// Optional changes applied on top of the stored configuration when
/// analysing a run directory.
#[derive(Clone, Debug, Default)]
pub struct AnalyzeOptions {
    pub element: Option<String>,
    pub hbar_star: Option<f64>,
    pub estimators: Option<Vec<Method>>,
    pub sign: Option<f64>,
    pub n_blocks: Option<usize>,
    /// Where to write the reports; defaults to the run directory.
    pub report_dir: Option<PathBuf>,
}

fn required_columns(m: Method) -> &'static [&'static str] {
    match m {
        Method::Virial => &["virial"],
        Method::B1 => &["grad_sq"],
        Method::B2 | Method::C2 | Method::DimerW => &["grad_sq", "lap"],
        Method::B4 | Method::C4 => &[
            "grad_sq",
            "lap",
            "hess_frob",
            "gug",
            "grad_dot_gradlap",
            "biharmonic",
        ],
        Method::A2 | Method::A4 | Method::Dimer0 | Method::Trimer0 => &[],
    }
}

/// Reduce a stored run into a report row and write `report.csv`,
/// `report.json` and the per-snapshot table `records.txt`.
pub fn analyze(dir: &Path, opts: &AnalyzeOptions) -> Result<ReportRow> {
    let manifest = Manifest::load(dir)?.ok_or_else(|| Error::Io {
        path: dir.join(MANIFEST_FILE).display().to_string(),
        source: std::io::Error::new(std::io::ErrorKind::NotFound, "manifest not found"),
    })?;
    let mut cfg = manifest.config.clone();
    if let Some(e) = &opts.element {
        cfg.set("element", e)?;
        cfg.hbar_star_override = None;
    }
    if let Some(h) = opts.hbar_star {
        cfg.hbar_star_override = Some(h);
    }
    if let Some(e) = &opts.estimators {
        cfg.estimators = e.clone();
    }
    if let Some(s) = opts.sign {
        cfg.sign = s;
    }
    if let Some(n) = opts.n_blocks {
        cfg.n_blocks = n;
    }
    cfg.validate()?;

    let table = read_fields(&dir.join(FIELDS_FILE))?;
    let mut wanted = cfg.estimators.clone();
    if !wanted.contains(&Method::Virial) {
        wanted.push(Method::Virial);
    }
    for m in &wanted {
        for c in required_columns(*m) {
            if !table.has(c) {
                return Err(Error::MissingColumn {
                    column: c,
                    estimator: m.as_str(),
                });
            }
        }
    }

    let traj_path = dir.join(TRAJECTORY_FILE);
    let file = File::open(&traj_path).map_err(|e| Error::io(&traj_path, e))?;
    let frames = read_frames(BufReader::new(file), &traj_path.display().to_string())?;
    let scalars = table.scalars();
    if frames.len() != scalars.len() {
        return Err(Error::LengthMismatch(frames.len(), scalars.len()));
    }

    let opts_rec = RecordOptions::for_config(&cfg);
    let need_pairs = opts_rec.replicas > 0;
    let potential = LennardJones::reduced(cfg.r_cut)?;
    let vectors = if cfg.wants(Method::DimerW) && dir.join(VECTORS_FILE).exists() {
        Some(read_vectors(&dir.join(VECTORS_FILE))?)
    } else {
        None
    };
    let mut records = Vec::with_capacity(frames.len());
    for (k, (frame, s)) in frames.into_iter().zip(scalars).enumerate() {
        let config = frame.config;
        let mut rec = if need_pairs {
            let cells = build_cell_list(&config, cfg.r_cut)?;
            make_record(&config, &cells, &potential, &opts_rec)
        } else {
            SnapshotRecord {
                config,
                scalars: s,
                grad: Vec::new(),
                weights: Vec::new(),
            }
        };
        rec.scalars = s;
        if cfg.wants(Method::DimerW) && rec.grad.is_empty() {
            rec.grad = match &vectors {
                Some(v) if v.get(k).is_some_and(|r| r.cycle == rec.config.cycle) => {
                    v[k].grad.clone()
                }
                _ => compute_fields(&rec.config, &potential)?.0.grad,
            };
        }
        records.push(rec);
    }

    let setup = AnalysisSetup::from_config(&cfg);
    let row = analyze_records(&records, &setup)?;
    let out = opts.report_dir.clone().unwrap_or_else(|| dir.to_path_buf());
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    write_reports(&out, "report", std::slice::from_ref(&row))?;
    let rec_path = out.join("records.txt");
    fs::write(&rec_path, snapshot_table(&records, &setup)?).map_err(|e| Error::io(&rec_path, e))?;
    Ok(row)
}

pub fn write_reports(dir: &Path, stem: &str, rows: &[ReportRow]) -> Result<()> {
    let csv = dir.join(format!("{stem}.csv"));
    fs::write(&csv, to_csv(rows)).map_err(|e| Error::io(&csv, e))?;
    let json = dir.join(format!("{stem}.json"));
    let text = serde_json::to_string_pretty(rows)? + "\n";
    fs::write(&json, text).map_err(|e| Error::io(&json, e))
}

/// Simulate and analyse each density in ascending order, warm-starting from
/// the previous point's final configuration rescaled to the new box. Each
/// point lives in `output/rho_<density>`; failures become error rows.
pub fn sweep(base: &RunConfig, densities: &[f64]) -> Result<Vec<ReportRow>> {
    if densities.is_empty() {
        return Err(Error::invalid("densities", "empty density list"));
    }
    if densities.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("densities", "must be strictly ascending"));
    }
    fs::create_dir_all(&base.output).map_err(|e| Error::io(&base.output, e))?;
    let mut rows = Vec::new();
    let mut warm: Option<Configuration> = None;
    for &rho in densities {
        let mut cfg = base.clone();
        cfg.rho_star = rho;
        cfg.output = base.output.join(format!("rho_{rho}"));
        let setup = AnalysisSetup::from_config(&cfg);
        let result = (|| {
            let start = match (&warm, cfg.state()) {
                (Some(c), Ok(s)) if c.len() == cfg.n_particles => Some(rescale(c, s.box_edge())),
                _ => None,
            };
            let out = simulate_from(&cfg, start)?;
            let row = analyze(&cfg.output, &AnalyzeOptions::default())?;
            Ok::<_, Error>((out.last, row))
        })();
        match result {
            Ok((last, row)) => {
                warm = last;
                rows.push(row);
            }
            Err(e) => rows.push(ReportRow::failed(&setup, &e)),
        }
    }
    write_reports(&base.output, "sweep", &rows)?;
    Ok(rows)
}

/// Affine rescaling of a configuration into a box of edge `box_edge`.
pub fn rescale(c: &Configuration, box_edge: f64) -> Configuration {
    let k = box_edge / c.box_edge;
    Configuration {
        positions: c
            .positions
            .iter()
            .map(|p| crate::system::fold(p * k, box_edge))
            .collect(),
        box_edge,
        run_id: c.run_id.clone(),
        cycle: 0,
    }
}

/// One oracle comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub module: &'static str,
    pub operation: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.residual.is_finite() && self.residual <= self.tolerance
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    /// Fitted exponent of the quartic residual against ħ.
    pub quartic_slope: f64,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{} {}::{} residual={:.3e} tolerance={:.1e} {}",
                if c.passed() { "PASS" } else { "FAIL" },
                c.module,
                c.operation,
                c.residual,
                c.tolerance,
                c.detail
            );
        }
        s
    }

    /// `Ok` when every check passed, otherwise an error naming the failures.
    pub fn into_result(self) -> Result<Self> {
        let failed: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.passed())
            .map(|c| format!("{}::{}", c.module, c.operation))
            .collect();
        if failed.is_empty() {
            Ok(self)
        } else {
            Err(Error::VerificationFailed(failed.join(", ")))
        }
    }
}

/// Thermal wavelengths Λ/σ quoted to four significant figures for the
/// three elements at the five isotherms.
pub const REFERENCE_WAVELENGTHS: [(&str, f64, f64); 15] = [
    ("Ar", 1.5, 0.0593),
    ("Ne", 1.5, 0.1904),
    ("He", 1.5, 0.8720),
    ("Ar", 1.0, 0.0726),
    ("Ne", 1.0, 0.2332),
    ("He", 1.0, 1.0679),
    ("Ar", 0.8, 0.0811),
    ("Ne", 0.8, 0.2608),
    ("He", 0.8, 1.1940),
    ("Ar", 0.6, 0.0937),
    ("Ne", 0.6, 0.3011),
    ("He", 0.6, 1.3787),
    ("Ar", 0.5, 0.1026),
    ("Ne", 0.5, 0.3298),
    ("He", 0.5, 1.5103),
];

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Harmonic check of expansion C: returns the worse relative error of the
/// ħ² and ħ⁴ parts against ln((x/2)/sinh(x/2)) = −x²/24 + x⁴/2880.
pub fn harmonic_c_residual(x: f64, coeffs: &TildeCoefficients) -> f64 {
    let q = QuantumParams::new(1.0, 1.0, x);
    let (c2, c4) = oracle::c_expansion_1d(&|q: f64| 0.5 * q * q, &q, coeffs, 12.0);
    rel(c2, -x * x / 24.0).max(rel(c4 - c2, x.powi(4) / 2880.0))
}

pub fn harmonic_a_residual(x: f64) -> f64 {
    let q = QuantumParams::new(1.0, 1.0, x);
    let (a2, a4) = oracle::a_expansion_1d(&|q: f64| 0.5 * q * q, &q, 12.0);
    rel(a2, -x * x / 24.0).max(rel(a4 - a2, x.powi(4) / 2880.0))
}

/// ħ values of the quartic check, halving from 0.8.
pub const QUARTIC_HBARS: [f64; 4] = [0.8, 0.4, 0.2, 0.1];
const QUARTIC_EXTENT: f64 = 3.2;

/// |C4 − ln(Z_grid/Z_cl)| for u = q⁴ at β = m = 1.
pub fn quartic_residual(hbar: f64, coeffs: &TildeCoefficients) -> Result<f64> {
    let u = |q: f64| q.powi(4);
    let q = QuantumParams::new(1.0, 1.0, hbar);
    let (_, c4) = oracle::c_expansion_1d(&u, &q, coeffs, QUARTIC_EXTENT);
    let exact = oracle::quantum_log_ratio(&u, QUARTIC_EXTENT, 1.0, 1.0, hbar)?;
    Ok((c4 - exact).abs())
}

/// Least-squares slope of ln(residual) against ln(ħ).
pub fn log_log_slope(hbar: &[f64], residual: &[f64]) -> f64 {
    let x: Vec<f64> = hbar.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = residual.iter().map(|r| r.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Displacement step for the many-body finite-difference oracle.
pub const FD_STEP: f64 = 0.01;

/// Worst relative error of analytic fields and contractions against finite
/// differences of the total energy, over one random configuration.
pub fn field_fd_residuals(n: usize, seed: u64, h: f64) -> Result<(f64, f64)> {
    let box_edge = (n as f64 / 0.15).cbrt().max(5.2);
    let pot = LennardJones::reduced(2.5)?;
    let c = oracle::fd_test_configuration(n, box_edge, 2.5, 1.0, 0.2, seed)?;
    let (fields, pairs) = compute_fields(&c, &pot)?;
    let p = crate::momentum::draw_momenta(
        n,
        1.0,
        1.0,
        crate::momentum::MomentumSeed {
            run_seed: seed,
            snapshot: 0,
            replica: 0,
        },
    );
    let contr = momentum_contractions(&pairs, &fields, &p.momenta);
    let (fd_f, fd_c) = oracle::fd_fields(&c.positions, box_edge, &pot, &p.momenta, h);
    let worst_f = scalar_residual(&fields.scalars(), &fd_f);
    let worst_c = contraction_residual(&contr, &fd_c);
    Ok((worst_f, worst_c))
}

fn scalar_residual(a: &FieldScalars, b: &FieldScalars) -> f64 {
    // The finite-difference oracle has no virial column.
    a.to_array()[..7]
        .iter()
        .zip(&b.to_array()[..7])
        .map(|(x, y)| rel(*x, *y))
        .fold(0.0, f64::max)
}

pub fn contraction_array(c: &MomentumContractions) -> [f64; 9] {
    [
        c.p_grad,
        c.pp_hess,
        c.ppp_d3,
        c.pppp_d4,
        c.p_hess_sq,
        c.p_gradlap,
        c.p_hess_grad,
        c.grad_pp_d3,
        c.pp_hesslap,
    ]
}

fn contraction_residual(a: &MomentumContractions, b: &MomentumContractions) -> f64 {
    contraction_array(a)
        .iter()
        .zip(&contraction_array(b))
        .map(|(x, y)| rel(*x, *y))
        .fold(0.0, f64::max)
}

/// The oracle suite with the standard coefficients.
pub fn verify() -> Result<VerifyReport> {
    verify_with(&TildeCoefficients::default())
}

/// The oracle suite with caller-supplied fourth-order coefficients, so a
/// deliberately wrong coefficient can be shown to fail.
pub fn verify_with(coeffs: &TildeCoefficients) -> Result<VerifyReport> {
    let mut checks = Vec::new();

    let elements = element_table();
    let mut worst = 0.0f64;
    let mut at = String::new();
    for (name, t, lam) in REFERENCE_WAVELENGTHS {
        let e = elements
            .iter()
            .find(|e| e.name == name)
            .expect("element in table");
        let r = rel(thermal_wavelength(e, t)?, lam);
        if r > worst {
            worst = r;
            at = format!("worst at {name} t_star={t}");
        }
    }
    checks.push(Check {
        module: "units",
        operation: "thermal_wavelength",
        residual: worst,
        tolerance: 1e-3,
        detail: at,
    });

    let (lz, _) = oracle::grid_log_z(&|q: f64| 0.5 * q * q, 9.0, 801, 4, 1.0, 1.0, 0.7)?;
    let exact = -(2.0 * (0.35f64).sinh()).ln();
    checks.push(Check {
        module: "oracle",
        operation: "grid_log_z",
        residual: (lz - exact).abs(),
        tolerance: 1e-7,
        detail: "harmonic, beta*hbar*omega=0.7".into(),
    });

    for x in [0.1, 0.3] {
        checks.push(Check {
            module: "estimators",
            operation: "expansion_c",
            residual: harmonic_c_residual(x, coeffs),
            tolerance: 1e-5,
            detail: format!("harmonic x={x}"),
        });
    }
    checks.push(Check {
        module: "estimators",
        operation: "expansion_a",
        residual: harmonic_a_residual(0.3),
        tolerance: 1e-5,
        detail: "harmonic x=0.3".into(),
    });

    let residuals: Vec<f64> = QUARTIC_HBARS
        .iter()
        .map(|&h| quartic_residual(h, coeffs))
        .collect::<Result<_>>()?;
    let slope = log_log_slope(&QUARTIC_HBARS, &residuals);
    let listing: Vec<String> = QUARTIC_HBARS
        .iter()
        .zip(&residuals)
        .map(|(h, r)| format!("{h}:{r:.3e}"))
        .collect();
    checks.push(Check {
        module: "estimators",
        operation: "expansion_c",
        residual: (slope - 6.0).abs(),
        tolerance: 0.3,
        detail: format!(
            "quartic hbar^6 slope={slope:.3} residuals {}",
            listing.join(" ")
        ),
    });

    for (rho, lam) in [(0.5, 0.2332), (0.3, 1.5103)] {
        checks.push(Check {
            module: "oracle",
            operation: "ideal_dimer",
            residual: rel(
                oracle::ideal_dimer_exact(rho, lam, 1.0),
                oracle::ideal_dimer_quadrature(rho, lam, 1.0),
            ),
            tolerance: 1e-10,
            detail: format!("rho={rho} lambda={lam}"),
        });
        checks.push(Check {
            module: "oracle",
            operation: "ideal_trimer",
            residual: rel(
                oracle::ideal_trimer_exact(rho, lam),
                oracle::ideal_trimer_quadrature(rho, lam),
            ),
            tolerance: 1e-9,
            detail: format!("rho={rho} lambda={lam}"),
        });
    }

    for (n, seed) in [(12, 11), (20, 12)] {
        let (f, c) = field_fd_residuals(n, seed, FD_STEP)?;
        checks.push(Check {
            module: "fields",
            operation: "compute_fields",
            residual: f,
            tolerance: 1e-5,
            detail: format!("finite differences, {n} particles"),
        });
        checks.push(Check {
            module: "fields",
            operation: "momentum_contractions",
            residual: c,
            tolerance: 1e-5,
            detail: format!("finite differences, {n} particles"),
        });
    }

    Ok(VerifyReport {
        checks,
        quartic_slope: slope,
    })
}

/// Load a `key = value` config file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    RunConfig::from_text(&text)
}
