//! Acceptance suite. Each test evaluates one criterion, writes a single
//! `PASS`/`FAIL` line to stderr (uncaptured), then asserts it.
//!
//! The Lennard-Jones trajectories are shared: positions are classical, so
//! one trajectory serves every element at the same reduced state point.

use std::sync::OnceLock;

use ljq_core::cli::{
    field_fd_residuals, harmonic_a_residual, harmonic_c_residual, log_log_slope, quartic_residual,
    FD_STEP, QUARTIC_HBARS, REFERENCE_WAVELENGTHS,
};
use ljq_core::estimators::{
    dimer_zeroth, exchange_cutoff, expansion_c_with, trimer_zeroth, Method, QuantumParams,
    TildeCoefficients,
};
use ljq_core::mc::{McParams, Sampler};
use ljq_core::oracle::{ideal_dimer_exact, ideal_dimer_quadrature, ideal_trimer_quadrature};
use ljq_core::potential::LennardJones;
use ljq_core::stats::block_average;
use ljq_core::system::Configuration;
use ljq_core::units::{lookup, thermal_wavelength};
use ljq_validation::{est, exps, fmt, report, Trajectory, BLOCKS, R_CUT, T_STAR};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

static RHO_02: OnceLock<Trajectory> = OnceLock::new();
static RHO_05: OnceLock<Trajectory> = OnceLock::new();
static RHO_04: OnceLock<Trajectory> = OnceLock::new();
static RHO_05_N500: OnceLock<Trajectory> = OnceLock::new();

fn rho_02() -> &'static Trajectory {
    RHO_02.get_or_init(|| Trajectory::generate(0.2, 250, 5000, 11))
}
fn rho_05() -> &'static Trajectory {
    RHO_05.get_or_init(|| Trajectory::generate(0.5, 250, 5000, 12))
}
fn rho_04() -> &'static Trajectory {
    RHO_04.get_or_init(|| Trajectory::generate(0.4, 250, 5000, 13))
}
fn rho_05_n500() -> &'static Trajectory {
    RHO_05_N500.get_or_init(|| Trajectory::generate(0.5, 500, 2500, 14))
}

#[test]
fn criterion_01_thermal_wavelengths() {
    let mut worst = (0.0, "", 0.0);
    for (name, t, quoted) in REFERENCE_WAVELENGTHS {
        let lam = thermal_wavelength(&lookup(name).unwrap(), t).unwrap();
        let r = ((lam - quoted) / quoted).abs();
        if r > worst.0 {
            worst = (r, name, t);
        }
    }
    let ok = worst.0 < 1e-3;
    report(
        1,
        ok,
        &format!(
            "15 wavelengths, worst relative error {:.2e} ({} T*={})",
            worst.0, worst.1, worst.2
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_02_harmonic_oracle() {
    let k = TildeCoefficients::default();
    let c: Vec<f64> = [0.1, 0.3]
        .iter()
        .map(|&x| harmonic_c_residual(x, &k))
        .collect();
    let a: Vec<f64> = [0.1, 0.3].iter().map(|&x| harmonic_a_residual(x)).collect();
    let ok = c.iter().chain(&a).all(|&r| r < 1e-5);
    report(
        2,
        ok,
        &format!(
            "C residuals {}, A residuals {}, limit 1e-5",
            exps(&c),
            exps(&a)
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_03_quartic_oracle() {
    let k = TildeCoefficients::default();
    let res: Vec<f64> = QUARTIC_HBARS
        .iter()
        .map(|&h| quartic_residual(h, &k).unwrap())
        .collect();
    let slope = log_log_slope(&QUARTIC_HBARS, &res);
    let ok = (slope - 6.0).abs() <= 0.3;
    report(
        3,
        ok,
        &format!(
            "log-log slope {slope:.3} over hbar {QUARTIC_HBARS:?}, residuals {}",
            exps(&res)
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_04_field_algebra() {
    let mut worst = (0.0f64, 0.0f64);
    for (k, n) in [10, 15, 20, 25, 30].into_iter().enumerate() {
        for seed in 0..2 {
            let (f, c) = field_fd_residuals(n, 100 + 10 * k as u64 + seed, FD_STEP).unwrap();
            worst = (worst.0.max(f), worst.1.max(c));
        }
    }
    let ok = worst.0 < 1e-5 && worst.1 < 1e-5;
    report(
        4,
        ok,
        &format!(
            "fields {:.2e}, contractions {:.2e}, limit 1e-5",
            worst.0, worst.1
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_05_ideal_gas_exchange() {
    let (n, rho, lam) = (250usize, 0.2, 1.0);
    let edge = (n as f64 / rho).cbrt();
    let params = McParams {
        cycles_equil: 20,
        cycles_prod: 4000,
        snapshot_interval: 2,
        rng_seed: 5,
        ..McParams::default()
    };
    let ideal = LennardJones::new(0.0, 1.0, R_CUT).unwrap();
    let mut s = Sampler::new(
        Configuration::simple_cubic(n, edge).unwrap(),
        ideal,
        T_STAR,
        params,
    )
    .unwrap();
    s.equilibrate();
    let cutoff = exchange_cutoff(R_CUT, lam);
    let (mut d, mut t) = (Vec::new(), Vec::new());
    s.produce(|c, _| {
        let per_particle = c.volume() / n as f64;
        d.push(dimer_zeroth(c, lam, 1.0, cutoff)? * per_particle);
        t.push(trimer_zeroth(c, lam, cutoff)? * per_particle);
        Ok(())
    })
    .unwrap();
    let nf = n as f64;
    let dimer_ref = ideal_dimer_exact(rho, lam, 1.0) * (nf - 1.0) / nf;
    let dimer_quad = ideal_dimer_quadrature(rho, lam, 1.0) * (nf - 1.0) / nf;
    let trimer_ref = ideal_trimer_quadrature(rho, lam) * (nf - 1.0) * (nf - 2.0) / (nf * nf);
    let de = block_average(&d, BLOCKS).unwrap();
    let te = block_average(&t, BLOCKS).unwrap();
    let dz = (de.mean - dimer_ref) / de.stderr;
    let tz = (te.mean - trimer_ref) / te.stderr;
    let ok = dz.abs() <= 3.0
        && ((dimer_quad - dimer_ref) / dimer_ref).abs() < 1e-8
        && tz.abs() <= 3.0
        && s.production_stats().acceptance_rate() == 1.0;
    report(
        5,
        ok,
        &format!(
            "dimer {} vs {dimer_ref:.5e} ({dz:+.2} sd); trimer {} vs {trimer_ref:.5e} ({tz:+.2} sd)",
            fmt(&de),
            fmt(&te)
        ),
    );
    assert!(ok);
}

const CROSS: [Method; 6] = [
    Method::A2,
    Method::A4,
    Method::B2,
    Method::C2,
    Method::C4,
    Method::Virial,
];

fn cross_agreement(t: &Trajectory) -> (bool, String) {
    let row = t.analyze("Ar", &CROSS);
    let (a2, a4, b2, c4) = (
        est(&row, Method::A2),
        est(&row, Method::A4),
        est(&row, Method::B2),
        est(&row, Method::C4),
    );
    let ok2 = a2.agrees_with(&b2, 2.0);
    let ok4 = a4.agrees_with(&c4, 2.0);
    let negative = a4.mean < 0.0 && c4.mean < 0.0;
    let rising = a4.mean - a2.mean > 0.0;
    let c_step = est(&row, Method::C4).mean - est(&row, Method::C2).mean;
    let detail = format!(
        "rho={}: A2 {} B2 {} [{}], A4 {} C4 {} [{}], total<0 [{}], A4-A2={:+.2e} [{}] (C4-C2={:+.2e})",
        t.rho_star,
        fmt(&a2),
        fmt(&b2),
        if ok2 { "ok" } else { "no" },
        fmt(&a4),
        fmt(&c4),
        if ok4 { "ok" } else { "no" },
        if negative { "ok" } else { "no" },
        a4.mean - a2.mean,
        if rising { "ok" } else { "no" },
        c_step,
    );
    (ok2 && ok4 && negative && rising, detail)
}

#[test]
fn criterion_06_expansion_cross_agreement() {
    let (ok_a, da) = cross_agreement(rho_02());
    let (ok_b, db) = cross_agreement(rho_05());
    let ok = ok_a && ok_b;
    report(6, ok, &format!("Ar T*=1.5 N=250: {da}; {db}"));
    assert!(ok);
}

/// A competing set of ħ⁴ prefactors (it fails the harmonic check of
/// criterion 2). Used only for the diagnostic parts of criteria 7 and 9.
const ALTERNATIVE: TildeCoefficients = TildeCoefficients {
    hess_frob: 2.0 / 45.0,
    gug: -1.0 / 240.0,
    grad_dot_gradlap: 1.0 / 20.0,
    biharmonic: -11.0 / 240.0,
};

#[test]
fn criterion_07_fourth_order_pressure_ratios() {
    let t = rho_05();
    let ar = t.analyze("Ar", &[Method::B4, Method::C4, Method::Virial]);
    let ne = t.analyze("Ne", &[Method::B4, Method::C4, Method::Virial]);
    let bp = ar.beta_p_cl.unwrap();
    let r_ar = est(&ar, Method::B4).mean / bp;
    let r_ne = est(&ne, Method::B4).mean / bp;
    let ok_ar = (0.005..=0.02).contains(&r_ar.abs());
    let ok_ne = (0.30..=0.55).contains(&r_ne);

    let scalars: Vec<_> = t.records.iter().map(|r| r.scalars).collect();
    let volume = t.records[0].config.volume();
    let q = QuantumParams::new(T_STAR, 1.0, lookup("Ne").unwrap().hbar_star());
    let alt = expansion_c_with(&scalars, 4, &q, volume, BLOCKS, &ALTERNATIVE).unwrap();

    let ok = ok_ar && ok_ne;
    report(
        7,
        ok,
        &format!(
            "rho=0.5 bp_cl={bp:.4}: Ar B4/bp={:+.2}% [{}], Ne B4/bp={:+.2}% [{}]; \
             Ne C4/bp with alternative hbar^4 prefactors {:+.2}%",
            100.0 * r_ar,
            if ok_ar { "ok" } else { "no" },
            100.0 * r_ne,
            if ok_ne { "ok" } else { "no" },
            100.0 * alt.value / bp,
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_08_extensivity() {
    let small = est(&rho_05().analyze("Ne", &[Method::C4]), Method::C4);
    let large = est(&rho_05_n500().analyze("Ne", &[Method::C4]), Method::C4);
    let sd = (small.mean - large.mean) / small.stderr.hypot(large.stderr);
    let ok = sd.abs() <= 3.0;
    report(
        8,
        ok,
        &format!(
            "Ne C4 per volume: N=250 {} N=500 {} ({sd:+.2} sd)",
            fmt(&small),
            fmt(&large)
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_09_helium_sign_structure() {
    let row = rho_04().analyze("He", &[Method::C2, Method::C4]);
    let (c2, c4) = (est(&row, Method::C2), est(&row, Method::C4));
    let ok = c2.mean < 0.0 && c4.mean > 0.0 && c4.mean.abs() >= 5.0 * c2.mean.abs();

    let t = rho_04();
    let scalars: Vec<_> = t.records.iter().map(|r| r.scalars).collect();
    let q = QuantumParams::new(T_STAR, 1.0, lookup("He").unwrap().hbar_star());
    let alt = expansion_c_with(
        &scalars,
        4,
        &q,
        t.records[0].config.volume(),
        BLOCKS,
        &ALTERNATIVE,
    )
    .unwrap();
    report(
        9,
        ok,
        &format!(
            "He T*=1.5 rho=0.4: C2 {} C4 {} |C4/C2|={:.2}; C4 with alternative hbar^4 prefactors {:.4e}±{:.1e}",
            fmt(&c2),
            fmt(&c4),
            (c4.mean / c2.mean).abs(),
            alt.value,
            alt.stderr
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_10_symmetrization_negligible() {
    let mut ok = true;
    let mut parts = Vec::new();
    for t in [rho_02(), rho_05(), rho_05_n500()] {
        for el in ["Ar", "Ne"] {
            let row = t.analyze(el, &[Method::C4, Method::Dimer0, Method::DimerW]);
            let c4 = est(&row, Method::C4).mean.abs();
            let d0 = est(&row, Method::Dimer0).mean.abs();
            let dw = est(&row, Method::DimerW).mean.abs();
            let worst = d0.max(dw) / c4;
            ok &= worst < 0.01;
            parts.push(format!("{el} rho={} N={}: {worst:.1e}", t.rho_star, t.n));
        }
    }
    report(10, ok, &format!("max |dimer|/|C4|: {}", parts.join(", ")));
    assert!(ok);
}

fn iid_coverage() -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (series, len) = (2000, 1000);
    let mut inside = 0;
    let mut var_ratio = 0.0;
    for _ in 0..series {
        let x: Vec<f64> = (0..len)
            .map(|_| Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        let e = block_average(&x, BLOCKS).unwrap();
        if e.mean.abs() <= e.stderr {
            inside += 1;
        }
        var_ratio += e.stderr.powi(2) * len as f64;
    }
    (inside as f64 / series as f64, var_ratio / series as f64)
}

/// Ratio of the block estimate of Var(mean) to its exact value for an AR(1)
/// series with coefficient φ.
fn correlated_variance_ratio(phi: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (series, len) = (400, 20_000);
    let sigma2 = 1.0 / (1.0 - phi * phi);
    // Var(mean) for large n: σ²/n·(1+φ)/(1−φ).
    let exact = sigma2 / len as f64 * (1.0 + phi) / (1.0 - phi);
    let mut acc = 0.0;
    for _ in 0..series {
        let mut x = sigma2.sqrt() * Distribution::<f64>::sample(&StandardNormal, &mut rng);
        let v: Vec<f64> = (0..len)
            .map(|_| {
                x = phi * x + Distribution::<f64>::sample(&StandardNormal, &mut rng);
                x
            })
            .collect();
        acc += block_average(&v, BLOCKS).unwrap().stderr.powi(2);
    }
    acc / series as f64 / exact
}

fn seeded_positions(seed: u64) -> Vec<f64> {
    let params = McParams {
        cycles_equil: 50,
        cycles_prod: 0,
        rng_seed: seed,
        ..McParams::default()
    };
    let edge = (250.0f64 / 0.5).cbrt();
    let start = Configuration::simple_cubic(250, edge).unwrap();
    let mut s = Sampler::new(start, LennardJones::reduced(R_CUT).unwrap(), T_STAR, params).unwrap();
    s.equilibrate();
    s.config()
        .positions
        .iter()
        .flat_map(|p| [p.x, p.y, p.z])
        .collect()
}

#[test]
fn criterion_11_protocol_checks() {
    let rates: Vec<(f64, f64)> = [rho_02(), rho_04(), rho_05(), rho_05_n500()]
        .iter()
        .map(|t| (t.rho_star, t.acceptance))
        .collect();
    let ok_rate = rates.iter().all(|(_, a)| (0.45..=0.55).contains(a));

    let (coverage, var_ratio) = iid_coverage();
    // 2000 trials: the 68.3% coverage has a binomial sd of about 1%.
    let ok_iid = (coverage - 0.683).abs() < 0.04 && (var_ratio - 1.0).abs() < 0.05;
    let ar_ratio = correlated_variance_ratio(0.9);
    let ok_ar = (ar_ratio - 1.0).abs() < 0.15;

    let a = seeded_positions(3);
    let b = seeded_positions(3);
    let c = seeded_positions(4);
    let ok_seed = a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()) && a != c;

    let ok = ok_rate && ok_iid && ok_ar && ok_seed;
    report(
        11,
        ok,
        &format!(
            "acceptance {rates:.3?} [{}]; iid coverage {coverage:.3}, Var ratio {var_ratio:.3}, \
             AR(1) Var ratio {ar_ratio:.3} [{}]; same seed bit-identical [{}]",
            if ok_rate { "ok" } else { "no" },
            if ok_iid && ok_ar { "ok" } else { "no" },
            if ok_seed { "ok" } else { "no" },
        ),
    );
    assert!(ok);
}
