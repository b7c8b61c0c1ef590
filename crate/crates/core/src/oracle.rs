//! Independent references for the estimator algebra: exact 1D quantum
//! partition functions, quadrature classical averages, closed-form exchange
//! integrals and finite-difference derivative contractions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::estimators::{
    a_assemble, c_assemble, tilde_terms_with, weight_terms, AMoments, QuantumParams,
    TildeCoefficients,
};
use crate::fields::{FieldScalars, MomentumContractions};
use crate::potential::PairPotential;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::system::{minimum_image, Configuration, Vec3};

fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    quadrature::double_exponential::integrate(f, a, b, 1e-15).integral
}

/// ln((x/2)/sinh(x/2)) = −x²/24 + x⁴/2880 − …
pub fn ho_log_ratio_exact(x: f64) -> f64 {
    let h = 0.5 * x;
    if h.abs() < 0.5 {
        // sinh(h)/h − 1 by its series, to keep full relative precision.
        let h2 = h * h;
        let mut term = 1.0;
        let mut s = 0.0;
        for k in 1..20 {
            term *= h2 / ((2 * k) as f64 * (2 * k + 1) as f64);
            s += term;
        }
        -s.ln_1p()
    } else {
        -(h.sinh() / h).ln()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    pub extent: f64,
    pub points: usize,
    pub spacing: f64,
}

impl Grid1D {
    /// `points` equally spaced nodes on [−extent, extent].
    pub fn new(extent: f64, points: usize) -> Result<Self> {
        if points < 500 {
            return Err(Error::invalid(
                "points",
                format!("need at least 500, got {points}"),
            ));
        }
        if !(extent > 0.0) {
            return Err(Error::invalid(
                "extent",
                format!("must be > 0, got {extent}"),
            ));
        }
        Ok(Grid1D {
            extent,
            points,
            spacing: 2.0 * extent / (points - 1) as f64,
        })
    }

    fn node(&self, k: usize) -> f64 {
        -self.extent + k as f64 * self.spacing
    }
}

/// Number of eigenvalues of the symmetric tridiagonal (diag, off) below x.
fn sturm_count(diag: &[f64], off2: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for (k, &a) in diag.iter().enumerate() {
        let o = if k == 0 { 0.0 } else { off2[k - 1] };
        d = a - x - if k == 0 { 0.0 } else { o / d };
        if d == 0.0 {
            d = -f64::EPSILON * (a.abs() + x.abs()).max(1e-300);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Z = Σ e^(−βEₙ) of the second-order finite-difference Hamiltonian with
/// Dirichlet walls at ±extent.
pub fn grid_z_exact(
    potential: &dyn Fn(f64) -> f64,
    grid: &Grid1D,
    beta: f64,
    mass: f64,
    hbar: f64,
) -> Result<f64> {
    Ok(grid_log_z_single(potential, grid, beta, mass, hbar)?.exp())
}

fn grid_log_z_single(
    potential: &dyn Fn(f64) -> f64,
    grid: &Grid1D,
    beta: f64,
    mass: f64,
    hbar: f64,
) -> Result<f64> {
    let edge = potential(-grid.extent).min(potential(grid.extent));
    let v_min = (0..grid.points)
        .map(|k| potential(grid.node(k)))
        .fold(f64::INFINITY, f64::min);
    if !(beta * (edge - v_min) > 40.0) {
        return Err(Error::NotConverged(format!(
            "potential not confining on [-{0}, {0}]: wall height {1:.3e}",
            grid.extent,
            edge - v_min
        )));
    }
    let h = grid.spacing;
    let t = hbar * hbar / (2.0 * mass * h * h);
    let diag: Vec<f64> = (1..grid.points - 1)
        .map(|k| 2.0 * t + potential(grid.node(k)))
        .collect();
    let off2 = vec![t * t; diag.len() - 1];
    let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * t;
    let hi = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0 * t;
    let eig = |k: usize| {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if sturm_count(&diag, &off2, m) > k {
                b = m;
            } else {
                a = m;
            }
        }
        0.5 * (a + b)
    };
    let e0 = eig(0);
    let mut z = 0.0;
    for k in 0..diag.len() {
        let e = eig(k);
        let w = (-beta * (e - e0)).exp();
        z += w;
        if w < 1e-20 {
            // Spectrum beyond this point must still be resolved by the grid.
            if e - v_min > t {
                return Err(Error::NotConverged(
                    "grid too coarse for the thermally occupied spectrum".into(),
                ));
            }
            return Ok(z.ln() - beta * e0);
        }
    }
    Err(Error::NotConverged(
        "thermal tail not resolved on this grid".into(),
    ))
}

/// ln Z_quantum from Richardson extrapolation in h² over `levels` grid
/// halvings, and the change contributed by the last level.
pub fn grid_log_z(
    potential: &dyn Fn(f64) -> f64,
    extent: f64,
    base_points: usize,
    levels: usize,
    beta: f64,
    mass: f64,
    hbar: f64,
) -> Result<(f64, f64)> {
    let mut table: Vec<Vec<f64>> = Vec::new();
    for l in 0..levels {
        let points = (base_points - 1) * (1 << l) + 1;
        let g = Grid1D::new(extent, points)?;
        let lz = grid_log_z_single(potential, &g, beta, mass, hbar)?;
        let mut row = vec![lz];
        for j in 1..=l {
            let f = 4f64.powi(j as i32);
            let v = (f * row[j - 1] - table[l - 1][j - 1]) / (f - 1.0);
            row.push(v);
        }
        table.push(row);
    }
    let last = table.last().unwrap();
    let best = *last.last().unwrap();
    let prev = if levels > 1 {
        *table[levels - 2].last().unwrap()
    } else {
        f64::NAN
    };
    Ok((best, (best - prev).abs()))
}

/// ln Z_classical = ln[ √(m/(2πβħ²)) ∫ e^(−βU) dq ].
pub fn classical_log_z(
    potential: &dyn Fn(f64) -> f64,
    extent: f64,
    beta: f64,
    mass: f64,
    hbar: f64,
) -> f64 {
    let zq = integrate(|q| (-beta * potential(q)).exp(), -extent, extent);
    (mass / (2.0 * PI * beta * hbar * hbar)).sqrt().ln() + zq.ln()
}

/// ln(Z_quantum / Z_classical) for a confining 1D potential.
pub fn quantum_log_ratio(
    potential: &dyn Fn(f64) -> f64,
    extent: f64,
    beta: f64,
    mass: f64,
    hbar: f64,
) -> Result<f64> {
    let thermal = hbar * (beta / mass).sqrt();
    let spacing = (thermal / 40.0).min(2.0 * extent / 499.0);
    let base = ((2.0 * extent / spacing).ceil() as usize + 1).max(500);
    let (lz, change) = grid_log_z(potential, extent, base, 4, beta, mass, hbar)?;
    if change > 1e-8 * lz.abs().max(1.0) {
        return Err(Error::NotConverged(format!(
            "grid extrapolation changed ln Z by {change:.2e}"
        )));
    }
    Ok(lz - classical_log_z(potential, extent, beta, mass, hbar))
}

/// U and its first four derivatives by Richardson-extrapolated central
/// differences (three step halvings from `h`).
pub fn derivatives_1d(f: &dyn Fn(f64) -> f64, q: f64, h: f64) -> [f64; 5] {
    let stencil = |h: f64| {
        let (m2, m1, z, p1, p2) = (f(q - 2.0 * h), f(q - h), f(q), f(q + h), f(q + 2.0 * h));
        [
            z,
            (p1 - m1) / (2.0 * h),
            (p1 - 2.0 * z + m1) / (h * h),
            (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h),
            (p2 - 4.0 * p1 + 6.0 * z - 4.0 * m1 + m2) / (h * h * h * h),
        ]
    };
    let d: Vec<[f64; 5]> = (0..3).map(|k| stencil(h / f64::from(1 << k))).collect();
    let mut out = [0.0; 5];
    for k in 0..5 {
        let r1a = (4.0 * d[1][k] - d[0][k]) / 3.0;
        let r1b = (4.0 * d[2][k] - d[1][k]) / 3.0;
        out[k] = (16.0 * r1b - r1a) / 15.0;
    }
    out
}

const FD_STEP_1D: f64 = 0.1;

/// Field scalars of a single particle in one dimension.
pub fn fields_1d(d: &[f64; 5]) -> FieldScalars {
    FieldScalars {
        u_total: d[0],
        grad_sq: d[1] * d[1],
        lap: d[2],
        hess_frob: d[2] * d[2],
        gug: d[1] * d[1] * d[2],
        grad_dot_gradlap: d[1] * d[3],
        biharmonic: d[4],
        virial: 0.0,
    }
}

/// Momentum contractions of a single particle in one dimension.
pub fn contractions_1d(d: &[f64; 5], p: f64) -> MomentumContractions {
    MomentumContractions {
        p_grad: p * d[1],
        pp_hess: p * p * d[2],
        ppp_d3: p * p * p * d[3],
        pppp_d4: p.powi(4) * d[4],
        p_hess_sq: (p * d[2]).powi(2),
        p_gradlap: p * d[3],
        p_hess_grad: p * d[1] * d[2],
        grad_pp_d3: d[1] * p * p * d[3],
        pp_hesslap: p * p * d[4],
    }
}

/// Boltzmann-weighted average over [−extent, extent].
pub fn classical_average(
    potential: &dyn Fn(f64) -> f64,
    beta: f64,
    extent: f64,
    g: &dyn Fn(f64) -> f64,
) -> f64 {
    let w = |q: f64| (-beta * potential(q)).exp();
    integrate(|q| g(q) * w(q), -extent, extent) / integrate(w, -extent, extent)
}

/// (C2, C4) per particle for a 1D potential, with quadrature averages.
pub fn c_expansion_1d(
    potential: &dyn Fn(f64) -> f64,
    q: &QuantumParams,
    coeffs: &TildeCoefficients,
    extent: f64,
) -> (f64, f64) {
    let tt = |x: f64| {
        tilde_terms_with(
            &fields_1d(&derivatives_1d(potential, x, FD_STEP_1D)),
            q,
            coeffs,
        )
    };
    let avg = |g: &dyn Fn(f64) -> f64| classical_average(potential, q.beta, extent, g);
    let m2 = avg(&|x| tt(x).tw2);
    let var = avg(&|x| (tt(x).tw2 - m2).powi(2));
    let m4 = avg(&|x| tt(x).tw4);
    c_assemble(m2, var, m4, q.hbar)
}

/// (A2, A4) per particle for a 1D potential, with nested (q, p) quadrature.
pub fn a_expansion_1d(
    potential: &dyn Fn(f64) -> f64,
    q: &QuantumParams,
    extent: f64,
) -> (f64, f64) {
    let p_max = 12.0 * (q.mass / q.beta).sqrt();
    let wp = |p: f64| (-q.beta * p * p / (2.0 * q.mass)).exp();
    let norm_p = integrate(wp, -p_max, p_max);
    let phase_avg = |g: &dyn Fn(f64, f64) -> f64| {
        classical_average(potential, q.beta, extent, &|x| {
            let inner = integrate(|p| g(x, p) * wp(p), -p_max, p_max);
            inner / norm_p
        })
    };
    let wt = |x: f64, p: f64| {
        let d = derivatives_1d(potential, x, FD_STEP_1D);
        weight_terms(&fields_1d(&d), &contractions_1d(&d, p), q)
    };
    let w2 = phase_avg(&|x, p| wt(x, p).w2);
    let v1_sq = phase_avg(&|x, p| wt(x, p).v1.powi(2));
    let m = AMoments {
        w2,
        v1_sq,
        w2_var: phase_avg(&|x, p| (wt(x, p).w2 - w2).powi(2)),
        v1_4: phase_avg(&|x, p| wt(x, p).v1.powi(4)),
        w4: phase_avg(&|x, p| wt(x, p).w4),
        v1_v3: phase_avg(&|x, p| {
            let w = wt(x, p);
            w.v1 * w.v3
        }),
        v1_sq_w2_cov: phase_avg(&|x, p| {
            let w = wt(x, p);
            w.v1 * w.v1 * (w.w2 - w2)
        }),
    };
    a_assemble(&m, q.hbar)
}

/// Per-particle dimer term of an ideal gas, sign·ρΛ³/2^(5/2).
pub fn ideal_dimer_exact(rho_star: f64, lambda_star: f64, sign: f64) -> f64 {
    sign * rho_star * lambda_star.powi(3) / 2f64.powf(2.5)
}

/// The same quantity as sign·(ρ/2)·(∫ e^(−2πx²/Λ²) dx)³ by quadrature.
pub fn ideal_dimer_quadrature(rho_star: f64, lambda_star: f64, sign: f64) -> f64 {
    if lambda_star <= 0.0 {
        return 0.0;
    }
    let k = 2.0 * PI / (lambda_star * lambda_star);
    let w = 12.0 * lambda_star;
    // Even integrand: integrate one half so the peak sits at an endpoint,
    // where double-exponential nodes cluster.
    let i1 = 2.0 * integrate(|x| (-k * x * x).exp(), 0.0, w);
    sign * 0.5 * rho_star * i1.powi(3)
}

/// Per-particle trimer term of an ideal gas, ρ²Λ⁶/3^(5/2).
pub fn ideal_trimer_exact(rho_star: f64, lambda_star: f64) -> f64 {
    rho_star * rho_star * lambda_star.powi(6) / 3f64.powf(2.5)
}

/// (ρ²/3)·I with I = ∫∫ d³a d³b exp(−π(a² + b² + |a − b|²)/Λ²), the 6D
/// integral factorized into three identical 2D integrals done by nested
/// quadrature.
pub fn ideal_trimer_quadrature(rho_star: f64, lambda_star: f64) -> f64 {
    if lambda_star <= 0.0 {
        return 0.0;
    }
    let k = PI / (lambda_star * lambda_star);
    let w = 12.0 * lambda_star;
    // The integrand is even under (x, y) → (−x, −y) and, for fixed x, peaks
    // at y = x/2; splitting there keeps the peaks at quadrature endpoints.
    let g = |x: f64, y: f64| (-k * (x * x + y * y + (x - y) * (x - y))).exp();
    let i2 = 2.0
        * integrate(
            |x| integrate(|y| g(x, y), -w, 0.5 * x) + integrate(|y| g(x, y), 0.5 * x, w),
            0.0,
            w,
        );
    rho_star * rho_star / 3.0 * i2.powi(3)
}

/// B₂(T) = −2π ∫ (e^(−βu) − 1) r² dr for a full (uncut) pair function.
pub fn second_virial(u: &dyn Fn(f64) -> f64, t_star: f64) -> f64 {
    let beta = 1.0 / t_star;
    let mayer = |r: f64| {
        if r <= 0.0 {
            return -0.0;
        }
        ((-beta * u(r)).exp() - 1.0) * r * r
    };
    // Map [1, ∞) onto (0, 1] with r = 1/s.
    let inner = integrate(mayer, 0.0, 1.0);
    let outer = integrate(
        |s| {
            if s <= 0.0 {
                0.0
            } else {
                mayer(1.0 / s) / (s * s)
            }
        },
        0.0,
        1.0,
    );
    -2.0 * PI * (inner + outer)
}

/// B₃(T) = −(8π²/3) ∫∫ f(r) f(s) r s ∫_{|r−s|}^{r+s} f(t) t dt ds dr with
/// the Mayer function f = e^(−βu) − 1 of a full pair function. Integrals
/// are split at r = 1, where f changes fastest for LJ-like potentials.
pub fn third_virial(u: &dyn Fn(f64) -> f64, t_star: f64) -> f64 {
    let beta = 1.0 / t_star;
    let f = |r: f64| {
        if r <= 0.0 {
            -1.0
        } else {
            (-beta * u(r)).exp() - 1.0
        }
    };
    let tol = 1e-9;
    let quad = |g: &dyn Fn(f64) -> f64, a: f64, b: f64| {
        quadrature::double_exponential::integrate(g, a, b, tol).integral
    };
    // ∫_a^b with a split at 1 when it falls inside.
    let split = |g: &dyn Fn(f64) -> f64, a: f64, b: f64| {
        if a < 1.0 && b > 1.0 {
            quad(g, a, 1.0) + quad(g, 1.0, b)
        } else {
            quad(g, a, b)
        }
    };
    // ∫_0^∞ via [0, 1] plus r = 1/x on (0, 1].
    let half_line = |g: &dyn Fn(f64) -> f64| {
        quad(g, 0.0, 1.0)
            + quad(
                &|x: f64| if x <= 0.0 { 0.0 } else { g(1.0 / x) / (x * x) },
                0.0,
                1.0,
            )
    };
    let inner = |r: f64, s: f64| split(&|t: f64| f(t) * t, (r - s).abs(), r + s);
    let total = half_line(&|r: f64| {
        let fr = f(r);
        if fr == 0.0 {
            return 0.0;
        }
        fr * r
            * half_line(&|s: f64| {
                let fs = f(s);
                if fs == 0.0 {
                    return 0.0;
                }
                fs * s * inner(r, s)
            })
    });
    -8.0 * PI * PI / 3.0 * total
}

/// Total energy by a brute-force O(N²) minimum-image sum.
pub fn brute_energy<P: PairPotential + ?Sized>(x: &[Vec3], box_edge: f64, pot: &P) -> f64 {
    let rc2 = pot.r_cut().powi(2);
    let mut e = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let r2 = minimum_image(x[i] - x[j], box_edge).norm_squared();
            if r2 <= rc2 {
                e += pot.energy_r2(r2);
            }
        }
    }
    e
}

/// Central-difference weights (offset, weight) for the k-th derivative.
fn stencil(k: usize) -> &'static [(f64, f64)] {
    match k {
        0 => &[(0.0, 1.0)],
        1 => &[(-1.0, -0.5), (1.0, 0.5)],
        2 => &[(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)],
        3 => &[(-2.0, -0.5), (-1.0, 1.0), (1.0, -1.0), (2.0, 0.5)],
        4 => &[
            (-2.0, 1.0),
            (-1.0, -4.0),
            (0.0, 6.0),
            (1.0, -4.0),
            (2.0, 1.0),
        ],
        _ => panic!("derivative order {k} not supported"),
    }
}

/// ∂_s^m ∂_t^n f(0, 0) with Richardson extrapolation over three steps.
pub fn mixed_partial(f: &dyn Fn(f64, f64) -> f64, m: usize, n: usize, h: f64) -> f64 {
    let at = |h: f64| {
        let mut acc = 0.0;
        for &(a, wa) in stencil(m) {
            for &(b, wb) in stencil(n) {
                acc += wa * wb * f(a * h, b * h);
            }
        }
        acc / h.powi((m + n) as i32)
    };
    let d0 = at(h);
    let d1 = at(h / 2.0);
    let d2 = at(h / 4.0);
    let r1a = (4.0 * d1 - d0) / 3.0;
    let r1b = (4.0 * d2 - d1) / 3.0;
    (16.0 * r1b - r1a) / 15.0
}

/// Every field scalar and momentum contraction of a configuration from
/// finite differences of the brute-force total energy alone.
pub fn fd_fields<P: PairPotential + ?Sized>(
    x: &[Vec3],
    box_edge: f64,
    pot: &P,
    p: &[Vec3],
    h: f64,
) -> (FieldScalars, MomentumContractions) {
    let n = x.len();
    let dim = 3 * n;
    let unit = |a: usize| {
        let mut v = vec![Vec3::zeros(); n];
        v[a / 3][a % 3] = 1.0;
        v
    };
    let rc2 = pot.r_cut().powi(2);
    let pair_u = |a: Vec3, b: Vec3| {
        let r2 = minimum_image(a - b, box_edge).norm_squared();
        if r2 <= rc2 {
            pot.energy_r2(r2)
        } else {
            0.0
        }
    };
    let base_u: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 0.0 } else { pair_u(x[i], x[j]) })
                .collect()
        })
        .collect();
    // Energy change from the unshifted configuration, summed only over
    // pairs with a displaced member; untouched pairs contribute exactly
    // zero instead of rounding noise of the whole total.
    let shifted = |base: &[Vec3], dirs: &[(&[Vec3], f64)]| -> f64 {
        let mut moved = vec![false; n];
        let y: Vec<Vec3> = (0..n)
            .map(|i| {
                dirs.iter().fold(base[i], |acc, (d, s)| {
                    if d[i] != Vec3::zeros() && *s != 0.0 {
                        moved[i] = true;
                    }
                    acc + d[i] * *s
                })
            })
            .collect();
        let mut du = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                if moved[i] || moved[j] {
                    du += pair_u(y[i], y[j]) - base_u[i][j];
                }
            }
        }
        du
    };
    let d2 = |u: &[Vec3], v: &[Vec3], m: usize, k: usize| {
        mixed_partial(&|s, t| shifted(x, &[(u, s), (v, t)]), m, k, h)
    };
    let e: Vec<Vec<Vec3>> = (0..dim).map(unit).collect();
    let zero = vec![Vec3::zeros(); n];

    let grad: Vec<Vec3> = (0..n)
        .map(|i| {
            Vec3::new(
                d2(&e[3 * i], &zero, 1, 0),
                d2(&e[3 * i + 1], &zero, 1, 0),
                d2(&e[3 * i + 2], &zero, 1, 0),
            )
        })
        .collect();
    let hess: Vec<Vec<f64>> = (0..dim)
        .map(|a| {
            (0..dim)
                .map(|b| {
                    if a == b {
                        d2(&e[a], &zero, 2, 0)
                    } else {
                        d2(&e[a], &e[b], 1, 1)
                    }
                })
                .collect()
        })
        .collect();

    // Normalize direction vectors so finite-difference steps stay comparable.
    let scale_of = |v: &[Vec3]| v.iter().map(|a| a.amax()).fold(0.0, f64::max).max(1e-300);
    let gs = scale_of(&grad);
    let gn: Vec<Vec3> = grad.iter().map(|g| g / gs).collect();
    let ps = scale_of(p);
    let pn: Vec<Vec3> = p.iter().map(|v| v / ps).collect();

    let lap_along = |dir: &[Vec3], k: usize| -> f64 {
        (0..dim)
            .map(|a| mixed_partial(&|s, t| shifted(x, &[(&e[a], s), (dir, t)]), 2, k, h))
            .sum()
    };

    let grad_sq = grad.iter().map(|g| g.norm_squared()).sum();
    let lap = (0..dim).map(|a| hess[a][a]).sum();
    let hess_frob = hess.iter().flatten().map(|v| v * v).sum();
    let biharmonic = (0..dim)
        .map(|a| {
            (0..dim)
                .map(|b| {
                    if a == b {
                        d2(&e[a], &zero, 4, 0)
                    } else {
                        d2(&e[a], &e[b], 2, 2)
                    }
                })
                .sum::<f64>()
        })
        .sum();
    let gug = d2(&gn, &zero, 2, 0) * gs * gs;
    let grad_dot_gradlap = lap_along(&gn, 1) * gs;
    let fields = FieldScalars {
        u_total: brute_energy(x, box_edge, pot),
        grad_sq,
        lap,
        hess_frob,
        gug,
        grad_dot_gradlap,
        biharmonic,
        virial: 0.0,
    };

    let hp: Vec<f64> = (0..dim).map(|a| d2(&e[a], &pn, 1, 1) * ps).collect();
    let contr = MomentumContractions {
        p_grad: d2(&pn, &zero, 1, 0) * ps,
        pp_hess: d2(&pn, &zero, 2, 0) * ps * ps,
        ppp_d3: d2(&pn, &zero, 3, 0) * ps.powi(3),
        pppp_d4: d2(&pn, &zero, 4, 0) * ps.powi(4),
        p_hess_sq: hp.iter().map(|v| v * v).sum(),
        p_gradlap: lap_along(&pn, 1) * ps,
        p_hess_grad: d2(&pn, &gn, 1, 1) * ps * gs,
        grad_pp_d3: d2(&gn, &pn, 1, 2) * gs * ps * ps,
        pp_hesslap: lap_along(&pn, 2) * ps * ps,
    };
    (fields, contr)
}

/// Random configuration for finite-difference checks: every pair is at
/// least `min_dist` apart and no pair distance lies within `margin` of the
/// cutoff, so small displacements never cross a discontinuity.
pub fn fd_test_configuration(
    n: usize,
    box_edge: f64,
    r_cut: f64,
    min_dist: f64,
    margin: f64,
    seed: u64,
) -> Result<Configuration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Vec3> = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while x.len() < n {
        attempts += 1;
        if attempts > 1_000_000 {
            return Err(Error::invalid(
                "n",
                format!("could not place {n} particles in a box of {box_edge}"),
            ));
        }
        let c = Vec3::new(
            rng.random::<f64>() * box_edge,
            rng.random::<f64>() * box_edge,
            rng.random::<f64>() * box_edge,
        );
        let ok = x.iter().all(|y| {
            let r = minimum_image(c - y, box_edge).norm();
            r >= min_dist && (r - r_cut).abs() > margin
        });
        if ok {
            x.push(c);
        }
    }
    Configuration::new(x, box_edge)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ho_ratio_series_and_limits() {
        assert_eq!(ho_log_ratio_exact(0.0), 0.0);
        let x: f64 = 0.1;
        let series = -x * x / 24.0 + x.powi(4) / 2880.0;
        assert!((ho_log_ratio_exact(x) / series - 1.0).abs() < 1e-6);
        let mut prev = 0.0;
        for k in 1..50 {
            let v = ho_log_ratio_exact(0.2 * k as f64);
            assert!(v < prev);
            prev = v;
        }
        let y: f64 = 2.0;
        assert!((ho_log_ratio_exact(y) + (0.5 * y).sinh().ln()).abs() < 1e-14);
    }

    #[test]
    fn grid_validation() {
        assert!(Grid1D::new(3.0, 499).is_err());
        let g = Grid1D::new(3.0, 601).unwrap();
        assert!((g.spacing * 600.0 - 6.0).abs() < 1e-12);
    }

    #[test]
    fn harmonic_grid_matches_closed_form() {
        let (beta, hbar) = (1.0, 0.7);
        let u = |q: f64| 0.5 * q * q;
        let (lz, _) = grid_log_z(&u, 9.0, 801, 4, beta, 1.0, hbar).unwrap();
        let exact = -(2.0 * (0.5 * beta * hbar).sinh()).ln();
        assert!((lz - exact).abs() < 1e-7, "{lz} {exact}");
    }

    #[test]
    fn second_order_grid_convergence() {
        let u = |q: f64| 0.5 * q * q;
        let e_at = |points| {
            let g = Grid1D::new(8.0, points).unwrap();
            -grid_z_exact(&u, &g, 30.0, 1.0, 1.0).unwrap().ln() / 30.0
        };
        let e1 = e_at(501) - 0.5;
        let e2 = e_at(1001) - 0.5;
        assert!((e1 / e2 - 4.0).abs() < 0.05, "{}", e1 / e2);
    }

    #[test]
    fn non_confining_reported() {
        let g = Grid1D::new(2.0, 500).unwrap();
        assert!(matches!(
            grid_z_exact(&|q: f64| 0.01 * q * q, &g, 1.0, 1.0, 0.3),
            Err(Error::NotConverged(_))
        ));
    }

    #[test]
    fn classical_limit() {
        let u = |q: f64| q.powi(4);
        let r = quantum_log_ratio(&u, 3.2, 1.0, 1.0, 0.1).unwrap();
        assert!(r < 0.0 && r.abs() < 5e-3, "{r}");
    }

    #[test]
    fn derivative_tool_on_polynomial() {
        let d = derivatives_1d(&|q: f64| q.powi(4) - 2.0 * q * q, 0.7, FD_STEP_1D);
        let exact = [
            0.7f64.powi(4) - 0.98,
            4.0 * 0.343 - 2.8,
            12.0 * 0.49 - 4.0,
            24.0 * 0.7,
            24.0,
        ];
        for k in 0..5 {
            assert!(
                (d[k] - exact[k]).abs() < 1e-9,
                "{k}: {} vs {}",
                d[k],
                exact[k]
            );
        }
    }

    #[test]
    fn ideal_exchange_forms() {
        assert_eq!(ideal_dimer_exact(0.3, 0.0, 1.0), 0.0);
        assert_eq!(
            ideal_dimer_exact(0.3, 0.5, -1.0),
            -ideal_dimer_exact(0.3, 0.5, 1.0)
        );
        for &(rho, lam) in &[(0.1, 0.2), (0.5, 1.5), (0.8, 0.06)] {
            let a = ideal_dimer_exact(rho, lam, 1.0);
            assert!(
                (ideal_dimer_quadrature(rho, lam, 1.0) - a).abs() < 1e-10 * a.max(1e-300) + 1e-16
            );
            let t = ideal_trimer_exact(rho, lam);
            assert!((ideal_trimer_quadrature(rho, lam) / t - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn hard_sphere_third_virial() {
        // A very steep repulsion approximates hard spheres: B3 = 5π²/18.
        let u = |r: f64| if r < 1.0 { 1e3 } else { 0.0 };
        let b3 = third_virial(&u, 1.0);
        assert!((b3 / (5.0 * PI * PI / 18.0) - 1.0).abs() < 1e-4, "{b3}");
    }

    #[test]
    fn hard_sphere_like_second_virial() {
        // For u = +∞ inside r < 1 and 0 outside, B₂ = 2π/3.
        let b2 = second_virial(&|r| if r < 1.0 { 1e6 } else { 0.0 }, 1.0);
        assert!((b2 - 2.0 * PI / 3.0).abs() < 1e-6, "{b2}");
    }
}
