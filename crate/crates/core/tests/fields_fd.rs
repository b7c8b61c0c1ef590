//! Analytic field scalars and momentum contractions against finite
//! differences of the brute-force total energy.

use ljq_core::cli::{field_fd_residuals, FD_STEP};
use ljq_core::fields::compute_fields;
use ljq_core::oracle::{brute_energy, fd_test_configuration};
use ljq_core::potential::{LennardJones, PairPotential};
use ljq_core::system::{minimum_image, Configuration};

const TOL: f64 = 1e-5;

#[test]
fn fields_and_contractions_match_finite_differences() {
    for (n, seed) in [(10, 101), (15, 102), (20, 103), (25, 104), (30, 105)] {
        let (f, c) = field_fd_residuals(n, seed, FD_STEP).unwrap();
        assert!(f < TOL, "fields, n={n}: relative error {f:.2e}");
        assert!(c < TOL, "contractions, n={n}: relative error {c:.2e}");
    }
}

#[test]
fn energy_and_virial_match_direct_sums() {
    let pot = LennardJones::reduced(2.5).unwrap();
    let c = fd_test_configuration(40, 7.0, 2.5, 0.9, 0.0, 7).unwrap();
    let (f, _) = compute_fields(&c, &pot).unwrap();
    let e = brute_energy(&c.positions, c.box_edge, &pot);
    assert!((f.u_total - e).abs() < 1e-10 * e.abs().max(1.0));
    let mut w = 0.0;
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            let r = minimum_image(c.positions[i] - c.positions[j], c.box_edge).norm();
            w += r * pot.derivatives(r).du;
        }
    }
    assert!((f.virial - w).abs() < 1e-10 * w.abs().max(1.0));
}

#[test]
fn hessian_frobenius_matches_explicit_matrix() {
    let pot = LennardJones::reduced(2.5).unwrap();
    let c = fd_test_configuration(12, 5.5, 2.5, 1.0, 0.0, 9).unwrap();
    let (f, _) = compute_fields(&c, &pot).unwrap();
    // Assemble the 3N×3N Hessian block by block from radial derivatives.
    let n = c.len();
    let mut h = vec![vec![0.0; 3 * n]; 3 * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let r = minimum_image(c.positions[i] - c.positions[j], c.box_edge);
            let d = r.norm();
            if d > pot.r_cut() {
                continue;
            }
            let rd = pot.derivatives(d);
            let u = r / d;
            for a in 0..3 {
                for b in 0..3 {
                    let delta = if a == b { 1.0 } else { 0.0 };
                    let t = rd.d2u * u[a] * u[b] + rd.du / d * (delta - u[a] * u[b]);
                    h[3 * i + a][3 * i + b] += t;
                    h[3 * i + a][3 * j + b] -= t;
                }
            }
        }
    }
    let frob: f64 = h.iter().flatten().map(|x| x * x).sum();
    let lap: f64 = (0..3 * n).map(|k| h[k][k]).sum();
    assert!(((f.hess_frob - frob) / frob).abs() < 1e-12);
    assert!(((f.lap - lap) / lap).abs() < 1e-12);
}

#[test]
fn replicated_box_scales_every_field_by_eight() {
    let pot = LennardJones::reduced(2.5).unwrap();
    let base = fd_test_configuration(30, 6.0, 2.5, 0.95, 0.0, 21).unwrap();
    let big: Configuration = base.replicate(2);
    let (a, _) = compute_fields(&base, &pot).unwrap();
    let (b, _) = compute_fields(&big, &pot).unwrap();
    for (x, y) in a.scalars().to_array().iter().zip(b.scalars().to_array()) {
        assert!((8.0 * x - y).abs() < 1e-9 * y.abs().max(1.0), "{x} vs {y}");
    }
}
