//! Per-configuration derivative contractions of the total potential energy.
//!
//! For a pair term u(|r|) with r = q_i − q_j, d = |r| and n = r/d the
//! Cartesian derivative tensors are
//!
//! ```text
//! T2 = A nn + B δ                       A = u'' − u'/d,  B = u'/d
//! T3 = C3 nnn + D3 (nδ)_sym             C3 = u''' − 3A/d, D3 = A/d
//! T4 = C4 nnnn + E4 (nnδ)_sym + F4 (δδ)_sym
//!                                        C4 = u'''' − 6u'''/d + 15A/d²
//!                                        E4 = C3/d,  F4 = A/d²
//! ```
//!
//! where the symmetrized products contain 3, 6 and 3 distinct terms. Any
//! contraction of the many-body tensor with 3N-vectors x, y, ... reduces to a
//! pair sum of T_k contracted with the pair differences x_i − x_j.

use nalgebra::Matrix3;

use crate::error::Result;
use crate::potential::PairPotential;
use crate::system::{CellList, Configuration, Vec3};

/// Momentum-free scalar fields of one configuration.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldScalars {
    pub u_total: f64,
    pub grad_sq: f64,
    pub lap: f64,
    pub hess_frob: f64,
    pub gug: f64,
    pub grad_dot_gradlap: f64,
    pub biharmonic: f64,
    /// Σ_pairs r u'(r).
    pub virial: f64,
}

impl FieldScalars {
    pub const COLUMNS: [&'static str; 8] = [
        "u_total",
        "grad_sq",
        "lap",
        "hess_frob",
        "gug",
        "grad_dot_gradlap",
        "biharmonic",
        "virial",
    ];

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.u_total,
            self.grad_sq,
            self.lap,
            self.hess_frob,
            self.gug,
            self.grad_dot_gradlap,
            self.biharmonic,
            self.virial,
        ]
    }

    pub fn from_array(a: [f64; 8]) -> Self {
        FieldScalars {
            u_total: a[0],
            grad_sq: a[1],
            lap: a[2],
            hess_frob: a[3],
            gug: a[4],
            grad_dot_gradlap: a[5],
            biharmonic: a[6],
            virial: a[7],
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::from_array(self.to_array().map(|x| x * k))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    pub u_total: f64,
    pub grad: Vec<Vec3>,
    pub grad_sq: f64,
    pub lap: f64,
    pub hess_frob: f64,
    pub gug: f64,
    pub grad_dot_gradlap: f64,
    pub biharmonic: f64,
    pub gradlap: Vec<Vec3>,
    pub hess_diag: Vec<Matrix3<f64>>,
    pub virial: f64,
}

impl FieldSample {
    pub fn scalars(&self) -> FieldScalars {
        FieldScalars {
            u_total: self.u_total,
            grad_sq: self.grad_sq,
            lap: self.lap,
            hess_frob: self.hess_frob,
            gug: self.gug,
            grad_dot_gradlap: self.grad_dot_gradlap,
            biharmonic: self.biharmonic,
            virial: self.virial,
        }
    }
}

/// Radial tensor coefficients of one interacting pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairTerm {
    pub i: usize,
    pub j: usize,
    pub dist: f64,
    pub n: Vec3,
    pub du: f64,
    pub a: f64,
    pub b: f64,
    pub c3: f64,
    pub d3: f64,
    pub c4: f64,
    pub e4: f64,
    pub f4: f64,
    /// d/dr of L(r) = u'' + 2u'/r.
    pub lap_d1: f64,
    /// d²/dr² of L(r).
    pub lap_d2: f64,
}

impl PairTerm {
    fn new(i: usize, j: usize, r: Vec3, dist: f64, u1: f64, u2: f64, u3: f64, u4: f64) -> Self {
        let id = 1.0 / dist;
        let a = u2 - u1 * id;
        let c3 = u3 - 3.0 * a * id;
        PairTerm {
            i,
            j,
            dist,
            n: r * id,
            du: u1,
            a,
            b: u1 * id,
            c3,
            d3: a * id,
            c4: u4 - 6.0 * u3 * id + 15.0 * a * id * id,
            e4: c3 * id,
            f4: a * id * id,
            lap_d1: u3 + 2.0 * u2 * id - 2.0 * u1 * id * id,
            lap_d2: u4 + 2.0 * u3 * id - 4.0 * u2 * id * id + 4.0 * u1 * id * id * id,
        }
    }

    /// T2 as a dense matrix.
    #[inline]
    pub fn t2(&self) -> Matrix3<f64> {
        self.n * self.n.transpose() * self.a + Matrix3::identity() * self.b
    }

    /// T2 · x.
    #[inline]
    pub fn t2_dot(&self, x: &Vec3) -> Vec3 {
        self.n * (self.a * self.n.dot(x)) + x * self.b
    }
}

/// All interacting pairs of a configuration with their tensor coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairTable {
    pub n_particles: usize,
    pub terms: Vec<PairTerm>,
}

/// Fields and pair table using an existing, current cell list.
pub fn compute_fields_with_cells<P: PairPotential + ?Sized>(
    config: &Configuration,
    cells: &CellList,
    potential: &P,
) -> (FieldSample, PairTable) {
    let n = config.len();
    let mut grad = vec![Vec3::zeros(); n];
    let mut gradlap = vec![Vec3::zeros(); n];
    let mut hess_diag = vec![Matrix3::zeros(); n];
    let mut terms = Vec::new();
    let (mut u_total, mut lap, mut biharmonic, mut virial, mut off_frob) =
        (0.0, 0.0, 0.0, 0.0, 0.0);

    cells.for_each_pair(config, |i, j, r| {
        let dist = r.norm();
        let rd = potential.derivatives(dist);
        let t = PairTerm::new(i, j, r, dist, rd.du, rd.d2u, rd.d3u, rd.d4u);
        u_total += rd.u;
        virial += dist * rd.du;
        lap += 2.0 * (rd.d2u + 2.0 * rd.du / dist);
        biharmonic += 4.0 * (rd.d4u + 4.0 * rd.d3u / dist);
        let g = t.n * rd.du;
        grad[i] += g;
        grad[j] -= g;
        let gl = t.n * (2.0 * t.lap_d1);
        gradlap[i] += gl;
        gradlap[j] -= gl;
        let h = t.t2();
        hess_diag[i] += h;
        hess_diag[j] += h;
        // ‖T2‖² = (A + B)² + 2B², counted for both off-diagonal blocks.
        off_frob += 2.0 * ((t.a + t.b).powi(2) + 2.0 * t.b * t.b);
        terms.push(t);
    });

    let grad_sq = grad.iter().map(|g| g.norm_squared()).sum();
    let grad_dot_gradlap = grad.iter().zip(&gradlap).map(|(g, l)| g.dot(l)).sum();
    let hess_frob = off_frob + hess_diag.iter().map(|h| h.norm_squared()).sum::<f64>();
    let gug = terms
        .iter()
        .map(|t| {
            let dg = grad[t.i] - grad[t.j];
            dg.dot(&t.t2_dot(&dg))
        })
        .sum();

    (
        FieldSample {
            u_total,
            grad,
            grad_sq,
            lap,
            hess_frob,
            gug,
            grad_dot_gradlap,
            biharmonic,
            gradlap,
            hess_diag,
            virial,
        },
        PairTable {
            n_particles: n,
            terms,
        },
    )
}

/// Builds a cell list at the potential's cutoff and evaluates all fields.
pub fn compute_fields<P: PairPotential + ?Sized>(
    config: &Configuration,
    potential: &P,
) -> Result<(FieldSample, PairTable)> {
    let cells = CellList::new(config, potential.r_cut())?;
    Ok(compute_fields_with_cells(config, &cells, potential))
}

/// Contractions of the derivative tensors of U with one momentum sample p.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentumContractions {
    /// p·∇U
    pub p_grad: f64,
    /// pp:∇∇U
    pub pp_hess: f64,
    /// ppp⋮∇∇∇U
    pub ppp_d3: f64,
    /// (p·∇)⁴U
    pub pppp_d4: f64,
    /// (p·∇∇U)·(p·∇∇U)
    pub p_hess_sq: f64,
    /// p·∇∇²U
    pub p_gradlap: f64,
    /// p(∇U):∇∇U
    pub p_hess_grad: f64,
    /// (∇U)pp⋮∇∇∇U
    pub grad_pp_d3: f64,
    /// pp:∇∇∇²U
    pub pp_hesslap: f64,
}

pub fn momentum_contractions(
    pairs: &PairTable,
    fields: &FieldSample,
    p: &[Vec3],
) -> MomentumContractions {
    let mut out = MomentumContractions::default();
    let mut hp = vec![Vec3::zeros(); pairs.n_particles];
    for t in &pairs.terms {
        let dp = p[t.i] - p[t.j];
        let dg = fields.grad[t.i] - fields.grad[t.j];
        let np = t.n.dot(&dp);
        let ng = t.n.dot(&dg);
        let pp = dp.norm_squared();
        let gp = dg.dot(&dp);
        let np2 = np * np;

        out.p_grad += t.du * np;
        out.pp_hess += t.a * np2 + t.b * pp;
        out.ppp_d3 += np * (t.c3 * np2 + 3.0 * t.d3 * pp);
        out.pppp_d4 += t.c4 * np2 * np2 + 6.0 * t.e4 * np2 * pp + 3.0 * t.f4 * pp * pp;
        out.p_gradlap += 2.0 * t.lap_d1 * np;
        out.p_hess_grad += t.a * np * ng + t.b * gp;
        out.grad_pp_d3 += t.c3 * ng * np2 + t.d3 * (ng * pp + 2.0 * np * gp);
        let ld = t.lap_d1 / t.dist;
        out.pp_hesslap += 2.0 * ((t.lap_d2 - ld) * np2 + ld * pp);

        let v = t.t2_dot(&dp);
        hp[t.i] += v;
        hp[t.j] -= v;
    }
    out.p_hess_sq = hp.iter().map(|v| v.norm_squared()).sum();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::LennardJones;

    fn pair_config(r: f64) -> Configuration {
        Configuration::new(
            vec![Vec3::new(5.0, 5.0, 5.0), Vec3::new(5.0 + r, 5.0, 5.0)],
            20.0,
        )
        .unwrap()
    }

    #[test]
    fn ideal_gas_fields_vanish() {
        let lj = LennardJones::new(0.0, 1.0, 3.5).unwrap();
        let c = Configuration::simple_cubic(64, 6.0 * 64f64.cbrt() / 2.0).unwrap();
        let (f, _) = compute_fields(&c, &lj).unwrap();
        assert_eq!(f.scalars(), FieldScalars::default());
    }

    #[test]
    fn two_particle_closed_forms() {
        let lj = LennardJones::reduced(3.5).unwrap();
        let r = 1.17;
        let (f, _) = compute_fields(&pair_config(r), &lj).unwrap();
        let d = lj.derivatives(r);
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(f.grad_sq, 2.0 * d.du * d.du) < 1e-12);
        assert!(rel(f.lap, 2.0 * (d.d2u + 2.0 * d.du / r)) < 1e-12);
        assert!(rel(f.biharmonic, 4.0 * (d.d4u + 4.0 * d.d3u / r)) < 1e-12);
        assert!((f.grad[0] + f.grad[1]).norm() < 1e-12);
    }

    #[test]
    fn zero_momentum_contractions_vanish() {
        let lj = LennardJones::reduced(3.5).unwrap();
        let (f, t) = compute_fields(&pair_config(1.2), &lj).unwrap();
        let m = momentum_contractions(&t, &f, &[Vec3::zeros(); 2]);
        assert_eq!(m, MomentumContractions::default());
    }

    #[test]
    fn equal_momenta_give_no_p_grad() {
        let lj = LennardJones::reduced(3.5).unwrap();
        let (f, t) = compute_fields(&pair_config(1.2), &lj).unwrap();
        let p = Vec3::new(0.3, -1.0, 2.0);
        let m = momentum_contractions(&t, &f, &[p, p]);
        assert_eq!(m.p_grad, 0.0);
    }
}
