//! Maxwell-Boltzmann momentum draws for expansion A.
//!
//! Each (run seed, snapshot, replica) triple addresses its own ChaCha stream,
//! so replicas can be regenerated at analysis time in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::system::Vec3;

#[derive(Clone, Debug, PartialEq)]
pub struct MomentumSample {
    pub momenta: Vec<Vec3>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MomentumSeed {
    pub run_seed: u64,
    pub snapshot: u64,
    pub replica: u32,
}

impl MomentumSeed {
    fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.run_seed ^ 0x6d6f_6d65_6e74_756d);
        rng.set_stream((self.snapshot << 24) | u64::from(self.replica & 0x00ff_ffff));
        rng
    }
}

/// N independent momenta with Cartesian components ~ Normal(0, m·T).
pub fn draw_momenta(n: usize, t_star: f64, mass: f64, seed: MomentumSeed) -> MomentumSample {
    let mut rng = seed.rng();
    let s = (mass * t_star).sqrt();
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let momenta = (0..n)
        .map(|_| Vec3::new(normal() * s, normal() * s, normal() * s))
        .collect();
    MomentumSample { momenta }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seed(replica: u32) -> MomentumSeed {
        MomentumSeed {
            run_seed: 42,
            snapshot: 3,
            replica,
        }
    }

    #[test]
    fn moments() {
        let (t, m) = (1.3, 2.0);
        let n = 350_000;
        let s = draw_momenta(n, t, m, seed(0));
        let xs: Vec<f64> = s.momenta.iter().map(|p| p.x).collect();
        let k = xs.len() as f64;
        let var0 = m * t;
        let mean = xs.iter().sum::<f64>() / k;
        assert!(mean.abs() < 4.0 * (var0 / k).sqrt(), "{mean}");
        let m2 = xs.iter().map(|x| x * x).sum::<f64>() / k;
        // Var(p²) = 2σ⁴ for a normal variable.
        assert!(
            (m2 - var0).abs() < 4.0 * (2.0 * var0 * var0 / k).sqrt(),
            "{m2}"
        );
        let xy = s.momenta.iter().map(|p| p.x * p.y).sum::<f64>() / k;
        assert!(xy.abs() < 4.0 * (var0 / k.sqrt()), "{xy}");
        let kurt = xs.iter().map(|x| x.powi(4)).sum::<f64>() / k / (m2 * m2);
        // Var of the kurtosis estimator is about 24/k.
        assert!((kurt - 3.0).abs() < 5.0 * (24.0 / k).sqrt(), "{kurt}");
    }

    #[test]
    fn reproducible_and_distinct_streams() {
        let a = draw_momenta(10, 1.0, 1.0, seed(1));
        let b = draw_momenta(10, 1.0, 1.0, seed(1));
        let c = draw_momenta(10, 1.0, 1.0, seed(2));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
