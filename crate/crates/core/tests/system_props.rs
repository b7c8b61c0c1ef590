//! Property tests for periodic geometry, the cell list and trajectory I/O.

use std::io::BufReader;

use ljq_core::system::{
    brute_force_pairs, fold, fold_coord, minimum_image, read_frames, write_frame, CellList,
    Configuration, Vec3,
};
use proptest::prelude::*;

fn config_strategy(max_n: usize, box_edge: f64) -> impl Strategy<Value = Configuration> {
    prop::collection::vec((0.0..box_edge, 0.0..box_edge, 0.0..box_edge), 2..max_n).prop_map(
        move |pts| {
            let positions = pts
                .into_iter()
                .map(|(x, y, z)| Vec3::new(x, y, z))
                .collect();
            Configuration::new(positions, box_edge).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn fold_lands_in_box_and_is_idempotent(x in -1e4f64..1e4, l in 0.5f64..50.0) {
        let y = fold_coord(x, l);
        prop_assert!((0.0..l).contains(&y));
        prop_assert_eq!(fold_coord(y, l), y);
    }

    #[test]
    fn minimum_image_is_shortest_and_in_range(
        dx in -100.0f64..100.0, dy in -100.0f64..100.0, dz in -100.0f64..100.0, l in 1.0f64..20.0
    ) {
        let d = Vec3::new(dx, dy, dz);
        let m = minimum_image(d, l);
        for k in 0..3 {
            prop_assert!(m[k] >= -0.5 * l - 1e-9 && m[k] <= 0.5 * l + 1e-9);
            // m differs from d by a whole number of box lengths.
            let shifts = (d[k] - m[k]) / l;
            prop_assert!((shifts - shifts.round()).abs() < 1e-9);
        }
        prop_assert!(m.norm() <= d.norm() + 1e-9);
    }

    #[test]
    fn minimum_image_is_odd(dx in -4.9f64..4.9, dy in -4.9f64..4.9, dz in -4.9f64..4.9) {
        let d = Vec3::new(dx, dy, dz);
        let a = minimum_image(d, 10.0);
        let b = minimum_image(-d, 10.0);
        prop_assert!((a + b).norm() < 1e-12);
    }

    #[test]
    fn translation_preserves_separations(c in config_strategy(30, 9.0), s in (0.0f64..9.0, 0.0f64..9.0, 0.0f64..9.0)) {
        let shift = Vec3::new(s.0, s.1, s.2);
        let moved = Configuration::new(
            c.positions.iter().map(|p| fold(p + shift, c.box_edge)).collect(),
            c.box_edge,
        ).unwrap();
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                let a = c.separation(i, j).norm();
                let b = moved.separation(i, j).norm();
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cell_list_pairs_equal_brute_force(c in config_strategy(120, 12.0), rc in 1.0f64..5.9) {
        let cl = CellList::new(&c, rc).unwrap();
        let mut got: Vec<(usize, usize)> = cl.pairs(&c).iter().map(|p| (p.i, p.j)).collect();
        got.sort_unstable();
        let mut want = brute_force_pairs(&c, rc);
        want.sort_unstable();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn candidates_cover_every_neighbor(c in config_strategy(80, 14.0), k in 0usize..80) {
        let cl = CellList::new(&c, 3.0).unwrap();
        let i = k % c.len();
        let mut seen = vec![false; c.len()];
        cl.for_each_candidate(&c.positions[i], i, |j| seen[j] = true);
        for j in 0..c.len() {
            if j != i && c.separation(i, j).norm() <= 3.0 {
                prop_assert!(seen[j], "neighbor {} of {} missed", j, i);
            }
        }
    }

    #[test]
    fn frames_roundtrip_exactly(c in config_strategy(20, 7.5), cycle in 0u64..1_000_000) {
        let mut c = c;
        c.cycle = cycle;
        let mut buf = Vec::new();
        write_frame(&mut buf, &c, 1.5, 0.5).unwrap();
        write_frame(&mut buf, &c, 1.5, 0.5).unwrap();
        let frames = read_frames(BufReader::new(&buf[..]), "mem").unwrap();
        prop_assert_eq!(frames.len(), 2);
        prop_assert_eq!(&frames[1].config.positions, &c.positions);
        prop_assert_eq!(frames[1].config.cycle, cycle);
        prop_assert_eq!(frames[1].config.box_edge, c.box_edge);
    }
}

#[test]
fn dense_fcc_pairs_match_brute_force() {
    // 4·4³ = 256 particles on an fcc lattice at ρ = 0.8, slightly jittered.
    let a = (4.0f64 / 0.8).cbrt();
    let l = 4.0 * a;
    let basis = [
        [0.0, 0.0, 0.0],
        [0.5, 0.5, 0.0],
        [0.5, 0.0, 0.5],
        [0.0, 0.5, 0.5],
    ];
    let mut pos = Vec::new();
    for x in 0..4 {
        for y in 0..4 {
            for z in 0..4 {
                for b in basis {
                    let k = pos.len() as f64;
                    let jitter =
                        Vec3::new((k * 0.37).sin(), (k * 0.91).cos(), (k * 1.3).sin()) * 0.05;
                    let p =
                        Vec3::new(x as f64 + b[0], y as f64 + b[1], z as f64 + b[2]) * a + jitter;
                    pos.push(fold(p, l));
                }
            }
        }
    }
    let c = Configuration::new(pos, l).unwrap();
    let cl = CellList::new(&c, 3.0).unwrap();
    let mut got: Vec<_> = cl.pairs(&c).iter().map(|p| (p.i, p.j)).collect();
    got.sort_unstable();
    let mut want = brute_force_pairs(&c, 3.0);
    want.sort_unstable();
    assert_eq!(got, want);
}

#[test]
fn large_system_uses_a_bounded_stencil() {
    let c = Configuration::simple_cubic(2000, (2000.0f64 / 0.5).cbrt()).unwrap();
    let cl = CellList::new(&c, 3.5).unwrap();
    assert!(!cl.is_all_pairs());
    let sphere = 4.0 / 3.0 * std::f64::consts::PI * 3.5f64.powi(3);
    let ratio = cl.stencil_volume() / sphere;
    assert!(
        (2.0..=5.0).contains(&ratio),
        "stencil/sphere volume ratio {ratio}"
    );
}
