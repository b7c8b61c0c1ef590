//! Periodic cubic cell, configurations, minimum-image geometry and the
//! linked-cell neighbor table.

use std::io::{BufRead, Write};

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Smallest neighbor-cell edge in reduced units.
pub const CELL_MIN_EDGE: f64 = 0.75;

/// Cells per cutoff length; three balances empty-cell visits against the
/// stencil overshoot beyond the cutoff sphere.
pub const CELLS_PER_CUTOFF: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub positions: Vec<Vec3>,
    pub box_edge: f64,
    pub run_id: String,
    pub cycle: u64,
}

/// Fold one coordinate into [0, L).
#[inline]
pub fn fold_coord(x: f64, box_edge: f64) -> f64 {
    let y = x - box_edge * (x / box_edge).floor();
    if y >= box_edge || y < 0.0 {
        0.0
    } else {
        y
    }
}

#[inline]
pub fn fold(p: Vec3, box_edge: f64) -> Vec3 {
    Vec3::new(
        fold_coord(p.x, box_edge),
        fold_coord(p.y, box_edge),
        fold_coord(p.z, box_edge),
    )
}

#[inline]
fn image_coord(d: f64, box_edge: f64) -> f64 {
    let mut y = d - box_edge * (d / box_edge + 0.5).floor();
    if y >= 0.5 * box_edge {
        y -= box_edge;
    } else if y < -0.5 * box_edge {
        y += box_edge;
    }
    y
}

/// Map each component of `delta` into [−L/2, L/2).
#[inline]
pub fn minimum_image(delta: Vec3, box_edge: f64) -> Vec3 {
    Vec3::new(
        image_coord(delta.x, box_edge),
        image_coord(delta.y, box_edge),
        image_coord(delta.z, box_edge),
    )
}

impl Configuration {
    pub fn new(positions: Vec<Vec3>, box_edge: f64) -> Result<Self> {
        if !(box_edge > 0.0 && box_edge.is_finite()) {
            return Err(Error::invalid(
                "box_edge",
                format!("must be > 0, got {box_edge}"),
            ));
        }
        if positions.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::invalid("positions", "non-finite coordinate"));
        }
        let positions = positions.into_iter().map(|p| fold(p, box_edge)).collect();
        Ok(Configuration {
            positions,
            box_edge,
            run_id: String::new(),
            cycle: 0,
        })
    }

    /// The first `n` sites of a simple-cubic lattice filling the box.
    pub fn simple_cubic(n: usize, box_edge: f64) -> Result<Self> {
        let m = (n as f64).cbrt().ceil() as usize;
        let a = box_edge / m as f64;
        let mut positions = Vec::with_capacity(n);
        'outer: for ix in 0..m {
            for iy in 0..m {
                for iz in 0..m {
                    if positions.len() == n {
                        break 'outer;
                    }
                    positions.push(Vec3::new(
                        (ix as f64 + 0.5) * a,
                        (iy as f64 + 0.5) * a,
                        (iz as f64 + 0.5) * a,
                    ));
                }
            }
        }
        Self::new(positions, box_edge)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.box_edge.powi(3)
    }

    pub fn density(&self) -> f64 {
        self.len() as f64 / self.volume()
    }

    /// Minimum-image separation q_i − q_j.
    #[inline]
    pub fn separation(&self, i: usize, j: usize) -> Vec3 {
        minimum_image(self.positions[i] - self.positions[j], self.box_edge)
    }

    /// Periodic copy of this configuration replicated `k` times along each axis.
    pub fn replicate(&self, k: usize) -> Configuration {
        let l = self.box_edge;
        let mut positions = Vec::with_capacity(self.len() * k * k * k);
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    let shift = Vec3::new(a as f64, b as f64, c as f64) * l;
                    positions.extend(self.positions.iter().map(|p| p + shift));
                }
            }
        }
        Configuration {
            positions,
            box_edge: l * k as f64,
            run_id: self.run_id.clone(),
            cycle: self.cycle,
        }
    }
}

/// One unordered pair within the cutoff, with `r = q_i − q_j` and `i < j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairRecord {
    pub i: usize,
    pub j: usize,
    pub dist: f64,
    pub unit: Vec3,
}

/// Linked-cell neighbor table over a cubic periodic box.
#[derive(Clone, Debug)]
pub struct CellList {
    cells_per_side: usize,
    cell_edge: f64,
    box_edge: f64,
    r_cut: f64,
    cells: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
    /// Offsets with lexicographic sign > 0, so each cell pair is visited once.
    half_stencil: Vec<[i64; 3]>,
    full_stencil: Vec<[i64; 3]>,
    /// Flattened full-stencil neighbor cells of every cell, row per cell.
    neighbors: Vec<u32>,
    /// Stencil wraps onto itself; fall back to all pairs.
    all_pairs: bool,
}

pub fn build_cell_list(config: &Configuration, r_cut: f64) -> Result<CellList> {
    CellList::new(config, r_cut)
}

impl CellList {
    pub fn new(config: &Configuration, r_cut: f64) -> Result<Self> {
        let l = config.box_edge;
        if !(r_cut > 0.0) || r_cut >= 0.5 * l {
            return Err(Error::invalid(
                "r_cut",
                format!("must be in (0, L/2) with L = {l:.6}, got {r_cut}"),
            ));
        }
        let target = (r_cut / CELLS_PER_CUTOFF).max(CELL_MIN_EDGE);
        let n = ((l / target).floor() as usize).max(1);
        let cell_edge = l / n as f64;
        let reach = (r_cut / cell_edge).ceil() as i64;
        let all_pairs = 2 * reach + 1 >= n as i64;
        let mut full_stencil = Vec::new();
        let mut half_stencil = Vec::new();
        if !all_pairs {
            let gap = |a: i64| ((a.abs() - 1).max(0) as f64) * cell_edge;
            for a in -reach..=reach {
                for b in -reach..=reach {
                    for c in -reach..=reach {
                        let d2 = gap(a).powi(2) + gap(b).powi(2) + gap(c).powi(2);
                        if d2 > r_cut * r_cut {
                            continue;
                        }
                        full_stencil.push([a, b, c]);
                        if [a, b, c] > [0, 0, 0] {
                            half_stencil.push([a, b, c]);
                        }
                    }
                }
            }
        }
        let mut list = CellList {
            cells_per_side: n,
            cell_edge,
            box_edge: l,
            r_cut,
            cells: vec![Vec::new(); n * n * n],
            cell_of: Vec::new(),
            half_stencil,
            full_stencil,
            neighbors: Vec::new(),
            all_pairs,
        };
        if !all_pairs {
            let m = n as i64;
            for cx in 0..m {
                for cy in 0..m {
                    for cz in 0..m {
                        for off in &list.full_stencil {
                            let f = list.flat([cx + off[0], cy + off[1], cz + off[2]]);
                            list.neighbors.push(f as u32);
                        }
                    }
                }
            }
        }
        list.rebuild(config);
        Ok(list)
    }

    pub fn r_cut(&self) -> f64 {
        self.r_cut
    }

    pub fn cell_edge(&self) -> f64 {
        self.cell_edge
    }

    pub fn is_all_pairs(&self) -> bool {
        self.all_pairs
    }

    /// Volume swept by the neighbor search around one particle.
    pub fn stencil_volume(&self) -> f64 {
        if self.all_pairs {
            self.box_edge.powi(3)
        } else {
            self.full_stencil.len() as f64 * self.cell_edge.powi(3)
        }
    }

    /// Re-bin every particle; cell contents come out sorted by index.
    pub fn rebuild(&mut self, config: &Configuration) {
        for c in &mut self.cells {
            c.clear();
        }
        self.cell_of.clear();
        for (i, p) in config.positions.iter().enumerate() {
            let c = self.cell_index(p);
            self.cells[c].push(i);
            self.cell_of.push(c);
        }
    }

    #[inline]
    fn coords(&self, p: &Vec3) -> [i64; 3] {
        let n = self.cells_per_side as i64;
        let f = |x: f64| ((x / self.cell_edge) as i64).clamp(0, n - 1);
        [f(p.x), f(p.y), f(p.z)]
    }

    #[inline]
    fn flat(&self, c: [i64; 3]) -> usize {
        let n = self.cells_per_side as i64;
        let w = |a: i64| a.rem_euclid(n) as usize;
        (w(c[0]) * self.cells_per_side + w(c[1])) * self.cells_per_side + w(c[2])
    }

    #[inline]
    pub fn cell_index(&self, p: &Vec3) -> usize {
        self.flat(self.coords(p))
    }

    /// Move particle `i` to `new_pos` (already folded) in the table.
    pub fn relocate(&mut self, i: usize, new_pos: &Vec3) {
        let new_cell = self.cell_index(new_pos);
        let old_cell = self.cell_of[i];
        if new_cell == old_cell {
            return;
        }
        let slot = &mut self.cells[old_cell];
        let k = slot
            .iter()
            .position(|&x| x == i)
            .expect("particle missing from its cell");
        slot.swap_remove(k);
        self.cells[new_cell].push(i);
        self.cell_of[i] = new_cell;
    }

    /// Visit every particle other than `skip` that may lie within the
    /// cutoff of point `p`, passing its index.
    #[inline]
    pub fn for_each_candidate(&self, p: &Vec3, skip: usize, f: impl FnMut(usize)) {
        self.for_each_candidate_of_cell(self.cell_index(p), skip, f);
    }

    /// Cell currently holding particle `i`.
    #[inline]
    pub fn cell_of(&self, i: usize) -> usize {
        self.cell_of[i]
    }

    /// Visit every particle other than `skip` in the stencil around `cell`.
    #[inline]
    pub fn for_each_candidate_of_cell(&self, cell: usize, skip: usize, mut f: impl FnMut(usize)) {
        if self.all_pairs {
            for j in 0..self.cell_of.len() {
                if j != skip {
                    f(j);
                }
            }
            return;
        }
        let k = self.full_stencil.len();
        for &nc in &self.neighbors[cell * k..(cell + 1) * k] {
            for &j in &self.cells[nc as usize] {
                if j != skip {
                    f(j);
                }
            }
        }
    }

    /// Visit each unordered pair with separation ≤ r_cut exactly once, as
    /// `(i, j, r)` with `i < j` and `r = q_i − q_j` (minimum image).
    pub fn for_each_pair(&self, config: &Configuration, mut f: impl FnMut(usize, usize, Vec3)) {
        debug_assert!(self.is_current(config), "stale cell list");
        let rc2 = self.r_cut * self.r_cut;
        let l = config.box_edge;
        let pos = &config.positions;
        let mut visit = |a: usize, b: usize| {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            let r = minimum_image(pos[i] - pos[j], l);
            if r.norm_squared() <= rc2 {
                f(i, j, r);
            }
        };
        if self.all_pairs {
            for i in 0..pos.len() {
                for j in i + 1..pos.len() {
                    visit(i, j);
                }
            }
            return;
        }
        let n = self.cells_per_side as i64;
        for cx in 0..n {
            for cy in 0..n {
                for cz in 0..n {
                    let home = &self.cells[self.flat([cx, cy, cz])];
                    for (k, &a) in home.iter().enumerate() {
                        for &b in &home[k + 1..] {
                            visit(a, b);
                        }
                    }
                    for off in &self.half_stencil {
                        let other = &self.cells[self.flat([cx + off[0], cy + off[1], cz + off[2]])];
                        for &a in home {
                            for &b in other {
                                visit(a, b);
                            }
                        }
                    }
                }
            }
        }
    }

    pub fn pairs(&self, config: &Configuration) -> Vec<PairRecord> {
        let mut out = Vec::new();
        self.for_each_pair(config, |i, j, r| {
            let dist = r.norm();
            out.push(PairRecord {
                i,
                j,
                dist,
                unit: r / dist,
            });
        });
        out
    }

    fn is_current(&self, config: &Configuration) -> bool {
        self.cell_of.len() == config.len()
            && config
                .positions
                .iter()
                .zip(&self.cell_of)
                .all(|(p, &c)| self.cell_index(p) == c)
    }
}

/// O(N²) reference pair list.
pub fn brute_force_pairs(config: &Configuration, r_cut: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..config.len() {
        for j in i + 1..config.len() {
            if config.separation(i, j).norm() <= r_cut {
                out.push((i, j));
            }
        }
    }
    out
}

/// Header written before every trajectory frame.
pub fn write_frame(
    w: &mut impl Write,
    config: &Configuration,
    t_star: f64,
    rho_star: f64,
) -> std::io::Result<()> {
    writeln!(
        w,
        "{} {} {} {} {}",
        config.len(),
        config.box_edge,
        t_star,
        rho_star,
        config.cycle
    )?;
    for p in &config.positions {
        writeln!(w, "{} {} {}", p.x, p.y, p.z)?;
    }
    Ok(())
}

/// A frame read back from a trajectory file.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub config: Configuration,
    pub t_star: f64,
    pub rho_star: f64,
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, location: &dyn Fn() -> String) -> Result<T> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse {
            location: location(),
            reason: format!("bad or missing number `{}`", tok.unwrap_or("")),
        })
}

pub fn read_frames(reader: impl BufRead, source: &str) -> Result<Vec<Frame>> {
    let mut lines = reader.lines().enumerate();
    let mut frames = Vec::new();
    let loc = |n: usize| format!("{source}:{}", n + 1);
    while let Some((ln, line)) = lines.next() {
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut tok = line.split_whitespace();
        let at = || loc(ln);
        let n: usize = parse_num(tok.next(), &at)?;
        let box_edge: f64 = parse_num(tok.next(), &at)?;
        let t_star: f64 = parse_num(tok.next(), &at)?;
        let rho_star: f64 = parse_num(tok.next(), &at)?;
        let cycle: u64 = parse_num(tok.next(), &at)?;
        let mut positions = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, line) = lines.next().ok_or_else(|| Error::Parse {
                location: source.to_string(),
                reason: "truncated frame".into(),
            })?;
            let line = line.map_err(|e| Error::io(source, e))?;
            let at = || loc(ln);
            let mut t = line.split_whitespace();
            let x = parse_num(t.next(), &at)?;
            let y = parse_num(t.next(), &at)?;
            let z = parse_num(t.next(), &at)?;
            positions.push(Vec3::new(x, y, z));
        }
        frames.push(Frame {
            config: Configuration {
                positions,
                box_edge,
                run_id: String::new(),
                cycle,
            },
            t_star,
            rho_star,
        });
    }
    Ok(frames)
}
