//! On-disk formats for field records, per-particle vectors and the run
//! manifest.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::fields::{FieldSample, FieldScalars};
use crate::mc::{EquilibrationReport, SamplerState};
use crate::system::Vec3;

pub const TRAJECTORY_FILE: &str = "trajectory.txt";
pub const FIELDS_FILE: &str = "fields.txt";
pub const VECTORS_FILE: &str = "vectors.txt";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn fields_header() -> String {
    let mut s = String::from("cycle");
    for c in FieldScalars::COLUMNS {
        s.push(' ');
        s.push_str(c);
    }
    s
}

pub fn write_fields_row(w: &mut impl Write, cycle: u64, f: &FieldScalars) -> std::io::Result<()> {
    write!(w, "{cycle}")?;
    for v in f.to_array() {
        write!(w, " {v:e}")?;
    }
    writeln!(w)
}

/// Parsed field records; columns absent from the file are `None`.
#[derive(Clone, Debug, Default)]
pub struct FieldTable {
    pub cycles: Vec<u64>,
    pub columns: Vec<Option<Vec<f64>>>,
}

impl FieldTable {
    pub fn has(&self, name: &str) -> bool {
        FieldScalars::COLUMNS
            .iter()
            .position(|c| *c == name)
            .is_some_and(|k| self.columns[k].is_some())
    }

    /// Scalars per record, missing columns read as zero.
    pub fn scalars(&self) -> Vec<FieldScalars> {
        (0..self.cycles.len())
            .map(|r| {
                let mut a = [0.0; 8];
                for (k, col) in self.columns.iter().enumerate() {
                    if let Some(c) = col {
                        a[k] = c[r];
                    }
                }
                FieldScalars::from_array(a)
            })
            .collect()
    }
}

pub fn read_fields(path: &Path) -> Result<FieldTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let src = path.display().to_string();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(path, e))?,
        None => {
            return Err(Error::Parse {
                location: src,
                reason: "empty fields file".into(),
            })
        }
    };
    let names: Vec<&str> = header.split_whitespace().collect();
    if names.first() != Some(&"cycle") {
        return Err(Error::Parse {
            location: format!("{src}:1"),
            reason: "header must start with `cycle`".into(),
        });
    }
    let index: Vec<Option<usize>> = FieldScalars::COLUMNS
        .iter()
        .map(|c| names.iter().position(|n| n == c))
        .collect();
    let mut table = FieldTable {
        cycles: Vec::new(),
        columns: index.iter().map(|i| i.map(|_| Vec::new())).collect(),
    };
    for (ln, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        let bad = |what: &str| Error::Parse {
            location: format!("{src}:{}", ln + 2),
            reason: what.to_string(),
        };
        if tok.len() != names.len() {
            return Err(bad("column count differs from header"));
        }
        table
            .cycles
            .push(tok[0].parse().map_err(|_| bad("bad cycle"))?);
        for (k, idx) in index.iter().enumerate() {
            if let (Some(i), Some(col)) = (idx, table.columns[k].as_mut()) {
                col.push(tok[*i].parse().map_err(|_| bad("bad number"))?);
            }
        }
    }
    Ok(table)
}

/// Per-particle gradient, gradient of the Laplacian and Hessian diagonal
/// block (xx xy xz yy yz zz), one line per particle after a `cycle N` line.
pub fn write_vectors(w: &mut impl Write, cycle: u64, f: &FieldSample) -> std::io::Result<()> {
    writeln!(w, "{cycle} {}", f.grad.len())?;
    for ((g, l), h) in f.grad.iter().zip(&f.gradlap).zip(&f.hess_diag) {
        writeln!(
            w,
            "{:e} {:e} {:e} {:e} {:e} {:e} {:e} {:e} {:e} {:e} {:e} {:e}",
            g.x,
            g.y,
            g.z,
            l.x,
            l.y,
            l.z,
            h[(0, 0)],
            h[(0, 1)],
            h[(0, 2)],
            h[(1, 1)],
            h[(1, 2)],
            h[(2, 2)]
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorRecord {
    pub cycle: u64,
    pub grad: Vec<Vec3>,
    pub gradlap: Vec<Vec3>,
    pub hess_diag: Vec<Matrix3<f64>>,
}

pub fn read_vectors(path: &Path) -> Result<Vec<VectorRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let src = path.display().to_string();
    let mut out = Vec::new();
    let mut lines = BufReader::new(file).lines().enumerate();
    while let Some((ln, line)) = lines.next() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |n: usize, what: &str| Error::Parse {
            location: format!("{src}:{}", n + 1),
            reason: what.to_string(),
        };
        let head: Vec<&str> = line.split_whitespace().collect();
        if head.len() != 2 {
            return Err(bad(ln, "expected `cycle N`"));
        }
        let cycle: u64 = head[0].parse().map_err(|_| bad(ln, "bad cycle"))?;
        let n: usize = head[1].parse().map_err(|_| bad(ln, "bad count"))?;
        let mut rec = VectorRecord {
            cycle,
            grad: Vec::with_capacity(n),
            gradlap: Vec::with_capacity(n),
            hess_diag: Vec::with_capacity(n),
        };
        for _ in 0..n {
            let (ln, line) = lines.next().ok_or_else(|| bad(ln, "truncated block"))?;
            let line = line.map_err(|e| Error::io(path, e))?;
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad(ln, "bad number")))
                .collect::<Result<_>>()?;
            if v.len() != 12 {
                return Err(bad(ln, "expected 12 numbers"));
            }
            rec.grad.push(Vec3::new(v[0], v[1], v[2]));
            rec.gradlap.push(Vec3::new(v[3], v[4], v[5]));
            rec.hess_diag.push(Matrix3::new(
                v[6], v[7], v[8], v[7], v[9], v[10], v[8], v[10], v[11],
            ));
        }
        out.push(rec);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Running,
    Complete,
}

/// Byte lengths of the data files at the last consistent snapshot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileOffsets {
    pub trajectory: u64,
    /// Start of the last complete trajectory frame.
    pub last_frame: u64,
    pub fields: u64,
    pub vectors: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub run_id: String,
    pub element: String,
    pub hbar_star: f64,
    pub lambda_star: f64,
    pub box_edge: f64,
    pub status: RunStatus,
    pub snapshots: u64,
    pub equilibration: Option<EquilibrationReport>,
    pub acceptance_rate: f64,
    pub sampler: Option<SamplerState>,
    pub offsets: FileOffsets,
    pub config: RunConfig,
}

pub const MANIFEST_FORMAT: &str = "ljq-run v1";

impl Manifest {
    pub fn load(dir: &Path) -> Result<Option<Manifest>> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(Some(serde_json::from_str(&text)?))
    }

    /// Write via a temporary file and rename so readers never see a torn file.
    pub fn store(&self, dir: &Path) -> std::io::Result<()> {
        let tmp: PathBuf = dir.join(format!("{MANIFEST_FILE}.tmp"));
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        fs::write(&tmp, text + "\n")?;
        fs::rename(&tmp, dir.join(MANIFEST_FILE))
    }
}

/// Open `path` for appending after cutting it back to `len` bytes.
pub fn open_truncated(path: &Path, len: u64) -> std::io::Result<File> {
    let f = OpenOptions::new()
        .create(true)
        .truncate(false)
        .write(true)
        .open(path)?;
    f.set_len(len)?;
    drop(f);
    OpenOptions::new().append(true).open(path)
}
