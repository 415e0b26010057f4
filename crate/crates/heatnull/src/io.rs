//! Uniform grids of f64 values and their binary form.
//!
//! Layout (little endian): magic `HNGRID01`, u32 rank, then per axis
//! u64 count, f64 origin, f64 spacing, then the payload in row-major order.

use crate::error::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"HNGRID01";

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub count: usize,
    pub origin: f64,
    pub spacing: f64,
}

impl Axis {
    pub fn spanning(a: f64, b: f64, count: usize) -> Axis {
        let spacing = if count > 1 { (b - a) / (count - 1) as f64 } else { 0.0 };
        Axis { count, origin: a, spacing }
    }

    pub fn at(&self, i: usize) -> f64 {
        self.origin + self.spacing * i as f64
    }

    pub fn end(&self) -> f64 {
        self.at(self.count.saturating_sub(1))
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.at(i)).collect()
    }
}

/// Values on a tensor grid, last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub axes: Vec<Axis>,
    pub data: Vec<f64>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>, data: Vec<f64>) -> Result<Grid> {
        let n: usize = axes.iter().map(|a| a.count).product();
        if n != data.len() {
            return Err(Error::Config(format!("grid payload has {} values, axes need {n}", data.len())));
        }
        Ok(Grid { axes, data })
    }

    pub fn zeros(axes: Vec<Axis>) -> Grid {
        let n = axes.iter().map(|a| a.count).product();
        Grid { axes, data: vec![0.0; n] }
    }

    /// 2-D grid filled from f(x0, x1).
    pub fn from_fn2(a0: Axis, a1: Axis, f: impl Fn(f64, f64) -> f64) -> Grid {
        let mut data = Vec::with_capacity(a0.count * a1.count);
        for i in 0..a0.count {
            let x = a0.at(i);
            for j in 0..a1.count {
                data.push(f(x, a1.at(j)));
            }
        }
        Grid { axes: vec![a0, a1], data }
    }

    pub fn get2(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.axes[1].count + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.axes[1].count;
        &self.data[i * n..(i + 1) * n]
    }

    /// Bilinear interpolation on a 2-D grid, zero outside.
    pub fn interp2(&self, x0: f64, x1: f64) -> f64 {
        let pos = |ax: &Axis, x: f64| -> Option<(usize, f64)> {
            if ax.count == 1 {
                return if (x - ax.origin).abs() <= 1e-12 { Some((0, 0.0)) } else { None };
            }
            let u = (x - ax.origin) / ax.spacing;
            let eps = 1e-9;
            if u < -eps || u > (ax.count - 1) as f64 + eps {
                return None;
            }
            let u = u.clamp(0.0, (ax.count - 1) as f64);
            let i = (u.floor() as usize).min(ax.count - 2);
            Some((i, u - i as f64))
        };
        let (Some((i, a)), Some((j, b))) = (pos(&self.axes[0], x0), pos(&self.axes[1], x1)) else {
            return 0.0;
        };
        let n1 = self.axes[1].count;
        let v = |ii: usize, jj: usize| self.data[ii.min(self.axes[0].count - 1) * n1 + jj.min(n1 - 1)];
        (1.0 - a) * ((1.0 - b) * v(i, j) + b * v(i, j + 1)) + a * ((1.0 - b) * v(i + 1, j) + b * v(i + 1, j + 1))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 24 * self.axes.len() + 8 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.axes.len() as u32).to_le_bytes());
        for a in &self.axes {
            out.extend_from_slice(&(a.count as u64).to_le_bytes());
            out.extend_from_slice(&a.origin.to_le_bytes());
            out.extend_from_slice(&a.spacing.to_le_bytes());
        }
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Grid> {
        let bad = |m: &str| Error::Usage(format!("grid file: {m}"));
        if b.len() < 12 || &b[..8] != MAGIC {
            return Err(bad("missing header"));
        }
        let rank = u32::from_le_bytes(b[8..12].try_into().unwrap()) as usize;
        let mut off = 12;
        let mut axes = Vec::with_capacity(rank);
        for _ in 0..rank {
            if b.len() < off + 24 {
                return Err(bad("truncated axis table"));
            }
            let count = u64::from_le_bytes(b[off..off + 8].try_into().unwrap()) as usize;
            let origin = f64::from_le_bytes(b[off + 8..off + 16].try_into().unwrap());
            let spacing = f64::from_le_bytes(b[off + 16..off + 24].try_into().unwrap());
            axes.push(Axis { count, origin, spacing });
            off += 24;
        }
        let n: usize = axes.iter().map(|a| a.count).product();
        if b.len() != off + 8 * n {
            return Err(bad("payload size does not match the axes"));
        }
        let data = b[off..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(Grid { axes, data })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn read(path: &Path) -> Result<Grid> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        Grid::from_bytes(&buf)
    }
}

/// Write through a temporary sibling and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}
