//! CSV tables and binary field snapshots.
//!
//! Snapshot layout (all little-endian):
//!
//! | offset | type      | meaning                       |
//! |--------|-----------|-------------------------------|
//! | 0      | `[u8; 4]` | magic `HLNS`                  |
//! | 4      | `u32`     | format version (1)            |
//! | 8      | `u64`     | `nt`, number of time slices   |
//! | 16     | `u64`     | `nx`, points per slice        |
//! | 24     | `f64`     | `x_min`                       |
//! | 32     | `f64`     | `dx`                          |
//! | 40     | `f64`     | `t_start`                     |
//! | 48     | `f64`     | time between stored slices    |
//! | 56     | `nt·nx` × (`f32` re, `f32` im), slice-major |

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use halfline_nls::sobolev::GridFunction;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"HLNS";
pub const SNAPSHOT_HEADER: usize = 56;

/// Fixed-precision float formatting so CSV bodies are byte-stable.
pub fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()
}

/// Writes slices sharing one grid, stored `slice_dt` apart from `t_start`.
pub fn write_snapshot(path: &Path, slices: &[&GridFunction], t_start: f64, slice_dt: f64) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let nx = slices.first().map_or(0, |s| s.grid().n());
    let (x_min, dx) = slices.first().map_or((0.0, 0.0), |s| (s.grid().x_min(), s.grid().dx()));
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&1u32.to_le_bytes())?;
    w.write_all(&(slices.len() as u64).to_le_bytes())?;
    w.write_all(&(nx as u64).to_le_bytes())?;
    for v in [x_min, dx, t_start, slice_dt] {
        w.write_all(&v.to_le_bytes())?;
    }
    for s in slices {
        for z in s.values() {
            w.write_all(&(z.re as f32).to_le_bytes())?;
            w.write_all(&(z.im as f32).to_le_bytes())?;
        }
    }
    w.flush()
}

/// `(nt, nx, values)` of a snapshot file.
pub fn read_snapshot(path: &Path) -> std::io::Result<(usize, usize, Vec<(f32, f32)>)> {
    let bytes = std::fs::read(path)?;
    let bad = || std::io::Error::new(std::io::ErrorKind::InvalidData, "not a snapshot file");
    if bytes.len() < SNAPSHOT_HEADER || &bytes[..4] != SNAPSHOT_MAGIC {
        return Err(bad());
    }
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap()) as usize;
    let (nt, nx) = (u64_at(8), u64_at(16));
    let body = &bytes[SNAPSHOT_HEADER..];
    if body.len() != nt * nx * 8 {
        return Err(bad());
    }
    let f = |c: &[u8]| f32::from_le_bytes(c.try_into().unwrap());
    Ok((nt, nx, body.chunks_exact(8).map(|c| (f(&c[..4]), f(&c[4..]))).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use halfline_nls::sobolev::{Grid1D, C64};

    #[test]
    fn snapshot_round_trip() {
        let g = Grid1D::half_line(1.0, 16).unwrap();
        let a = GridFunction::from_fn(g, |x| C64::new(x, -x));
        let b = GridFunction::from_fn(g, |x| C64::new(1.0, x * x));
        let dir = std::env::temp_dir().join(format!("hlns-snap-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("f.bin");
        write_snapshot(&path, &[&a, &b], 0.0, 0.5).unwrap();
        let (nt, nx, vals) = read_snapshot(&path).unwrap();
        assert_eq!((nt, nx), (2, 16));
        assert_eq!(vals[16 + 3], (1.0, (g.x(3) * g.x(3)) as f32));
        assert_eq!(std::fs::metadata(&path).unwrap().len() as usize, SNAPSHOT_HEADER + 2 * 16 * 8);
        std::fs::remove_dir_all(dir).ok();
    }
}
