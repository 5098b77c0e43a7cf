//! Point cloud persistence: a little-endian binary format that round-trips
//! coordinates bit for bit, and a headerless CSV format (one point per row)
//! for interop with plotting tools.

use super::PointCloud;
use crate::error::{invalid, MmError, Result};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

fn io_err(path: &Path, source: std::io::Error) -> MmError {
    MmError::Io { path: path.to_path_buf(), source }
}

/// Layout: u32 dim, u64 m, then m*dim f64 coordinates row-major, all
/// little-endian.
pub fn write_binary(cloud: &PointCloud, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut inner = || -> std::io::Result<()> {
        w.write_all(&(cloud.dim() as u32).to_le_bytes())?;
        w.write_all(&(cloud.len() as u64).to_le_bytes())?;
        for x in cloud.coords() {
            w.write_all(&x.to_le_bytes())?;
        }
        w.flush()
    };
    inner().map_err(|e| io_err(path, e))
}

pub fn read_binary(path: &Path) -> Result<PointCloud> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut r = BufReader::new(file);
    let mut u32_buf = [0u8; 4];
    let mut u64_buf = [0u8; 8];
    r.read_exact(&mut u32_buf).map_err(|e| io_err(path, e))?;
    let dim = u32::from_le_bytes(u32_buf) as usize;
    r.read_exact(&mut u64_buf).map_err(|e| io_err(path, e))?;
    let m = u64::from_le_bytes(u64_buf) as usize;
    let count = dim
        .checked_mul(m)
        .ok_or_else(|| invalid("binary header dimensions overflow"))?;
    let mut data = Vec::with_capacity(count);
    let mut f64_buf = [0u8; 8];
    for _ in 0..count {
        r.read_exact(&mut f64_buf).map_err(|e| io_err(path, e))?;
        data.push(f64::from_le_bytes(f64_buf));
    }
    // Trailing bytes mean the header lied about the size.
    if r.read(&mut f64_buf).map_err(|e| io_err(path, e))? != 0 {
        return Err(invalid("binary file has trailing data"));
    }
    PointCloud::from_rows(dim, data, None)
}

/// Headerless CSV, one point per row; floats printed in the shortest form
/// that parses back to the same value.
pub fn write_csv(cloud: &PointCloud, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut inner = || -> std::io::Result<()> {
        let mut line = String::new();
        for p in cloud.points() {
            line.clear();
            for (i, x) in p.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{x}"));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        w.flush()
    };
    inner().map_err(|e| io_err(path, e))
}

pub fn read_csv(path: &Path) -> Result<PointCloud> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let r = BufReader::new(file);
    let mut dim = 0usize;
    let mut data = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.is_empty() {
            continue;
        }
        let mut count = 0usize;
        for field in line.split(',') {
            let x: f64 = field.trim().parse().map_err(|_| {
                invalid(format!("line {}: cannot parse '{}' as float", lineno + 1, field))
            })?;
            data.push(x);
            count += 1;
        }
        if dim == 0 {
            dim = count;
        } else if count != dim {
            return Err(invalid(format!(
                "line {}: expected {} fields, got {}",
                lineno + 1,
                dim,
                count
            )));
        }
    }
    PointCloud::from_rows(dim, data, None)
}
