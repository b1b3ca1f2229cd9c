//! Binary trajectory files and CSV tables.
//!
//! Layout: a 64-byte little-endian header
//!
//! | offset | type | field |
//! |-------:|------|-------|
//! | 0  | `[u8; 4]` | magic `EXSC` |
//! | 4  | u32 | format version |
//! | 8  | u32 | d |
//! | 12 | u32 | lmax |
//! | 16 | u32 | ncomp |
//! | 20 | u32 | reserved (0) |
//! | 24 | u64 | node count |
//! | 32 | f64 | s |
//! | 40 | f64 | t0 |
//! | 48 | f64 | Δt |
//! | 56 | u32 | grid oversampling |
//! | 60 | u32 | reserved (0) |
//!
//! followed by every v slice (node-major, component-major, (ℓ, m) ascending) and then
//! every ∂_t v slice, as f64.

use crate::duhamel::{TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::sphere_spectral::SphereBasis;
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"EXSC";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 64;

pub fn encode_trajectory(traj: &Trajectory, s: f64) -> Vec<u8> {
    let basis = traj.basis();
    let grid = traj.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * traj.v().len());
    out.extend_from_slice(MAGIC);
    for x in [VERSION, basis.d() as u32, basis.lmax() as u32, traj.ncomp() as u32, 0] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out.extend_from_slice(&(grid.len() as u64).to_le_bytes());
    for x in [s, grid.t0(), grid.dt()] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out.extend_from_slice(&(basis.oversample() as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    debug_assert_eq!(out.len(), HEADER_LEN);
    for x in traj.v().iter().chain(traj.dv()) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

fn u32_at(b: &[u8], off: usize) -> u32 {
    u32::from_le_bytes(b[off..off + 4].try_into().unwrap())
}

fn f64_at(b: &[u8], off: usize) -> f64 {
    f64::from_le_bytes(b[off..off + 8].try_into().unwrap())
}

/// Inverse of [`encode_trajectory`]; returns the trajectory and the stored s.
pub fn decode_trajectory(bytes: &[u8]) -> Result<(Trajectory, f64)> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("truncated header: {} of {HEADER_LEN} bytes", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic (not an EXSC trajectory)".into()));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version} (expected {VERSION})")));
    }
    let (d, lmax, ncomp) = (u32_at(bytes, 8) as usize, u32_at(bytes, 12) as usize, u32_at(bytes, 16) as usize);
    let nodes = u64::from_le_bytes(bytes[24..32].try_into().unwrap()) as usize;
    let (s, t0, dt) = (f64_at(bytes, 32), f64_at(bytes, 40), f64_at(bytes, 48));
    let oversample = u32_at(bytes, 56) as usize;
    let basis = SphereBasis::new(d, lmax, oversample)?;
    let grid = TimeGrid::with_nodes(t0, dt, nodes)?;
    let per_slot = nodes
        .checked_mul(ncomp)
        .and_then(|x| x.checked_mul(basis.n_modes()))
        .ok_or_else(|| Error::Format("header sizes overflow".into()))?;
    let want = HEADER_LEN + 16 * per_slot;
    if bytes.len() != want {
        let at = HEADER_LEN + 8 * ((bytes.len().saturating_sub(HEADER_LEN)) / 8);
        return Err(Error::Format(format!(
            "payload length mismatch: file has {} bytes, header implies {want} (data ends near offset {at})",
            bytes.len()
        )));
    }
    let read = |start: usize| -> Vec<f64> {
        (0..per_slot).map(|i| f64_at(bytes, start + 8 * i)).collect()
    };
    let v = read(HEADER_LEN);
    let dv = read(HEADER_LEN + 8 * per_slot);
    Ok((Trajectory::from_parts(&grid, &basis, ncomp, v, dv)?, s))
}

pub fn save_trajectory(path: &Path, traj: &Trajectory, s: f64) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode_trajectory(traj, s))?;
    Ok(())
}

pub fn load_trajectory(path: &Path) -> Result<(Trajectory, f64)> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    decode_trajectory(&buf)
}

/// Comma-separated table with a header row; floats printed with 17 significant digits.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}
