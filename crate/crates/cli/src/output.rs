//! Profile CSV, report JSON and the binary field dump.
//!
//! Profile columns, in order:
//!
//! ```text
//! x,rho,u1,u2,u3,T,theta11,theta12,theta13,theta22,theta23,theta33,lambda1,lambda2,lambda3,flux
//! ```
//!
//! Floats are written as `{:.16e}` (17 significant digits), which round-trips
//! every `f64` exactly.
//!
//! Field dump layout (little endian): the 8-byte magic `ESBGKF01`, `u64`
//! spatial node count `n_x`, `u64` velocity node count `n_v`, `n_x` spatial
//! nodes, `n_v` records of `(v1, v2, v3, weight)`, then `n_x · n_v` values in
//! spatial-major order. All floats are `f64`.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use esbgk_core::grid::{DistributionField, PhaseGrid};
use esbgk_core::iteration::ProfileRow;
use esbgk_core::macros::MacroFields;

pub const PROFILE_HEADER: &str =
    "x,rho,u1,u2,u3,T,theta11,theta12,theta13,theta22,theta23,theta33,lambda1,lambda2,lambda3,flux";

pub const FIELD_MAGIC: &[u8; 8] = b"ESBGKF01";

/// Writes `bytes` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("cannot create {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("cannot move output into {}", path.display()))?;
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn profile_csv(rows: &[ProfileRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 400);
    out.push_str(PROFILE_HEADER);
    out.push('\n');
    for r in rows {
        let m = &r.fields;
        let t = &m.theta;
        let cells = [
            r.x,
            m.rho,
            m.u[0],
            m.u[1],
            m.u[2],
            m.temperature,
            t[0][0],
            t[0][1],
            t[0][2],
            t[1][1],
            t[1][2],
            t[2][2],
            r.eigenvalues[0],
            r.eigenvalues[1],
            r.eigenvalues[2],
            r.flux,
        ];
        let line: Vec<String> = cells.iter().map(|&c| fmt(c)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Parses a profile written by [`profile_csv`].
pub fn read_profile_csv(text: &str) -> Result<Vec<ProfileRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == PROFILE_HEADER => {}
        other => bail!("unexpected profile header {other:?}"),
    }
    lines
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, line)| {
            let c: Vec<f64> = line
                .split(',')
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .with_context(|| format!("row {}", i + 1))?;
            if c.len() != 16 {
                bail!("row {} has {} columns", i + 1, c.len());
            }
            let theta = [[c[6], c[7], c[8]], [c[7], c[9], c[10]], [c[8], c[10], c[11]]];
            Ok(ProfileRow {
                x: c[0],
                fields: MacroFields { rho: c[1], u: [c[2], c[3], c[4]], temperature: c[5], theta },
                eigenvalues: [c[12], c[13], c[14]],
                flux: c[15],
            })
        })
        .collect()
}

pub fn json_pretty<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

pub fn field_dump(grid: &PhaseGrid, f: &DistributionField) -> Vec<u8> {
    let vg = &grid.velocity;
    let xs = grid.space.nodes();
    let mut out = Vec::with_capacity(24 + 8 * (xs.len() + 4 * vg.len() + f.values().len()));
    out.extend_from_slice(FIELD_MAGIC);
    out.extend_from_slice(&(xs.len() as u64).to_le_bytes());
    out.extend_from_slice(&(vg.len() as u64).to_le_bytes());
    for x in xs {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for (v, w) in vg.nodes().iter().zip(vg.weights()) {
        for c in [v[0], v[1], v[2], *w] {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    for x in f.values() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

/// Header and values of a field dump: `(spatial nodes, velocity records, values)`.
pub type FieldDump = (Vec<f64>, Vec<[f64; 4]>, Vec<f64>);

pub fn read_field_dump(bytes: &[u8]) -> Result<FieldDump> {
    if bytes.len() < 24 || &bytes[..8] != FIELD_MAGIC {
        bail!("not an ESBGKF01 field dump");
    }
    let word = |k: usize| u64::from_le_bytes(bytes[k..k + 8].try_into().unwrap());
    let (n_x, n_v) = (word(8) as usize, word(16) as usize);
    let want = 24 + 8 * (n_x + 4 * n_v + n_x * n_v);
    if bytes.len() != want {
        bail!("field dump has {} bytes, header implies {want}", bytes.len());
    }
    let mut floats = bytes[24..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let xs: Vec<f64> = floats.by_ref().take(n_x).collect();
    let nodes: Vec<[f64; 4]> = (0..n_v)
        .map(|_| {
            let mut r = [0.0; 4];
            for slot in r.iter_mut() {
                *slot = floats.next().unwrap();
            }
            r
        })
        .collect();
    Ok((xs, nodes, floats.collect()))
}
