//! File outputs: the diagnostics CSV, audit reports, raw field snapshots and
//! optional VTK exports.
//!
//! Snapshot format: a 64-byte ASCII header
//! `FLXSNP01 d=<dim> n=<d0>,<d1>,<d2> f=<tag> t=<time>` padded with spaces,
//! followed by the array as little-endian f64 (cell dims for scalars, face
//! dims for velocity components).

use anyhow::{bail, Context, Result};
use fluxlim_core::diagnostics::DiagRecord;
use fluxlim_core::field::StateSnapshot;
use std::io::{Read, Write};
use std::path::Path;

pub const SNAPSHOT_MAGIC: &str = "FLXSNP01";
pub const SNAPSHOT_HEADER_LEN: usize = 64;

/// Shortest round-trip decimal formatting; deterministic across runs.
fn fmt(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

/// Writes `diag.csv`: a comment header naming the fixed column order plus a
/// meta line carrying what the offline checker needs, then one row per
/// record.
pub fn write_diag_csv(
    path: &Path,
    records: &[DiagRecord],
    volume: f64,
    targets: (f64, f64),
    eps_conv: f64,
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# {}\n", DiagRecord::CSV_COLUMNS.join(",")));
    out.push_str(&format!(
        "# meta schema=1 volume={} n_inf={} m_inf={} eps_conv={}\n",
        fmt(volume),
        fmt(targets.0),
        fmt(targets.1),
        fmt(eps_conv)
    ));
    for r in records {
        let row: Vec<String> = r.csv_row().iter().map(|v| fmt(*v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub struct DiagCsv {
    pub records: Vec<DiagRecord>,
    pub volume: f64,
    pub targets: (f64, f64),
    pub eps_conv: f64,
}

pub fn read_diag_csv(path: &Path) -> Result<DiagCsv> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut records = Vec::new();
    let mut volume = f64::NAN;
    let mut targets = (f64::NAN, f64::NAN);
    let mut eps_conv = 1e-3;
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix("# meta ") {
            for kv in meta.split_whitespace() {
                let mut it = kv.splitn(2, '=');
                match (it.next(), it.next()) {
                    (Some("volume"), Some(v)) => volume = v.parse()?,
                    (Some("n_inf"), Some(v)) => targets.0 = v.parse()?,
                    (Some("m_inf"), Some(v)) => targets.1 = v.parse()?,
                    (Some("eps_conv"), Some(v)) => eps_conv = v.parse()?,
                    _ => {}
                }
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|tok| tok.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("line {}: bad number", ln + 1))?;
        records.push(DiagRecord::from_csv_row(&row).map_err(|e| anyhow::anyhow!("line {}: {e}", ln + 1))?);
    }
    if records.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    if !volume.is_finite() {
        bail!("{}: missing meta volume", path.display());
    }
    Ok(DiagCsv {
        records,
        volume,
        targets,
        eps_conv,
    })
}

fn snapshot_header(dims: [usize; 3], dim: usize, tag: &str, t: f64) -> Result<Vec<u8>> {
    let head = format!(
        "{SNAPSHOT_MAGIC} d={dim} n={},{},{} f={tag} t={:.16e}",
        dims[0], dims[1], dims[2], t
    );
    if head.len() > SNAPSHOT_HEADER_LEN {
        bail!("snapshot header too long: {head}");
    }
    let mut bytes = head.into_bytes();
    bytes.resize(SNAPSHOT_HEADER_LEN, b' ');
    Ok(bytes)
}

pub fn write_snapshot(path: &Path, dims: [usize; 3], dim: usize, tag: &str, t: f64, data: &[f64]) -> Result<()> {
    let mut file = std::io::BufWriter::new(
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    file.write_all(&snapshot_header(dims, dim, tag, t)?)?;
    for v in data {
        file.write_all(&v.to_le_bytes())?;
    }
    file.flush()?;
    Ok(())
}

/// Returns (dims, field tag, time, data).
pub fn read_snapshot(path: &Path) -> Result<([usize; 3], String, f64, Vec<f64>)> {
    let mut file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut head = [0u8; SNAPSHOT_HEADER_LEN];
    file.read_exact(&mut head)?;
    let text = std::str::from_utf8(&head).context("snapshot header is not ASCII")?;
    let mut dims = [0usize; 3];
    let mut tag = String::new();
    let mut t = 0.0f64;
    let mut magic_ok = false;
    for (i, tok) in text.split_whitespace().enumerate() {
        if i == 0 {
            magic_ok = tok == SNAPSHOT_MAGIC;
            continue;
        }
        if let Some(v) = tok.strip_prefix("n=") {
            let parts: Vec<usize> = v.split(',').map(|s| s.parse()).collect::<std::result::Result<_, _>>()?;
            if parts.len() != 3 {
                bail!("snapshot header: bad dims {v}");
            }
            dims.copy_from_slice(&parts);
        } else if let Some(v) = tok.strip_prefix("f=") {
            tag = v.to_string();
        } else if let Some(v) = tok.strip_prefix("t=") {
            t = v.parse()?;
        }
    }
    if !magic_ok {
        bail!("{}: not a snapshot file", path.display());
    }
    let count = dims[0] * dims[1] * dims[2];
    let mut raw = Vec::new();
    file.read_to_end(&mut raw)?;
    if raw.len() != count * 8 {
        bail!(
            "{}: payload is {} bytes, expected {}",
            path.display(),
            raw.len(),
            count * 8
        );
    }
    let data = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((dims, tag, t, data))
}

/// Writes every field of a state as raw snapshots with a shared index.
pub fn write_state_snapshots(dir: &Path, index: usize, state: &StateSnapshot) -> Result<()> {
    let grid = *state.grid();
    let dims = [grid.cells(0), grid.cells(1), grid.cells(2)];
    let dim = grid.dim();
    let t = state.t;
    for (tag, field) in [("n", &state.n), ("c", &state.c), ("m", &state.m), ("p", &state.p)] {
        let path = dir.join(format!("{tag}_{index:06}.raw"));
        write_snapshot(&path, dims, dim, tag, t, field.values())?;
    }
    for a in 0..dim {
        let tag = ["u0", "u1", "u2"][a];
        let path = dir.join(format!("{tag}_{index:06}.raw"));
        write_snapshot(&path, grid.face_dims(a), dim, tag, t, state.u.component(a))?;
    }
    Ok(())
}

/// Legacy-ASCII VTK structured-points export of the cell fields, for
/// visualization only.
pub fn write_vtk(path: &Path, state: &StateSnapshot) -> Result<()> {
    let grid = *state.grid();
    let (nx, ny, nz) = (grid.cells(0), grid.cells(1), grid.cells(2));
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 2.0\n");
    out.push_str(&format!("fluxlim state t={}\n", fmt(state.t)));
    out.push_str("ASCII\nDATASET STRUCTURED_POINTS\n");
    out.push_str(&format!("DIMENSIONS {} {} {}\n", nx, ny, nz));
    out.push_str("ORIGIN 0 0 0\n");
    out.push_str(&format!(
        "SPACING {} {} {}\n",
        fmt(grid.spacing(0)),
        fmt(grid.spacing(1)),
        fmt(grid.spacing(2))
    ));
    out.push_str(&format!("POINT_DATA {}\n", grid.cell_count()));
    for (tag, field) in [("n", &state.n), ("c", &state.c), ("m", &state.m), ("p", &state.p)] {
        out.push_str(&format!("SCALARS {tag} double 1\nLOOKUP_TABLE default\n"));
        for v in field.values() {
            out.push_str(&fmt(*v));
            out.push('\n');
        }
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// One row of the sweep summary.
pub struct SweepRow {
    pub theta: f64,
    pub sup_linf_n: f64,
    pub final_dist: [f64; 4],
    pub all_pass: bool,
}

pub fn write_sweep_summary(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut out = String::from("# theta,sup_linf_n,dist_n,dist_c,dist_m,dist_u,all_pass\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt(r.theta),
            fmt(r.sup_linf_n),
            fmt(r.final_dist[0]),
            fmt(r.final_dist[1]),
            fmt(r.final_dist[2]),
            fmt(r.final_dist[3]),
            r.all_pass
        ));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Error-table CSV for discretization-order studies.
pub fn write_error_table(path: &Path, rows: &[(f64, f64, &str, &str, f64)]) -> Result<()> {
    let mut out = String::from("# h,dt,field,norm,error\n");
    for (h, dt, field, norm, err) in rows {
        out.push_str(&format!("{},{},{field},{norm},{}\n", fmt(*h), fmt(*dt), fmt(*err)));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}
