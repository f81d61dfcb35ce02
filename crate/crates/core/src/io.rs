//! Artifact emission: snapshots as flat little-endian f64 with a JSON
//! sidecar, CSV series, and JSON reports. All output is byte-deterministic
//! for a fixed configuration and seed; floats print in the shortest
//! round-trip form.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{KdsError, Result};
use crate::evolution::StateVector;
use crate::grid::Grid2D;

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct SnapshotHeader {
    pub grid: Grid2D,
    pub mode: i32,
    pub components: usize,
    pub t_star: f64,
    /// plane order: all `u` planes then all `v` planes, row-major
    /// (theta-major, r contiguous), little-endian f64.
    pub layout: String,
}

fn io_err(e: std::io::Error) -> KdsError {
    KdsError::Io(e.to_string())
}

/// Writes `<stem>.bin` and `<stem>.json` under `dir`.
pub fn write_snapshot(dir: &Path, stem: &str, grid: &Grid2D, state: &StateVector) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err)?;
    let header = SnapshotHeader {
        grid: *grid,
        mode: grid.mode_m,
        components: state.u.n_planes(),
        t_star: state.t_star,
        layout: "u_planes_then_v_planes_row_major_le_f64".to_string(),
    };
    let mut bytes =
        Vec::with_capacity(8 * grid.len() * (state.u.n_planes() + state.v.n_planes()));
    for set in [&state.u, &state.v] {
        for plane in &set.planes {
            for v in &plane.data {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    fs::write(dir.join(format!("{stem}.bin")), bytes).map_err(io_err)?;
    write_json(&dir.join(format!("{stem}.json")), &header)
}

/// Serializes any report as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| KdsError::Io(e.to_string()))?;
    out.push(b'\n');
    fs::write(path, out).map_err(io_err)
}

/// Writes a CSV with the given header and rows; floats print in shortest
/// round-trip form.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    let mut f = fs::File::create(path).map_err(io_err)?;
    writeln!(f, "{}", header.join(",")).map_err(io_err)?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(f, "{}", line.join(",")).map_err(io_err)?;
    }
    Ok(())
}

/// Reads a two-or-more-column CSV written by `write_csv`, returning the
/// header and rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path).map_err(io_err)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| KdsError::Io("empty csv".into()))?
        .split(',')
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|e| KdsError::Io(format!("bad csv number {tok}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, scalar_parities, FieldSet};
    use crate::horizon::horizon_radii;
    use crate::params::validate_params;

    #[test]
    fn csv_roundtrip_preserves_values() {
        let dir = std::env::temp_dir().join("kds_io_test");
        let path = dir.join("series.csv");
        let rows = vec![vec![0.0, 1.5e-13], vec![0.1, 2.0 / 3.0]];
        write_csv(&path, &["t", "e"], &rows).unwrap();
        let (header, back) = read_csv(&path).unwrap();
        assert_eq!(header, vec!["t", "e"]);
        assert_eq!(back, rows);
    }

    #[test]
    fn snapshot_writes_expected_sizes() {
        let p = validate_params(3.0, 0.1, 0.0).unwrap();
        let h = horizon_radii(&p, 0.05).unwrap();
        let grid = build_grid(&h, 16, 16, 0).unwrap();
        let parities = scalar_parities(0);
        let state = StateVector {
            u: FieldSet::zeros(&grid, &parities),
            v: FieldSet::zeros(&grid, &parities),
            t_star: 0.25,
        };
        let dir = std::env::temp_dir().join("kds_io_snapshot");
        write_snapshot(&dir, "snap_000", &grid, &state).unwrap();
        let bin = std::fs::read(dir.join("snap_000.bin")).unwrap();
        assert_eq!(bin.len(), 8 * 16 * 16 * 4);
        let sidecar: SnapshotHeader =
            serde_json::from_str(&std::fs::read_to_string(dir.join("snap_000.json")).unwrap())
                .unwrap();
        assert_eq!(sidecar.t_star, 0.25);
        assert_eq!(sidecar.components, 2);
    }
}
