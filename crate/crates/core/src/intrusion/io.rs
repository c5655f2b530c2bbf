//! Curve files: a two-column table (`depth_m,force_N`) plus a JSON sidecar
//! with the protocol and provenance.
//!
//! ```text
//! curve_0007.csv    # regolith force-depth curve
//!                   depth_m,force_N
//!                   0,0
//!                   0.00006666666666666667,0.0123…
//! curve_0007.json   {"protocol": {...}, "provenance": "leg_estimate", ...}
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ForceDepthCurve, IntrusionError, IntrusionProtocol, Provenance};

pub const TABLE_BANNER: &str = "# regolith force-depth curve";
pub const TABLE_COLUMNS: [&str; 2] = ["depth_m", "force_N"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMetadata {
    pub protocol: IntrusionProtocol,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column_ref: Option<String>,
    #[serde(default = "yes")]
    pub valid: bool,
}

fn yes() -> bool {
    true
}

impl From<&ForceDepthCurve> for CurveMetadata {
    fn from(c: &ForceDepthCurve) -> Self {
        CurveMetadata {
            protocol: c.protocol,
            provenance: c.provenance,
            column_ref: c.column_ref.clone(),
            valid: c.valid,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> IntrusionError {
    IntrusionError::InvalidInput(format!("{}: {e}", path.display()))
}

pub fn sidecar_path(table: &Path) -> PathBuf {
    table.with_extension("json")
}

/// Render the sample table. Numbers use the shortest round-trip form.
pub fn to_table(curve: &ForceDepthCurve) -> String {
    let mut out = Vec::new();
    writeln!(out, "{TABLE_BANNER}").expect("write to vec");
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(TABLE_COLUMNS).expect("write to vec");
        for (h, f) in curve.samples() {
            w.write_record([h.to_string(), f.to_string()]).expect("write to vec");
        }
        w.flush().expect("write to vec");
    }
    String::from_utf8(out).expect("ascii table")
}

/// Parse a sample table written by [`to_table`]; `#` lines are skipped.
pub fn from_table(text: &str, meta: CurveMetadata) -> Result<ForceDepthCurve, IntrusionError> {
    let body: String = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| IntrusionError::InvalidInput(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != TABLE_COLUMNS {
        return Err(IntrusionError::InvalidInput(format!(
            "expected columns {TABLE_COLUMNS:?}, found {headers:?}"
        )));
    }
    let mut depth = Vec::new();
    let mut force = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| IntrusionError::InvalidInput(e.to_string()))?;
        let parse = |i: usize| -> Result<f64, IntrusionError> {
            record
                .get(i)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| IntrusionError::InvalidInput(format!("bad value on row {line}")))
        };
        depth.push(parse(0)?);
        force.push(parse(1)?);
    }
    let curve = ForceDepthCurve {
        depth,
        force,
        protocol: meta.protocol,
        provenance: meta.provenance,
        column_ref: meta.column_ref,
        valid: meta.valid,
    };
    curve.check()?;
    Ok(curve)
}

/// Write `path` (table) and its `.json` sidecar.
pub fn write_curve(curve: &ForceDepthCurve, path: &Path) -> Result<(), IntrusionError> {
    fs::write(path, to_table(curve)).map_err(|e| io_err(path, e))?;
    let meta = serde_json::to_string_pretty(&CurveMetadata::from(curve)).map_err(|e| io_err(path, e))?;
    let side = sidecar_path(path);
    fs::write(&side, meta + "\n").map_err(|e| io_err(&side, e))
}

/// Read a curve table. Without a sidecar the curve is taken as ground truth
/// sampled with the default protocol.
pub fn read_curve(path: &Path) -> Result<ForceDepthCurve, IntrusionError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let side = sidecar_path(path);
    let meta = if side.exists() {
        let raw = fs::read_to_string(&side).map_err(|e| io_err(&side, e))?;
        serde_json::from_str(&raw).map_err(|e| io_err(&side, e))?
    } else {
        CurveMetadata {
            protocol: IntrusionProtocol::default(),
            provenance: Provenance::Truth,
            column_ref: None,
            valid: true,
        }
    };
    from_table(&text, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn table_round_trip(forces in prop::collection::vec(0.0f64..100.0, 1..60), step in 1e-5f64..1e-2) {
            let depth: Vec<f64> = (0..forces.len()).map(|i| i as f64 * step).collect();
            let curve = ForceDepthCurve::new(depth, forces, IntrusionProtocol::default(), Provenance::LegEstimate).unwrap();
            let back = from_table(&to_table(&curve), CurveMetadata::from(&curve)).unwrap();
            prop_assert_eq!(back, curve);
        }
    }

    #[test]
    fn rejects_wrong_columns() {
        let meta = CurveMetadata {
            protocol: IntrusionProtocol::default(),
            provenance: Provenance::Truth,
            column_ref: None,
            valid: true,
        };
        assert!(from_table("h,f\n0,0\n", meta).is_err());
    }

    #[test]
    fn file_round_trip_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let mut curve = ForceDepthCurve::from_pairs(
            &[(0.0, 0.0), (0.001, 0.5), (0.002, 1.25)],
            IntrusionProtocol::default(),
            Provenance::LegEstimate,
        )
        .unwrap();
        curve.column_ref = Some("x=0.25".into());
        write_curve(&curve, &path).unwrap();
        assert!(sidecar_path(&path).exists());
        assert_eq!(read_curve(&path).unwrap(), curve);
    }
}
