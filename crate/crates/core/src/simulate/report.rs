//! Per-replicate CSV output.

use std::io::Write;

use super::{CltReport, LlnReport};
use crate::error::Result;
use crate::geometry::BookPoint;

fn spine_header(d: usize) -> impl Iterator<Item = String> {
    (1..=d).map(|i| format!("y{i}"))
}

fn point_fields(p: &BookPoint) -> Vec<String> {
    let mut fields = vec![
        p.leaf_index().unwrap_or(0).to_string(),
        p.height().to_string(),
    ];
    fields.extend(p.spine_coords().iter().map(f64::to_string));
    fields
}

/// Header `replicate,checkpoint,location_class,x0,y1..yd`, one row per
/// replicate and checkpoint. `location_class` is 0 for the spine and `k`
/// for leaf `k`; `x0,y…` are the coordinates of `b_N`.
pub fn write_lln_csv<W: Write>(report: &LlnReport, dim: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["replicate", "checkpoint", "location_class", "x0"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(spine_header(dim));
    w.write_record(&header)?;
    for r in &report.replicates {
        for (n, p) in report.checkpoints.iter().zip(&r.means) {
            let mut row = vec![r.index.to_string(), n.to_string()];
            row.extend(point_fields(p));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Header `replicate,n,location_class,<columns>` with the report's
/// mode-specific statistic columns.
pub fn write_clt_csv<W: Write>(report: &CltReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["replicate", "n", "location_class"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(report.columns.iter().cloned());
    w.write_record(&header)?;
    for r in &report.replicates {
        let mut row = vec![
            r.index.to_string(),
            report.sample_size.to_string(),
            r.location.to_string(),
        ];
        row.extend(r.coords.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Point-set file: header `leaf,x0,y1..yd`, spine points as `leaf = 0`,
/// `x0 = 0`.
pub fn write_points_csv<W: Write>(points: &[BookPoint], dim: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["leaf".to_string(), "x0".to_string()];
    header.extend(spine_header(dim));
    w.write_record(&header)?;
    for p in points {
        w.write_record(point_fields(p))?;
    }
    w.flush()?;
    Ok(())
}
