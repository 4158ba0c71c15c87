//! Artifact emission: CSV convergence tables, JSON-lines norm histories,
//! metadata sidecars, and Matrix Market exports.

use crate::convergence::{ConvergenceTable, TableMetadata};
use crate::error::Result;
use crate::linalg::DenseMatrix;
use crate::timestepping::Trajectory;
use std::io::Write;

/// Scientific notation with six significant digits.
pub fn format_sci(x: f64) -> String {
    format!("{x:.5e}")
}

fn opt(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format_sci(v),
        Some(_) => "inf".to_string(),
        None => String::new(),
    }
}

/// CSV with the fixed header
/// `h,err_l2,order_l2,err_h1,order_h1,err_u,order_u`; undefined fields
/// stay empty.
pub fn write_table_csv<W: Write>(table: &ConvergenceTable, w: &mut W) -> Result<()> {
    writeln!(w, "h,err_l2,order_l2,err_h1,order_h1,err_u,order_u")?;
    for row in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            format_sci(row.h),
            format_sci(row.err_l2),
            opt(row.order_l2),
            format_sci(row.err_h1),
            opt(row.order_h1),
            opt(row.err_u),
            opt(row.order_u),
        )?;
    }
    Ok(())
}

/// Plain-text rendering for the terminal.
pub fn format_table(table: &ConvergenceTable) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "# {} ({}) at T = {}\n",
        table.metadata.example, table.metadata.variant, table.metadata.t_eval
    ));
    s.push_str(&format!(
        "{:>12} {:>13} {:>9} {:>13} {:>9} {:>13} {:>9}\n",
        "h", "err_l2", "order", "err_h1", "order", "err_u", "order"
    ));
    for row in &table.rows {
        s.push_str(&format!(
            "{:>12} {:>13} {:>9} {:>13} {:>9} {:>13} {:>9}\n",
            format_sci(row.h),
            format_sci(row.err_l2),
            row.order_l2.map_or(String::new(), |o| format!("{o:.4}")),
            format_sci(row.err_h1),
            row.order_h1.map_or(String::new(), |o| format!("{o:.4}")),
            row.err_u.map_or(String::new(), format_sci),
            row.order_u.map_or(String::new(), |o| format!("{o:.4}")),
        ));
    }
    s
}

#[derive(serde::Serialize)]
struct NormRecord {
    t: f64,
    l2: f64,
    h1: f64,
    control_l2: f64,
}

/// JSON-lines norm history: one record per stored time level with fields
/// `t`, `l2`, `h1`, `control_l2`.
pub fn write_trajectory_jsonl<W: Write>(traj: &Trajectory, w: &mut W) -> Result<()> {
    for i in 0..traj.times.len() {
        let record = NormRecord {
            t: traj.times[i],
            l2: traj.l2_norms[i],
            h1: traj.h1_norms[i],
            control_l2: traj.control_l2[i],
        };
        let line = serde_json::to_string(&record)
            .map_err(|e| crate::error::Error::Config(format!("json encode: {e}")))?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Metadata sidecar as pretty JSON.
pub fn write_metadata_json<W: Write>(meta: &TableMetadata, w: &mut W) -> Result<()> {
    let text = serde_json::to_string_pretty(meta)
        .map_err(|e| crate::error::Error::Config(format!("json encode: {e}")))?;
    writeln!(w, "{text}")?;
    Ok(())
}

/// Matrix Market coordinate export of a dense matrix (zeros skipped).
pub fn write_dense_matrix_market<W: Write>(m: &DenseMatrix, w: &mut W) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    let nnz = m.data().iter().filter(|v| **v != 0.0).count();
    writeln!(w, "{} {} {}", m.n_rows(), m.n_cols(), nnz)?;
    for r in 0..m.n_rows() {
        for c in 0..m.n_cols() {
            let v = m.get(r, c);
            if v != 0.0 {
                writeln!(w, "{} {} {:.16e}", r + 1, c + 1, v)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::ConvergenceRow;

    fn sample_table() -> ConvergenceTable {
        ConvergenceTable {
            rows: vec![
                ConvergenceRow {
                    h: 0.25,
                    err_l2: 8.368279e-2,
                    order_l2: None,
                    err_h1: 6.648702e-1,
                    order_h1: None,
                    err_u: Some(1.408594),
                    order_u: None,
                },
                ConvergenceRow {
                    h: 0.125,
                    err_l2: 2.145333e-2,
                    order_l2: Some(1.963728),
                    err_h1: 2.646716e-1,
                    order_h1: Some(1.328869),
                    err_u: Some(2.798470e-1),
                    order_u: Some(2.331545),
                },
            ],
            metadata: TableMetadata {
                example: "ex1".into(),
                variant: "stabilized".into(),
                t_eval: 0.1,
                dt_rule: "h_over_2".into(),
                omega: 24.0,
                levels: vec![2, 3, 4],
                quad_degree: 6,
            },
        }
    }

    #[test]
    fn csv_header_and_fields() {
        let mut buf = Vec::new();
        write_table_csv(&sample_table(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "h,err_l2,order_l2,err_h1,order_h1,err_u,order_u"
        );
        let first = lines.next().unwrap();
        // undefined orders are empty fields
        assert!(first.starts_with("2.50000e-1,8.36828e-2,,"), "{first}");
        let second = lines.next().unwrap();
        assert!(second.contains("1.96373e0"), "{second}");
    }

    #[test]
    fn jsonl_records() {
        let traj = Trajectory {
            times: vec![0.0, 0.05],
            states: vec![],
            controls: vec![],
            l2_norms: vec![0.5, 0.4],
            h1_norms: vec![1.5, 1.2],
            control_l2: vec![0.0, 0.1],
            newton_iterations: vec![],
            newton_residuals: vec![],
        };
        let mut buf = Vec::new();
        write_trajectory_jsonl(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let v: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(v["l2"], 0.4);
        assert_eq!(v["control_l2"], 0.1);
    }

    #[test]
    fn matrix_market_dense() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.5, 2.0]]);
        let mut buf = Vec::new();
        write_dense_matrix_market(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n2 2 3\n"));
    }
}
