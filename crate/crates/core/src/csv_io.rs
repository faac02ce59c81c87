//! CSV import: real matrices, group-element point sets and profile tables.
//! Every file has a header row; fields are plain decimal reals.

use nalgebra::DMatrix;
use std::io::Read;

use crate::error::{Error, Result};
use crate::group_geometry::GroupElement;

fn parse_rows<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Input(format!("row {}: '{f}' is not a finite real", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Input("CSV has no data rows".into()));
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(Error::Input("CSV rows have different lengths".into()));
    }
    Ok(rows)
}

/// Square real matrix, one matrix row per CSV row.
pub fn read_matrix<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let rows = parse_rows(reader)?;
    let n = rows.len();
    if rows[0].len() != n {
        return Err(Error::Input(format!("matrix CSV is {n}×{}, expected square", rows[0].len())));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// One group element per row, `n²` entries in row-major order.
pub fn read_points<R: Read>(reader: R, n: usize) -> Result<Vec<GroupElement>> {
    let rows = parse_rows(reader)?;
    if rows[0].len() != n * n {
        return Err(Error::Input(format!("point rows need {} entries, got {}", n * n, rows[0].len())));
    }
    rows.iter().map(|r| GroupElement::from_row_slice(n, r)).collect()
}

/// `(x, φ(x))` pairs.
pub fn read_profile<R: Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let rows = parse_rows(reader)?;
    if rows[0].len() != 2 {
        return Err(Error::Input("profile CSV needs exactly two columns".into()));
    }
    Ok(rows.into_iter().map(|r| (r[0], r[1])).collect())
}

/// Row-major points as CSV with columns `g00, g01, ...`.
pub fn write_points(points: &[GroupElement]) -> Result<String> {
    let n = points.first().map(|g| g.n()).unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = (0..n * n).map(|i| format!("g{}{}", i / n, i % n)).collect();
    w.write_record(&header)?;
    for g in points {
        w.write_record(g.to_row_vec().iter().map(|v| format!("{v:?}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip_and_errors() {
        let m = read_matrix("a,b\n1,2\n3,4\n".as_bytes()).unwrap();
        assert_eq!(m[(1, 0)], 3.0);
        assert!(read_matrix("a,b\n1,2\n".as_bytes()).is_err());
        assert!(matches!(read_matrix("a\nx\n".as_bytes()), Err(Error::Input(_))));
        assert!(read_matrix("a\n".as_bytes()).is_err());
    }

    #[test]
    fn points_round_trip() {
        let pts = vec![GroupElement::diag_exp(&[0.5, -0.5]), GroupElement::identity(2)];
        let text = write_points(&pts).unwrap();
        let back = read_points(text.as_bytes(), 2).unwrap();
        assert_eq!(back[0].matrix(), pts[0].matrix());
        assert!(read_points("a,b,c,d\n2,0,0,2\n".as_bytes(), 2).is_err());
    }
}
