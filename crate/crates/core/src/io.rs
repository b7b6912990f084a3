//! Reading and writing cost instances.
//!
//! CSV: a first line holding `n`, then `n` rows of `n` comma-separated values.
//! Marginals are uniform.
//!
//! JSON: `{"n": .., "cost": [[..]], "row_marginal": [..], "col_marginal": [..]}`.
//! The marginal keys may be omitted, in which case they are uniform.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cost::CostMatrix;
use crate::error::{Error, Result};

pub fn read_cost_csv<R: Read>(input: R) -> Result<CostMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Parse("empty cost file".into()))??;
    if header.len() != 1 {
        return Err(Error::Parse(format!(
            "first line must hold only n, found {} fields",
            header.len()
        )));
    }
    let n: usize = header[0]
        .parse()
        .map_err(|_| Error::Parse(format!("bad size {:?}", &header[0])))?;
    let mut rows = Vec::with_capacity(n);
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row: Vec<f64> = rec
            .iter()
            .enumerate()
            .map(|(j, f)| {
                f.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad value {f:?} at ({i}, {j})")))
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.len() != n {
        return Err(Error::Parse(format!(
            "expected {n} rows, found {}",
            rows.len()
        )));
    }
    CostMatrix::from_rows(&rows)
}

pub fn write_cost_csv<W: Write>(cost: &CostMatrix, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record([cost.n().to_string()])?;
    for i in 0..cost.n() {
        w.write_record(cost.entries().row(i).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct CostDocument {
    n: usize,
    cost: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    row_marginal: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    col_marginal: Option<Vec<f64>>,
}

pub fn cost_from_json(text: &str) -> Result<CostMatrix> {
    let doc: CostDocument = serde_json::from_str(text)?;
    if doc.cost.len() != doc.n {
        return Err(Error::InvalidInput(format!(
            "n = {} but cost has {} rows",
            doc.n,
            doc.cost.len()
        )));
    }
    let n = doc.n;
    for (i, r) in doc.cost.iter().enumerate() {
        if r.len() != n {
            return Err(Error::InvalidInput(format!(
                "row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
    }
    let entries = DMatrix::from_fn(n, n, |i, j| doc.cost[i][j]);
    let uniform = || vec![1.0 / n.max(1) as f64; n];
    let r = DVector::from_vec(doc.row_marginal.unwrap_or_else(uniform));
    let c = DVector::from_vec(doc.col_marginal.unwrap_or_else(uniform));
    CostMatrix::new(entries, r, c)
}

pub fn cost_to_json(cost: &CostMatrix) -> Result<String> {
    let n = cost.n();
    let doc = CostDocument {
        n,
        cost: (0..n)
            .map(|i| cost.entries().row(i).iter().copied().collect())
            .collect(),
        row_marginal: Some(cost.row_marginal().iter().copied().collect()),
        col_marginal: Some(cost.col_marginal().iter().copied().collect()),
    };
    Ok(serde_json::to_string(&doc)?)
}

/// Loads a cost from a path, choosing the format by extension (`.json`
/// or anything else as CSV).
pub fn load_cost(path: &std::path::Path) -> Result<CostMatrix> {
    let text = std::fs::read_to_string(path)?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        cost_from_json(&text)
    } else {
        read_cost_csv(text.as_bytes())
    }
}

/// Dense matrix as nested rows, for JSON output.
pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let c = CostMatrix::from_rows(&[vec![0.0, 1.5], vec![-2.0, 0.25]]).unwrap();
        let mut buf = Vec::new();
        write_cost_csv(&c, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "2\n0,1.5\n-2,0.25\n"
        );
        assert_eq!(read_cost_csv(buf.as_slice()).unwrap(), c);
    }

    #[test]
    fn csv_errors() {
        assert!(read_cost_csv("2\n0,1\n".as_bytes()).is_err());
        assert!(read_cost_csv("2\n0,x\n1,0\n".as_bytes()).is_err());
        assert!(read_cost_csv("2,2\n0,1\n1,0\n".as_bytes()).is_err());
    }

    #[test]
    fn json_round_trip_and_defaults() {
        let c = CostMatrix::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            DVector::from_vec(vec![0.25, 0.75]),
            DVector::from_vec(vec![0.5, 0.5]),
        )
        .unwrap();
        let text = cost_to_json(&c).unwrap();
        assert_eq!(cost_from_json(&text).unwrap(), c);
        let u = cost_from_json(r#"{"n":2,"cost":[[0,1],[1,0]]}"#).unwrap();
        assert_eq!(u.row_marginal()[0], 0.5);
        assert!(cost_from_json(r#"{"n":3,"cost":[[0,1],[1,0]]}"#).is_err());
    }
}
