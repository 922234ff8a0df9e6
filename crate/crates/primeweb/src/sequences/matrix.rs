use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CountingSet, Ray};
use crate::error::{Error, Result};

/// CSV cell written where a row was cut off by the value limit.
pub const TRUNCATION_MARKER: &str = "...";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixRow {
    /// 1-based row number.
    pub row: u64,
    pub generator: u64,
    pub elements: Vec<u64>,
    /// The row stopped early because the next value exceeds the limit.
    pub truncated: bool,
}

/// Rows of progressions keyed by generator in increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MesmMatrix {
    pub filter: String,
    pub columns: usize,
    pub value_limit: u64,
    pub rows: Vec<MatrixRow>,
}

/// Builds `rows × cols` of the matrix, leaving out entries above `value_limit`.
pub fn build_matrix<S: CountingSet + ?Sized>(set: &S, rows: usize, cols: usize, value_limit: u64) -> Result<MesmMatrix> {
    let generators = (1..=rows as u64).map(|n| set.nth_generator(n)).collect::<Result<Vec<_>>>()?;
    let built: Vec<MatrixRow> = generators
        .par_iter()
        .enumerate()
        .map(|(i, &g)| {
            let (ray, truncated) = Ray::extend_within(set, g, cols, value_limit)?;
            Ok(MatrixRow { row: i as u64 + 1, generator: g, elements: ray.elements, truncated })
        })
        .collect::<Result<_>>()?;
    Ok(MesmMatrix { filter: set.name(), columns: cols, value_limit, rows: built })
}

impl MesmMatrix {
    pub fn row_for(&self, generator: u64) -> Option<&MatrixRow> {
        self.rows.iter().find(|r| r.generator == generator)
    }

    /// One record per row: the generator, then the elements; a truncated row
    /// ends with [`TRUNCATION_MARKER`].
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        let mut header = vec!["generator".to_string()];
        header.extend((1..=self.columns).map(|d| format!("d{d}")));
        w.write_record(&header).map_err(|e| Error::Export(e.to_string()))?;
        for row in &self.rows {
            let mut rec = vec![row.generator.to_string()];
            rec.extend(row.elements.iter().map(u64::to_string));
            if row.truncated {
                rec.push(TRUNCATION_MARKER.to_string());
            }
            w.write_record(&rec).map_err(|e| Error::Export(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Export(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Export(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Entry {
            value: u64,
            generator: u64,
            depth: usize,
        }
        #[derive(Serialize)]
        struct Row {
            row: u64,
            generator: u64,
            truncated: bool,
            entries: Vec<Entry>,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            filter: &'a str,
            columns: usize,
            value_limit: u64,
            rows: Vec<Row>,
        }
        let doc = Doc {
            filter: &self.filter,
            columns: self.columns,
            value_limit: self.value_limit,
            rows: self
                .rows
                .iter()
                .map(|r| Row {
                    row: r.row,
                    generator: r.generator,
                    truncated: r.truncated,
                    entries: r
                        .elements
                        .iter()
                        .enumerate()
                        .map(|(i, &v)| Entry { value: v, generator: r.generator, depth: i + 1 })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Export(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::engine::PrimeIndexer;
    use crate::sequences::{Filter, FilterKind};

    #[test]
    fn first_rows_of_the_prime_matrix() {
        let e = Arc::new(PrimeIndexer::default());
        let p = Filter::new(FilterKind::Primes, e.clone());
        let m = build_matrix(&p, 7, 4, 1_000).unwrap();
        let gens: Vec<u64> = m.rows.iter().map(|r| r.generator).collect();
        assert_eq!(gens, vec![1, 4, 6, 8, 9, 10, 12]);
        assert_eq!(m.rows[0].elements, vec![2, 3, 5, 11]);
        assert_eq!(m.rows[1].elements, vec![7, 17, 59, 277]);
        assert_eq!(m.rows[2].elements, vec![13, 41, 179]);
        assert!(m.rows[2].truncated);
        let csv = m.to_csv().unwrap();
        assert!(csv.starts_with("generator,d1,d2,d3,d4\n1,2,3,5,11\n"));
        assert!(csv.contains("6,13,41,179,...\n"));
        let json: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        assert_eq!(json["rows"][1]["entries"][2]["value"], 59);
        assert_eq!(json["rows"][1]["entries"][2]["depth"], 3);

        let d = Filter::new(FilterKind::SixNMinusOne, e.clone());
        let m = build_matrix(&d, 2, 3, u64::MAX).unwrap();
        assert_eq!(m.rows[1].generator, 2);
        assert_eq!(m.rows[1].elements, vec![11, 83, 953]);
        let d = Filter::new(FilterKind::SixNPlusOne, e);
        let m = build_matrix(&d, 1, 3, u64::MAX).unwrap();
        assert_eq!(m.rows[0].elements, vec![7, 61, 727]);
    }
}
