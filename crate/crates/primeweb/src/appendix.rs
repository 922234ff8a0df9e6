//! Printed reference matrices and their comparison with computed rays.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequences::{Filter, FilterKind, Ray};

const PRIME_TABLE: &str = include_str!("../data/appendix_p.txt");
const FAMILY_TABLES: &str = include_str!("../data/printed_matrices.txt");

/// Default value bound for comparisons.
pub const DESK_LIMIT: u64 = 1_000_000_000;
/// Value bound of the deep comparison.
pub const DEEP_LIMIT: u64 = 1_000_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrintedRow {
    pub generator: u64,
    pub values: Vec<u64>,
    /// The printed row continues past the last value.
    pub cut: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrintedMatrix {
    pub family: FilterKind,
    pub rows: Vec<PrintedRow>,
}

/// A printed entry known to be wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Erratum {
    pub family: FilterKind,
    pub generator: u64,
    /// 1-based depth of the entry; 0 flags the whole row.
    pub depth: usize,
    pub printed: u64,
    pub reason: &'static str,
}

pub const KNOWN_ERRATA: &[Erratum] = &[
    Erratum {
        family: FilterKind::Primes,
        generator: 127,
        depth: 0,
        printed: 709,
        reason: "127 is prime, so no row starts there; the values continue row 1",
    },
    Erratum { family: FilterKind::Euler, generator: 1, depth: 3, printed: 1573316, reason: "even; the last digit of 15733163 is missing" },
    Erratum {
        family: FilterKind::SixNPlusOne,
        generator: 4,
        depth: 6,
        printed: 10144807,
        reason: "a digit is missing: 101044807",
    },
];

fn erratum(family: FilterKind, generator: u64, depth: usize) -> Option<&'static Erratum> {
    KNOWN_ERRATA
        .iter()
        .find(|e| e.family == family && e.generator == generator && (e.depth == depth || e.depth == 0))
}

fn parse_rows(text: &str, first_line: usize) -> Result<Vec<PrintedRow>> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = first_line + n;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse { line: line_no, message };
        let (g, rest) = line.split_once(':').ok_or_else(|| err("missing ':'".into()))?;
        let generator = g.trim().parse().map_err(|_| err(format!("bad generator {g:?}")))?;
        let mut values = Vec::new();
        let mut cut = false;
        for tok in rest.split_whitespace() {
            if tok == "..." {
                cut = true;
            } else if cut {
                return Err(err("values after '...'".into()));
            } else {
                values.push(tok.parse().map_err(|_| err(format!("bad value {tok:?}")))?);
            }
        }
        rows.push(PrintedRow { generator, values, cut });
    }
    Ok(rows)
}

/// The printed prime matrix.
pub fn prime_table() -> Result<PrintedMatrix> {
    Ok(PrintedMatrix { family: FilterKind::Primes, rows: parse_rows(PRIME_TABLE, 1)? })
}

/// The printed matrices of the other families, in file order.
pub fn family_tables() -> Result<Vec<PrintedMatrix>> {
    let mut out: Vec<(FilterKind, usize, String)> = Vec::new();
    for (n, line) in FAMILY_TABLES.lines().enumerate() {
        if let Some(tag) = line.trim().strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
            out.push((tag.parse()?, n + 2, String::new()));
        } else if let Some(last) = out.last_mut() {
            last.2.push_str(line);
            last.2.push('\n');
        } else if !line.trim().is_empty() && !line.starts_with('#') {
            return Err(Error::Parse { line: n + 1, message: "values before the first section".into() });
        }
    }
    out.into_iter()
        .map(|(family, first, body)| Ok(PrintedMatrix { family, rows: parse_rows(&body, first)? }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub generator: u64,
    pub depth: usize,
    pub printed: u64,
    pub computed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub family: FilterKind,
    pub value_limit: u64,
    pub matched: usize,
    /// Printed entries above the value limit, not checked.
    pub beyond_limit: usize,
    /// Known errata met during the comparison, with the recomputed value
    /// where one exists.
    pub flagged: Vec<(Erratum, Option<u64>)>,
    pub mismatches: Vec<Mismatch>,
    /// Rows left unchecked when the time budget ran out.
    pub unchecked_rows: Vec<u64>,
}

impl Comparison {
    pub fn exact(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn complete(&self) -> bool {
        self.unchecked_rows.is_empty()
    }
}

enum RowOutcome {
    Flagged(Erratum),
    Unchecked,
    Checked { matched: usize, beyond: usize, flagged: Vec<(Erratum, Option<u64>)>, mismatches: Vec<Mismatch> },
}

fn compare_row(family: FilterKind, row: &PrintedRow, filter: &Filter, value_limit: u64) -> Result<RowOutcome> {
    if let Some(e) = erratum(family, row.generator, 0) {
        return Ok(RowOutcome::Flagged(*e));
    }
    let depth = row.values.iter().take_while(|&&v| v <= value_limit).count();
    let beyond = row.values.len() - depth;
    let (mut matched, mut flagged, mut mismatches) = (0, Vec::new(), Vec::new());
    if depth > 0 {
        let (ray, _) = Ray::extend_within(filter, row.generator, depth, value_limit)?;
        for (k, &printed) in row.values[..depth].iter().enumerate() {
            let computed = ray.elements.get(k).copied();
            match (erratum(family, row.generator, k + 1), computed) {
                (Some(e), c) => flagged.push((*e, c)),
                (None, Some(c)) if c == printed => matched += 1,
                (None, c) => mismatches.push(Mismatch {
                    generator: row.generator,
                    depth: k + 1,
                    printed,
                    computed: c.unwrap_or(0),
                }),
            }
        }
    }
    Ok(RowOutcome::Checked { matched, beyond, flagged, mismatches })
}

/// Checks every printed entry up to `value_limit` against the rays of
/// `filter`. Rows not started within `budget` are reported as unchecked.
pub fn compare(
    printed: &PrintedMatrix,
    filter: &Filter,
    value_limit: u64,
    budget: Option<Duration>,
) -> Result<Comparison> {
    let family = printed.family;
    if filter.kind() != family {
        return Err(Error::Domain(format!("{} table checked against {}", family, filter.kind())));
    }
    let started = Instant::now();
    let outcomes: Vec<RowOutcome> = printed
        .rows
        .par_iter()
        .map(|row| {
            if budget.is_some_and(|b| started.elapsed() > b) {
                return Ok(RowOutcome::Unchecked);
            }
            compare_row(family, row, filter, value_limit)
        })
        .collect::<Result<_>>()?;
    let mut cmp = Comparison {
        family,
        value_limit,
        matched: 0,
        beyond_limit: 0,
        flagged: Vec::new(),
        mismatches: Vec::new(),
        unchecked_rows: Vec::new(),
    };
    for (row, outcome) in printed.rows.iter().zip(outcomes) {
        match outcome {
            RowOutcome::Flagged(e) => cmp.flagged.push((e, None)),
            RowOutcome::Unchecked => cmp.unchecked_rows.push(row.generator),
            RowOutcome::Checked { matched, beyond, flagged, mismatches } => {
                cmp.matched += matched;
                cmp.beyond_limit += beyond;
                cmp.flagged.extend(flagged);
                cmp.mismatches.extend(mismatches);
            }
        }
    }
    Ok(cmp)
}

/// Computed rays over the printed part of the prime matrix: each printed
/// row's generator, as deep as its printed entries up to `value_limit`.
pub fn table_rays(filter: &Filter, value_limit: u64) -> Result<Vec<Ray>> {
    let table = prime_table()?;
    table
        .rows
        .par_iter()
        .filter(|r| erratum(FilterKind::Primes, r.generator, 0).is_none())
        .map(|r| {
            let depth = r.values.iter().take_while(|&&v| v <= value_limit).count();
            Ray::extend_within(filter, r.generator, depth, value_limit).map(|(ray, _)| ray)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::engine::PrimeIndexer;

    #[test]
    fn tables_parse() {
        let p = prime_table().unwrap();
        assert_eq!(p.rows.len(), 120);
        assert_eq!(p.rows[0].values[..6], [2, 3, 5, 11, 31, 127]);
        assert!(p.rows[0].cut);
        let fams: Vec<FilterKind> = family_tables().unwrap().iter().map(|m| m.family).collect();
        assert_eq!(
            fams,
            [
                FilterKind::TwinLower,
                FilterKind::Isolated,
                FilterKind::SixNMinusOne,
                FilterKind::SixNPlusOne,
                FilterKind::Euler,
                FilterKind::SquarePlusOne
            ]
        );
        assert!(matches!(parse_rows("1: 2 x", 1), Err(Error::Parse { line: 1, .. })));
        assert!(parse_rows("1: 2 ... 3", 1).is_err());
    }

    #[test]
    fn family_tables_match_up_to_a_million() {
        let engine = Arc::new(PrimeIndexer::default());
        for m in family_tables().unwrap() {
            let f = Filter::new(m.family, engine.clone());
            let c = compare(&m, &f, 1_000_000, None).unwrap();
            assert!(c.exact(), "{}: {:?}", m.family, c.mismatches);
            assert!(c.matched > 0 && c.complete());
        }
        let p = Filter::new(FilterKind::Primes, engine);
        let c = compare(&prime_table().unwrap(), &p, 1_000_000, Some(Duration::ZERO)).unwrap();
        assert!(!c.complete());
    }

    #[test]
    fn errata_are_flagged_with_their_recomputation() {
        let engine = Arc::new(PrimeIndexer::default());
        let tables = family_tables().unwrap();
        for (family, printed, recomputed) in
            [(FilterKind::Euler, 1573316, 15733163), (FilterKind::SixNPlusOne, 10144807, 101044807)]
        {
            let m = tables.iter().find(|m| m.family == family).unwrap();
            let c = compare(m, &Filter::new(family, engine.clone()), DESK_LIMIT, None).unwrap();
            assert!(c.exact());
            assert_eq!(c.flagged.len(), 1);
            assert_eq!((c.flagged[0].0.printed, c.flagged[0].1), (printed, Some(recomputed)));
        }
    }
}
