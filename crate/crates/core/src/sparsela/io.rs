//! Plain-text triplet format: a `rows cols nnz` header followed by one
//! `row col value` line per stored entry, 0-based.

use super::{CsrMatrix, SparseError};
use std::fmt::Write as _;

pub fn to_triplet_text(a: &CsrMatrix) -> String {
    let mut out = String::with_capacity(32 * (a.nnz() + 1));
    let _ = writeln!(out, "{} {} {}", a.nrows(), a.ncols(), a.nnz());
    for (i, j, v) in a.triplets() {
        let _ = writeln!(out, "{i} {j} {v:.17e}");
    }
    out
}

pub fn from_triplet_text(text: &str) -> Result<CsrMatrix, SparseError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| SparseError::Parse { line: 1, msg: "missing header".into() })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(SparseError::Parse { line: 1, msg: "header must be `rows cols nnz`".into() });
    }
    let parse_usize = |s: &str, line: usize| {
        s.parse::<usize>().map_err(|e| SparseError::Parse { line, msg: format!("{s:?}: {e}") })
    };
    let (nrows, ncols, nnz) = (parse_usize(fields[0], 1)?, parse_usize(fields[1], 1)?, parse_usize(fields[2], 1)?);
    let mut triplets = Vec::with_capacity(nnz);
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(SparseError::Parse { line: lineno, msg: "expected `row col value`".into() });
        }
        let v = f[2].parse::<f64>().map_err(|e| SparseError::Parse { line: lineno, msg: format!("{e}") })?;
        triplets.push((parse_usize(f[0], lineno)?, parse_usize(f[1], lineno)?, v));
    }
    if triplets.len() != nnz {
        return Err(SparseError::Parse {
            line: 1,
            msg: format!("header declares {nnz} entries, found {}", triplets.len()),
        });
    }
    CsrMatrix::from_triplets(nrows, ncols, &triplets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn triplet_text_round_trips(
            entries in proptest::collection::vec((0usize..12, 0usize..9, -1e3f64..1e3), 0..60)
        ) {
            let a = CsrMatrix::from_triplets(12, 9, &entries).unwrap();
            let b = from_triplet_text(&to_triplet_text(&a)).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn header_and_count_are_checked() {
        assert!(from_triplet_text("").is_err());
        assert!(from_triplet_text("2 2\n").is_err());
        assert!(from_triplet_text("2 2 2\n0 0 1.0\n").is_err());
        let a = from_triplet_text("2 2 1\n1 0 -2.5\n").unwrap();
        assert_eq!(a.get(1, 0), -2.5);
    }
}
