//! Reader and writer for the alist sparse parity-check format.
//!
//! Layout: `N M`, `max_col_deg max_row_deg`, the N column degrees, the M row
//! degrees, then one line per column with its 1-based row indices and one
//! line per row with its 1-based column indices. Index lists are padded with
//! zeros to the maximum degree. alist has no way to express an entry of
//! multiplicity greater than one, so graphs with parallel edges are refused.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::TannerGraph;

/// Serializes `g` as alist text. Index lists are written in increasing order.
pub fn write_alist(g: &TannerGraph) -> Result<String> {
    if let Some((check, var)) = g.first_parallel_pair() {
        return Err(Error::ParallelEdges { check, var });
    }
    let cols: Vec<Vec<usize>> = (0..g.num_vars())
        .map(|v| g.var_neighbors(v).into_iter().map(|(c, _)| c).collect())
        .collect();
    let rows: Vec<Vec<usize>> = (0..g.num_checks())
        .map(|c| g.check_neighbors(c).into_iter().map(|(v, _)| v).collect())
        .collect();
    let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = rows.iter().map(Vec::len).max().unwrap_or(0);

    let mut out = String::new();
    writeln!(out, "{} {}", g.num_vars(), g.num_checks()).unwrap();
    writeln!(out, "{max_col} {max_row}").unwrap();
    out.push_str(&join(cols.iter().map(Vec::len)));
    out.push('\n');
    out.push_str(&join(rows.iter().map(Vec::len)));
    out.push('\n');
    for list in cols
        .iter()
        .map(|l| (l, max_col))
        .chain(rows.iter().map(|l| (l, max_row)))
    {
        let (ids, width) = list;
        let padded = ids
            .iter()
            .map(|&i| i + 1)
            .chain(std::iter::repeat(0))
            .take(width);
        out.push_str(&join(padded));
        out.push('\n');
    }
    Ok(out)
}

fn join(values: impl Iterator<Item = usize>) -> String {
    let parts: Vec<String> = values.map(|v| v.to_string()).collect();
    parts.join(" ")
}

/// Parses alist text into a multiplicity-free Tanner graph.
///
/// Padding zeros are optional. Row lists must agree with column lists.
pub fn read_alist(text: &str) -> Result<TannerGraph> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate();

    let mut next_numbers = |what: &str| -> Result<Vec<usize>> {
        let (idx, line) = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("alist: missing {what}")))?;
        line.split_whitespace()
            .map(|tok| {
                tok.parse::<usize>().map_err(|_| {
                    Error::Parse(format!("alist line {}: bad integer {tok:?}", idx + 1))
                })
            })
            .collect()
    };

    let header = next_numbers("dimensions")?;
    let [n, m] = header[..] else {
        return Err(Error::Parse("alist: first line must be `N M`".into()));
    };
    let maxima = next_numbers("maximum degrees")?;
    let [max_col, max_row] = maxima[..] else {
        return Err(Error::Parse(
            "alist: second line must hold two maxima".into(),
        ));
    };
    let col_degrees = next_numbers("column degrees")?;
    let row_degrees = next_numbers("row degrees")?;
    if col_degrees.len() != n || row_degrees.len() != m {
        return Err(Error::Parse(format!(
            "alist: expected {n} column and {m} row degrees, found {} and {}",
            col_degrees.len(),
            row_degrees.len()
        )));
    }

    let mut matrix = vec![vec![0i64; n]; m];
    for (v, &deg) in col_degrees.iter().enumerate() {
        let ids = nonzero(next_numbers("column list")?);
        check_list(&ids, deg, max_col, m, "column", v)?;
        for r in ids {
            if matrix[r - 1][v] != 0 {
                return Err(Error::Parse(format!(
                    "alist: column {} lists row {r} twice",
                    v + 1
                )));
            }
            matrix[r - 1][v] = 1;
        }
    }
    for (c, &deg) in row_degrees.iter().enumerate() {
        let ids = nonzero(next_numbers("row list")?);
        check_list(&ids, deg, max_row, n, "row", c)?;
        let mut listed = vec![false; n];
        for &v in &ids {
            listed[v - 1] = true;
        }
        for (v, &flag) in listed.iter().enumerate() {
            if flag != (matrix[c][v] == 1) {
                return Err(Error::Parse(format!(
                    "alist: row {} disagrees with column lists at column {}",
                    c + 1,
                    v + 1
                )));
            }
        }
    }

    if n == 0 || m == 0 {
        return TannerGraph::new(n, m, Vec::new());
    }
    TannerGraph::from_multiplicity_matrix(&matrix)
}

fn nonzero(ids: Vec<usize>) -> Vec<usize> {
    ids.into_iter().filter(|&i| i != 0).collect()
}

fn check_list(
    ids: &[usize],
    degree: usize,
    max_degree: usize,
    bound: usize,
    kind: &str,
    index: usize,
) -> Result<()> {
    if ids.len() != degree || degree > max_degree {
        return Err(Error::Parse(format!(
            "alist: {kind} {} has {} entries, declared degree {degree} (max {max_degree})",
            index + 1,
            ids.len()
        )));
    }
    if let Some(bad) = ids.iter().find(|&&i| i > bound) {
        return Err(Error::Parse(format!(
            "alist: {kind} {} references index {bad} beyond {bound}",
            index + 1
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HAMMING: &str = "7 3\n3 4\n1 1 2 1 2 2 3\n4 4 4\n1 0 0\n2 0 0\n1 2 0\n3 0 0\n1 3 0\n2 3 0\n1 2 3\n1 3 5 7\n2 3 6 7\n4 5 6 7\n";

    #[test]
    fn hamming_round_trip_is_byte_identical() {
        let g = read_alist(HAMMING).unwrap();
        assert_eq!((g.num_vars(), g.num_checks(), g.num_edges()), (7, 3, 12));
        assert_eq!(
            g.to_parity_matrix().to_rows(),
            vec![
                vec![1, 0, 1, 0, 1, 0, 1],
                vec![0, 1, 1, 0, 0, 1, 1],
                vec![0, 0, 0, 1, 1, 1, 1],
            ]
        );
        assert_eq!(write_alist(&g).unwrap(), HAMMING);
    }

    #[test]
    fn unpadded_input_is_accepted() {
        let text = "2 1\n1 2\n1 1\n2\n1\n1\n1 2\n";
        let g = read_alist(text).unwrap();
        assert_eq!(g.num_edges(), 2);
    }

    #[test]
    fn writer_refuses_parallel_edges() {
        let g = TannerGraph::from_multiplicity_matrix(&[[2, 1]]).unwrap();
        assert!(matches!(
            write_alist(&g),
            Err(Error::ParallelEdges { check: 0, var: 0 })
        ));
    }

    #[test]
    fn reader_rejects_inconsistent_files() {
        // row list disagrees with column lists
        let text = "2 1\n1 2\n1 1\n2\n1\n1\n1 0\n";
        assert!(matches!(read_alist(text), Err(Error::Parse(_))));
        // degree mismatch
        let text = "2 1\n1 2\n1 1\n2\n1\n0\n1 2\n";
        assert!(matches!(read_alist(text), Err(Error::Parse(_))));
        // truncated
        assert!(matches!(read_alist("2 1\n1 2\n"), Err(Error::Parse(_))));
        // garbage
        assert!(matches!(read_alist("x y\n"), Err(Error::Parse(_))));
    }
}
