//! Text input formats for the command line.
//!
//! Counts: non-negative integers separated by commas or whitespace.
//! Joint counts: one CSV row per table row. Series: one symbol per line.
//! Blank lines and lines starting with `#` are ignored everywhere.

use infoest::info::{CountVector, JointCountMatrix, Simplex};
use infoest::series::SymbolSeries;

use crate::{BenchError, Result};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty())
}

fn bad(line: usize, what: &str, tok: &str) -> BenchError {
    BenchError::Invalid(format!("line {line}: cannot read {tok:?} as {what}"))
}

fn parse_u64s(line: usize, text: &str) -> Result<Vec<u64>> {
    fields(text)
        .map(|t| t.parse::<u64>().map_err(|_| bad(line, "a count", t)))
        .collect()
}

pub fn parse_counts(text: &str) -> Result<CountVector> {
    let mut all = Vec::new();
    for (n, line) in content_lines(text) {
        all.extend(parse_u64s(n, line)?);
    }
    Ok(CountVector::new(all)?)
}

pub fn parse_joint(text: &str) -> Result<JointCountMatrix> {
    let rows = content_lines(text)
        .map(|(n, l)| parse_u64s(n, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(JointCountMatrix::from_rows(&rows)?)
}

/// Probabilities (or unnormalized weights, when `normalize` is set).
pub fn parse_distribution(text: &str, normalize: bool) -> Result<Simplex> {
    let mut all = Vec::new();
    for (n, line) in content_lines(text) {
        for t in fields(line) {
            all.push(t.parse::<f64>().map_err(|_| bad(n, "a number", t))?);
        }
    }
    Ok(if normalize { Simplex::from_unnormalized(all)? } else { Simplex::new(all)? })
}

pub fn parse_series(text: &str, alphabet: usize) -> Result<SymbolSeries> {
    let symbols = content_lines(text)
        .map(|(n, l)| l.parse::<u8>().map_err(|_| bad(n, "a symbol", l)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SymbolSeries::new(symbols, alphabet)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_mixed_separators() {
        let c = parse_counts("# header\n3, 1 0\n\n2\n").unwrap();
        assert_eq!(c.counts(), &[3, 1, 0, 2]);
        assert!(parse_counts("1 -2").is_err());
    }

    #[test]
    fn joint_rows() {
        let j = parse_joint("1,2,3\n4,5,6\n").unwrap();
        assert_eq!((j.rows(), j.cols(), j.get(1, 2)), (2, 3, 6));
        assert!(parse_joint("1,2\n3\n").is_err());
    }

    #[test]
    fn series_symbols() {
        let s = parse_series("0\n3\n1\n", 4).unwrap();
        assert_eq!(s.symbols(), &[0, 3, 1]);
        assert!(parse_series("4\n", 4).is_err());
        assert!(parse_series("x\n", 4).is_err());
    }
}
