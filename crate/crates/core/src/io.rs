//! Plain-text file formats.
//!
//! Slab file: a header `n K`, then `K` lines `a b c d`.
//! Dense file: `n`, then `n` lines of `0`/`1` characters.
//! Trace file: one operation per line, `U i j` or `Q i j`.
//! Witness file: a header `n m`, then `m` lines `R r` or `C c`.
//!
//! Blank lines and lines starting with `#` are ignored everywhere.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geom::{Cell, Slab, SlabDecomposition};
use crate::oracle::{ContractionSequence, DenseMatrix, Merge};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceOp {
    Update(Cell),
    Query(Cell),
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn fields<T: FromStr>(line: usize, s: &str, count: usize) -> Result<Vec<T>> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.len() != count {
        return Err(err(line, format!("expected {count} fields, found {}", parts.len())));
    }
    parts
        .iter()
        .map(|p| p.parse().map_err(|_| err(line, format!("bad number `{p}`"))))
        .collect()
}

fn header<'a>(it: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<(usize, &'a str)> {
    it.next().ok_or_else(|| err(1, "missing header"))
}

pub fn parse_slabs(text: &str) -> Result<SlabDecomposition> {
    let mut it = lines(text);
    let (line, h) = header(&mut it)?;
    let h: Vec<u64> = fields(line, h, 2)?;
    let n = u32::try_from(h[0]).map_err(|_| err(line, "side too large"))?;
    let mut slabs = Vec::new();
    let mut last = line;
    for (line, l) in it {
        let v: Vec<u32> = fields(line, l, 4)?;
        let s = Slab::new(v[0], v[1], v[2], v[3]);
        if !s.is_well_formed(n) {
            return Err(err(line, format!("slab {s} is not inside [1, {n}]^2")));
        }
        slabs.push(s);
        last = line;
    }
    if slabs.len() as u64 != h[1] {
        return Err(err(last, format!("header announces {} slabs, found {}", h[1], slabs.len())));
    }
    Ok(SlabDecomposition::new(n, slabs))
}

/// Writes the slabs in listing order.
pub fn format_slabs(dec: &SlabDecomposition) -> String {
    let mut out = format!("{} {}\n", dec.n, dec.len());
    for s in dec.sorted() {
        let _ = writeln!(out, "{} {} {} {}", s.row_lo, s.row_hi, s.col_lo, s.col_hi);
    }
    out
}

pub fn parse_dense(text: &str) -> Result<DenseMatrix> {
    let mut it = lines(text);
    let (line, h) = header(&mut it)?;
    let n: u32 = fields::<u32>(line, h, 1)?[0];
    let mut m = DenseMatrix::zeros(n);
    let mut r = 0u32;
    let mut last = line;
    for (line, l) in it {
        r += 1;
        if r > n {
            return Err(err(line, format!("more than {n} rows")));
        }
        let row: Vec<char> = l.chars().filter(|c| !c.is_whitespace()).collect();
        if row.len() != n as usize {
            return Err(err(line, format!("expected {n} entries, found {}", row.len())));
        }
        for (j, ch) in row.into_iter().enumerate() {
            match ch {
                '0' => {}
                '1' => m.set(r, j as u32 + 1, true),
                other => return Err(err(line, format!("bad entry `{other}`"))),
            }
        }
        last = line;
    }
    if r != n {
        return Err(err(last, format!("expected {n} rows, found {r}")));
    }
    Ok(m)
}

pub fn format_dense(m: &DenseMatrix) -> String {
    let mut out = format!("{}\n", m.n());
    for row in m.rows() {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

/// Parses a trace; cells are checked against `n`.
pub fn parse_trace(text: &str, n: u32) -> Result<Vec<TraceOp>> {
    lines(text)
        .map(|(line, l)| {
            let mut parts = l.split_whitespace();
            let kind = parts.next().unwrap_or_default();
            let rest: Vec<&str> = parts.collect();
            let v: Vec<u32> = fields(line, &rest.join(" "), 2)?;
            let p = Cell::new(v[0], v[1]).check(n).map_err(|e| err(line, e.to_string()))?;
            match kind {
                "U" | "u" => Ok(TraceOp::Update(p)),
                "Q" | "q" => Ok(TraceOp::Query(p)),
                other => Err(err(line, format!("unknown operation `{other}`"))),
            }
        })
        .collect()
}

pub fn format_trace(ops: &[TraceOp]) -> String {
    let mut out = String::with_capacity(ops.len() * 12);
    for op in ops {
        let (k, p) = match op {
            TraceOp::Update(p) => ('U', p),
            TraceOp::Query(p) => ('Q', p),
        };
        let _ = writeln!(out, "{k} {} {}", p.row, p.col);
    }
    out
}

pub fn parse_witness(text: &str) -> Result<ContractionSequence> {
    let mut it = lines(text);
    let (line, h) = header(&mut it)?;
    let h: Vec<u64> = fields(line, h, 2)?;
    let n = u32::try_from(h[0]).map_err(|_| err(line, "side too large"))?;
    let mut steps = Vec::new();
    let mut last = line;
    for (line, l) in it {
        let mut parts = l.split_whitespace();
        let kind = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        let i: u32 = fields::<u32>(line, &rest.join(" "), 1)?[0];
        steps.push(match kind {
            "R" | "r" => Merge::Rows(i),
            "C" | "c" => Merge::Cols(i),
            other => return Err(err(line, format!("unknown merge `{other}`"))),
        });
        last = line;
    }
    if steps.len() as u64 != h[1] {
        return Err(err(last, format!("header announces {} merges, found {}", h[1], steps.len())));
    }
    Ok(ContractionSequence::new(n, steps))
}

pub fn format_witness(seq: &ContractionSequence) -> String {
    let mut out = format!("{} {}\n", seq.n, seq.steps.len());
    for s in &seq.steps {
        let _ = writeln!(out, "{s}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slab_round_trip() {
        let dec = SlabDecomposition::new(5, vec![Slab::new(4, 5, 1, 3), Slab::new(1, 1, 2, 3)]);
        let text = format_slabs(&dec);
        assert_eq!(text, "5 2\n1 1 2 3\n4 5 1 3\n");
        assert!(parse_slabs(&text).unwrap().same_set(&dec));
        assert!(parse_slabs("# empty\n3 0\n").unwrap().is_empty());
    }

    #[test]
    fn slab_errors() {
        assert_eq!(parse_slabs(""), Err(Error::Parse { line: 1, msg: "missing header".into() }));
        assert!(matches!(parse_slabs("5 1\n1 2 3\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_slabs("5 1\n\n1 6 1 1\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_slabs("5 1\n2 1 1 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_slabs("5 2\n1 1 1 x\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_slabs("5 2\n1 1 1 1\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn dense_round_trip() {
        let m = DenseMatrix::from_rows(&["0001", "1110", "0111", "1111"]).unwrap();
        let text = format_dense(&m);
        assert_eq!(text, "4\n0001\n1110\n0111\n1111\n");
        assert_eq!(parse_dense(&text).unwrap(), m);
        assert_eq!(parse_dense("2\n0 1\n1 0\n").unwrap(), DenseMatrix::from_rows(&["01", "10"]).unwrap());
        assert!(matches!(parse_dense("2\n01\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_dense("2\n01\n12\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_dense("2\n01\n011\n"), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn trace_round_trip() {
        let ops = vec![TraceOp::Update(Cell::new(1, 2)), TraceOp::Query(Cell::new(3, 3))];
        let text = format_trace(&ops);
        assert_eq!(text, "U 1 2\nQ 3 3\n");
        assert_eq!(parse_trace(&text, 3).unwrap(), ops);
        assert!(matches!(parse_trace("U 1 4\n", 3), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_trace("Q 1 1\nX 1 1\n", 3), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_trace("U 1\n", 3), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn witness_round_trip() {
        let seq = ContractionSequence::new(3, vec![Merge::Rows(1), Merge::Cols(2), Merge::Rows(1), Merge::Cols(1)]);
        let text = format_witness(&seq);
        assert_eq!(text, "3 4\nR 1\nC 2\nR 1\nC 1\n");
        assert_eq!(parse_witness(&text).unwrap(), seq);
        assert!(matches!(parse_witness("3 1\nZ 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_witness("3 2\nR 1\n"), Err(Error::Parse { line: 2, .. })));
    }
}
