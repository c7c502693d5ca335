//! Brute-force references: a dense bit matrix, strips and canonical slabs by
//! direct scan, corner counting, and replay of contraction sequences.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::geom::{Cell, Segment, Slab, SlabDecomposition};

/// Row-major `n x n` bit matrix, 1-based.
#[derive(Clone, PartialEq, Eq)]
pub struct DenseMatrix {
    n: u32,
    stride: usize,
    words: Vec<u64>,
}

impl DenseMatrix {
    pub fn zeros(n: u32) -> Self {
        let stride = (n as usize).div_ceil(64);
        DenseMatrix { n, stride, words: vec![0; stride * n as usize] }
    }

    /// Parses rows of `'0'`/`'1'` characters.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let n = rows.len() as u32;
        let mut m = DenseMatrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref().trim();
            if row.len() != n as usize {
                return Err(Error::Parse { line: i + 1, msg: format!("expected {n} entries, found {}", row.len()) });
            }
            for (j, ch) in row.bytes().enumerate() {
                match ch {
                    b'0' => {}
                    b'1' => m.set(i as u32 + 1, j as u32 + 1, true),
                    _ => return Err(Error::Parse { line: i + 1, msg: format!("unexpected character {:?}", ch as char) }),
                }
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    fn index(&self, row: u32, col: u32) -> (usize, u64) {
        debug_assert!((1..=self.n).contains(&row) && (1..=self.n).contains(&col));
        let c = col as usize - 1;
        ((row as usize - 1) * self.stride + c / 64, 1u64 << (c % 64))
    }

    pub fn get(&self, row: u32, col: u32) -> bool {
        let (w, b) = self.index(row, col);
        self.words[w] & b != 0
    }

    pub fn set(&mut self, row: u32, col: u32, bit: bool) {
        let (w, b) = self.index(row, col);
        if bit {
            self.words[w] |= b;
        } else {
            self.words[w] &= !b;
        }
    }

    pub fn flip(&mut self, row: u32, col: u32) {
        let (w, b) = self.index(row, col);
        self.words[w] ^= b;
    }

    pub fn query(&self, p: Cell) -> Result<bool> {
        let p = p.check(self.n)?;
        Ok(self.get(p.row, p.col))
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn rows(&self) -> Vec<String> {
        (1..=self.n).map(|r| (1..=self.n).map(|c| if self.get(r, c) { '1' } else { '0' }).collect()).collect()
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix({})", self.n)?;
        for r in self.rows() {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// The matrix whose ones are the cells of `k`.
pub fn dense_from_slabs(n: u32, k: &SlabDecomposition) -> Result<DenseMatrix> {
    if k.n != n {
        return Err(Error::SideMismatch { expected: n, found: k.n });
    }
    k.validate()?;
    let mut m = DenseMatrix::zeros(n);
    for s in &k.slabs {
        for r in s.row_lo..=s.row_hi {
            for c in s.col_lo..=s.col_hi {
                m.set(r, c, true);
            }
        }
    }
    Ok(m)
}

/// Maximal runs of ones in column `col`, top to bottom.
pub fn naive_strips(m: &DenseMatrix, col: u32) -> Vec<Segment> {
    let mut out = Vec::new();
    let mut start = None;
    for r in 1..=m.n {
        match (m.get(r, col), start) {
            (true, None) => start = Some(r),
            (false, Some(s)) => {
                out.push(Segment::new(s, r - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Segment::new(s, m.n));
    }
    out
}

/// Canonical slabs: each maximal run of columns sharing an identical strip.
pub fn naive_canonical(m: &DenseMatrix) -> SlabDecomposition {
    let n = m.n;
    let mut out = Vec::new();
    let mut open: Vec<(Segment, u32)> = Vec::new();
    for col in 1..=n + 1 {
        let cur = if col <= n { naive_strips(m, col) } else { Vec::new() };
        let mut next = Vec::with_capacity(cur.len());
        let (mut i, mut j) = (0, 0);
        while i < open.len() || j < cur.len() {
            match (open.get(i), cur.get(j)) {
                (Some(&(s, start)), Some(&t)) if s == t => {
                    next.push((s, start));
                    i += 1;
                    j += 1;
                }
                (Some(&(s, start)), t) if t.map_or(true, |&t| s < t) => {
                    out.push(Slab::new(s.lo, s.hi, start, col - 1));
                    i += 1;
                }
                (_, Some(&t)) => {
                    next.push((t, col));
                    j += 1;
                }
                (_, None) => unreachable!(),
            }
        }
        open = next;
    }
    SlabDecomposition::new(n, out)
}

/// Number of `2 x 2` windows of adjacent cells whose two rows differ and
/// whose two columns differ.
pub fn count_corners(m: &DenseMatrix) -> u64 {
    let mut count = 0;
    for r in 1..m.n {
        for c in 1..m.n {
            let (a, b) = (m.get(r, c), m.get(r, c + 1));
            let (x, y) = (m.get(r + 1, c), m.get(r + 1, c + 1));
            if (a, b) != (x, y) && (a, x) != (b, y) {
                count += 1;
            }
        }
    }
    count
}

/// One contraction step: merge the block at this 1-based position with the
/// next one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Merge {
    Rows(u32),
    Cols(u32),
}

impl fmt::Display for Merge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Merge::Rows(r) => write!(f, "R {r}"),
            Merge::Cols(c) => write!(f, "C {c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ContractionSequence {
    pub n: u32,
    pub steps: Vec<Merge>,
}

impl ContractionSequence {
    pub fn new(n: u32, steps: Vec<Merge>) -> Self {
        ContractionSequence { n, steps }
    }
}

/// Blocks of one dimension as a linked list of leaders (first index of each
/// block).
struct Partition {
    next: Vec<u32>,
    end: Vec<u32>,
    count: u32,
}

const END: u32 = 0;

impl Partition {
    fn discrete(n: u32) -> Self {
        let next = (0..=n).map(|i| if i == 0 || i == n { END } else { i + 1 }).collect();
        Partition { next, end: (0..=n).collect(), count: n }
    }

    fn leaders(&self) -> impl Iterator<Item = u32> + '_ {
        std::iter::successors(if self.count > 0 { Some(1) } else { None }, |&l| {
            Some(self.next[l as usize]).filter(|&x| x != END)
        })
    }

    fn size(&self, leader: u32) -> u64 {
        u64::from(self.end[leader as usize] - leader + 1)
    }

    /// Leader of the block at position `pos` and of its successor.
    fn pair(&self, pos: u32, step: usize) -> Result<(u32, u32)> {
        if pos == 0 || pos >= self.count {
            return Err(Error::BadContraction {
                step,
                msg: format!("block {pos} has no successor among {} blocks", self.count),
            });
        }
        let a = self.leaders().nth(pos as usize - 1).expect("position within count");
        Ok((a, self.next[a as usize]))
    }

    fn merge(&mut self, a: u32, b: u32) {
        self.next[a as usize] = self.next[b as usize];
        self.end[a as usize] = self.end[b as usize];
        self.count -= 1;
    }
}

/// Incremental zone bookkeeping shared by the verifier: ones per zone,
/// indexed by (row leader, column leader), and non-constant zones per block.
struct Zones {
    n: usize,
    ones: Vec<u32>,
    rows: Partition,
    cols: Partition,
    nc_row: Vec<u32>,
    nc_col: Vec<u32>,
}

impl Zones {
    fn new(m: &DenseMatrix) -> Self {
        let n = m.n as usize;
        let mut ones = vec![0; (n + 1) * (n + 1)];
        for r in 1..=m.n {
            for c in 1..=m.n {
                ones[r as usize * (n + 1) + c as usize] = u32::from(m.get(r, c));
            }
        }
        Zones {
            n,
            ones,
            rows: Partition::discrete(m.n),
            cols: Partition::discrete(m.n),
            nc_row: vec![0; n + 1],
            nc_col: vec![0; n + 1],
        }
    }

    fn at(&self, r: u32, c: u32) -> usize {
        r as usize * (self.n + 1) + c as usize
    }

    fn mixed(&self, r: u32, c: u32) -> bool {
        let ones = u64::from(self.ones[self.at(r, c)]);
        ones > 0 && ones < self.rows.size(r) * self.cols.size(c)
    }

    /// Merges row blocks `a`, `b` (or column blocks, when `transposed`) and
    /// returns the largest non-constant count among the blocks it changed.
    fn merge(&mut self, a: u32, b: u32, transposed: bool) -> u32 {
        let others: Vec<u32> = if transposed { self.rows.leaders().collect() } else { self.cols.leaders().collect() };
        let key = |z: &Self, x: u32, o: u32| if transposed { z.at(o, x) } else { z.at(x, o) };
        let mixed = |z: &Self, x: u32, o: u32| if transposed { z.mixed(o, x) } else { z.mixed(x, o) };
        let before: Vec<(bool, bool)> = others.iter().map(|&o| (mixed(self, a, o), mixed(self, b, o))).collect();
        for &o in &others {
            let (ka, kb) = (key(self, a, o), key(self, b, o));
            self.ones[ka] += self.ones[kb];
        }
        if transposed {
            self.cols.merge(a, b);
        } else {
            self.rows.merge(a, b);
        }
        let mut own = 0;
        let mut worst = 0;
        for (&o, &(ma, mb)) in others.iter().zip(&before) {
            let now = mixed(self, a, o);
            own += u32::from(now);
            let cross = if transposed { &mut self.nc_row[o as usize] } else { &mut self.nc_col[o as usize] };
            *cross = *cross + u32::from(now) - u32::from(ma) - u32::from(mb);
            worst = worst.max(*cross);
        }
        let mine = if transposed { &mut self.nc_col } else { &mut self.nc_row };
        mine[a as usize] = own;
        mine[b as usize] = 0;
        worst.max(own)
    }
}

/// Replays `seq` on `m` and returns its width: the largest number of
/// non-constant zones seen in any block at any point.
pub fn verify_contraction_width(m: &DenseMatrix, seq: &ContractionSequence) -> Result<u32> {
    let n = m.n();
    if seq.n != n {
        return Err(Error::SideMismatch { expected: n, found: seq.n });
    }
    let expected = 2 * (n as usize).saturating_sub(1);
    if seq.steps.len() != expected {
        return Err(Error::BadContraction {
            step: seq.steps.len().min(expected) + 1,
            msg: format!("expected {expected} steps, found {}", seq.steps.len()),
        });
    }
    let mut z = Zones::new(m);
    let mut width = 0;
    for (i, step) in seq.steps.iter().enumerate() {
        let w = match *step {
            Merge::Rows(pos) => {
                let (a, b) = z.rows.pair(pos, i + 1)?;
                z.merge(a, b, false)
            }
            Merge::Cols(pos) => {
                let (a, b) = z.cols.pair(pos, i + 1)?;
                z.merge(a, b, true)
            }
        };
        width = width.max(w);
    }
    Ok(width)
}

/// `16/3 (2d + 3)^2 2^(4(2d + 2))`, exactly.
pub fn f_d_constant(d: u32) -> BigRational {
    let d = BigInt::from(d);
    let base: BigInt = &d * 2 + 3;
    let pow = BigInt::from(1) << (8 * (u64::try_from(&d).expect("small d") + 1));
    BigRational::new(BigInt::from(16) * &base * &base * pow, BigInt::from(3))
}
