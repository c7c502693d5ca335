//! Coordinate and rectangle types shared by every structure in the crate.
//!
//! All indices are 1-based and inclusive. A [`Slab`] `(a, b, c, d)` covers
//! rows `a..=b` and columns `c..=d`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub row: u32,
    pub col: u32,
}

impl Cell {
    pub const fn new(row: u32, col: u32) -> Self {
        Cell { row, col }
    }

    pub fn check(self, n: u32) -> Result<Self> {
        if self.row == 0 || self.col == 0 || self.row > n || self.col > n {
            Err(Error::CellOutOfRange { row: self.row, col: self.col, n })
        } else {
            Ok(self)
        }
    }
}

/// Inclusive integer interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segment {
    pub lo: u32,
    pub hi: u32,
}

impl Segment {
    pub const fn new(lo: u32, hi: u32) -> Self {
        debug_assert!(lo <= hi);
        Segment { lo, hi }
    }

    pub fn contains(&self, other: &Segment) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Segment) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn len(&self) -> u32 {
        self.hi - self.lo + 1
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

/// An all-ones rectangle: rows `[row_lo, row_hi]` by columns `[col_lo, col_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slab {
    pub row_lo: u32,
    pub row_hi: u32,
    pub col_lo: u32,
    pub col_hi: u32,
}

impl Slab {
    pub const fn new(row_lo: u32, row_hi: u32, col_lo: u32, col_hi: u32) -> Self {
        Slab { row_lo, row_hi, col_lo, col_hi }
    }

    pub fn rows(&self) -> Segment {
        Segment::new(self.row_lo, self.row_hi)
    }

    pub fn cols(&self) -> Segment {
        Segment::new(self.col_lo, self.col_hi)
    }

    pub fn is_well_formed(&self, n: u32) -> bool {
        1 <= self.row_lo
            && self.row_lo <= self.row_hi
            && self.row_hi <= n
            && 1 <= self.col_lo
            && self.col_lo <= self.col_hi
            && self.col_hi <= n
    }

    pub fn intersects(&self, other: &Slab) -> bool {
        self.rows().intersects(&other.rows()) && self.cols().intersects(&other.cols())
    }

    pub fn area(&self) -> u64 {
        u64::from(self.rows().len()) * u64::from(self.cols().len())
    }

    /// Sort key used for every slab listing the crate writes out.
    pub fn listing_key(&self) -> (u32, u32, u32, u32) {
        (self.row_lo, self.col_lo, self.row_hi, self.col_hi)
    }
}

impl fmt::Display for Slab {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.row_lo, self.row_hi, self.col_lo, self.col_hi)
    }
}

pub fn slab_contains(s: &Slab, p: Cell) -> bool {
    s.row_lo <= p.row && p.row <= s.row_hi && s.col_lo <= p.col && p.col <= s.col_hi
}

/// A list of slabs over an `n x n` matrix. Disjointness is checked by
/// [`SlabDecomposition::validate`], not enforced on construction.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SlabDecomposition {
    pub n: u32,
    pub slabs: Vec<Slab>,
}

impl SlabDecomposition {
    pub fn new(n: u32, slabs: Vec<Slab>) -> Self {
        SlabDecomposition { n, slabs }
    }

    pub fn empty(n: u32) -> Self {
        SlabDecomposition { n, slabs: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.slabs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slabs.is_empty()
    }

    /// Checks ranges and pairwise disjointness, reporting the first
    /// offending slab or pair.
    pub fn validate(&self) -> Result<()> {
        for s in &self.slabs {
            if !s.is_well_formed(self.n) {
                return Err(Error::SlabOutOfRange { slab: *s, n: self.n });
            }
        }
        match find_overlap(&self.slabs) {
            Some((i, j)) => Err(Error::Overlap { first: self.slabs[i], second: self.slabs[j] }),
            None => Ok(()),
        }
    }

    /// The slabs sorted by `(row_lo, col_lo, row_hi, col_hi)`.
    pub fn sorted(&self) -> Vec<Slab> {
        let mut v = self.slabs.clone();
        v.sort_by_key(Slab::listing_key);
        v
    }

    /// Set equality, ignoring order.
    pub fn same_set(&self, other: &SlabDecomposition) -> bool {
        self.n == other.n && self.sorted() == other.sorted()
    }
}

pub fn validate_decomposition(dec: &SlabDecomposition) -> bool {
    dec.validate().is_ok()
}

/// Column sweep over slab boundary events with an ordered map of the row
/// intervals currently crossing the sweep line. Returns the indices of one
/// intersecting pair, if any. `O(K log K)`.
pub fn find_overlap(slabs: &[Slab]) -> Option<(usize, usize)> {
    // (column, kind, index); kind 0 = leave (processed first), 1 = enter.
    let mut events: Vec<(u32, u8, usize)> = Vec::with_capacity(2 * slabs.len());
    for (i, s) in slabs.iter().enumerate() {
        events.push((s.col_lo, 1, i));
        events.push((s.col_hi + 1, 0, i));
    }
    events.sort_unstable();

    let mut active: BTreeMap<u32, usize> = BTreeMap::new();
    for (_, kind, i) in events {
        let s = &slabs[i];
        if kind == 0 {
            active.remove(&s.row_lo);
            continue;
        }
        if let Some((_, &j)) = active.range(..=s.row_hi).next_back() {
            if slabs[j].row_hi >= s.row_lo {
                return Some((j.min(i), j.max(i)));
            }
        }
        active.insert(s.row_lo, i);
    }
    None
}

/// A matrix given by its side length and a slab decomposition of its ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixSpec {
    pub n: u32,
    pub decomposition: SlabDecomposition,
}

impl MatrixSpec {
    pub fn new(decomposition: SlabDecomposition) -> Result<Self> {
        decomposition.validate()?;
        Ok(MatrixSpec { n: decomposition.n, decomposition })
    }
}
