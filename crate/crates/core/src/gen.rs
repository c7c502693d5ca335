//! Seeded instance generators.
//!
//! Random traces may leave the bounded-width regime; every engine stays
//! correct on arbitrary matrices, only the size bounds need the witness.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{Cell, Slab, SlabDecomposition};
use crate::io::TraceOp;
use crate::oracle::{ContractionSequence, DenseMatrix, Merge};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenMode {
    Slabs { k: usize },
    Width { d: u32, flips: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    pub n: u32,
    pub seed: u64,
    pub mode: GenMode,
}

/// At most `k` disjoint slabs: a random guillotine partition of the matrix
/// into at most `k` rectangles, each kept with probability 1/2.
pub fn gen_disjoint_slabs(n: u32, k: usize, seed: u64) -> SlabDecomposition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if k == 0 || n == 0 {
        return SlabDecomposition::empty(n);
    }
    let mut open = vec![Slab::new(1, n, 1, n)];
    let mut fixed = Vec::new();
    if n == 1 {
        fixed = std::mem::take(&mut open);
    }
    while !open.is_empty() && open.len() + fixed.len() < k {
        let i = rng.gen_range(0..open.len());
        let s = open.swap_remove(i);
        let horizontal = if s.row_lo == s.row_hi {
            false
        } else if s.col_lo == s.col_hi {
            true
        } else {
            rng.gen_bool(0.5)
        };
        let (a, b) = if horizontal {
            let cut = rng.gen_range(s.row_lo..s.row_hi);
            (Slab::new(s.row_lo, cut, s.col_lo, s.col_hi), Slab::new(cut + 1, s.row_hi, s.col_lo, s.col_hi))
        } else {
            let cut = rng.gen_range(s.col_lo..s.col_hi);
            (Slab::new(s.row_lo, s.row_hi, s.col_lo, cut), Slab::new(s.row_lo, s.row_hi, cut + 1, s.col_hi))
        };
        for part in [a, b] {
            if part.area() > 1 {
                open.push(part);
            } else {
                fixed.push(part);
            }
        }
    }
    fixed.extend(open);
    let slabs = fixed.into_iter().filter(|_| rng.gen_bool(0.5)).collect();
    SlabDecomposition::new(n, slabs)
}

/// Uniform random trace; each operation is a query with probability
/// `query_ratio`.
pub fn gen_trace(n: u32, ops: usize, seed: u64, query_ratio: f64) -> Vec<TraceOp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..ops)
        .map(|_| {
            let p = Cell::new(rng.gen_range(1..=n), rng.gen_range(1..=n));
            if rng.gen_bool(query_ratio.clamp(0.0, 1.0)) {
                TraceOp::Query(p)
            } else {
                TraceOp::Update(p)
            }
        })
        .collect()
}

const MIXED: u8 = 2;

/// Fenwick tree over block leaders, for block positions.
struct Ranks(Vec<u32>);

impl Ranks {
    fn new(n: u32) -> Self {
        Ranks(vec![0; n as usize + 1])
    }

    fn add(&mut self, mut i: usize) {
        while i < self.0.len() {
            self.0[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    fn rank(&self, mut i: usize) -> u32 {
        let mut s = 0;
        while i > 0 {
            s += self.0[i];
            i &= i - 1;
        }
        s
    }
}

/// Blocks of one dimension during refinement.
struct Side {
    next: Vec<u32>,
    end: Vec<u32>,
    mixed: Vec<u32>,
    splittable: Vec<u32>,
    ranks: Ranks,
    left: u32,
}

impl Side {
    fn new(n: u32) -> Self {
        let mut ranks = Ranks::new(n);
        ranks.add(1);
        let mut end = vec![0; n as usize + 2];
        end[1] = n;
        Side {
            next: vec![0; n as usize + 2],
            end,
            mixed: vec![0; n as usize + 2],
            splittable: if n > 1 { vec![1] } else { Vec::new() },
            ranks,
            left: n.saturating_sub(1),
        }
    }

    fn leaders(&self) -> Vec<u32> {
        std::iter::successors(Some(1), |&l| Some(self.next[l as usize]).filter(|&x| x != 0)).collect()
    }

    fn size(&self, l: u32) -> u32 {
        self.end[l as usize] - l + 1
    }

    /// Splits a random block at a random point; returns the leaders of the
    /// two halves and the position of the first.
    fn split(&mut self, rng: &mut ChaCha8Rng) -> (u32, u32, u32) {
        let i = rng.gen_range(0..self.splittable.len());
        let a = self.splittable.swap_remove(i);
        let e = self.end[a as usize];
        let cut = rng.gen_range(a..e);
        let b = cut + 1;
        self.next[b as usize] = self.next[a as usize];
        self.next[a as usize] = b;
        self.end[b as usize] = e;
        self.end[a as usize] = cut;
        let pos = self.ranks.rank(a as usize);
        self.ranks.add(b as usize);
        for l in [a, b] {
            if self.size(l) > 1 {
                self.splittable.push(l);
            }
        }
        self.left -= 1;
        (a, b, pos)
    }
}

/// A matrix with a contraction sequence of width at most `d`, using `d`
/// branchings per refinement step.
pub fn gen_bounded_width(n: u32, d: u32, seed: u64) -> (DenseMatrix, ContractionSequence) {
    gen_bounded_width_with(n, d, d, seed)
}

/// Builds the matrix by refining a `1 x 1` block matrix back to single rows
/// and columns. Every zone carries a label: constant 0, constant 1, or mixed.
/// A constant zone passes its label to both halves. A mixed zone either
/// resolves into two distinct constants, stays mixed in one half, or, within
/// the budget of `flips` per step and while every affected block has fewer
/// than `d` mixed zones, stays mixed in both. Mixed zones always contain both
/// values, so the reversed refinement is a contraction sequence whose width
/// is the largest mixed count ever held by a block.
pub fn gen_bounded_width_with(n: u32, d: u32, flips: u32, seed: u64) -> (DenseMatrix, ContractionSequence) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = n as usize + 2;
    let mut label = vec![0u8; w * w];
    let mut sides = [Side::new(n), Side::new(n)];
    if flips > 0 && d > 0 && n > 1 {
        label[w + 1] = MIXED;
        sides[0].mixed[1] = 1;
        sides[1].mixed[1] = 1;
    } else {
        label[w + 1] = rng.gen_range(0..2);
    }
    let mut splits = Vec::with_capacity(2 * n as usize);
    while sides[0].left + sides[1].left > 0 {
        let total = sides[0].left + sides[1].left;
        let dim = usize::from(rng.gen_range(0..total) >= sides[0].left);
        let (a, b, pos) = sides[dim].split(&mut rng);
        splits.push(if dim == 0 { Merge::Rows(pos) } else { Merge::Cols(pos) });
        let (this, other) = if dim == 0 { (0, 1) } else { (1, 0) };
        let at = |x: u32, o: u32| if dim == 0 { x as usize * w + o as usize } else { o as usize * w + x as usize };
        let (size_a, size_b) = (sides[this].size(a), sides[this].size(b));
        let mut budget = flips;
        let (mut ma, mut mb) = (0, 0);
        for o in sides[other].leaders() {
            let parent = label[at(a, o)];
            if parent != MIXED {
                label[at(b, o)] = parent;
                continue;
            }
            let so = sides[other].size(o);
            let (fit_a, fit_b) = (size_a * so > 1, size_b * so > 1);
            let cross = sides[other].mixed[o as usize];
            let both = fit_a && fit_b && budget > 0 && cross < d && ma < d && mb < d && rng.gen_bool(0.5);
            let (la, lb) = if both {
                budget -= 1;
                sides[other].mixed[o as usize] += 1;
                (MIXED, MIXED)
            } else if (fit_a || fit_b) && rng.gen_bool(0.8) {
                let c = rng.gen_range(0..2);
                let keep_a = if fit_a && fit_b { rng.gen_bool(0.5) } else { fit_a };
                if keep_a {
                    (MIXED, c)
                } else {
                    (c, MIXED)
                }
            } else {
                sides[other].mixed[o as usize] -= 1;
                let c = rng.gen_range(0..2);
                (c, 1 - c)
            };
            ma += u32::from(la == MIXED);
            mb += u32::from(lb == MIXED);
            label[at(a, o)] = la;
            label[at(b, o)] = lb;
        }
        sides[this].mixed[a as usize] = ma;
        sides[this].mixed[b as usize] = mb;
    }
    let mut m = DenseMatrix::zeros(n);
    for r in 1..=n {
        for c in 1..=n {
            m.set(r, c, label[r as usize * w + c as usize] == 1);
        }
    }
    splits.reverse();
    (m, ContractionSequence::new(n, splits))
}

/// Shuffles a slab list in place; test helper for order-insensitivity checks.
pub fn shuffle_slabs(dec: &mut SlabDecomposition, seed: u64) {
    dec.slabs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
}
