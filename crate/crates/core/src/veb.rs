//! van Emde Boas dictionary over the keys `1..=U`.
//!
//! Universes of at most 64 keys are a single word with bit-scan queries. A
//! larger universe of `2^b` keys is split into `2^hi` clusters of `2^lo`
//! keys, where `lo` is the largest `6 * 2^k` below `b`; this keeps every
//! leaf a full word, so the footprint stays within a small constant of
//! `U / 64` words. The minimum of a node is kept outside its clusters, so
//! every operation makes a single non-trivial recursive call.
//!
//! Internally keys are 0-based; the public API is 1-based.

use crate::error::{Error, Result};

const LEAF_BITS: u32 = 6;
const NONE: u64 = u64::MAX;

#[derive(Debug, Clone)]
enum Veb {
    Leaf(u64),
    Node(Box<Node>),
}

#[derive(Debug, Clone)]
struct Node {
    lo_bits: u32,
    min: u64,
    max: u64,
    summary: Veb,
    clusters: Box<[Veb]>,
}

fn split_bits(bits: u32) -> (u32, u32) {
    let mut lo = LEAF_BITS;
    while lo * 2 < bits {
        lo *= 2;
    }
    (bits - lo, lo)
}

impl Veb {
    fn new(bits: u32) -> Veb {
        if bits <= LEAF_BITS {
            return Veb::Leaf(0);
        }
        let (hi, lo) = split_bits(bits);
        let clusters = (0..1u64 << hi).map(|_| Veb::new(lo)).collect::<Vec<_>>().into_boxed_slice();
        Veb::Node(Box::new(Node { lo_bits: lo, min: NONE, max: NONE, summary: Veb::new(hi), clusters }))
    }

    fn footprint(&self) -> usize {
        match self {
            Veb::Leaf(_) => 1,
            Veb::Node(node) => 3 + node.summary.footprint() + node.clusters.iter().map(Veb::footprint).sum::<usize>(),
        }
    }

    fn min(&self) -> Option<u64> {
        match self {
            Veb::Leaf(w) => (*w != 0).then(|| u64::from(w.trailing_zeros())),
            Veb::Node(node) => (node.min != NONE).then_some(node.min),
        }
    }

    fn max(&self) -> Option<u64> {
        match self {
            Veb::Leaf(w) => (*w != 0).then(|| u64::from(63 - w.leading_zeros())),
            Veb::Node(node) => (node.max != NONE).then_some(node.max),
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            Veb::Leaf(w) => *w == 0,
            Veb::Node(node) => node.min == NONE,
        }
    }

    fn contains(&self, x: u64) -> bool {
        match self {
            Veb::Leaf(w) => (w >> x) & 1 == 1,
            Veb::Node(node) => {
                if x == node.min || x == node.max {
                    return true;
                }
                if node.min == NONE {
                    return false;
                }
                let (h, l) = node.split(x);
                node.clusters[h].contains(l)
            }
        }
    }

    fn insert(&mut self, x: u64) {
        match self {
            Veb::Leaf(w) => *w |= 1 << x,
            Veb::Node(node) => node.insert(x),
        }
    }

    /// Removes `x`, which must be present.
    fn remove_present(&mut self, x: u64) {
        match self {
            Veb::Leaf(w) => *w &= !(1 << x),
            Veb::Node(node) => node.remove_present(x),
        }
    }

    /// Smallest key strictly greater than `x`.
    fn successor(&self, x: u64) -> Option<u64> {
        match self {
            Veb::Leaf(w) => {
                if x >= 63 {
                    return None;
                }
                let above = w & !((2u64 << x) - 1);
                (above != 0).then(|| u64::from(above.trailing_zeros()))
            }
            Veb::Node(node) => node.successor(x),
        }
    }

    /// Largest key strictly smaller than `x`.
    fn predecessor(&self, x: u64) -> Option<u64> {
        match self {
            Veb::Leaf(w) => {
                let below = if x >= 64 { *w } else { w & ((1u64 << x) - 1) };
                (below != 0).then(|| u64::from(63 - below.leading_zeros()))
            }
            Veb::Node(node) => node.predecessor(x),
        }
    }
}

impl Node {
    #[inline]
    fn split(&self, x: u64) -> (usize, u64) {
        ((x >> self.lo_bits) as usize, x & ((1u64 << self.lo_bits) - 1))
    }

    #[inline]
    fn join(&self, h: usize, l: u64) -> u64 {
        ((h as u64) << self.lo_bits) | l
    }

    fn insert(&mut self, mut x: u64) {
        if self.min == NONE {
            self.min = x;
            self.max = x;
            return;
        }
        if x == self.min {
            return;
        }
        if x < self.min {
            std::mem::swap(&mut x, &mut self.min);
        }
        let (h, l) = self.split(x);
        if self.clusters[h].is_empty() {
            // Constant-time insert into an empty cluster; the summary gets
            // the only real recursive call.
            self.summary.insert(h as u64);
            self.clusters[h].insert(l);
        } else {
            self.clusters[h].insert(l);
        }
        if x > self.max {
            self.max = x;
        }
    }

    fn remove_present(&mut self, mut x: u64) {
        if self.min == self.max {
            self.min = NONE;
            self.max = NONE;
            return;
        }
        if x == self.min {
            // Promote the smallest clustered key to min, then remove it
            // from its cluster.
            let h = self.summary.min().expect("non-singleton node has clustered keys") as usize;
            x = self.join(h, self.clusters[h].min().expect("summary points at non-empty cluster"));
            self.min = x;
        }
        let (h, l) = self.split(x);
        self.clusters[h].remove_present(l);
        if self.clusters[h].is_empty() {
            self.summary.remove_present(h as u64);
            if x == self.max {
                self.max = match self.summary.max() {
                    None => self.min,
                    Some(hm) => {
                        let hm = hm as usize;
                        self.join(hm, self.clusters[hm].max().expect("non-empty cluster"))
                    }
                };
            }
        } else if x == self.max {
            self.max = self.join(h, self.clusters[h].max().expect("non-empty cluster"));
        }
    }

    fn successor(&self, x: u64) -> Option<u64> {
        if self.min == NONE {
            return None;
        }
        if x < self.min {
            return Some(self.min);
        }
        let (h, l) = self.split(x);
        match self.clusters[h].max() {
            Some(m) if l < m => Some(self.join(h, self.clusters[h].successor(l)?)),
            _ => {
                let next = self.summary.successor(h as u64)? as usize;
                Some(self.join(next, self.clusters[next].min()?))
            }
        }
    }

    fn predecessor(&self, x: u64) -> Option<u64> {
        if self.max == NONE {
            return None;
        }
        if x > self.max {
            return Some(self.max);
        }
        let (h, l) = self.split(x);
        match self.clusters[h].min() {
            Some(m) if l > m => Some(self.join(h, self.clusters[h].predecessor(l)?)),
            _ => match self.summary.predecessor(h as u64) {
                Some(prev) => {
                    let prev = prev as usize;
                    Some(self.join(prev, self.clusters[prev].max()?))
                }
                None => (x > self.min).then_some(self.min),
            },
        }
    }
}

/// Predecessor dictionary over `{1, ..., U}` with `O(log log U)` worst-case
/// operations and `O(U)` space.
#[derive(Debug, Clone)]
pub struct VebDictionary {
    universe: u64,
    root: Veb,
}

impl VebDictionary {
    /// # Panics
    /// If `universe` is zero.
    pub fn new(universe: u64) -> Self {
        assert!(universe >= 1, "universe must hold at least one key");
        let bits = 64 - (universe - 1).leading_zeros();
        VebDictionary { universe, root: Veb::new(bits.max(1)) }
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    fn check(&self, x: u64) -> Result<u64> {
        if x == 0 || x > self.universe {
            Err(Error::KeyOutOfRange { key: x, universe: self.universe })
        } else {
            Ok(x - 1)
        }
    }

    /// Idempotent.
    pub fn insert(&mut self, x: u64) -> Result<()> {
        let k = self.check(x)?;
        self.root.insert(k);
        Ok(())
    }

    /// No-op when `x` is absent.
    pub fn delete(&mut self, x: u64) -> Result<()> {
        let k = self.check(x)?;
        if self.root.contains(k) {
            self.root.remove_present(k);
        }
        Ok(())
    }

    pub fn contains(&self, x: u64) -> Result<bool> {
        let k = self.check(x)?;
        Ok(self.root.contains(k))
    }

    /// Smallest key strictly greater than `x`; `x = 0` yields the minimum.
    pub fn successor(&self, x: u64) -> Option<u64> {
        if x == 0 {
            return self.min();
        }
        if x >= self.universe {
            return None;
        }
        self.root.successor(x - 1).map(|k| k + 1)
    }

    /// Largest key strictly smaller than `x`; `x = U + 1` yields the maximum.
    pub fn predecessor(&self, x: u64) -> Option<u64> {
        if x <= 1 {
            return None;
        }
        if x > self.universe {
            return self.max();
        }
        self.root.predecessor(x - 1).map(|k| k + 1)
    }

    pub fn min(&self) -> Option<u64> {
        self.root.min().map(|k| k + 1)
    }

    pub fn max(&self) -> Option<u64> {
        self.root.max().map(|k| k + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_empty()
    }

    /// Number of machine words allocated for the structure.
    pub fn footprint_words(&self) -> usize {
        self.root.footprint()
    }

    /// All keys in increasing order. Linear in the number of keys times the
    /// successor cost; for tests and debugging.
    pub fn keys(&self) -> Vec<u64> {
        let mut out = Vec::new();
        let mut cur = self.min();
        while let Some(k) = cur {
            out.push(k);
            cur = self.successor(k);
        }
        out
    }
}
