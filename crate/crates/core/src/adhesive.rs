//! Adhesive segment set: a dynamic family of pairwise disjoint, pairwise
//! non-adjacent segments over `[1, n]`.
//!
//! Segment endpoints live in a [`VebDictionary`]; a static role table marks
//! each stored key as the first and/or second endpoint of its segment (a
//! one-point segment `[k, k]` stores `k` once with both roles). Every method
//! issues at most four dictionary calls.

use std::cell::Cell as Counter;

use crate::geom::Segment;
use crate::veb::VebDictionary;

const FIRST: u8 = 1;
const SECOND: u8 = 2;

#[derive(Debug, Clone)]
pub struct AdhesiveSegmentSet {
    n: u32,
    dict: VebDictionary,
    role: Vec<u8>,
    calls: Counter<u64>,
}

impl AdhesiveSegmentSet {
    /// An empty set over `[1, n]`, in `O(n)` time.
    pub fn new(n: u32) -> Self {
        AdhesiveSegmentSet {
            n,
            dict: VebDictionary::new(u64::from(n.max(1))),
            role: vec![0; n as usize + 2],
            calls: Counter::new(0),
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Total number of dictionary calls issued so far.
    pub fn dict_calls(&self) -> u64 {
        self.calls.get()
    }

    pub fn is_empty(&self) -> bool {
        self.dict.is_empty()
    }

    fn tick(&self) {
        self.calls.set(self.calls.get() + 1);
    }

    fn pred(&self, x: u32) -> Option<u32> {
        self.tick();
        self.dict.predecessor(u64::from(x)).map(|k| k as u32)
    }

    fn succ(&self, x: u32) -> Option<u32> {
        self.tick();
        self.dict.successor(u64::from(x)).map(|k| k as u32)
    }

    fn add_role(&mut self, k: u32, r: u8) {
        if self.role[k as usize] == 0 {
            self.tick();
            self.dict.insert(u64::from(k)).expect("endpoint within universe");
        }
        self.role[k as usize] |= r;
    }

    fn drop_role(&mut self, k: u32, r: u8) {
        let slot = &mut self.role[k as usize];
        *slot &= !r;
        if *slot == 0 {
            self.tick();
            self.dict.delete(u64::from(k)).expect("endpoint within universe");
        }
    }

    /// The stored segment with the largest first endpoint `<= x`.
    fn segment_starting_at_or_before(&self, x: u32) -> Option<Segment> {
        let p = self.pred(x + 1)?;
        let r = self.role[p as usize];
        if r & FIRST != 0 {
            let end = if r & SECOND != 0 { p } else { self.succ(p)? };
            Some(Segment::new(p, end))
        } else {
            let start = self.pred(p)?;
            Some(Segment::new(start, p))
        }
    }

    /// Segment whose second endpoint is exactly `k`, if any.
    fn segment_ending_at(&self, k: u32) -> Option<Segment> {
        let r = self.role[k as usize];
        if r & SECOND == 0 {
            return None;
        }
        let start = if r & FIRST != 0 { k } else { self.pred(k)? };
        Some(Segment::new(start, k))
    }

    /// Segment whose first endpoint is exactly `k`, if any.
    fn segment_starting_at(&self, k: u32) -> Option<Segment> {
        let r = self.role[k as usize];
        if r & FIRST == 0 {
            return None;
        }
        let end = if r & SECOND != 0 { k } else { self.succ(k)? };
        Some(Segment::new(k, end))
    }

    /// The stored segment containing `q`, if any.
    pub fn containing(&self, q: Segment) -> Option<Segment> {
        self.segment_starting_at_or_before(q.lo).filter(|s| s.hi >= q.hi)
    }

    /// Stored segments adjacent to `q`, in increasing order.
    pub fn adjacent(&self, q: Segment) -> Vec<Segment> {
        let mut out = Vec::with_capacity(2);
        if q.lo > 1 {
            out.extend(self.segment_ending_at(q.lo - 1));
        }
        if q.hi < self.n {
            out.extend(self.segment_starting_at(q.hi + 1));
        }
        out
    }

    /// Whether `q` intersects no stored segment.
    pub fn disjoint(&self, q: Segment) -> bool {
        match self.segment_starting_at_or_before(q.hi) {
            None => true,
            Some(s) => s.hi < q.lo,
        }
    }

    /// Adds `q`, coalescing it with adjacent segments. Does nothing when `q`
    /// intersects a stored segment.
    pub fn merge(&mut self, q: Segment) {
        if !self.disjoint(q) {
            return;
        }
        let left = q.lo > 1 && self.role[q.lo as usize - 1] & SECOND != 0;
        let right = q.hi < self.n && self.role[q.hi as usize + 1] & FIRST != 0;
        if left {
            self.drop_role(q.lo - 1, SECOND);
        } else {
            self.add_role(q.lo, FIRST);
        }
        if right {
            self.drop_role(q.hi + 1, FIRST);
        } else {
            self.add_role(q.hi, SECOND);
        }
    }

    /// Removes `q` from the stored segment containing it, keeping the
    /// non-empty remainders. Does nothing when no stored segment contains `q`.
    pub fn split(&mut self, q: Segment) {
        let Some(s) = self.containing(q) else {
            return;
        };
        if s.lo < q.lo {
            self.add_role(q.lo - 1, SECOND);
        } else {
            self.drop_role(s.lo, FIRST);
        }
        if q.hi < s.hi {
            self.add_role(q.hi + 1, FIRST);
        } else {
            self.drop_role(s.hi, SECOND);
        }
    }

    /// All stored segments in increasing order; linear scan for tests.
    pub fn segments(&self) -> Vec<Segment> {
        let keys = self.dict.keys();
        let mut out = Vec::new();
        let mut open = None;
        for k in keys {
            let k = k as u32;
            let r = self.role[k as usize];
            if r & FIRST != 0 {
                open = Some(k);
            }
            if r & SECOND != 0 {
                out.push(Segment::new(open.take().expect("second endpoint follows a first"), k));
            }
        }
        out
    }

    /// Checks that roles alternate first/second in key order and that the
    /// stored segments are disjoint and non-adjacent.
    pub fn check_invariants(&self) -> bool {
        let mut open = false;
        let mut last_end: Option<u32> = None;
        for k in self.dict.keys() {
            let k = k as u32;
            let r = self.role[k as usize];
            if r == 0 {
                return false;
            }
            if r & FIRST != 0 {
                if open {
                    return false;
                }
                if let Some(e) = last_end {
                    if k <= e + 1 {
                        return false;
                    }
                }
                open = true;
            }
            if r & SECOND != 0 {
                if !open {
                    return false;
                }
                open = false;
                last_end = Some(k);
            }
        }
        !open && self.role.iter().filter(|&&r| r != 0).count() == self.dict.keys().len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(lo: u32, hi: u32) -> Segment {
        Segment::new(lo, hi)
    }

    fn set(n: u32, segs: &[(u32, u32)]) -> AdhesiveSegmentSet {
        let mut s = AdhesiveSegmentSet::new(n);
        for &(lo, hi) in segs {
            s.merge(seg(lo, hi));
        }
        assert_eq!(s.segments(), segs.iter().map(|&(a, b)| seg(a, b)).collect::<Vec<_>>());
        s
    }

    #[test]
    fn containing_examples() {
        let s = set(12, &[(2, 4), (7, 9)]);
        assert_eq!(s.containing(seg(3, 4)), Some(seg(2, 4)));
        assert_eq!(s.containing(seg(4, 7)), None);
        let s = set(12, &[(2, 4)]);
        assert_eq!(s.containing(seg(2, 4)), Some(seg(2, 4)));
    }

    #[test]
    fn adjacent_examples() {
        let s = set(12, &[(2, 4), (7, 9)]);
        assert_eq!(s.adjacent(seg(5, 6)), vec![seg(2, 4), seg(7, 9)]);
        let s = set(12, &[(2, 4)]);
        assert_eq!(s.adjacent(seg(6, 6)), vec![]);
        assert_eq!(s.adjacent(seg(5, 9)), vec![seg(2, 4)]);
    }

    #[test]
    fn disjoint_examples() {
        let s = set(12, &[(2, 4)]);
        assert!(s.disjoint(seg(5, 6)));
        assert!(!s.disjoint(seg(4, 6)));
        assert!(AdhesiveSegmentSet::new(12).disjoint(seg(1, 12)));
    }

    #[test]
    fn merge_examples() {
        let mut s = set(12, &[(2, 4), (7, 9)]);
        s.merge(seg(5, 6));
        assert_eq!(s.segments(), vec![seg(2, 9)]);

        let mut s = AdhesiveSegmentSet::new(12);
        s.merge(seg(3, 5));
        assert_eq!(s.segments(), vec![seg(3, 5)]);

        let mut s = set(12, &[(2, 4)]);
        s.merge(seg(3, 8));
        assert_eq!(s.segments(), vec![seg(2, 4)]);
    }

    #[test]
    fn split_examples() {
        let mut s = set(12, &[(2, 6)]);
        s.split(seg(3, 4));
        assert_eq!(s.segments(), vec![seg(2, 2), seg(5, 6)]);

        let mut s = set(12, &[(2, 6)]);
        s.split(seg(2, 6));
        assert!(s.segments().is_empty());
        assert!(s.is_empty());

        let mut s = set(12, &[(2, 6)]);
        s.split(seg(6, 8));
        assert_eq!(s.segments(), vec![seg(2, 6)]);
    }

    #[test]
    fn one_point_segments() {
        let mut s = set(10, &[(3, 4), (6, 7)]);
        s.merge(seg(5, 5));
        assert_eq!(s.segments(), vec![seg(3, 7)]);
        assert!(s.check_invariants());

        let mut s = set(10, &[(1, 1), (3, 3)]);
        s.merge(seg(2, 2));
        assert_eq!(s.segments(), vec![seg(1, 3)]);
        s.split(seg(2, 2));
        assert_eq!(s.segments(), vec![seg(1, 1), seg(3, 3)]);
        assert_eq!(s.containing(seg(1, 1)), Some(seg(1, 1)));
        assert_eq!(s.containing(seg(3, 3)), Some(seg(3, 3)));
        assert_eq!(s.adjacent(seg(2, 2)), vec![seg(1, 1), seg(3, 3)]);
        s.split(seg(1, 1));
        s.split(seg(3, 3));
        assert!(s.is_empty());
        assert!(s.check_invariants());
    }

    #[test]
    fn universe_edges() {
        let mut s = AdhesiveSegmentSet::new(5);
        s.merge(seg(1, 1));
        s.merge(seg(5, 5));
        assert_eq!(s.containing(seg(5, 5)), Some(seg(5, 5)));
        assert_eq!(s.containing(seg(1, 1)), Some(seg(1, 1)));
        assert_eq!(s.adjacent(seg(1, 4)), vec![seg(5, 5)]);
        assert_eq!(s.adjacent(seg(2, 5)), vec![seg(1, 1)]);
        s.merge(seg(2, 4));
        assert_eq!(s.segments(), vec![seg(1, 5)]);
        assert_eq!(s.containing(seg(1, 5)), Some(seg(1, 5)));
        s.split(seg(1, 5));
        assert!(s.is_empty());

        let mut one = AdhesiveSegmentSet::new(1);
        one.merge(seg(1, 1));
        assert_eq!(one.containing(seg(1, 1)), Some(seg(1, 1)));
        assert!(one.adjacent(seg(1, 1)).is_empty());
    }
}
