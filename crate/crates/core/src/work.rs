//! Work accounting for resumable computations.
//!
//! A unit is one elementary structure operation: a dictionary call, a hash
//! probe, a point-location query, one emitted slab, one tree node copy, or
//! one array cell visited by a counting pass.

/// Upper bound on the units charged by any single indivisible item of the
/// rebuild pipeline.
pub const MAX_ITEM: u64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Meter {
    spent: u64,
    limit: Option<u64>,
}

impl Meter {
    pub fn unlimited() -> Self {
        Meter { spent: 0, limit: None }
    }

    pub fn with_budget(budget: u64) -> Self {
        Meter { spent: 0, limit: Some(budget) }
    }

    pub fn affords(&self, cost: u64) -> bool {
        self.limit.map_or(true, |l| self.spent + cost <= l)
    }

    pub fn charge(&mut self, cost: u64) {
        self.spent += cost;
    }

    pub fn spent(&self) -> u64 {
        self.spent
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Count,
    Prefix,
    Scatter,
    Done,
}

/// Resumable stable counting sort of `len` positions by an integer key in
/// `0..range`, in three passes costing one unit per visited cell.
///
/// After completion group `k` is `values()[offsets()[k]..offsets()[k + 1]]`,
/// in input order.
#[derive(Debug, Clone)]
pub(crate) struct Grouping<T> {
    counts: Vec<u32>,
    out: Vec<T>,
    stage: Stage,
    pos: usize,
    len: usize,
}

impl<T: Copy + Default> Grouping<T> {
    pub fn new(range: usize, len: usize) -> Self {
        Grouping {
            counts: vec![0; range + 1],
            out: vec![T::default(); len],
            stage: Stage::Count,
            pos: 0,
            len,
        }
    }

    /// Advances while the meter affords one unit; returns `true` once done.
    /// `item(pos)` yields the key and the value stored for input position `pos`.
    pub fn step(&mut self, meter: &mut Meter, item: impl Fn(usize) -> (usize, T)) -> bool {
        loop {
            if self.stage == Stage::Done {
                return true;
            }
            if !meter.affords(1) {
                return false;
            }
            match self.stage {
                Stage::Count => {
                    if self.pos == self.len {
                        self.stage = Stage::Prefix;
                        self.pos = 1;
                        continue;
                    }
                    let (k, _) = item(self.pos);
                    self.counts[k] += 1;
                    self.pos += 1;
                }
                Stage::Prefix => {
                    if self.pos == self.counts.len() {
                        self.stage = Stage::Scatter;
                        self.pos = self.len;
                        continue;
                    }
                    self.counts[self.pos] += self.counts[self.pos - 1];
                    self.pos += 1;
                }
                Stage::Scatter => {
                    if self.pos == 0 {
                        self.stage = Stage::Done;
                        continue;
                    }
                    self.pos -= 1;
                    let (k, v) = item(self.pos);
                    self.counts[k] -= 1;
                    self.out[self.counts[k] as usize] = v;
                }
                Stage::Done => unreachable!(),
            }
            meter.charge(1);
        }
    }

    pub fn offsets(&self) -> &[u32] {
        &self.counts
    }

    pub fn values(&self) -> &[T] {
        &self.out
    }

    pub fn group(&self, k: usize) -> &[T] {
        let off = self.offsets();
        &self.values()[off[k] as usize..off[k + 1] as usize]
    }

    pub fn into_parts(self) -> (Vec<u32>, Vec<T>) {
        (self.counts, self.out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meter_limits() {
        let mut m = Meter::with_budget(5);
        assert!(m.affords(5));
        m.charge(3);
        assert!(!m.affords(3));
        assert!(m.affords(2));
        assert!(Meter::unlimited().affords(u64::MAX));
    }

    #[test]
    fn grouping_is_stable_and_resumable() {
        let keys = [3usize, 1, 3, 0, 1, 2, 3, 0];
        let mut g = Grouping::<u32>::new(4, keys.len());
        let mut steps = 0;
        loop {
            let mut m = Meter::with_budget(2);
            if g.step(&mut m, |p| (keys[p], p as u32)) {
                break;
            }
            assert!(m.spent() <= 2);
            steps += 1;
        }
        assert!(steps > 5);
        assert_eq!(g.values(), &[3, 7, 1, 4, 5, 0, 2, 6]);
        assert_eq!(g.group(0), &[3, 7]);
        assert_eq!(g.group(3), &[0, 2, 6]);
        assert_eq!(g.offsets(), &[0, 2, 4, 5, 8]);
    }

    #[test]
    fn empty_grouping() {
        let mut g = Grouping::<u32>::new(3, 0);
        assert!(g.step(&mut Meter::unlimited(), |_| unreachable!()));
        assert!(g.group(2).is_empty());
    }
}
