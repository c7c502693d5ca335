//! Worst-case dynamic matrix.
//!
//! Updates are grouped into epochs of `L` updates. The active generation is
//! a pair of amortized matrices sharing one locator: a live copy that takes
//! every update and a frozen copy fixed at the start of the current cycle.
//! During an even epoch a successor is built from the frozen copy, `B` work
//! units per update. During the following odd epoch the successor replays
//! the updates logged since the freeze, two per update, into both of its
//! copies. At the end of the odd epoch the successor takes over.

use std::sync::Arc;

use crate::decompose::DecomposeScratch;
use crate::dynmatrix::{AmortizedMatrix, Threshold};
use crate::error::{Error, Result};
use crate::geom::{Cell, SlabDecomposition};
use crate::pointloc::PointLocator;
use crate::rebuild::{work_estimate, Phase, RebuildPipeline};
use crate::work::{Meter, MAX_ITEM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WorstCaseConfig {
    /// Epoch length; `Threshold::Never` is rejected.
    pub epoch: Threshold,
    /// Fixed per-update budget instead of the one derived from the snapshot.
    pub budget: Option<u64>,
    pub hash_seed: Option<u64>,
    /// Compare the frozen copy's checksum at freeze time and at build end.
    pub check_snapshots: bool,
    /// Keep the work units of every update.
    pub record_work: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WorstCaseStats {
    pub updates: u64,
    pub handoffs: u64,
    /// Builds not finished by the end of their epoch.
    pub violations: u64,
    pub snapshot_mismatches: u64,
    pub max_work: u64,
    pub last_work: u64,
}

/// Budgeted rebuild of one frozen snapshot.
#[derive(Debug)]
pub struct RebuildStateMachine {
    source: Arc<AmortizedMatrix>,
    pipeline: RebuildPipeline,
    budget: u64,
    spent: u64,
}

impl RebuildStateMachine {
    pub fn new(source: Arc<AmortizedMatrix>, budget: u64) -> Self {
        let pipeline = RebuildPipeline::new(source.n());
        RebuildStateMachine { source, pipeline, budget, spent: 0 }
    }

    pub fn phase(&self) -> Phase {
        self.pipeline.phase()
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Total units spent so far.
    pub fn spent(&self) -> u64 {
        self.spent
    }

    /// Runs at most `budget` units; returns the units spent.
    pub fn step(&mut self, budget: Option<u64>, scratch: &mut DecomposeScratch) -> Result<u64> {
        let mut meter = budget.map_or_else(Meter::unlimited, Meter::with_budget);
        let src = &self.source;
        self.pipeline.step(src.locator(), src.pending(), scratch, &mut meter)?;
        self.spent += meter.spent();
        Ok(meter.spent())
    }

    fn take_result(&mut self) -> Option<PointLocator> {
        self.pipeline.take_result()
    }
}

#[derive(Debug, Clone)]
struct Generation {
    live: AmortizedMatrix,
    frozen: Arc<AmortizedMatrix>,
}

#[derive(Debug)]
enum Successor {
    Idle,
    Building(RebuildStateMachine),
    Replaying { live: AmortizedMatrix, frozen: AmortizedMatrix, cursor: usize },
}

#[derive(Debug)]
pub struct WorstCaseMatrix {
    n: u32,
    epoch_len: u64,
    budget: Option<u64>,
    seed: u64,
    check: bool,
    active: Generation,
    successor: Successor,
    log: Vec<Cell>,
    frozen_sum: Option<u64>,
    scratch: DecomposeScratch,
    stats: WorstCaseStats,
    work: Option<Vec<u64>>,
}

impl WorstCaseMatrix {
    pub fn new(n: u32, k: &SlabDecomposition, config: WorstCaseConfig) -> Result<Self> {
        let epoch_len = config
            .epoch
            .resolve(n)
            .ok_or_else(|| Error::InvalidConfig("epoch length must be finite".into()))?;
        if config.budget == Some(0) {
            return Err(Error::InvalidConfig("budget must be positive".into()));
        }
        let base = AmortizedMatrix::new(n, k, crate::dynmatrix::AmortizedConfig {
            threshold: Threshold::Never,
            hash_seed: config.hash_seed,
        })?;
        let seed = base.hash_seed();
        let frozen = Arc::new(AmortizedMatrix::from_locator(base.locator().clone(), None, seed));
        let mut m = WorstCaseMatrix {
            n,
            epoch_len,
            budget: config.budget,
            seed,
            check: config.check_snapshots,
            active: Generation { live: base, frozen },
            successor: Successor::Idle,
            log: Vec::new(),
            frozen_sum: None,
            scratch: DecomposeScratch::new(n),
            stats: WorstCaseStats::default(),
            work: config.record_work.then(Vec::new),
        };
        m.freeze();
        Ok(m)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn epoch_len(&self) -> u64 {
        self.epoch_len
    }

    pub fn hash_seed(&self) -> u64 {
        self.seed
    }

    pub fn stats(&self) -> &WorstCaseStats {
        &self.stats
    }

    /// Per-update work units, when recording was requested.
    pub fn work_log(&self) -> Option<&[u64]> {
        self.work.as_deref()
    }

    /// Index of the epoch the next update falls into.
    pub fn epoch(&self) -> u64 {
        self.stats.updates / self.epoch_len
    }

    /// Where the successor stands: `None` before the first update of a
    /// construction epoch.
    pub fn phase(&self) -> Option<Phase> {
        match &self.successor {
            Successor::Idle => None,
            Successor::Building(m) => Some(m.phase()),
            Successor::Replaying { cursor, .. } if *cursor == self.log.len() => Some(Phase::Done),
            Successor::Replaying { .. } => Some(Phase::Replay),
        }
    }

    /// Updates since the current frozen copy was fixed.
    pub fn log_len(&self) -> usize {
        self.log.len()
    }

    /// Replay position of the successor, when it is replaying.
    pub fn replay_cursor(&self) -> Option<usize> {
        match &self.successor {
            Successor::Replaying { cursor, .. } => Some(*cursor),
            _ => None,
        }
    }

    pub fn active(&self) -> &AmortizedMatrix {
        &self.active.live
    }

    pub fn frozen(&self) -> &AmortizedMatrix {
        &self.active.frozen
    }

    pub fn query(&self, p: Cell) -> Result<bool> {
        self.active.live.query(p)
    }

    pub fn update(&mut self, p: Cell) -> Result<()> {
        let p = p.check(self.n)?;
        let building = self.epoch() % 2 == 0;
        let mut work = self.active.live.flip(p) + 1;
        self.log.push(p);
        if building {
            work += self.build_step()?;
        } else {
            work += self.replay(2);
        }
        self.stats.updates += 1;
        if self.stats.updates % self.epoch_len == 0 {
            work += if building { self.end_build()? } else { self.handoff() };
        }
        self.stats.last_work = work;
        self.stats.max_work = self.stats.max_work.max(work);
        if let Some(w) = &mut self.work {
            w.push(work);
        }
        Ok(())
    }

    fn budget_for(&self, src: &AmortizedMatrix) -> u64 {
        self.budget.unwrap_or_else(|| {
            let w = work_estimate(u64::from(self.n), src.slabs().len() as u64, src.pending().len() as u64);
            (2 * w).div_ceil(self.epoch_len).max(MAX_ITEM)
        })
    }

    fn build_step(&mut self) -> Result<u64> {
        if matches!(self.successor, Successor::Idle) {
            let budget = self.budget_for(&self.active.frozen);
            self.successor = Successor::Building(RebuildStateMachine::new(self.active.frozen.clone(), budget));
        }
        match &mut self.successor {
            Successor::Building(m) if m.phase() != Phase::Done => {
                let b = m.budget();
                m.step(Some(b), &mut self.scratch)
            }
            _ => Ok(0),
        }
    }

    /// Closes a construction epoch; returns the units of any synchronous
    /// completion.
    fn end_build(&mut self) -> Result<u64> {
        let Successor::Building(mut m) = std::mem::replace(&mut self.successor, Successor::Idle) else {
            return Err(Error::Internal("construction epoch ended without a build".into()));
        };
        let mut work = 0;
        if m.phase() != Phase::Done {
            self.stats.violations += 1;
            work = m.step(None, &mut self.scratch)?;
        }
        if let Some(sum) = self.frozen_sum {
            if m.source.checksum() != sum {
                self.stats.snapshot_mismatches += 1;
            }
        }
        let loc = Arc::new(m.take_result().ok_or_else(|| Error::Internal("finished build has no result".into()))?);
        self.successor = Successor::Replaying {
            live: AmortizedMatrix::from_locator(loc.clone(), None, self.seed),
            frozen: AmortizedMatrix::from_locator(loc, None, self.seed),
            cursor: 0,
        };
        Ok(work)
    }

    /// Applies up to `count` logged updates to both successor copies.
    fn replay(&mut self, count: usize) -> u64 {
        let Successor::Replaying { live, frozen, cursor } = &mut self.successor else {
            return 0;
        };
        let end = (*cursor + count).min(self.log.len());
        let mut work = 0;
        for &p in &self.log[*cursor..end] {
            work += live.flip(p) + frozen.flip(p);
        }
        *cursor = end;
        work
    }

    /// Closes a catch-up epoch; returns the units of any leftover replay.
    fn handoff(&mut self) -> u64 {
        let leftover = match &self.successor {
            Successor::Replaying { cursor, .. } => self.log.len() - cursor,
            _ => return 0,
        };
        let work = self.replay(leftover);
        let Successor::Replaying { live, frozen, .. } = std::mem::replace(&mut self.successor, Successor::Idle) else {
            unreachable!()
        };
        self.active = Generation { live, frozen: Arc::new(frozen) };
        self.log.clear();
        self.stats.handoffs += 1;
        self.freeze();
        work
    }

    fn freeze(&mut self) {
        self.frozen_sum = self.check.then(|| self.active.frozen.checksum());
    }

    /// Brings the structure to a state with an empty log by finishing the
    /// current cycle synchronously.
    pub fn settle(&mut self) -> Result<()> {
        if self.log.is_empty() {
            return Ok(());
        }
        if self.epoch() % 2 == 0 || matches!(self.successor, Successor::Building(_) | Successor::Idle) {
            if matches!(self.successor, Successor::Idle) {
                self.build_step()?;
            }
            if let Successor::Building(m) = &mut self.successor {
                m.step(None, &mut self.scratch)?;
            }
            self.end_build()?;
        }
        self.handoff();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Slab;
    use crate::oracle::{dense_from_slabs, DenseMatrix};
    use crate::rebuild::work_bound;

    fn cfg(epoch: u64) -> WorstCaseConfig {
        WorstCaseConfig {
            epoch: Threshold::At(epoch),
            hash_seed: Some(3),
            check_snapshots: true,
            record_work: true,
            ..Default::default()
        }
    }

    fn query_sample() -> SlabDecomposition {
        SlabDecomposition::new(
            5,
            vec![
                Slab::new(1, 1, 2, 3),
                Slab::new(1, 2, 5, 5),
                Slab::new(3, 3, 2, 4),
                Slab::new(4, 5, 1, 3),
                Slab::new(4, 5, 5, 5),
            ],
        )
    }

    fn assert_matches(w: &WorstCaseMatrix, d: &DenseMatrix) {
        for r in 1..=w.n() {
            for c in 1..=w.n() {
                assert_eq!(w.query(Cell::new(r, c)).unwrap(), d.get(r, c), "cell ({r},{c})");
            }
        }
    }

    #[test]
    fn init_answers() {
        let w = WorstCaseMatrix::new(5, &query_sample(), WorstCaseConfig::default()).unwrap();
        let d = DenseMatrix::from_rows(&["01101", "00001", "01110", "11101", "11101"]).unwrap();
        assert_matches(&w, &d);
        assert_eq!(w.query(Cell::new(6, 1)), Err(Error::CellOutOfRange { row: 6, col: 1, n: 5 }));
        assert!(WorstCaseMatrix::new(5, &query_sample(), WorstCaseConfig { epoch: Threshold::Never, ..cfg(1) }).is_err());
        assert!(WorstCaseMatrix::new(5, &query_sample(), WorstCaseConfig { budget: Some(0), ..cfg(1) }).is_err());
    }

    #[test]
    fn idle_until_updates() {
        let w = WorstCaseMatrix::new(2, &SlabDecomposition::empty(2), cfg(4)).unwrap();
        assert_eq!(w.phase(), None);
        assert_matches(&w, &DenseMatrix::zeros(2));
        assert_eq!(w.stats(), &WorstCaseStats::default());
    }

    #[test]
    fn single_update() {
        let mut w = WorstCaseMatrix::new(4, &SlabDecomposition::empty(4), cfg(8)).unwrap();
        w.update(Cell::new(2, 3)).unwrap();
        assert!(w.query(Cell::new(2, 3)).unwrap());
        assert_eq!(w.stats().handoffs, 0);
        assert_eq!(w.log_len(), 1);
    }

    #[test]
    fn cycles_and_handoffs() {
        let n = 6;
        let l = 5;
        let mut w = WorstCaseMatrix::new(n, &SlabDecomposition::empty(n), cfg(l)).unwrap();
        let mut d = DenseMatrix::zeros(n);
        for i in 0..4 * l as u32 {
            let p = Cell::new(1 + i % n, 1 + (i * 7) % n);
            w.update(p).unwrap();
            d.flip(p.row, p.col);
            assert_matches(&w, &d);
            let u = w.stats().updates;
            if u % (2 * l) == l {
                assert_eq!(w.phase(), Some(Phase::Replay));
                assert_eq!(w.replay_cursor(), Some(0));
            }
            if u % (2 * l) == 0 {
                assert_eq!(w.phase(), None);
                assert_eq!(w.log_len(), 0);
            }
        }
        let s = w.stats();
        assert_eq!(s.handoffs, 2);
        assert_eq!(s.violations, 0);
        assert_eq!(s.snapshot_mismatches, 0);
        assert_eq!(w.work_log().unwrap().len(), 4 * l as usize);
    }

    #[test]
    fn mid_replay_queries() {
        let n = 5;
        let l = 6;
        let mut w = WorstCaseMatrix::new(n, &query_sample(), cfg(l)).unwrap();
        let mut d = dense_from_slabs(n, &query_sample()).unwrap();
        for i in 0..l as u32 + 2 {
            let p = Cell::new(1 + (i * 3) % n, 1 + i % n);
            w.update(p).unwrap();
            d.flip(p.row, p.col);
        }
        assert_eq!(w.phase(), Some(Phase::Replay));
        assert_eq!(w.replay_cursor(), Some(4));
        assert_matches(&w, &d);
        for i in 0..l as u32 - 2 {
            let p = Cell::new(1 + i % n, 1 + (i * 2) % n);
            w.update(p).unwrap();
            d.flip(p.row, p.col);
        }
        assert_eq!(w.stats().handoffs, 1);
        assert_matches(&w, &d);
        assert!(w.active().pending().len() <= 2 * l as usize);
    }

    #[test]
    fn tiny_budget_is_a_violation() {
        let n = 16;
        let k = SlabDecomposition::new(n, (1..=n).map(|i| Slab::new(i, i, 1, i)).collect());
        let mut w = WorstCaseMatrix::new(n, &k, WorstCaseConfig { budget: Some(1), ..cfg(2) }).unwrap();
        let mut d = dense_from_slabs(n, &k).unwrap();
        for i in 1..=8 {
            w.update(Cell::new(i, i)).unwrap();
            d.flip(i, i);
        }
        assert!(w.stats().violations > 0);
        assert_eq!(w.stats().snapshot_mismatches, 0);
        assert_matches(&w, &d);
    }

    #[test]
    fn default_budget_keeps_up() {
        let n = 32;
        let k = SlabDecomposition::new(n, (1..=n).step_by(2).map(|i| Slab::new(i, i + 1, i, n)).collect());
        let mut w = WorstCaseMatrix::new(n, &k, WorstCaseConfig { epoch: Threshold::Default, ..cfg(0) }).unwrap();
        let mut d = dense_from_slabs(n, &k).unwrap();
        let l = w.epoch_len() as u32;
        for i in 0..6 * l {
            let p = Cell::new(1 + (i * 13) % n, 1 + (i * 29 / 3) % n);
            w.update(p).unwrap();
            d.flip(p.row, p.col);
        }
        assert_eq!(w.stats().handoffs, 3);
        assert_eq!(w.stats().violations, 0);
        assert_matches(&w, &d);
    }

    #[test]
    fn machine_respects_budget_and_bound() {
        let n = 20;
        let k = SlabDecomposition::new(n, vec![Slab::new(2, 9, 3, 17), Slab::new(12, 20, 1, 20)]);
        let mut base = AmortizedMatrix::new(n, &k, crate::dynmatrix::AmortizedConfig {
            threshold: Threshold::Never,
            hash_seed: Some(1),
        })
        .unwrap();
        for i in 1..=15 {
            base.update(Cell::new(i, 21 - i)).unwrap();
        }
        let w = work_bound(20, base.slabs().len() as u64, base.pending().len() as u64);
        let src = Arc::new(base);
        let mut m = RebuildStateMachine::new(src.clone(), 7);
        let mut scratch = DecomposeScratch::new(n);
        while m.phase() != Phase::Done {
            assert!(m.step(Some(7), &mut scratch).unwrap() <= 7);
        }
        assert!(m.spent() <= w);
        let loc = m.take_result().unwrap();
        let mut expect = (*src).clone();
        expect.rebuild().unwrap();
        assert_eq!(&loc.slabs()[..], expect.slabs());
    }

    #[test]
    fn settle_empties_log() {
        let mut w = WorstCaseMatrix::new(5, &query_sample(), cfg(4)).unwrap();
        let mut d = dense_from_slabs(5, &query_sample()).unwrap();
        for (i, steps) in [1, 4, 6, 3].into_iter().enumerate() {
            for j in 0..steps {
                let p = Cell::new(1 + (i as u32 + j) % 5, 1 + (2 * j) % 5);
                w.update(p).unwrap();
                d.flip(p.row, p.col);
            }
            w.settle().unwrap();
            assert_eq!(w.log_len(), 0);
            assert_eq!(w.phase(), None);
            assert_matches(&w, &d);
        }
    }
}
