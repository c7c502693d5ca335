//! Amortized dynamic matrix: a static point locator over the canonical
//! decomposition of some past state, plus a hash map of the flips made since.
//!
//! Every entry of the pending map holds the current value of its cell; other
//! cells are one exactly when the locator finds them in a slab. Once the map
//! reaches the threshold, the flips are folded in and the locator is rebuilt.

use std::collections::hash_map::DefaultHasher;
use std::hash::{BuildHasher, Hash, Hasher};
use std::sync::Arc;

use indexmap::IndexMap;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::decompose::{decompose_with, DecomposeScratch};
use crate::error::{Error, Result};
use crate::geom::{Cell, Slab, SlabDecomposition};
use crate::oracle::f_d_constant;
use crate::pointloc::{LocatorBuild, PointLocator};
use crate::rebuild::{extract_input, RebuildPipeline};
use crate::work::Meter;

/// Hasher factory whose output depends on a fixed seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeededState {
    seed: u64,
}

impl SeededState {
    pub fn new(seed: u64) -> Self {
        SeededState { seed }
    }
}

impl BuildHasher for SeededState {
    type Hasher = DefaultHasher;

    fn build_hasher(&self) -> DefaultHasher {
        let mut h = DefaultHasher::new();
        h.write_u64(self.seed);
        h
    }
}

/// Pending flips: cell to current value, in insertion order.
pub type PendingMap = IndexMap<Cell, bool, SeededState>;

/// The constants attached to a twin-width parameter `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwinWidthConstants {
    pub d: u32,
    pub f_d: BigRational,
}

impl TwinWidthConstants {
    pub fn new(d: u32) -> Self {
        TwinWidthConstants { d, f_d: f_d_constant(d) }
    }

    /// Corner bound `f_d (n + 2)`.
    pub fn corner_bound(&self, n: u32) -> BigRational {
        &self.f_d * BigRational::from_integer(BigInt::from(n) + 2)
    }

    /// Canonical decomposition size bound `4 f_d (n + 2) + 4n`.
    pub fn canonical_bound(&self, n: u32) -> BigRational {
        self.corner_bound(n) * BigRational::from_integer(4.into()) + BigRational::from_integer(BigInt::from(n) * 4)
    }

    /// Rebuild threshold `8 f_d (n + 2)`, rounded down and saturated.
    pub fn threshold(&self, n: u32) -> u64 {
        (self.corner_bound(n) * BigRational::from_integer(8.into())).floor().to_integer().to_u64().unwrap_or(u64::MAX)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Threshold {
    /// `max(16, 8n)`.
    #[default]
    Default,
    At(u64),
    /// `8 f_d (n + 2)` for the given `d`.
    Proven(u32),
    Never,
}

impl Threshold {
    /// The pending-map size that triggers a rebuild, if any.
    pub fn resolve(self, n: u32) -> Option<u64> {
        match self {
            Threshold::Default => Some((8 * u64::from(n)).max(16)),
            Threshold::At(t) => Some(t.max(1)),
            Threshold::Proven(d) => Some(TwinWidthConstants::new(d).threshold(n)),
            Threshold::Never => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AmortizedConfig {
    pub threshold: Threshold,
    /// Seed of the pending map's hasher; random when absent.
    pub hash_seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct AmortizedMatrix {
    n: u32,
    locator: Arc<PointLocator>,
    pending: PendingMap,
    threshold: Option<u64>,
    seed: u64,
    scratch: Option<DecomposeScratch>,
    rebuilds: u64,
    last_work: u64,
}

impl AmortizedMatrix {
    /// Builds the structure for the matrix whose ones are exactly `k`.
    pub fn new(n: u32, k: &SlabDecomposition, config: AmortizedConfig) -> Result<Self> {
        if k.n != n {
            return Err(Error::SideMismatch { expected: n, found: k.n });
        }
        let mut scratch = DecomposeScratch::new(n);
        let r = decompose_with(n, k, &mut scratch)?;
        let mut job = LocatorBuild::new(n, r.slabs.into());
        job.step(&mut Meter::unlimited())?;
        let locator = Arc::new(job.finish().expect("unlimited build completes"));
        let seed = config.hash_seed.unwrap_or_else(rand::random);
        let mut m = Self::from_locator(locator, config.threshold.resolve(n), seed);
        m.scratch = Some(scratch);
        Ok(m)
    }

    pub(crate) fn from_locator(locator: Arc<PointLocator>, threshold: Option<u64>, seed: u64) -> Self {
        AmortizedMatrix {
            n: locator.n(),
            locator,
            pending: PendingMap::with_hasher(SeededState::new(seed)),
            threshold,
            seed,
            scratch: None,
            rebuilds: 0,
            last_work: 0,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn threshold(&self) -> Option<u64> {
        self.threshold
    }

    pub fn hash_seed(&self) -> u64 {
        self.seed
    }

    pub fn locator(&self) -> &Arc<PointLocator> {
        &self.locator
    }

    /// The slabs the locator was built on: the canonical decomposition as of
    /// the last rebuild.
    pub fn slabs(&self) -> &[Slab] {
        self.locator.slabs()
    }

    pub fn decomposition(&self) -> SlabDecomposition {
        SlabDecomposition::new(self.n, self.slabs().to_vec())
    }

    pub fn pending(&self) -> &PendingMap {
        &self.pending
    }

    pub fn rebuilds(&self) -> u64 {
        self.rebuilds
    }

    /// Work units of the last update, including any rebuild it triggered.
    pub fn last_work(&self) -> u64 {
        self.last_work
    }

    pub fn query(&self, p: Cell) -> Result<bool> {
        Ok(self.get(p.check(self.n)?))
    }

    pub(crate) fn get(&self, p: Cell) -> bool {
        match self.pending.get(&p) {
            Some(&bit) => bit,
            None => self.locator.locate_id(p).is_some(),
        }
    }

    pub fn update(&mut self, p: Cell) -> Result<()> {
        self.last_work = self.flip(p.check(self.n)?);
        if self.threshold.is_some_and(|t| self.pending.len() as u64 >= t) {
            self.last_work += self.rebuild_counted()?;
        }
        Ok(())
    }

    /// Flips `p` in the pending map without checking the threshold; returns
    /// the units spent.
    pub(crate) fn flip(&mut self, p: Cell) -> u64 {
        if let Some(bit) = self.pending.get_mut(&p) {
            *bit = !*bit;
            return 1;
        }
        let bit = self.locator.locate_id(p).is_none();
        self.pending.insert(p, bit);
        3
    }

    /// Folds the pending flips into a fresh canonical decomposition and locator.
    pub fn rebuild(&mut self) -> Result<()> {
        self.rebuild_counted().map(|_| ())
    }

    fn rebuild_counted(&mut self) -> Result<u64> {
        let mut meter = Meter::unlimited();
        let mut scratch = self.scratch.take().unwrap_or_else(|| DecomposeScratch::new(self.n));
        let mut pipeline = RebuildPipeline::new(self.n);
        let done = pipeline.step(&self.locator, &self.pending, &mut scratch, &mut meter);
        self.scratch = Some(scratch);
        done?;
        self.locator = Arc::new(pipeline.take_result().expect("unlimited rebuild completes"));
        self.pending.clear();
        self.rebuilds += 1;
        Ok(meter.spent())
    }

    /// The slab list a rebuild would decompose right now.
    pub fn rebuild_input(&self) -> Result<SlabDecomposition> {
        Ok(SlabDecomposition::new(self.n, extract_input(&self.locator, &self.pending)?))
    }

    /// Hash of the locator's slab table and the pending map, in order.
    pub fn checksum(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.n.hash(&mut h);
        self.slabs().hash(&mut h);
        for (c, b) in &self.pending {
            (c, b).hash(&mut h);
        }
        h.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::decompose;

    fn cfg(threshold: Threshold) -> AmortizedConfig {
        AmortizedConfig { threshold, hash_seed: Some(7) }
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

    fn flip_sample() -> SlabDecomposition {
        SlabDecomposition::new(
            5,
            vec![
                Slab::new(3, 5, 1, 2),
                Slab::new(3, 4, 3, 3),
                Slab::new(1, 2, 4, 4),
                Slab::new(5, 5, 4, 4),
                Slab::new(4, 5, 5, 5),
            ],
        )
    }

    #[test]
    fn sample_queries() {
        let mut m = AmortizedMatrix::new(5, &query_sample(), cfg(Threshold::Default)).unwrap();
        assert!(m.query(Cell::new(3, 4)).unwrap());
        assert!(!m.query(Cell::new(2, 2)).unwrap());
        m.update(Cell::new(2, 2)).unwrap();
        assert!(m.query(Cell::new(2, 2)).unwrap());
    }

    #[test]
    fn empty_and_involution() {
        let mut m = AmortizedMatrix::new(3, &SlabDecomposition::empty(3), cfg(Threshold::Default)).unwrap();
        for r in 1..=3 {
            for c in 1..=3 {
                assert!(!m.query(Cell::new(r, c)).unwrap());
            }
        }
        m.update(Cell::new(1, 1)).unwrap();
        m.update(Cell::new(1, 1)).unwrap();
        assert!(!m.query(Cell::new(1, 1)).unwrap());
        assert_eq!(m.pending().get(&Cell::new(1, 1)), Some(&false));
        assert!(m.query(Cell::new(4, 1)).is_err());
        assert!(m.update(Cell::new(0, 1)).is_err());
    }

    #[test]
    fn flip_sample_rebuild() {
        let mut m = AmortizedMatrix::new(5, &flip_sample(), cfg(Threshold::Never)).unwrap();
        assert!(m.query(Cell::new(1, 4)).unwrap());
        assert!(m.query(Cell::new(2, 4)).unwrap());
        for p in [Cell::new(1, 2), Cell::new(4, 4), Cell::new(5, 2)] {
            m.update(p).unwrap();
        }
        assert_eq!(m.pending().get(&Cell::new(1, 2)), Some(&true));
        assert_eq!(m.pending().get(&Cell::new(4, 4)), Some(&true));
        assert_eq!(m.pending().get(&Cell::new(5, 2)), Some(&false));
        m.rebuild().unwrap();
        assert!(m.pending().is_empty());
        let expected = SlabDecomposition::new(
            5,
            vec![
                Slab::new(1, 1, 2, 2),
                Slab::new(1, 2, 4, 4),
                Slab::new(3, 5, 1, 1),
                Slab::new(3, 4, 2, 3),
                Slab::new(4, 5, 4, 5),
            ],
        );
        assert!(m.decomposition().same_set(&expected));
        assert!(m.query(Cell::new(1, 2)).unwrap());
        assert!(m.query(Cell::new(4, 4)).unwrap());
        assert!(!m.query(Cell::new(5, 2)).unwrap());
    }

    #[test]
    fn threshold_one_rebuilds_every_flip() {
        let mut m = AmortizedMatrix::new(5, &query_sample(), cfg(Threshold::At(1))).unwrap();
        m.update(Cell::new(2, 2)).unwrap();
        assert!(m.pending().is_empty());
        assert_eq!(m.rebuilds(), 1);
        assert!(m.query(Cell::new(2, 2)).unwrap());
        assert!(m.query(Cell::new(3, 4)).unwrap());
    }

    #[test]
    fn zero_in_full_slab() {
        let k = SlabDecomposition::new(3, vec![Slab::new(1, 3, 1, 3)]);
        let mut m = AmortizedMatrix::new(3, &k, cfg(Threshold::Never)).unwrap();
        m.update(Cell::new(2, 2)).unwrap();
        let input = m.rebuild_input().unwrap();
        let expected = SlabDecomposition::new(
            3,
            vec![Slab::new(1, 1, 1, 3), Slab::new(2, 2, 1, 1), Slab::new(2, 2, 3, 3), Slab::new(3, 3, 1, 3)],
        );
        assert!(input.same_set(&expected));
        m.rebuild().unwrap();
        assert!(m.decomposition().same_set(&decompose(3, &expected).unwrap()));
        assert_eq!(m.slabs().len(), 4);
    }

    #[test]
    fn stale_zero_is_dropped() {
        let mut m = AmortizedMatrix::new(4, &SlabDecomposition::empty(4), cfg(Threshold::Never)).unwrap();
        m.update(Cell::new(2, 3)).unwrap();
        m.update(Cell::new(2, 3)).unwrap();
        assert!(m.rebuild_input().unwrap().is_empty());
    }

    #[test]
    fn thresholds_resolve() {
        assert_eq!(Threshold::Default.resolve(1), Some(16));
        assert_eq!(Threshold::Default.resolve(100), Some(800));
        assert_eq!(Threshold::Never.resolve(5), None);
        assert_eq!(Threshold::Proven(0).resolve(1), Some(8 * 12288 * 3));
        assert!(Threshold::Proven(1).resolve(1).unwrap() > 200_000_000);
    }
}
