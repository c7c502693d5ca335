//! The rebuild pipeline: fold pending flips into the cached slabs, compute
//! the canonical decomposition of the result, and build its locator.
//!
//! Every stage is resumable under a [`Meter`], so the same code serves the
//! synchronous rebuild of the amortized engine and the budgeted background
//! rebuild of the worst-case engine.

use std::sync::Arc;

use crate::decompose::{DecomposeJob, DecomposeScratch};
use crate::dynmatrix::PendingMap;
use crate::error::Result;
use crate::geom::Slab;
use crate::pointloc::{LocatorBuild, PointLocator};
use crate::work::{Grouping, Meter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Extract,
    Decompose,
    LocatorBuild,
    Replay,
    Done,
}

#[derive(Debug, Clone, Copy, Default)]
struct Zero {
    slab: u32,
    row: u32,
    col: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ExtractStage {
    Scan,
    SortCol,
    SortRow,
    SortSlab,
    Split,
    Done,
}

/// Turns the cached slabs and the pending map into a slab list of the
/// current matrix. 0-updates cut their slab into the rows above, pieces of
/// the update row, and the rest below; uncovered 1-updates become unit slabs.
#[derive(Debug, Clone)]
pub struct ExtractJob {
    n: u32,
    stage: ExtractStage,
    idx: usize,
    zeros: Vec<Zero>,
    sort: Grouping<u32>,
    order: Vec<u32>,
    slab: usize,
    next_row: u32,
    row: Option<(u32, u32)>,
    out: Vec<Slab>,
}

impl ExtractJob {
    pub fn new(n: u32) -> Self {
        ExtractJob {
            n,
            stage: ExtractStage::Scan,
            idx: 0,
            zeros: Vec::new(),
            sort: Grouping::new(0, 0),
            order: Vec::new(),
            slab: 0,
            next_row: 0,
            row: None,
            out: Vec::new(),
        }
    }

    pub fn is_done(&self) -> bool {
        self.stage == ExtractStage::Done
    }

    fn emit(&mut self, s: Slab, meter: &mut Meter) {
        self.out.push(s);
        meter.charge(1);
    }

    pub fn step(&mut self, loc: &PointLocator, pending: &PendingMap, meter: &mut Meter) -> Result<bool> {
        const ITEM: u64 = 3;
        let range = self.n as usize + 2;
        loop {
            match self.stage {
                ExtractStage::Scan => {
                    if !meter.affords(ITEM) {
                        return Ok(false);
                    }
                    let Some((&p, &bit)) = pending.get_index(self.idx) else {
                        self.stage = ExtractStage::SortCol;
                        self.sort = Grouping::new(range, self.zeros.len());
                        continue;
                    };
                    self.idx += 1;
                    meter.charge(2);
                    match (loc.locate_id(p), bit) {
                        (Some(slab), false) => self.zeros.push(Zero { slab, row: p.row, col: p.col }),
                        (None, true) => self.emit(Slab::new(p.row, p.row, p.col, p.col), meter),
                        _ => {}
                    }
                }
                ExtractStage::SortCol => {
                    let zeros = &self.zeros;
                    if !self.sort.step(meter, |i| (zeros[i].col as usize, i as u32)) {
                        return Ok(false);
                    }
                    self.order = std::mem::replace(&mut self.sort, Grouping::new(range, self.zeros.len())).into_parts().1;
                    self.stage = ExtractStage::SortRow;
                }
                ExtractStage::SortRow => {
                    let (zeros, order) = (&self.zeros, &self.order);
                    if !self.sort.step(meter, |i| (zeros[order[i] as usize].row as usize, order[i])) {
                        return Ok(false);
                    }
                    self.order = std::mem::replace(&mut self.sort, Grouping::new(loc.len() + 1, self.zeros.len()))
                        .into_parts()
                        .1;
                    self.stage = ExtractStage::SortSlab;
                }
                ExtractStage::SortSlab => {
                    let (zeros, order) = (&self.zeros, &self.order);
                    if !self.sort.step(meter, |i| (zeros[order[i] as usize].slab as usize, order[i])) {
                        return Ok(false);
                    }
                    self.order = std::mem::replace(&mut self.sort, Grouping::new(0, 0)).into_parts().1;
                    self.idx = 0;
                    self.slab = 0;
                    self.next_row = loc.slabs().first().map_or(0, |s| s.row_lo);
                    self.stage = ExtractStage::Split;
                }
                ExtractStage::Split => {
                    if !meter.affords(ITEM) {
                        return Ok(false);
                    }
                    self.split_item(loc.slabs(), meter);
                }
                ExtractStage::Done => return Ok(true),
            }
        }
    }

    fn zero_at(&self, i: usize) -> Option<Zero> {
        self.order.get(i).map(|&z| self.zeros[z as usize])
    }

    fn split_item(&mut self, slabs: &[Slab], meter: &mut Meter) {
        let Some(&p) = slabs.get(self.slab) else {
            self.stage = ExtractStage::Done;
            return;
        };
        meter.charge(1);
        match self.row {
            None => match self.zero_at(self.idx) {
                Some(z) if z.slab as usize == self.slab => {
                    if self.next_row < z.row {
                        self.emit(Slab::new(self.next_row, z.row - 1, p.col_lo, p.col_hi), meter);
                    }
                    self.row = Some((z.row, p.col_lo));
                }
                _ => {
                    if self.next_row <= p.row_hi {
                        self.emit(Slab::new(self.next_row, p.row_hi, p.col_lo, p.col_hi), meter);
                    }
                    self.slab += 1;
                    self.next_row = slabs.get(self.slab).map_or(0, |s| s.row_lo);
                }
            },
            Some((row, next_col)) => {
                let z = self.zero_at(self.idx).expect("row batch has a pending zero");
                if next_col < z.col {
                    self.emit(Slab::new(row, row, next_col, z.col - 1), meter);
                }
                self.idx += 1;
                let next_col = z.col + 1;
                match self.zero_at(self.idx) {
                    Some(y) if y.slab == z.slab && y.row == row => self.row = Some((row, next_col)),
                    _ => {
                        if next_col <= p.col_hi {
                            self.emit(Slab::new(row, row, next_col, p.col_hi), meter);
                        }
                        self.next_row = row + 1;
                        self.row = None;
                    }
                }
            }
        }
    }

    /// The extracted slab list, once done.
    pub fn output(&self) -> &[Slab] {
        &self.out
    }

    pub fn into_output(self) -> Vec<Slab> {
        self.out
    }
}

#[derive(Debug, Clone)]
enum Stage {
    Extract(ExtractJob),
    Decompose(DecomposeJob),
    Locator(LocatorBuild),
    Done(Option<PointLocator>),
}

/// Extract, decompose and locator build, chained.
#[derive(Debug, Clone)]
pub struct RebuildPipeline {
    n: u32,
    stage: Stage,
}

impl RebuildPipeline {
    pub fn new(n: u32) -> Self {
        RebuildPipeline { n, stage: Stage::Extract(ExtractJob::new(n)) }
    }

    pub fn phase(&self) -> Phase {
        match self.stage {
            Stage::Extract(_) => Phase::Extract,
            Stage::Decompose(_) => Phase::Decompose,
            Stage::Locator(_) => Phase::LocatorBuild,
            Stage::Done(_) => Phase::Done,
        }
    }

    /// Advances within the meter's budget over the snapshot `(loc, pending)`,
    /// which must not change between calls. Returns `true` once finished.
    pub fn step(
        &mut self,
        loc: &PointLocator,
        pending: &PendingMap,
        scratch: &mut DecomposeScratch,
        meter: &mut Meter,
    ) -> Result<bool> {
        loop {
            match &mut self.stage {
                Stage::Extract(job) => {
                    if !job.step(loc, pending, meter)? {
                        return Ok(false);
                    }
                    let k = std::mem::replace(job, ExtractJob::new(self.n)).into_output();
                    self.stage = Stage::Decompose(DecomposeJob::new(self.n, k.into()));
                }
                Stage::Decompose(job) => {
                    if !job.step(scratch, meter)? {
                        return Ok(false);
                    }
                    let r = job.take_output();
                    self.stage = Stage::Locator(LocatorBuild::new(self.n, Arc::from(r)));
                }
                Stage::Locator(job) => {
                    if !job.step(meter)? {
                        return Ok(false);
                    }
                    let job = std::mem::replace(job, LocatorBuild::new(0, Arc::from(Vec::new())));
                    self.stage = Stage::Done(job.finish());
                }
                Stage::Done(_) => return Ok(true),
            }
        }
    }

    /// The built locator, once finished.
    pub fn take_result(&mut self) -> Option<PointLocator> {
        match &mut self.stage {
            Stage::Done(loc) => loc.take(),
            _ => None,
        }
    }
}

/// Upper bound on the units a pipeline spends on a snapshot with `n` columns,
/// `p` cached slabs and `q` pending flips.
pub fn work_bound(n: u64, p: u64, q: u64) -> u64 {
    let k = p + 3 * q;
    let r = 3 * k;
    let h = (1.45 * ((r + 2) as f64).log2()).ceil() as u64 + 1;
    9 * n + 3 * p + 14 * q + 54 * k + r * (10 * h + 19) + 32
}

/// Estimated units for the same snapshot, within a small factor of the
/// measured spend; `work_bound` is far looser once flips are pending.
pub fn work_estimate(n: u64, p: u64, q: u64) -> u64 {
    let m = p + 2 * q;
    let log = u64::from(64 - (m + 1).leading_zeros());
    9 * n + m * (4 * log + 16)
}

/// Runs the extraction alone; the slab list a rebuild would decompose.
pub fn extract_input(loc: &PointLocator, pending: &PendingMap) -> Result<Vec<Slab>> {
    let mut job = ExtractJob::new(loc.n());
    job.step(loc, pending, &mut Meter::unlimited())?;
    Ok(job.into_output())
}
