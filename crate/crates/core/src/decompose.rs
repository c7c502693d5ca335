//! Canonical slab decomposition by three sweeps.
//!
//! Opening and closing row segments are bucketed by column. A left-to-right
//! sweep keeps the strips of the current column in an adhesive segment set
//! and reports the strips that die after each column; the mirrored sweep
//! reports the strips born at each column; a final pass pairs births with
//! deaths into maximal slabs.

use std::sync::Arc;

use crate::adhesive::AdhesiveSegmentSet;
use crate::error::{Error, Result};
use crate::geom::{Segment, Slab, SlabDecomposition};
use crate::work::{Grouping, Meter, MAX_ITEM};

/// Per-column opening and closing segments of a slab list.
#[derive(Debug, Clone)]
pub struct OpenCloseBuckets {
    n: u32,
    open: Grouping<Segment>,
    close: Grouping<Segment>,
}

impl OpenCloseBuckets {
    fn new(n: u32, len: usize) -> Self {
        OpenCloseBuckets {
            n,
            open: Grouping::new(n as usize + 2, len),
            close: Grouping::new(n as usize + 2, len),
        }
    }

    fn step(&mut self, slabs: &[Slab], meter: &mut Meter) -> bool {
        self.open.step(meter, |p| (slabs[p].col_lo as usize, slabs[p].rows()))
            && self.close.step(meter, |p| (slabs[p].col_hi as usize, slabs[p].rows()))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Row segments of slabs whose first column is `col`.
    pub fn opening(&self, col: u32) -> &[Segment] {
        self.open.group(col as usize)
    }

    /// Row segments of slabs whose last column is `col`.
    pub fn closing(&self, col: u32) -> &[Segment] {
        self.close.group(col as usize)
    }
}

/// Strip births and deaths as `(column, segment)` events.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StripDelta {
    /// Births, in non-increasing column order.
    pub born: Vec<(u32, Segment)>,
    /// Deaths, in non-decreasing column order.
    pub died: Vec<(u32, Segment)>,
}

fn at(events: &[(u32, Segment)], col: u32) -> Vec<Segment> {
    let mut v: Vec<Segment> = events.iter().filter(|e| e.0 == col).map(|e| e.1).collect();
    v.sort();
    v
}

impl StripDelta {
    /// Strips present in column `col` but not in `col - 1`, sorted.
    pub fn a(&self, col: u32) -> Vec<Segment> {
        at(&self.born, col)
    }

    /// Strips present in column `col` but not in `col + 1`, sorted.
    pub fn b(&self, col: u32) -> Vec<Segment> {
        at(&self.died, col)
    }
}

/// Reusable working memory: the adhesive set, the duplicate-filter marks and
/// the slab start table. All three are clean between decompositions.
#[derive(Debug, Clone)]
pub struct DecomposeScratch {
    n: u32,
    set: AdhesiveSegmentSet,
    mark: Vec<bool>,
    slab_start: Vec<u32>,
}

impl DecomposeScratch {
    pub fn new(n: u32) -> Self {
        DecomposeScratch {
            n,
            set: AdhesiveSegmentSet::new(n),
            mark: vec![false; n as usize + 2],
            slab_start: vec![0; n as usize + 2],
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn is_clean(&self) -> bool {
        self.set.is_empty() && !self.mark.iter().any(|&m| m) && self.slab_start.iter().all(|&s| s == 0)
    }

    pub fn dict_calls(&self) -> u64 {
        self.set.dict_calls()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SweepStage {
    Init,
    Close,
    Open,
    Split,
    Merge,
    Check,
    Advance,
    Done,
}

/// Resumable one-directional sweep. The mirrored sweep reads the buckets with
/// columns reflected and roles exchanged, and reports original columns.
#[derive(Debug, Clone)]
struct Sweep {
    reflected: bool,
    col: u32,
    stage: SweepStage,
    idx: usize,
    list: Vec<Segment>,
    events: Vec<(u32, Segment)>,
}

impl Sweep {
    fn new(reflected: bool) -> Self {
        Sweep { reflected, col: 1, stage: SweepStage::Init, idx: 0, list: Vec::new(), events: Vec::new() }
    }

    fn opening<'a>(&self, b: &'a OpenCloseBuckets, col: u32) -> &'a [Segment] {
        if self.reflected {
            b.closing(b.n + 1 - col)
        } else {
            b.opening(col)
        }
    }

    fn closing<'a>(&self, b: &'a OpenCloseBuckets, col: u32) -> &'a [Segment] {
        if self.reflected {
            b.opening(b.n + 1 - col)
        } else {
            b.closing(col)
        }
    }

    fn next_opening<'a>(&self, b: &'a OpenCloseBuckets) -> &'a [Segment] {
        if self.col < b.n {
            self.opening(b, self.col + 1)
        } else {
            &[]
        }
    }

    fn push_candidate(&mut self, scratch: &mut DecomposeScratch, s: Segment) {
        let m = &mut scratch.mark[s.lo as usize];
        if !*m {
            *m = true;
            self.list.push(s);
        }
    }

    fn step(&mut self, b: &OpenCloseBuckets, scratch: &mut DecomposeScratch, meter: &mut Meter) -> Result<bool> {
        while self.stage != SweepStage::Done {
            if !meter.affords(MAX_ITEM) {
                return Ok(false);
            }
            let before = scratch.set.dict_calls();
            let segs = match self.stage {
                SweepStage::Init => self.opening(b, 1),
                SweepStage::Close | SweepStage::Split => self.closing(b, self.col),
                SweepStage::Open | SweepStage::Merge => self.next_opening(b),
                _ => &[],
            };
            let item = segs.get(self.idx).copied();
            match (self.stage, item) {
                (SweepStage::Init, Some(s)) => scratch.set.merge(s),
                (SweepStage::Close, Some(s)) => {
                    let strip = scratch
                        .set
                        .containing(s)
                        .ok_or_else(|| Error::Internal(format!("closing segment {s} outside every strip")))?;
                    self.push_candidate(scratch, strip);
                }
                (SweepStage::Open, Some(s)) => {
                    for strip in scratch.set.adjacent(s) {
                        self.push_candidate(scratch, strip);
                    }
                }
                (SweepStage::Split, Some(s)) => scratch.set.split(s),
                (SweepStage::Merge, Some(s)) => scratch.set.merge(s),
                (SweepStage::Check, _) => match self.list.get(self.idx).copied() {
                    Some(s) => {
                        scratch.mark[s.lo as usize] = false;
                        if scratch.set.containing(s) != Some(s) {
                            let col = if self.reflected { b.n + 1 - self.col } else { self.col };
                            self.events.push((col, s));
                        }
                    }
                    None => {
                        self.list.clear();
                        self.stage = SweepStage::Advance;
                        self.idx = 0;
                        continue;
                    }
                },
                (SweepStage::Advance, _) => {
                    if self.col == b.n {
                        self.stage = SweepStage::Done;
                    } else {
                        self.col += 1;
                        self.stage = SweepStage::Close;
                    }
                    meter.charge(1);
                    continue;
                }
                (stage, None) => {
                    self.idx = 0;
                    self.stage = match stage {
                        SweepStage::Init => SweepStage::Close,
                        SweepStage::Close => SweepStage::Open,
                        SweepStage::Open => SweepStage::Split,
                        SweepStage::Split => SweepStage::Merge,
                        _ => SweepStage::Check,
                    };
                    continue;
                }
                (SweepStage::Done, _) => unreachable!(),
            }
            self.idx += 1;
            meter.charge(scratch.set.dict_calls() - before + 1);
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum JobStage {
    Bucketize,
    SweepRight,
    SweepLeft,
    Assemble,
    Done,
}

/// Resumable decomposition of a slab list into its canonical decomposition.
#[derive(Debug, Clone)]
pub struct DecomposeJob {
    n: u32,
    input: Arc<[Slab]>,
    stage: JobStage,
    buckets: OpenCloseBuckets,
    right: Sweep,
    left: Sweep,
    a_idx: usize,
    b_idx: usize,
    out: Vec<Slab>,
}

impl DecomposeJob {
    /// `input` must be a valid decomposition over `[1, n]^2`.
    pub fn new(n: u32, input: Arc<[Slab]>) -> Self {
        let len = input.len();
        DecomposeJob {
            n,
            stage: if len == 0 { JobStage::Done } else { JobStage::Bucketize },
            buckets: OpenCloseBuckets::new(n, len),
            input,
            right: Sweep::new(false),
            left: Sweep::new(true),
            a_idx: 0,
            b_idx: 0,
            out: Vec::new(),
        }
    }

    pub fn is_done(&self) -> bool {
        self.stage == JobStage::Done
    }

    pub fn step(&mut self, scratch: &mut DecomposeScratch, meter: &mut Meter) -> Result<bool> {
        loop {
            match self.stage {
                JobStage::Bucketize => {
                    if !self.buckets.step(&self.input, meter) {
                        return Ok(false);
                    }
                    self.stage = JobStage::SweepRight;
                }
                JobStage::SweepRight => {
                    if !self.right.step(&self.buckets, scratch, meter)? {
                        return Ok(false);
                    }
                    self.stage = JobStage::SweepLeft;
                }
                JobStage::SweepLeft => {
                    if !self.left.step(&self.buckets, scratch, meter)? {
                        return Ok(false);
                    }
                    self.a_idx = self.left.events.len();
                    self.stage = JobStage::Assemble;
                }
                JobStage::Assemble => {
                    if !self.assemble_step(scratch, meter)? {
                        return Ok(false);
                    }
                    self.stage = JobStage::Done;
                }
                JobStage::Done => return Ok(true),
            }
        }
    }

    fn assemble_step(&mut self, scratch: &mut DecomposeScratch, meter: &mut Meter) -> Result<bool> {
        let born = &self.left.events;
        let died = &self.right.events;
        loop {
            if !meter.affords(1) {
                return Ok(false);
            }
            let a = self.a_idx.checked_sub(1).map(|i| born[i]);
            let b = died.get(self.b_idx).copied();
            match (a, b) {
                (None, None) => return Ok(true),
                (Some((ca, s)), b) if b.map_or(true, |(cb, _)| ca <= cb) => {
                    scratch.slab_start[s.lo as usize] = ca;
                    self.a_idx -= 1;
                }
                (_, Some((cb, s))) => {
                    let start = std::mem::take(&mut scratch.slab_start[s.lo as usize]);
                    if start == 0 {
                        return Err(Error::Internal(format!("strip {s} dies at column {cb} without a start")));
                    }
                    self.out.push(Slab::new(s.lo, s.hi, start, cb));
                    self.b_idx += 1;
                }
                (Some(_), None) => unreachable!(),
            }
            meter.charge(1);
        }
    }

    pub fn buckets(&self) -> &OpenCloseBuckets {
        &self.buckets
    }

    pub fn delta(&self) -> StripDelta {
        StripDelta { born: self.left.events.clone(), died: self.right.events.clone() }
    }

    /// The canonical slabs, once done.
    pub fn output(&self) -> &[Slab] {
        &self.out
    }

    pub fn into_output(self) -> Vec<Slab> {
        self.out
    }

    pub(crate) fn take_output(&mut self) -> Vec<Slab> {
        std::mem::take(&mut self.out)
    }

    pub fn n(&self) -> u32 {
        self.n
    }
}

fn run(n: u32, k: &SlabDecomposition, scratch: &mut DecomposeScratch) -> Result<DecomposeJob> {
    if k.n != n {
        return Err(Error::SideMismatch { expected: n, found: k.n });
    }
    k.validate()?;
    let mut job = DecomposeJob::new(n, k.slabs.clone().into());
    job.step(scratch, &mut Meter::unlimited())?;
    Ok(job)
}

/// Opening/closing buckets of `k`.
pub fn bucketize(n: u32, k: &SlabDecomposition) -> Result<OpenCloseBuckets> {
    if k.n != n {
        return Err(Error::SideMismatch { expected: n, found: k.n });
    }
    let mut b = OpenCloseBuckets::new(n, k.len());
    b.step(&k.slabs, &mut Meter::unlimited());
    Ok(b)
}

fn sweep(buckets: &OpenCloseBuckets, reflected: bool) -> Result<Vec<(u32, Segment)>> {
    let mut scratch = DecomposeScratch::new(buckets.n);
    let mut s = Sweep::new(reflected);
    s.step(buckets, &mut scratch, &mut Meter::unlimited())?;
    Ok(s.events)
}

/// Death events `(i, s)`: strip `s` is in column `i` but not in `i + 1`.
pub fn sweep_right(buckets: &OpenCloseBuckets) -> Result<Vec<(u32, Segment)>> {
    sweep(buckets, false)
}

/// Birth events `(i, s)`: strip `s` is in column `i` but not in `i - 1`.
pub fn sweep_left(buckets: &OpenCloseBuckets) -> Result<Vec<(u32, Segment)>> {
    sweep(buckets, true)
}

/// Pairs births with deaths into slabs. Births may be given in any column
/// order; deaths must be in non-decreasing column order.
pub fn assemble(n: u32, delta: &StripDelta) -> Result<SlabDecomposition> {
    let mut born = delta.born.clone();
    born.sort_by(|x, y| y.0.cmp(&x.0));
    let mut scratch = DecomposeScratch::new(n);
    let mut job = DecomposeJob::new(n, Arc::from(Vec::new()));
    job.left.events = born;
    job.right.events = delta.died.clone();
    job.a_idx = job.left.events.len();
    job.assemble_step(&mut scratch, &mut Meter::unlimited())?;
    Ok(SlabDecomposition::new(n, job.out))
}

/// The canonical slab decomposition of the matrix whose ones are `k`.
pub fn decompose(n: u32, k: &SlabDecomposition) -> Result<SlabDecomposition> {
    let mut scratch = DecomposeScratch::new(n);
    decompose_with(n, k, &mut scratch)
}

/// As [`decompose`], reusing `scratch`.
pub fn decompose_with(n: u32, k: &SlabDecomposition, scratch: &mut DecomposeScratch) -> Result<SlabDecomposition> {
    Ok(SlabDecomposition::new(n, run(n, k, scratch)?.into_output()))
}

/// Runs a full decomposition and returns the job with its intermediate tables.
pub fn decompose_traced(n: u32, k: &SlabDecomposition) -> Result<DecomposeJob> {
    run(n, k, &mut DecomposeScratch::new(n))
}
