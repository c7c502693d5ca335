//! Static orthogonal point location over disjoint slabs.
//!
//! A column sweep inserts each slab into a persistent AVL tree keyed by its
//! first row when the sweep enters the slab and removes it after its last
//! column. Every update path-copies into an append-only node arena, and the
//! root after processing column `j` answers all queries in column `j`. A
//! query is one array read plus one floor search: `O(log N)` comparisons.
//!
//! Building is resumable: [`LocatorBuild::step`] does bounded work per call,
//! which the de-amortized engine relies on.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::{Cell, Slab, SlabDecomposition};
use crate::work::{Grouping, Meter};

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Node {
    key: u32,
    slab: u32,
    left: u32,
    right: u32,
    height: u8,
}

fn height(nodes: &[Node], id: u32) -> u8 {
    if id == NIL {
        0
    } else {
        nodes[id as usize].height
    }
}

fn make(nodes: &mut Vec<Node>, key: u32, slab: u32, left: u32, right: u32) -> u32 {
    let h = 1 + height(nodes, left).max(height(nodes, right));
    nodes.push(Node { key, slab, left, right, height: h });
    (nodes.len() - 1) as u32
}

/// Creates a node over `left` and `right`, rotating when their heights differ
/// by two. Returns the subtree root and the number of nodes created (1..=3).
fn balance(nodes: &mut Vec<Node>, key: u32, slab: u32, left: u32, right: u32) -> (u32, u64) {
    let hl = height(nodes, left);
    let hr = height(nodes, right);
    if hl > hr + 1 {
        let l = nodes[left as usize];
        if height(nodes, l.left) >= height(nodes, l.right) {
            let r = make(nodes, key, slab, l.right, right);
            (make(nodes, l.key, l.slab, l.left, r), 2)
        } else {
            let lr = nodes[l.right as usize];
            let a = make(nodes, l.key, l.slab, l.left, lr.left);
            let b = make(nodes, key, slab, lr.right, right);
            (make(nodes, lr.key, lr.slab, a, b), 3)
        }
    } else if hr > hl + 1 {
        let r = nodes[right as usize];
        if height(nodes, r.right) >= height(nodes, r.left) {
            let l = make(nodes, key, slab, left, r.left);
            (make(nodes, r.key, r.slab, l, r.right), 2)
        } else {
            let rl = nodes[r.left as usize];
            let a = make(nodes, key, slab, left, rl.left);
            let b = make(nodes, r.key, r.slab, rl.right, r.right);
            (make(nodes, rl.key, rl.slab, a, b), 3)
        }
    } else {
        (make(nodes, key, slab, left, right), 1)
    }
}

#[derive(Debug, Clone, Copy)]
enum OpState {
    Insert { cur: u32, key: u32, slab: u32 },
    Delete { cur: u32, key: u32 },
    Successor { cur: u32 },
    Ascend { child: u32 },
}

/// One insertion or deletion on a persistent AVL tree, advanced one node at a
/// time. Each step costs at most four units.
#[derive(Debug, Clone)]
struct PathOp {
    path: Vec<(u32, bool)>,
    state: OpState,
    replace: Option<(usize, u32, u32)>,
}

impl PathOp {
    fn insert(root: u32, key: u32, slab: u32) -> Self {
        PathOp { path: Vec::new(), state: OpState::Insert { cur: root, key, slab }, replace: None }
    }

    fn delete(root: u32, key: u32) -> Self {
        PathOp { path: Vec::new(), state: OpState::Delete { cur: root, key }, replace: None }
    }

    /// Performs one step. Returns the units spent and, once finished, the new root.
    fn step(&mut self, nodes: &mut Vec<Node>) -> Result<(u64, Option<u32>)> {
        match self.state {
            OpState::Insert { cur, key, slab } => {
                if cur == NIL {
                    let leaf = make(nodes, key, slab, NIL, NIL);
                    self.state = OpState::Ascend { child: leaf };
                } else {
                    let node = nodes[cur as usize];
                    let left = key < node.key;
                    self.path.push((cur, left));
                    let next = if left { node.left } else { node.right };
                    self.state = OpState::Insert { cur: next, key, slab };
                }
                Ok((1, None))
            }
            OpState::Delete { cur, key } => {
                if cur == NIL {
                    return Err(Error::Internal(format!("locator sweep lost key {key}")));
                }
                let node = nodes[cur as usize];
                if key == node.key {
                    if node.left == NIL || node.right == NIL {
                        let child = if node.left == NIL { node.right } else { node.left };
                        self.state = OpState::Ascend { child };
                    } else {
                        self.replace = Some((self.path.len(), 0, 0));
                        self.path.push((cur, false));
                        self.state = OpState::Successor { cur: node.right };
                    }
                } else {
                    let left = key < node.key;
                    self.path.push((cur, left));
                    let next = if left { node.left } else { node.right };
                    self.state = OpState::Delete { cur: next, key };
                }
                Ok((1, None))
            }
            OpState::Successor { cur } => {
                let node = nodes[cur as usize];
                if node.left == NIL {
                    if let Some(r) = self.replace.as_mut() {
                        r.1 = node.key;
                        r.2 = node.slab;
                    }
                    self.state = OpState::Ascend { child: node.right };
                } else {
                    self.path.push((cur, true));
                    self.state = OpState::Successor { cur: node.left };
                }
                Ok((1, None))
            }
            OpState::Ascend { child } => {
                let Some((id, went_left)) = self.path.pop() else {
                    return Ok((1, Some(child)));
                };
                let node = nodes[id as usize];
                let (key, slab) = match self.replace {
                    Some((depth, k, s)) if depth == self.path.len() => (k, s),
                    _ => (node.key, node.slab),
                };
                let (l, r) = if went_left { (child, node.right) } else { (node.left, child) };
                let (sub, created) = balance(nodes, key, slab, l, r);
                self.state = OpState::Ascend { child: sub };
                Ok((created + 1, None))
            }
        }
    }
}

/// Answers "which slab contains this cell" for a fixed set of disjoint slabs.
#[derive(Debug, Clone)]
pub struct PointLocator {
    n: u32,
    slabs: Arc<[Slab]>,
    versions: Vec<u32>,
    nodes: Vec<Node>,
}

impl PointLocator {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.slabs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slabs.is_empty()
    }

    /// The slab table, in build order.
    pub fn slabs(&self) -> &Arc<[Slab]> {
        &self.slabs
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Index into [`PointLocator::slabs`] of the slab containing `p`.
    /// `p` must lie in `[1, n]^2`.
    pub fn locate_id(&self, p: Cell) -> Option<u32> {
        self.locate_counted(p).0
    }

    /// Like [`PointLocator::locate_id`], also returning the number of key
    /// comparisons made.
    pub fn locate_counted(&self, p: Cell) -> (Option<u32>, u32) {
        let mut cur = self.versions[p.col as usize];
        let mut best = NIL;
        let mut comparisons = 0;
        while cur != NIL {
            let node = &self.nodes[cur as usize];
            comparisons += 1;
            if node.key <= p.row {
                best = node.slab;
                cur = node.right;
            } else {
                cur = node.left;
            }
        }
        if best != NIL && self.slabs[best as usize].row_hi >= p.row {
            (Some(best), comparisons)
        } else {
            (None, comparisons)
        }
    }

    pub fn locate(&self, p: Cell) -> Result<Option<Slab>> {
        let p = p.check(self.n)?;
        Ok(self.locate_id(p).map(|i| self.slabs[i as usize]))
    }

    /// Largest tree height over all column versions.
    pub fn max_height(&self) -> u32 {
        self.versions[1..].iter().map(|&r| u32::from(height(&self.nodes, r))).max().unwrap_or(0)
    }
}

/// Validates `dec` and builds its locator.
pub fn pl_build(n: u32, dec: &SlabDecomposition) -> Result<PointLocator> {
    if dec.n != n {
        return Err(Error::SideMismatch { expected: n, found: dec.n });
    }
    dec.validate()?;
    let mut job = LocatorBuild::new(n, dec.slabs.clone().into());
    job.step(&mut Meter::unlimited())?;
    Ok(job.finish().expect("unlimited build completes"))
}

pub fn pl_locate(loc: &PointLocator, p: Cell) -> Result<Option<Slab>> {
    loc.locate(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BuildStage {
    GroupStarts,
    GroupEnds,
    Removing,
    Inserting,
    Done,
}

/// Resumable locator construction over slabs already known to be disjoint.
#[derive(Debug, Clone)]
pub struct LocatorBuild {
    n: u32,
    slabs: Arc<[Slab]>,
    starts: Grouping<u32>,
    ends: Grouping<u32>,
    stage: BuildStage,
    col: u32,
    idx: usize,
    root: u32,
    op: Option<PathOp>,
    versions: Vec<u32>,
    nodes: Vec<Node>,
}

impl LocatorBuild {
    pub fn new(n: u32, slabs: Arc<[Slab]>) -> Self {
        let k = slabs.len();
        LocatorBuild {
            n,
            starts: Grouping::new(n as usize + 2, k),
            ends: Grouping::new(n as usize + 2, k),
            slabs,
            stage: BuildStage::GroupStarts,
            col: 1,
            idx: 0,
            root: NIL,
            op: None,
            versions: vec![NIL; n as usize + 1],
            nodes: Vec::new(),
        }
    }

    pub fn is_done(&self) -> bool {
        self.stage == BuildStage::Done
    }

    /// Advances while the meter affords one item; returns `true` once built.
    pub fn step(&mut self, meter: &mut Meter) -> Result<bool> {
        const ITEM: u64 = 4;
        loop {
            match self.stage {
                BuildStage::GroupStarts => {
                    let slabs = &self.slabs;
                    if !self.starts.step(meter, |p| (slabs[p].col_lo as usize, p as u32)) {
                        return Ok(false);
                    }
                    self.stage = BuildStage::GroupEnds;
                }
                BuildStage::GroupEnds => {
                    let slabs = &self.slabs;
                    if !self.ends.step(meter, |p| (slabs[p].col_hi as usize, p as u32)) {
                        return Ok(false);
                    }
                    self.stage = if self.n == 0 { BuildStage::Done } else { BuildStage::Removing };
                }
                BuildStage::Removing | BuildStage::Inserting => {
                    if !meter.affords(ITEM) {
                        return Ok(false);
                    }
                    self.sweep_item(meter)?;
                }
                BuildStage::Done => return Ok(true),
            }
        }
    }

    fn sweep_item(&mut self, meter: &mut Meter) -> Result<()> {
        if let Some(op) = self.op.as_mut() {
            let (cost, root) = op.step(&mut self.nodes)?;
            meter.charge(cost);
            if let Some(r) = root {
                self.root = r;
                self.op = None;
                self.idx += 1;
            }
            return Ok(());
        }
        let group = if self.stage == BuildStage::Removing {
            self.ends.group(self.col as usize - 1)
        } else {
            self.starts.group(self.col as usize)
        };
        if let Some(&s) = group.get(self.idx) {
            let slab = &self.slabs[s as usize];
            self.op = Some(if self.stage == BuildStage::Removing {
                PathOp::delete(self.root, slab.row_lo)
            } else {
                PathOp::insert(self.root, slab.row_lo, s)
            });
            return Ok(());
        }
        self.idx = 0;
        if self.stage == BuildStage::Removing {
            self.stage = BuildStage::Inserting;
        } else {
            self.versions[self.col as usize] = self.root;
            meter.charge(1);
            if self.col == self.n {
                self.stage = BuildStage::Done;
            } else {
                self.col += 1;
                self.stage = BuildStage::Removing;
            }
        }
        Ok(())
    }

    /// The finished locator, or `None` if building is incomplete.
    pub fn finish(self) -> Option<PointLocator> {
        if !self.is_done() {
            return None;
        }
        Some(PointLocator { n: self.n, slabs: self.slabs, versions: self.versions, nodes: self.nodes })
    }
}
