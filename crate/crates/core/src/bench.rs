//! Engine wrapper and timing harness.

use std::fmt;
use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::deamort::{WorstCaseConfig, WorstCaseMatrix};
use crate::dynmatrix::{AmortizedConfig, AmortizedMatrix, Threshold};
use crate::error::Result;
use crate::gen::gen_disjoint_slabs;
use crate::geom::{Cell, SlabDecomposition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum EngineKind {
    Amortized,
    Worstcase,
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineKind::Amortized => "amortized",
            EngineKind::Worstcase => "worstcase",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EngineConfig {
    pub threshold: Threshold,
    pub epoch: Threshold,
    pub budget: Option<u64>,
    pub hash_seed: Option<u64>,
}

#[derive(Debug)]
pub enum Engine {
    Amortized(AmortizedMatrix),
    Worstcase(Box<WorstCaseMatrix>),
}

impl Engine {
    pub fn new(kind: EngineKind, n: u32, k: &SlabDecomposition, cfg: EngineConfig) -> Result<Self> {
        Ok(match kind {
            EngineKind::Amortized => Engine::Amortized(AmortizedMatrix::new(
                n,
                k,
                AmortizedConfig { threshold: cfg.threshold, hash_seed: cfg.hash_seed },
            )?),
            EngineKind::Worstcase => Engine::Worstcase(Box::new(WorstCaseMatrix::new(
                n,
                k,
                WorstCaseConfig { epoch: cfg.epoch, budget: cfg.budget, hash_seed: cfg.hash_seed, ..Default::default() },
            )?)),
        })
    }

    pub fn query(&self, p: Cell) -> Result<bool> {
        match self {
            Engine::Amortized(m) => m.query(p),
            Engine::Worstcase(m) => m.query(p),
        }
    }

    pub fn update(&mut self, p: Cell) -> Result<()> {
        match self {
            Engine::Amortized(m) => m.update(p),
            Engine::Worstcase(m) => m.update(p),
        }
    }

    /// Work units of the most recent update.
    pub fn last_work(&self) -> u64 {
        match self {
            Engine::Amortized(m) => m.last_work(),
            Engine::Worstcase(m) => m.stats().last_work,
        }
    }

    /// Slabs in the decomposition currently indexed by the locator.
    pub fn slab_count(&self) -> usize {
        match self {
            Engine::Amortized(m) => m.slabs().len(),
            Engine::Worstcase(m) => m.active().slabs().len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub log_n_min: u32,
    pub log_n_max: u32,
    pub engines: Vec<EngineKind>,
    pub ops: usize,
    pub reps: usize,
    /// Slabs requested from the generator; `n / 4` when absent.
    pub k: Option<usize>,
    pub d: u32,
    pub seed: u64,
    pub engine: EngineConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            log_n_min: 10,
            log_n_max: 20,
            engines: vec![EngineKind::Amortized, EngineKind::Worstcase],
            ops: 20_000,
            reps: 5,
            k: None,
            d: 2,
            seed: 1,
            engine: EngineConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: u32,
    pub engine: EngineKind,
    pub ops: usize,
    pub ns_query: f64,
    pub ns_update: f64,
    pub max_work: u64,
    pub slabs: usize,
    pub reference: u64,
}

pub const CSV_HEADER: &str =
    "n,engine,backend,ops,mean_ns_query,mean_ns_update,max_work_units_update,canonical_slabs,d_2n_minus_2_plus_1";

impl BenchRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},baseline,{},{:.1},{:.1},{},{},{}",
            self.n, self.engine, self.ops, self.ns_query, self.ns_update, self.max_work, self.slabs, self.reference
        )
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

struct Sample {
    ns_query: f64,
    ns_update: f64,
    max_work: u64,
    slabs: usize,
}

fn sample(kind: EngineKind, k: &SlabDecomposition, cfg: &BenchConfig, rep: u64) -> Result<Sample> {
    let n = k.n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (rep << 32) ^ u64::from(n));
    let mut cell = || Cell::new(rng.gen_range(1..=n), rng.gen_range(1..=n));
    let updates: Vec<Cell> = (0..cfg.ops).map(|_| cell()).collect();
    let queries: Vec<Cell> = (0..cfg.ops).map(|_| cell()).collect();
    let mut e = Engine::new(kind, n, k, cfg.engine)?;
    let slabs = e.slab_count();
    let mut max_work = 0;
    let t = Instant::now();
    for &p in &updates {
        e.update(p)?;
        max_work = max_work.max(e.last_work());
    }
    let ns_update = t.elapsed().as_nanos() as f64 / cfg.ops.max(1) as f64;
    let t = Instant::now();
    let mut ones = 0u64;
    for &p in &queries {
        ones += u64::from(e.query(p)?);
    }
    black_box(ones);
    let ns_query = t.elapsed().as_nanos() as f64 / cfg.ops.max(1) as f64;
    Ok(Sample { ns_query, ns_update, max_work, slabs })
}

/// Times every engine on every `n = 2^e` of the grid, calling `row` as each
/// row completes. Each cell of the table is the median over `reps`
/// measured runs, after one discarded warm-up run.
pub fn run_bench(cfg: &BenchConfig, mut row: impl FnMut(&BenchRow)) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for e in cfg.log_n_min..=cfg.log_n_max {
        let n = 1u32 << e;
        let k = gen_disjoint_slabs(n, cfg.k.unwrap_or((n as usize / 4).max(1)), cfg.seed);
        for &kind in &cfg.engines {
            sample(kind, &k, cfg, 0)?;
            let samples = (1..=cfg.reps.max(1) as u64).map(|r| sample(kind, &k, cfg, r)).collect::<Result<Vec<_>>>()?;
            let r = BenchRow {
                n,
                engine: kind,
                ops: cfg.ops,
                ns_query: median(samples.iter().map(|s| s.ns_query).collect()),
                ns_update: median(samples.iter().map(|s| s.ns_update).collect()),
                max_work: samples.iter().map(|s| s.max_work).max().unwrap_or(0),
                slabs: samples[0].slabs,
                reference: u64::from(cfg.d) * (2 * u64::from(n) - 2) + 1,
            };
            row(&r);
            rows.push(r);
        }
    }
    Ok(rows)
}
