//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{run_bench, BenchConfig, Engine, EngineConfig, EngineKind, CSV_HEADER};
use crate::decompose::decompose;
use crate::dynmatrix::Threshold;
use crate::error::Error;
use crate::gen::{gen_bounded_width_with, gen_disjoint_slabs, gen_trace};
use crate::geom::{validate_decomposition, Cell, SlabDecomposition};
use crate::io::{
    format_dense, format_slabs, format_trace, format_witness, parse_dense, parse_slabs, parse_trace, parse_witness,
    TraceOp,
};
use crate::oracle::{dense_from_slabs, naive_canonical, verify_contraction_width, DenseMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "twinmat", version, about = "Dynamic binary matrices of bounded twin-width")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Compute the canonical slab decomposition of a slab file.
    Decompose {
        input: PathBuf,
        /// Output slab file; standard output when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Replay a trace and print one line per query.
    Run {
        init: PathBuf,
        trace: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
        /// Write per-update work units as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check results against the oracles.
    Verify {
        #[command(subcommand)]
        mode: VerifyMode,
    },
    /// Time both engines over a grid of sizes and print a CSV table.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// Disjoint slabs.
    Slabs,
    /// Dense matrix with a contraction witness.
    Width,
    /// Random trace.
    Trace,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub kind: GenKind,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 2)]
    pub d: u32,
    /// Slab count for `slabs`; `n` when absent.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Operation count for `trace`.
    #[arg(long, default_value_t = 1000)]
    pub ops: usize,
    #[arg(long, default_value_t = 0.5)]
    pub query_ratio: f64,
    /// Branchings per step for `width`; `d` when absent.
    #[arg(long)]
    pub flips: Option<u32>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Witness output for `width`.
    #[arg(long)]
    pub witness: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Baseline,
    Fast,
}

#[derive(Debug, Args, Clone)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value_t = EngineKind::Amortized)]
    pub engine: EngineKind,
    #[arg(long, value_enum, default_value_t = Backend::Baseline)]
    pub backend: Backend,
    /// Rebuild threshold: `default`, `never`, a number, or `proven:D`.
    #[arg(long, default_value = "default", value_parser = parse_threshold)]
    pub threshold: Threshold,
    /// Epoch length: `default`, a number, or `proven:D`.
    #[arg(long, default_value = "default", value_parser = parse_threshold)]
    pub epoch: Threshold,
    /// Fixed work budget per update.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub hash_seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum VerifyMode {
    /// Replay a trace on an engine and a dense matrix side by side.
    Oracle {
        init: PathBuf,
        trace: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Compare the decomposition of a slab file, or a claimed result, with
    /// the naive canonical decomposition.
    Canonical {
        input: PathBuf,
        #[arg(long)]
        claimed: Option<PathBuf>,
    },
    /// Measure the width of a contraction sequence.
    Witness {
        matrix: PathBuf,
        witness: PathBuf,
        #[arg(long)]
        d: Option<u32>,
    },
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Sizes `2^e`; repeat the flag for several, default `10..=20`.
    #[arg(long = "log-n")]
    pub log_n: Vec<u32>,
    #[arg(long, default_value_t = 20_000)]
    pub ops: usize,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub d: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Only this engine; both when absent.
    #[arg(long, value_enum)]
    pub engine: Option<EngineKind>,
    #[arg(long, value_enum, default_value_t = Backend::Baseline)]
    pub backend: Backend,
    #[arg(long, default_value = "default", value_parser = parse_threshold)]
    pub threshold: Threshold,
    #[arg(long, default_value = "default", value_parser = parse_threshold)]
    pub epoch: Threshold,
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub hash_seed: Option<u64>,
    /// Write the table here instead of standard output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn parse_threshold(s: &str) -> std::result::Result<Threshold, String> {
    match s {
        "default" => Ok(Threshold::Default),
        "never" => Ok(Threshold::Never),
        _ => {
            if let Some(d) = s.strip_prefix("proven:") {
                return d.parse().map(Threshold::Proven).map_err(|e| format!("bad d `{d}`: {e}"));
            }
            match s.parse::<u64>() {
                Ok(0) => Err("must be positive".into()),
                Ok(t) => Ok(Threshold::At(t)),
                Err(e) => Err(format!("expected default, never, a number or proven:D ({e})")),
            }
        }
    }
}

enum Failure {
    Input(String),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: crate::Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_to(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| Failure::Input(e.to_string())),
    }
}

fn check_backend(b: Backend) -> Outcome {
    match b {
        Backend::Baseline => Ok(()),
        Backend::Fast => Err(Failure::Input("backend `fast` is not available in this build; use `baseline`".into())),
    }
}

impl EngineArgs {
    fn config(&self) -> EngineConfig {
        EngineConfig { threshold: self.threshold, epoch: self.epoch, budget: self.budget, hash_seed: self.hash_seed }
    }
}

fn load_run(init: &Path, trace: &Path) -> std::result::Result<(SlabDecomposition, Vec<TraceOp>), Failure> {
    let k = in_file(init, parse_slabs(&read(init)?))?;
    in_file(init, k.validate())?;
    let ops = in_file(trace, parse_trace(&read(trace)?, k.n))?;
    Ok((k, ops))
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::Verify(msg)) => {
            let _ = writeln!(out, "FAIL {msg}");
            EXIT_FAIL
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Decompose { input, out: dest } => cmd_decompose(&input, dest.as_deref(), out),
        Command::Run { init, trace, engine, csv } => cmd_run(&init, &trace, &engine, csv.as_deref(), out),
        Command::Verify { mode } => match mode {
            VerifyMode::Oracle { init, trace, engine } => verify_oracle(&init, &trace, &engine, out),
            VerifyMode::Canonical { input, claimed } => verify_canonical(&input, claimed.as_deref(), out),
            VerifyMode::Witness { matrix, witness, d } => verify_witness(&matrix, &witness, d, out),
        },
        Command::Bench(a) => cmd_bench(a, out),
    }
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write) -> Outcome {
    if a.n == 0 {
        return Err(Failure::Input("--n must be positive".into()));
    }
    match a.kind {
        GenKind::Slabs => {
            let k = gen_disjoint_slabs(a.n, a.k.unwrap_or(a.n as usize), a.seed);
            write_to(a.out.as_deref(), &format_slabs(&k), out)
        }
        GenKind::Width => {
            let (m, seq) = gen_bounded_width_with(a.n, a.d, a.flips.unwrap_or(a.d), a.seed);
            write_to(a.out.as_deref(), &format_dense(&m), out)?;
            match a.witness {
                Some(p) => write_to(Some(&p), &format_witness(&seq), out),
                None => Ok(()),
            }
        }
        GenKind::Trace => {
            if !(0.0..=1.0).contains(&a.query_ratio) {
                return Err(Failure::Input("--query-ratio must lie in [0, 1]".into()));
            }
            let t = gen_trace(a.n, a.ops, a.seed, a.query_ratio);
            write_to(a.out.as_deref(), &format_trace(&t), out)
        }
    }
}

fn cmd_decompose(input: &Path, dest: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let k = in_file(input, parse_slabs(&read(input)?))?;
    let r = in_file(input, decompose(k.n, &k))?;
    write_to(dest, &format_slabs(&r), out)?;
    if dest.is_some() {
        let _ = writeln!(out, "input slabs: {}\ncanonical slabs: {}", k.len(), r.len());
    }
    Ok(())
}

fn cmd_run(init: &Path, trace: &Path, args: &EngineArgs, csv: Option<&Path>, out: &mut dyn Write) -> Outcome {
    check_backend(args.backend)?;
    let (k, ops) = load_run(init, trace)?;
    let mut e = Engine::new(args.engine, k.n, &k, args.config())?;
    let mut text = String::new();
    let mut work = csv.map(|_| String::from("op,row,col,work_units\n"));
    for (i, op) in ops.iter().enumerate() {
        match *op {
            TraceOp::Query(p) => text.push_str(if e.query(p)? { "1\n" } else { "0\n" }),
            TraceOp::Update(p) => {
                e.update(p)?;
                if let Some(w) = &mut work {
                    w.push_str(&format!("{},{},{},{}\n", i + 1, p.row, p.col, e.last_work()));
                }
            }
        }
    }
    write_to(None, &text, out)?;
    match (csv, work) {
        (Some(p), Some(w)) => write_to(Some(p), &w, out),
        _ => Ok(()),
    }
}

fn verify_oracle(init: &Path, trace: &Path, args: &EngineArgs, out: &mut dyn Write) -> Outcome {
    check_backend(args.backend)?;
    let (k, ops) = load_run(init, trace)?;
    let mut e = Engine::new(args.engine, k.n, &k, args.config())?;
    let mut d = in_file(init, dense_from_slabs(k.n, &k))?;
    let mut queries = 0;
    for (i, op) in ops.iter().enumerate() {
        match *op {
            TraceOp::Query(p) => {
                queries += 1;
                let (got, want) = (e.query(p)?, d.get(p.row, p.col));
                if got != want {
                    return Err(Failure::Verify(format!(
                        "op {} (Q {} {}): engine {}, oracle {}",
                        i + 1,
                        p.row,
                        p.col,
                        u8::from(got),
                        u8::from(want)
                    )));
                }
            }
            TraceOp::Update(p) => {
                e.update(p)?;
                d.flip(p.row, p.col);
            }
        }
    }
    let _ = writeln!(out, "PASS {} ops, {queries} queries", ops.len());
    Ok(())
}

fn first_difference(a: &DenseMatrix, b: &DenseMatrix) -> Option<Cell> {
    (1..=a.n()).flat_map(|r| (1..=a.n()).map(move |c| Cell::new(r, c))).find(|p| a.get(p.row, p.col) != b.get(p.row, p.col))
}

fn verify_canonical(input: &Path, claimed: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let k = in_file(input, parse_slabs(&read(input)?))?;
    let dense = in_file(input, dense_from_slabs(k.n, &k))?;
    let expect = naive_canonical(&dense);
    let (what, got) = match claimed {
        Some(p) => ("claimed", in_file(p, parse_slabs(&read(p)?))?),
        None => ("computed", in_file(input, decompose(k.n, &k))?),
    };
    if got.n != k.n {
        return Err(Failure::Verify(format!("{what} decomposition has side {}, input has {}", got.n, k.n)));
    }
    if !validate_decomposition(&got) {
        return Err(Failure::Verify(format!("{what} decomposition has overlapping slabs")));
    }
    let covered = in_file(input, dense_from_slabs(got.n, &got))?;
    if let Some(p) = first_difference(&dense, &covered) {
        return Err(Failure::Verify(format!(
            "cell ({}, {}) is {} in the input but {} in the {what} decomposition",
            p.row,
            p.col,
            u8::from(dense.get(p.row, p.col)),
            u8::from(covered.get(p.row, p.col))
        )));
    }
    if !got.same_set(&expect) {
        let odd = got.sorted().into_iter().find(|s| !expect.slabs.contains(s));
        let msg = match odd {
            Some(s) => format!("slab {s} of the {what} decomposition is not canonical"),
            None => format!("{what} decomposition has {} slabs, canonical has {}", got.len(), expect.len()),
        };
        return Err(Failure::Verify(msg));
    }
    let _ = writeln!(out, "PASS {} canonical slabs", got.len());
    Ok(())
}

fn verify_witness(matrix: &Path, witness: &Path, d: Option<u32>, out: &mut dyn Write) -> Outcome {
    let m = in_file(matrix, parse_dense(&read(matrix)?))?;
    let seq = in_file(witness, parse_witness(&read(witness)?))?;
    let width = verify_contraction_width(&m, &seq).map_err(|e| Failure::Verify(e.to_string()))?;
    match d {
        Some(d) if width > d => Err(Failure::Verify(format!("width {width} exceeds {d}"))),
        _ => {
            let _ = writeln!(out, "PASS width {width}");
            Ok(())
        }
    }
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write) -> Outcome {
    check_backend(a.backend)?;
    let (lo, hi) = match (a.log_n.iter().min(), a.log_n.iter().max()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (10, 20),
    };
    if hi > 30 {
        return Err(Failure::Input("--log-n must be at most 30".into()));
    }
    let cfg = BenchConfig {
        log_n_min: lo,
        log_n_max: hi,
        engines: a.engine.map_or_else(|| vec![EngineKind::Amortized, EngineKind::Worstcase], |e| vec![e]),
        ops: a.ops,
        reps: a.reps,
        k: a.k,
        d: a.d,
        seed: a.seed,
        engine: EngineConfig { threshold: a.threshold, epoch: a.epoch, budget: a.budget, hash_seed: a.hash_seed },
    };
    let mut table = format!("{CSV_HEADER}\n");
    run_bench(&cfg, |r| table.push_str(&format!("{}\n", r.csv())))?;
    write_to(a.csv.as_deref(), &table, out)
}
