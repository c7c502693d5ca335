use thiserror::Error;

use crate::geom::Slab;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("key {key} outside universe [1, {universe}]")]
    KeyOutOfRange { key: u64, universe: u64 },

    #[error("cell ({row}, {col}) outside [1, {n}]^2")]
    CellOutOfRange { row: u32, col: u32, n: u32 },

    #[error("slab {slab} has coordinates outside [1, {n}]")]
    SlabOutOfRange { slab: Slab, n: u32 },

    #[error("slabs {first} and {second} overlap")]
    Overlap { first: Slab, second: Slab },

    #[error("side length mismatch: expected {expected}, found {found}")]
    SideMismatch { expected: u32, found: u32 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("contraction step {step}: {msg}")]
    BadContraction { step: usize, msg: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("internal consistency: {0}")]
    Internal(String),
}
