//! Dynamic binary matrices of bounded twin-width.
//!
//! The ones of an `n x n` matrix are stored as a canonical slab decomposition
//! indexed by a static point locator, with pending flips kept in a hash map
//! and folded in by periodic (optionally de-amortized) rebuilds.

pub mod adhesive;
pub mod bench;
pub mod cli;
pub mod deamort;
pub mod decompose;
pub mod dynmatrix;
pub mod error;
pub mod gen;
pub mod geom;
pub mod io;
pub mod oracle;
pub mod pointloc;
pub mod rebuild;
pub mod veb;
pub mod work;

pub use error::{Error, Result};
pub use geom::{Cell, Segment, Slab, SlabDecomposition};
