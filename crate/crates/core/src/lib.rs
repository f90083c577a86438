//! Global sensitivity analysis with the PAWN index and variance-based
//! Sobol' indices, plus a harness that measures how sensitive both indices
//! are to their own design parameters.
//!
//! The guide in `book/` walks through each piece; its code listings are
//! compiled and run as doc-tests of this crate.

pub mod error;
pub mod functions;
pub mod meta;
pub mod overlap;
pub mod pawn;
pub mod report;
pub mod runs;
pub mod sampling;
pub mod variance;

pub use error::{Error, Result};
pub use functions::{FunctionSpec, Model};
pub use meta::{MetaResult, Setting};
pub use pawn::{PawnConfig, Summary};
pub use variance::{SobolEstimates, TotalEstimator};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/functions.md")]
    mod functions {}
    #[doc = include_str!("../../../book/src/pawn.md")]
    mod pawn {}
    #[doc = include_str!("../../../book/src/variance.md")]
    mod variance {}
    #[doc = include_str!("../../../book/src/overlap.md")]
    mod overlap {}
    #[doc = include_str!("../../../book/src/meta.md")]
    mod meta {}
}
