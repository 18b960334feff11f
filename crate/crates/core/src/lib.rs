//! Computable objects for groups of orientation-preserving
//! homeomorphisms of the line.
// `!(x < y)` is used on purpose so that NaN takes the fallback branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod bump;
pub mod classify;
pub mod counterexample;
pub mod decimal;
pub mod derived;
pub mod error;
pub mod expr;
pub mod group;
pub mod interval;
pub mod measure;
pub mod root;
pub mod stage;
pub mod structure;
pub mod tol;
pub mod tower;
pub mod yoccoz;

pub use error::{Error, Result};
pub use expr::{compose, invert, HomeoExpr, Piece};
pub use interval::IntervalQ;
pub use stage::{Ladder, StageGeometry, StageMap};
pub use yoccoz::{yoccoz_map, YoccozMap};
