//! Dual-fan line-laser scanning simulator for roof-mounted modulating
//! retroreflectors on a straight road segment.
//!
//! The pipeline runs bottom up: [`geometry`] and [`beam`] describe a single
//! fan state, [`link`] turns it into received power at an MRR, [`scan`]
//! builds the per-fan schedules, [`coverage`] accumulates energy maps and
//! coverage metrics, and [`optimizer`] searches the azimuth schedule.

// Negated float comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beam;
pub mod config;
pub mod coverage;
pub mod error;
pub mod export;
pub mod geometry;
pub mod link;
pub mod optimizer;
pub mod pipeline;
pub mod scan;

pub use error::{Error, Result};
