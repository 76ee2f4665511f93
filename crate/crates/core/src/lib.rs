//! Productivity-frontier analysis toolkit.
//!
//! Pipeline: a rectangular entity x period panel feeds a slacks-based-measure
//! (SBM) DEA engine with undesirable outputs, whose distance functions build
//! dynamic total-factor-productivity indices (TFP = EC x TC, EC = PEC x SEC);
//! the indices then enter fixed-effects and method-of-moments quantile panel
//! regressions with moderation and group-split heterogeneity runs.

pub mod dea;
pub mod econ;
pub mod error;
pub mod lp;
pub mod panel;
pub mod pipeline;
pub mod productivity;
pub mod stats;

pub use error::{Error, Result};
