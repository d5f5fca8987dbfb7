//! Graph surgeries and the harmonic-vector correspondences they induce.

mod attach;
pub mod glue;
mod returns;
mod simple;
mod source;

pub use attach::{attach_finite, Attachment};
pub use glue::{build_glue, glue_feasibility, DiagramSpec, GlueFeasibility, GlueSpec, Interval};
pub use returns::{apply_return_paths, plan_return_paths, ReturnEntry, ReturnMode, ReturnPathGraphs, ReturnPathPlan};
pub use simple::{simple_path_sum_checked, SimplePathSum};
pub use source::{transfer_harmonic_source, turn_into_source, TransferDirection};
