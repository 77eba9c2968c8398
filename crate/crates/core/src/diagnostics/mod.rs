//! Code-space geometry and regularizer sweeps.

mod alignment;
mod sweep;

pub use alignment::{alignment_distance, alignment_distance_matrix, AlignmentReport, RANK_TOLERANCE};
pub use sweep::{mean_std, median, regularizer_sweep, run_ordered, SweepAxis, SweepCell, SweepResult, SweepTask};
