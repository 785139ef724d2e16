//! Exactly computable quantities of the planar sandpile.

pub mod corr;
pub mod green;
pub mod height;
pub mod kernel;
pub mod loops;
pub mod quad;
pub mod sums;

pub use corr::{disk_pair_correlation, pair_correlation_00, PairCorrelation};
pub use green::{box_green, killed_green, killed_potential, killed_green_series};
pub use height::{
    deletion_ratio, height0_probability, height_probabilities_closed_form, minimal_event_probability, p0,
};
pub use kernel::{potential_kernel, KernelTable};
pub use loops::{loop_counts_via_det, Digraph, LoopCountMatrix, LoopPolynomial};
pub use sums::{priezzhev_cross_check, sum_mo_truncated, PriezzhevCheck};
