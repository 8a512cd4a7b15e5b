//! Shared fixtures for the benchmarks.

use nlbeam_core::analysis::resized;
use nlbeam_core::{BeamProblem, OrderDistribution};

/// Problem 2 with the given distribution, refined to `ny` layers at the preset aspect ratio.
pub fn problem(dist: OrderDistribution, ny: usize) -> BeamProblem {
    resized(&BeamProblem::preset(2, dist).expect("problem 2 exists"), ny)
}
