//! Distributed-order nonlocal beam models: a fully resolved 2D plane-strain
//! solver and a reduced 1D Timoshenko model, with the fractional operators,
//! order profiles, linear algebra and studies they share.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod anet2d;
pub mod distributions;
pub mod error;
pub mod fracops;
pub mod grid;
pub mod linalg;
pub mod ntbm1d;
pub mod problem;
pub mod quadrature;
pub mod sparsity;

pub use anet2d::{AnetSolution, SolverMethod};
pub use distributions::{Family, OrderDistribution, Symmetry};
pub use error::{Error, Iterate, Result};
pub use fracops::{DenseOperator, OrderMeta};
pub use grid::{Grid1D, Grid2D};
pub use linalg::{GmresConfig, LinearSystem};
pub use ntbm1d::{FixedPointConfig, NtbmSolution};
pub use problem::{BeamProblem, End, ModulusModel, Supports};
pub use quadrature::{gauss_rule, QuadratureRule};
pub use sparsity::{sparsity_report, SparsityReport};
