//! Dense LU, sparse-plus-dense systems, block-tridiagonal elimination and GMRES.

pub mod block;
pub mod dense;
pub mod gmres;
pub mod system;

pub use block::{solve_block_tridiagonal, BlockDiagonal, BlockTridiagonal, Layering};
pub use dense::{lu_factor, LuFactors};
pub use gmres::{gmres, GmresConfig, GmresOutcome};
pub use system::{DenseBlock, LinearSystem};
