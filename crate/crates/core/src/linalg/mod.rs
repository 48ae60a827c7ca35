//! Sparse storage, the saddle-point solve and eigen-iterations.

mod eigen;
mod solve;
mod sparse;

pub use eigen::{inverse_power_smallest, power_largest, restrict_to_complement, EigenError, EigenOptions, Eigenpair};
pub use solve::{solve_indefinite, DenseCholesky, SolveError, Solved, SolverOptions, SparseCholesky, SparseLu};
pub use sparse::{dot, norm2, symmetric_block, CsrMatrix, Triplets};
