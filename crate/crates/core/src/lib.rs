//! Convex variational problems assembled from terms and solved with a
//! diagonally preconditioned primal-dual method.
//!
//! A [`Problem`] holds primal variables living on regular grids and a list of
//! terms. Each term is either handled by its proximal map on the primal side
//! or dualized, in which case it contributes a block of rows to the stacked
//! linear operator.
//!
//! ```
//! use flexsolve::{data_term, gradient_term, DataNorm, GradientNorm, GridDims, Problem, StopConfig};
//!
//! let dims = GridDims::new(&[8, 8]).unwrap();
//! let f: Vec<f64> = (0..64).map(|p| if p % 8 < 4 { 0.2 } else { 0.8 }).collect();
//! let mut problem = Problem::new();
//! let u = problem.add_primal_var(dims.clone());
//! problem.add_term(data_term(DataNorm::L2, 1.0, f, None).unwrap(), &[u]).unwrap();
//! problem.add_term(gradient_term(GradientNorm::L1Iso, 0.05, &dims, None).unwrap(), &[u]).unwrap();
//! let summary = problem.run(&StopConfig::default()).unwrap();
//! assert!(summary.converged);
//! ```

pub mod apps;
pub mod error;
pub mod io;
pub mod linalg;
pub mod operators;
pub mod problem;
pub mod prox;
pub mod solver;
pub mod terms;
pub mod verification;

pub use error::{Error, Result};
pub use linalg::{devectorize, vectorize, GridDims, SparseOp};
pub use operators::{
    build_curl2d, build_diagonal, build_divergence, build_gradient, build_identity, build_partial, build_partials,
    BoundaryRule,
};
pub use problem::{BoundTerm, DualSlot, Problem};
pub use prox::ProxKind;
pub use solver::{compute_residual, compute_step_sizes, iterate_once, ResidualReport, RunSummary, SolverState, StepSizes, StopConfig};
pub use terms::{
    data_term, eval_energy, gradient_term, identity_term, labeling_term, operator_term, optical_flow_term,
    vectorfield_term, DataNorm, GradientNorm, Norm, OperatorNorm, Term, VectorFieldOp,
};
