//! P1 finite elements: assembly, sparse storage, factorization and the
//! generalized symmetric eigensolver.

mod assemble;
mod dense;
mod eigen;
mod ldl;
mod ordering;
mod sparse;

pub use assemble::{assemble, element_matrices};
pub use dense::{dense_generalized_eigs, DENSE_CAP};
pub(crate) use eigen::{clusters_of, residual, scatter_free};
pub use eigen::{
    constrained_vertices, fix_sign, solve_eigs, solve_mesh, BoundaryCondition, EigenPair, EigenResult, SignConvention,
    SolveMethod, SolverParams,
};
pub use ldl::LdlFactor;
pub use ordering::{bandwidth, reverse_cuthill_mckee};
pub use sparse::SparseSymmetricMatrix;
