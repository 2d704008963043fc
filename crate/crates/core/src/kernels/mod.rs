//! Serial structured multigrid kernels on two-dimensional grids.

pub mod cholesky;
pub mod field;
pub mod galerkin;
pub mod hierarchy;
pub mod smooth;
pub mod stencil;
pub mod transfer;

pub use cholesky::DenseCholesky;
pub use field::GridFunction;
pub use galerkin::{galerkin, to_dense};
pub use hierarchy::{reduction_factors, Correction, CycleConfig, Level, MGHierarchy};
pub use smooth::{relax, relax_color, residual, residual_into};
pub use stencil::{discretize, DiffusionProblem, Rhs, StencilField, StencilPattern};
pub use transfer::{
    build_interp, interp_correct, interp_correct_at, restrict_at, restrict_into, restrict_residual,
    InterpField, InterpMode,
};
