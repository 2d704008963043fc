use thiserror::Error;

use crate::grid::Dims;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("unsupported dimension count {0} (expected 2 or 3)")]
    Dimension(usize),
    #[error("grid {0} has an empty dimension")]
    EmptyGrid(Dims),
    #[error("processor grid {0} has an empty dimension")]
    EmptyProcGrid(Dims),
    #[error("grid {0} cannot be coarsened (every dimension must be at least 3)")]
    CannotCoarsen(Dims),
    #[error("processor grid {coarse} is not componentwise coarser than {fine}")]
    NotCoarser { fine: Dims, coarse: Dims },
    #[error("cannot parse dimensions from {0:?}")]
    Parse(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("anisotropy ratio must be positive, got {0}")]
    BadAnisotropy(f64),
    #[error("zero center coefficient at point ({0}, {1})")]
    ZeroCenter(usize, usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("coarse operator is not positive definite (pivot {0})")]
    NotPositiveDefinite(usize),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("hierarchy format error on line {line}: {msg}")]
    Format { line: usize, msg: String },
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("machine file line {line}: {msg}")]
    MachineFormat { line: usize, msg: String },
    #[error("machine parameter {0} must be finite and non-negative")]
    NegativeParam(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("search exhausted without reaching a single-rank state")]
    Unreachable,
    #[error("invalid transition {from} -> {to}: {reason}")]
    InvalidTransition {
        from: Dims,
        to: Dims,
        reason: String,
    },
    #[error("path is empty or does not start at the fine processor grid {0}")]
    BadStart(Dims),
    #[error("cannot parse path: {0}")]
    Parse(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("task {coord} on processor grid {procs} owns no points on level {level}")]
    EmptyExtent {
        procs: Dims,
        coord: Dims,
        level: usize,
    },
    #[error("processor grid {coarse} does not nest inside {fine}")]
    BlockTiling { fine: Dims, coarse: Dims },
    #[error("plan does not match the hierarchy: {0}")]
    PlanMismatch(String),
}
