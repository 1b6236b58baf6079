use thiserror::Error;

use crate::solver::SolveStats;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("discriminant vanishes identically: Higgs field is not generically regular semisimple")]
    DegenerateEverywhere,

    #[error("point {z} is within the degeneracy threshold of the branch locus (min gap {gap:e} < {tol:e})")]
    DegeneratePoint { z: String, gap: f64, tol: f64 },

    #[error("shifted constant coefficient does not have a simple zero at the origin (order {order})")]
    NotSimpleZero { order: usize },

    #[error("characteristic polynomial at the origin is not a single power (y - alpha)^r")]
    NotTotallyRamified,

    #[error("filtration is not equivariant for the cyclic cover of order {order}")]
    NotEquivariant { order: u32 },

    #[error("frame valuation m = {m} is incompatible with rank {r} (parity rule)")]
    ParityViolation { r: u32, m: i64 },

    #[error("pairing degenerates on an eigenline: |C(e, e)| = {value:e}")]
    PairingDegenerate { value: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("solver did not converge after {} iterations (residual {:e})", .0.iterations, .0.final_residual)]
    NotConverged(SolveStats),

    #[error("region is not contained in the interior of the grid")]
    RegionOutsideGrid,

    #[error("rate fit needs strictly positive errors (got {value:e} at index {index})")]
    NonPositiveError { index: usize, value: f64 },

    #[error("weight estimation needs at least {needed} sample points in the radius window, got {got}")]
    InsufficientRadii { needed: usize, got: usize },

    #[error("interpolated metric left the positive cone at node {node}")]
    NotPositive { node: usize },

    #[error("radial reduction requires q = c z^k with c != 0")]
    NotRadial,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
