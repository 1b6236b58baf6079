//! Harmonic metrics of Higgs bundles on the disc and their large-`t` limits.
//!
//! Numerical code is generic over the real type (`f32` or `f64`); the
//! aliases at the crate root fix `f64`. Filtered-bundle algebra is exact
//! over `i64` rationals.

pub mod asymptotics;
pub mod error;
pub mod filtered;
pub mod grid;
pub mod higgs;
pub mod linalg;
pub mod metric;
pub mod pairing;
pub mod poly;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{DiscGrid, NodeKind, Region};
pub use higgs::{cyclic_higgs, HiggsBundleDisc};
pub use metric::MetricField;
pub use pairing::SymmetricPairingField;
pub use poly::{parse_poly, ComplexPoly};
pub use scalar::{CMat, Cx, Real};
pub use solver::{hitchin_residual, solve_dirichlet, solve_with_retry, Scheme, SolveConfig, SolveStats};

pub type Poly = ComplexPoly<f64>;
pub type Higgs = HiggsBundleDisc<f64>;
pub type Grid = DiscGrid<f64>;
pub type Metric = MetricField<f64>;
pub type Pairing = SymmetricPairingField<f64>;

pub type Poly32 = ComplexPoly<f32>;
pub type Higgs32 = HiggsBundleDisc<f32>;
pub type Metric32 = MetricField<f32>;
