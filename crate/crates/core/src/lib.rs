//! Dynamical systems whose time runs over a free group.
//!
//! A family of invertible maps `f_1, …, f_|S|` on an interval induces the
//! action `t ↦ D_t` of the free group on `S`. This crate provides reduced
//! word arithmetic, Cayley balls, subgroup membership oracles, orbit
//! evaluation with bounded periodicity checks, and Cesàro means over balls,
//! together with two solvable models: the multiplicative bank and rotations
//! of the circle.

pub mod ball;
pub mod bank;
pub mod cesaro;
pub mod circle;
pub mod engine;
pub mod error;
pub mod family;
pub mod scalar;
pub mod subgroup;
pub mod word;

pub use bank::{Bank, BankPeriodicity, Trichotomy};
pub use cesaro::{cesaro_bounds, cesaro_scan, geometric_k_sum, sign_ball_sum, sign_cesaro, BoundParams, CesaroReport};
pub use circle::{Circle, CircleSet, Density};
pub use ball::{ball_decompose, ball_enumerate, ball_size, sphere_size, DEFAULT_NODE_CAP};
pub use engine::{Action, Mdtds, OrbitBall, PeriodicityVerdict, RaySpec};
pub use error::{Error, MapFault, Result};
pub use family::{ElementaryMap, Family, Interval, MapFamily};
pub use scalar::{ratio, Rational, Scalar};
pub use subgroup::{Index, SubgroupSpec};
pub use word::{Gen, Letter, Sign, Word};

pub type ExactFamily = Family<Rational>;
pub type FloatFamily = Family<f64>;
pub type ExactBank = Bank<Rational>;
pub type ExactCircle = Circle<Rational>;
pub type FloatCircle = Circle<f64>;
