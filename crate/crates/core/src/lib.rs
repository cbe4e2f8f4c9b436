//! Quantum-speed-limit (QSL) times for a qubit under unital dephasing
//! followed by a local filtering operation.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`]: closed-form 2×2 matrix arithmetic and qubit densities;
//! * [`models`]: Ohmic phase damping and random-telegraph dephasing channels;
//! * [`filtering`]: the filter `F = diag(√(1−k), √k)` and filtered trajectories;
//! * [`qsl`]: the relative-purity QSL engine, closed forms and sweeps;
//! * [`oracles`]: brute-force validators used by the test-suite and `qsl validate`;
//! * [`cli`]: configuration, figure presets and output writers behind the `qsl` binary.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod filtering;
pub mod models;
pub mod oracles;
pub mod qsl;
pub mod quadrature;

pub use algebra::{Matrix2, QubitDensity};
pub use error::{QslError, Result};
pub use filtering::{FilterOp, FilteredTrajectory};
pub use models::{ChannelSpec, DephasingChannel, OhmicSpec, RtnSpec};
pub use qsl::{QslResult, QuadConfig, Variant};
