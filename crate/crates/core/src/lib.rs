//! Discrete-velocity solver for the stationary ellipsoidal BGK (ES-BGK)
//! equation on the slab `[0, 1]`.
//!
//! The solver iterates the mild (characteristic) form of
//!
//! ```text
//! v1 ∂f/∂x = (M_ν(f) − f) / τ,     τ = κ (1 − ν)
//! ```
//!
//! with boundary traces built from a mixture of prescribed inflow, diffusive
//! re-emission and specular reflection. Each iteration evaluates the
//! ellipsoidal Gaussian closure of the previous iterate, updates the inflow
//! traces and marches every discrete velocity along its characteristic.
//!
//! Module map:
//!
//! * [`grid`]: velocity and spatial grids, half-space moments, trace norms and
//!   the boundary-data constants that enter the a-priori bounds.
//! * [`macros`]: macroscopic fields, the temperature tensor and the Gaussian.
//! * [`boundary`]: wall Maxwellians, inflow data and both boundary operators.
//! * [`transport`]: the exponential-integrator sweep and mild-form residual.
//! * [`iteration`]: the fixed-point driver, invariant ledger and contraction fit.

pub mod boundary;
pub mod error;
pub mod grid;
pub mod iteration;
pub mod linalg;
pub mod macros;
pub mod transport;

pub use boundary::{BoundarySpec, FluxLedger, InflowData, InflowTraces, Regime};
pub use error::{Error, Result};
pub use grid::{
    BoundaryConstants, DistributionField, HalfSpace, MomentWeight, PhaseGrid, QuadratureRule,
    SpatialGrid, TraceNorms, VelocityGrid,
};
pub use iteration::{
    solve, ContractionSummary, InitialGuess, IterationReport, OmegaEntry, Problem, Solution,
    SolverConfig, Termination,
};
pub use macros::{MacroFields, TemperatureTensor};
