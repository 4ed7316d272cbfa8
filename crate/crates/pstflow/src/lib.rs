//! Steady-state power grid analysis with phase-shifting transformers whose
//! impedance varies with the phase angle.
//!
//! The library parses a JSON case format, builds the (generally asymmetric)
//! bus admittance matrix, runs Newton-Raphson AC and linearized DC power
//! flows, and layers studies on top: violation scans, phase-angle sweeps
//! with and without impedance correction, N-1 contingencies, and PTDF/ATC
//! transfer analysis.

pub mod correction;
pub mod dc;
mod linear;
pub mod model;
pub mod powerflow;
pub mod report;
pub mod studies;
pub mod ybus;

pub use correction::{interpolate_factor, CorrectionEvaluation};
pub use model::{parse_case, serialize_case, to_per_unit, validate, Network};
pub use powerflow::{solve, PowerFlowSolution, SolveOptions};
pub use ybus::assemble_ybus;
