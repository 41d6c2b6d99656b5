//! Optimal singular control of a Lévy process with two-sided exponential
//! jumps: fluctuation identities, the optimal barrier, its certification and
//! a Monte Carlo simulator for barrier strategies.

pub mod cost;
pub mod error;
pub mod exppoly;
pub mod fluctuation;
pub mod generator;
pub mod levy;
pub mod mc;
pub mod quad;
pub mod scenario;
pub mod threshold;

pub use cost::{CostFamily, CostModel};
pub use error::{Error, Result};
pub use exppoly::ExpPoly;
pub use fluctuation::{solve_phi_equals_delta, Extremum, ExtremumLaw, RootSet};
pub use levy::{LevyModel, ProcessKind};
pub use threshold::{GridSpec, Problem};
pub use mc::{barrier_sweep, estimate_cost, CostEstimate, SimConfig};
pub use scenario::Scenario;
