//! Monte Carlo for barrier strategies.
//!
//! Paths of the free process are generated as epoch streams, reflected at
//! one or more barriers by the running-maximum Skorokhod map, and priced
//! against a discounted running cost and a state-dependent control cost.
//! A barrier sweep reuses every path for all barriers.

mod estimate;
mod path;
mod reflect;

pub use estimate::{
    barrier_sweep, estimate_cost, CostComponents, CostEstimate, Costs, SweepReport, SweepRow,
};
pub use path::{simulate_path, Epoch, PathEvents, PathSimulator};
pub use reflect::{reflect_at_barrier, ControlledEpoch, ControlledPath, Reflector};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-6;

/// Simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: f64,
    pub dt: f64,
    pub paths: usize,
    pub seed: u64,
    pub start_x: f64,
    pub barrier: f64,
    /// Exponent of the growth bound used for the truncation tail bound.
    pub theta: f64,
    pub tail_tolerance: f64,
}

impl SimConfig {
    /// Horizon 40/δ, grid step 1e-3 and the default tail tolerance.
    pub fn new(delta: f64, theta: f64, paths: usize, seed: u64, start_x: f64, barrier: f64) -> Self {
        Self {
            horizon: 40.0 / delta,
            dt: 1e-3,
            paths,
            seed,
            start_x,
            barrier,
            theta,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.dt > 0.0 && self.dt <= self.horizon) {
            return bad(format!("dt must lie in (0, horizon], got {}", self.dt));
        }
        if self.paths == 0 {
            return bad("paths must be at least 1".into());
        }
        if !self.start_x.is_finite() || self.barrier.is_nan() {
            return bad("start_x must be finite and barrier not NaN".into());
        }
        if self.theta.is_nan() || self.theta <= 0.0 {
            return bad(format!("theta must be positive, got {}", self.theta));
        }
        if self.tail_tolerance.is_nan() || self.tail_tolerance < 0.0 {
            return bad("tail_tolerance must be non-negative".into());
        }
        Ok(())
    }
}

/// Worker count from `LSC_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("LSC_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Compensated) {
        self.add(other.sum);
        self.add(other.carry);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}
