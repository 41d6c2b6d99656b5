use serde::{Deserialize, Serialize};

use super::path::{Epoch, PathEvents};

/// What the reflected process did over one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlledEpoch {
    pub t: f64,
    /// X^b_{t−}.
    pub x_minus: f64,
    /// X^b_t.
    pub x_plus: f64,
    /// D_{t−}.
    pub d_minus: f64,
    /// D_t.
    pub d_plus: f64,
    /// Increase of D over the continuous segment ending at `t`.
    pub dd_cont: f64,
    /// ΔD_t.
    pub dd_jump: f64,
    /// ΔX_t of the free process.
    pub jump: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlledPath {
    pub barrier: f64,
    pub start_x: f64,
    /// D₀ = (x − b)⁺.
    pub d0: f64,
    pub epochs: Vec<ControlledEpoch>,
}

/// Skorokhod map at barrier b: D_t = max(0, sup_{s≤t} X_s − b).
#[derive(Debug, Clone, Copy)]
pub struct Reflector {
    barrier: f64,
    running_max: f64,
    d: f64,
}

impl Reflector {
    pub fn new(barrier: f64, start_x: f64) -> Self {
        Self {
            barrier,
            running_max: start_x,
            d: (start_x - barrier).max(0.0),
        }
    }

    pub fn barrier(&self) -> f64 {
        self.barrier
    }

    pub fn control(&self) -> f64 {
        self.d
    }

    fn level(&self, m: f64) -> f64 {
        (m - self.barrier).max(0.0).max(self.d)
    }

    pub fn step(&mut self, e: &Epoch) -> ControlledEpoch {
        let d_start = self.d;
        self.running_max = self.running_max.max(e.seg_max).max(e.x_minus);
        let d_minus = self.level(self.running_max);
        self.running_max = self.running_max.max(e.x_plus());
        let d_plus = self.level(self.running_max);
        self.d = d_plus;
        ControlledEpoch {
            t: e.t,
            x_minus: e.x_minus - d_minus,
            x_plus: e.x_plus() - d_plus,
            d_minus,
            d_plus,
            dd_cont: d_minus - d_start,
            dd_jump: d_plus - d_minus,
            jump: e.jump,
        }
    }
}

/// Applies the reflecting control at `barrier` to a simulated path.
pub fn reflect_at_barrier(events: &PathEvents, barrier: f64) -> ControlledPath {
    let mut r = Reflector::new(barrier, events.start_x);
    let d0 = r.control();
    ControlledPath {
        barrier,
        start_x: events.start_x,
        d0,
        epochs: events.epochs.iter().map(|e| r.step(e)).collect(),
    }
}
