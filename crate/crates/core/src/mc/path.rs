use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SimConfig;
use crate::levy::LevyModel;

/// One observation epoch of the free process: a grid point, a jump time or
/// the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Epoch {
    pub t: f64,
    /// X_{t−}.
    pub x_minus: f64,
    /// Supremum of the continuous path over the segment ending at `t`.
    pub seg_max: f64,
    /// Signed jump at `t` (zero at grid points).
    pub jump: f64,
}

impl Epoch {
    pub fn x_plus(&self) -> f64 {
        self.x_minus + self.jump
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEvents {
    pub start_x: f64,
    pub epochs: Vec<Epoch>,
}

/// Generates paths of X started at `start_x`. Each path draws from its own
/// ChaCha8 streams selected by the path index, so paths are reproducible one
/// by one.
#[derive(Debug, Clone, Copy)]
pub struct PathSimulator {
    model: LevyModel,
    horizon: f64,
    dt: f64,
    seed: u64,
    start_x: f64,
}

impl PathSimulator {
    pub fn new(model: &LevyModel, config: &SimConfig) -> Self {
        Self {
            model: *model,
            horizon: config.horizon,
            dt: config.dt,
            seed: config.seed,
            start_x: config.start_x,
        }
    }

    pub fn start_x(&self) -> f64 {
        self.start_x
    }

    /// Jumps and diffusion use separate streams so that refining the grid
    /// leaves the jump times and sizes of a path unchanged.
    fn rngs(&self, path_index: u64) -> (ChaCha8Rng, ChaCha8Rng) {
        let mut jumps = ChaCha8Rng::seed_from_u64(self.seed);
        jumps.set_stream(2 * path_index);
        let mut diffusion = ChaCha8Rng::seed_from_u64(self.seed);
        diffusion.set_stream(2 * path_index + 1);
        (jumps, diffusion)
    }

    /// Streams the epochs of one path to `visit`.
    pub fn run(&self, path_index: u64, mut visit: impl FnMut(&Epoch)) {
        let m = &self.model;
        let (mut jumps, mut noise) = self.rngs(path_index);
        let (mu, sigma) = (m.drift(), m.sigma());
        // A pure jump path is constant between jumps, so the grid adds nothing.
        let use_grid = sigma > 0.0 || mu != 0.0;
        let up = m.has_up_jumps().then(|| {
            (
                Exp::new(m.lambda_up()).expect("positive rate"),
                Exp::new(m.eta_up()).expect("positive rate"),
            )
        });
        let down = m.has_down_jumps().then(|| {
            (
                Exp::new(m.lambda_down()).expect("positive rate"),
                Exp::new(m.eta_down()).expect("positive rate"),
            )
        });
        let mut next_up = up.map_or(f64::INFINITY, |(clock, _)| clock.sample(&mut jumps));
        let mut next_down = down.map_or(f64::INFINITY, |(clock, _)| clock.sample(&mut jumps));

        let mut t = 0.0;
        let mut x = self.start_x;
        let mut k = 1u64;
        loop {
            let next_grid = if use_grid {
                (k as f64 * self.dt).min(self.horizon)
            } else {
                self.horizon
            };
            let t_next = next_grid.min(next_up).min(next_down);
            let h = t_next - t;
            let mut x_minus = x + mu * h;
            let mut seg_max = x.max(x_minus);
            if sigma > 0.0 && h > 0.0 {
                let z: f64 = StandardNormal.sample(&mut noise);
                x_minus += sigma * h.sqrt() * z;
                // maximum of the Brownian bridge between the two endpoints
                let u: f64 = 1.0 - noise.random::<f64>();
                let gap = x_minus - x;
                seg_max = 0.5 * (x + x_minus + (gap * gap - 2.0 * sigma * sigma * h * u.ln()).sqrt());
            }
            let mut jump = 0.0;
            if t_next == next_up {
                let (clock, size) = up.expect("finite time implies a clock");
                jump += size.sample(&mut jumps);
                next_up = t_next + clock.sample(&mut jumps);
            } else if t_next == next_down {
                let (clock, size) = down.expect("finite time implies a clock");
                jump -= size.sample(&mut jumps);
                next_down = t_next + clock.sample(&mut jumps);
            }
            visit(&Epoch {
                t: t_next,
                x_minus,
                seg_max,
                jump,
            });
            if t_next >= self.horizon {
                break;
            }
            if t_next == next_grid {
                k += 1;
            }
            t = t_next;
            x = x_minus + jump;
        }
    }

    pub fn events(&self, path_index: u64) -> PathEvents {
        let mut epochs = Vec::new();
        self.run(path_index, |e| epochs.push(*e));
        PathEvents {
            start_x: self.start_x,
            epochs,
        }
    }
}

/// Event sequence of path `path_index`.
pub fn simulate_path(model: &LevyModel, config: &SimConfig, path_index: u64) -> PathEvents {
    PathSimulator::new(model, config).events(path_index)
}
