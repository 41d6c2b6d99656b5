use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::path::PathSimulator;
use super::reflect::Reflector;
use super::{thread_cap, Compensated, SimConfig};
use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::quad::gl16;

const CHUNK: usize = 256;

/// Running cost f and marginal control cost c as seen by the simulator.
pub trait Costs: Sync {
    fn running(&self, x: f64) -> f64;

    fn control(&self, x: f64) -> f64;

    /// `∫_lo^hi c(y) dy`, by 16-point Gauss–Legendre unless overridden.
    fn control_integral(&self, lo: f64, hi: f64) -> f64 {
        gl16().integrate(|y| self.control(y), lo, hi)
    }

    /// K with |f(x)| ≤ K(1 + cosh θx), if one exists.
    fn growth_bound(&self, theta: f64) -> Option<f64>;
}

impl Costs for CostModel {
    fn running(&self, x: f64) -> f64 {
        self.f(x)
    }

    fn control(&self, x: f64) -> f64 {
        self.c(x)
    }

    fn control_integral(&self, lo: f64, hi: f64) -> f64 {
        self.control_cost_integral(lo, hi)
    }

    fn growth_bound(&self, theta: f64) -> Option<f64> {
        let scan = self.growth_scan(theta);
        scan.bounded.then_some(scan.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostComponents {
    pub running: f64,
    pub continuous_control: f64,
    pub jump_control: f64,
    pub initial_control: f64,
}

impl CostComponents {
    pub fn total(&self) -> f64 {
        self.running + self.continuous_control + self.jump_control + self.initial_control
    }
}

/// Estimate of the discounted cost of reflecting at one barrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub components: CostComponents,
    /// Bound on the cost discarded by stopping at the horizon.
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub barrier: f64,
    pub estimate: CostEstimate,
}

/// Shape of a sweep: where the minimum sits and whether the estimates fall
/// towards it and rise after it, up to overlapping confidence intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub argmin_index: usize,
    pub argmin_barrier: f64,
    pub decreasing_before: bool,
    pub increasing_after: bool,
}

impl SweepReport {
    fn new(rows: &[SweepRow]) -> Self {
        let argmin_index = rows
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.estimate.mean.total_cmp(&b.1.estimate.mean))
            .map_or(0, |(i, _)| i);
        // J_{i+1} may exceed J_i only within the combined 2σ band
        let rises = |lo: &SweepRow, hi: &SweepRow| {
            let band = 2.0 * lo.estimate.stderr.hypot(hi.estimate.stderr);
            hi.estimate.mean > lo.estimate.mean + band
        };
        let decreasing_before = rows[..=argmin_index.min(rows.len().saturating_sub(1))]
            .windows(2)
            .all(|w| !rises(&w[0], &w[1]));
        let increasing_after = rows[argmin_index.min(rows.len())..]
            .windows(2)
            .all(|w| !rises(&w[1], &w[0]));
        Self {
            argmin_index,
            argmin_barrier: rows.get(argmin_index).map_or(f64::NAN, |r| r.barrier),
            decreasing_before,
            increasing_after,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Accum {
    total: Compensated,
    total_sq: Compensated,
    running: Compensated,
    cont: Compensated,
    jump: Compensated,
    initial: Compensated,
}

impl Accum {
    fn push(&mut self, p: &CostComponents) {
        let total = p.total();
        self.total.add(total);
        self.total_sq.add(total * total);
        self.running.add(p.running);
        self.cont.add(p.continuous_control);
        self.jump.add(p.jump_control);
        self.initial.add(p.initial_control);
    }

    fn merge(&mut self, o: &Accum) {
        self.total.merge(&o.total);
        self.total_sq.merge(&o.total_sq);
        self.running.merge(&o.running);
        self.cont.merge(&o.cont);
        self.jump.merge(&o.jump);
        self.initial.merge(&o.initial);
    }

    fn finish(&self, n: usize, tail_bound: f64) -> CostEstimate {
        let nf = n as f64;
        let mean = self.total.value() / nf;
        let var = if n > 1 {
            ((self.total_sq.value() - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        CostEstimate {
            mean,
            stderr: (var / nf).sqrt(),
            components: CostComponents {
                running: self.running.value() / nf,
                continuous_control: self.cont.value() / nf,
                jump_control: self.jump.value() / nf,
                initial_control: self.initial.value() / nf,
            },
            tail_bound,
        }
    }
}

/// Per-barrier bookkeeping along one path.
struct Ledger {
    reflector: Reflector,
    c_at_barrier: f64,
    x_prev: f64,
    f_prev: f64,
    cost: CostComponents,
}

impl Ledger {
    fn new<C: Costs + ?Sized>(costs: &C, barrier: f64, start_x: f64) -> Self {
        let reflector = Reflector::new(barrier, start_x);
        let d0 = reflector.control();
        let x0 = start_x - d0;
        let initial_control = if d0 > 0.0 {
            costs.control_integral(x0, start_x)
        } else {
            0.0
        };
        Self {
            reflector,
            c_at_barrier: if barrier.is_finite() { costs.control(barrier) } else { 0.0 },
            x_prev: x0,
            f_prev: costs.running(x0),
            cost: CostComponents {
                running: 0.0,
                continuous_control: 0.0,
                jump_control: 0.0,
                initial_control,
            },
        }
    }
}

fn simulate_chunk<C: Costs + ?Sized>(
    sim: &PathSimulator,
    costs: &C,
    delta: f64,
    barriers: &[f64],
    paths: std::ops::Range<usize>,
) -> Vec<Accum> {
    let mut acc = vec![Accum::default(); barriers.len()];
    let mut ledgers: Vec<Ledger> = Vec::with_capacity(barriers.len());
    for i in paths {
        ledgers.clear();
        ledgers.extend(barriers.iter().map(|&b| Ledger::new(costs, b, sim.start_x())));
        let mut disc_prev = 1.0;
        sim.run(i as u64, |e| {
            let disc = (-delta * e.t).exp();
            let weight = (disc_prev - disc) / delta;
            let mid = 0.5 * (disc_prev + disc);
            for l in ledgers.iter_mut() {
                let ce = l.reflector.step(e);
                let f_minus = if ce.x_minus == l.x_prev {
                    l.f_prev
                } else {
                    costs.running(ce.x_minus)
                };
                l.cost.running += 0.5 * (l.f_prev + f_minus) * weight;
                if ce.dd_cont > 0.0 {
                    l.cost.continuous_control += l.c_at_barrier * ce.dd_cont * mid;
                }
                if ce.dd_jump > 0.0 {
                    l.cost.jump_control +=
                        disc * costs.control_integral(ce.x_plus, ce.x_plus + ce.dd_jump);
                }
                l.f_prev = if ce.x_plus == ce.x_minus {
                    f_minus
                } else {
                    costs.running(ce.x_plus)
                };
                l.x_prev = ce.x_plus;
            }
            disc_prev = disc;
        });
        for (a, l) in acc.iter_mut().zip(&ledgers) {
            a.push(&l.cost);
        }
    }
    acc
}

fn tail_bound<C: Costs + ?Sized>(costs: &C, delta: f64, config: &SimConfig, barrier: f64) -> f64 {
    match costs.growth_bound(config.theta) {
        Some(k) => {
            (-delta * config.horizon).exp() * k * (1.0 + (config.theta * barrier).cosh()) / delta
        }
        None => f64::INFINITY,
    }
}

fn run_sweep<C: Costs + ?Sized>(
    model: &LevyModel,
    costs: &C,
    delta: f64,
    config: &SimConfig,
    barriers: &[f64],
) -> Result<Vec<SweepRow>> {
    config.validate()?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Config(format!("delta must be positive, got {delta}")));
    }
    let a1 = model.check_assumption1(delta, config.theta);
    if !a1.passed {
        return Err(Error::Config(format!(
            "assumption on (δ, θ) fails: {}",
            a1.reason.unwrap_or_default()
        )));
    }
    let tails: Vec<f64> = barriers
        .iter()
        .map(|&b| tail_bound(costs, delta, config, b))
        .collect();
    if let Some((b, t)) = barriers
        .iter()
        .zip(&tails)
        .find(|(_, &t)| t.is_nan() || t > config.tail_tolerance)
    {
        return Err(Error::Config(format!(
            "truncation tail bound {t:e} at barrier {b} exceeds tolerance {:e}; increase the horizon",
            config.tail_tolerance
        )));
    }

    let sim = PathSimulator::new(model, config);
    let chunks: Vec<std::ops::Range<usize>> = (0..config.paths)
        .step_by(CHUNK)
        .map(|s| s..(s + CHUNK).min(config.paths))
        .collect();
    let work = || -> Vec<Vec<Accum>> {
        chunks
            .par_iter()
            .map(|r| simulate_chunk(&sim, costs, delta, barriers, r.clone()))
            .collect()
    };
    let partials = match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    // merged in chunk order so the result does not depend on scheduling
    let mut total = vec![Accum::default(); barriers.len()];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    Ok(barriers
        .iter()
        .zip(&total)
        .zip(&tails)
        .map(|((&barrier, acc), &tail)| SweepRow {
            barrier,
            estimate: acc.finish(config.paths, tail),
        })
        .collect())
}

/// Estimate of J_δ(x, D^b) for x = `config.start_x` and b = `config.barrier`.
pub fn estimate_cost<C: Costs + ?Sized>(
    model: &LevyModel,
    costs: &C,
    delta: f64,
    config: &SimConfig,
) -> Result<CostEstimate> {
    Ok(run_sweep(model, costs, delta, config, &[config.barrier])?[0].estimate)
}

/// Estimates for several barriers on common paths. `config.barrier` is
/// ignored.
pub fn barrier_sweep<C: Costs + ?Sized>(
    model: &LevyModel,
    costs: &C,
    delta: f64,
    config: &SimConfig,
    barriers: &[f64],
) -> Result<(Vec<SweepRow>, SweepReport)> {
    if barriers.is_empty() {
        return Err(Error::Config("barrier list is empty".into()));
    }
    let rows = run_sweep(model, costs, delta, config, barriers)?;
    let report = SweepReport::new(&rows);
    Ok((rows, report))
}
