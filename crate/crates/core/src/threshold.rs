//! Optimal barrier, stopping value and control value function.
//!
//! The barrier x* is the root of Q. The stopping value for a barrier b is
//!
//! ```text
//! v_b(x) = H(x) − δ⁻¹ E[Q(x + S) 1{x + S ≥ b}],
//! ```
//!
//! which equals c on [b, ∞). The control value function is the primitive
//! `u = W + (f(b) + 𝓛W(b))/δ` with `W(x) = ∫_b^x v_b`. At b = x* it solves
//! the HJB system
//!
//! ```text
//! 𝓛u − δu + f ≥ 0 (= 0 left of x*),   u′ ≤ c (= c right of x*).
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{CostFamily, CostModel};
use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::fluctuation::{solve_phi_equals_delta, Extremum, ExtremumLaw, RootSet};
use crate::generator::{apply_generator, Differentiable};
use crate::levy::LevyModel;
use crate::quad::brent;

const ROOT_SEARCH_LIMIT: f64 = 1e6;
const ROOT_XTOL: f64 = 1e-12;
const A4_WIDTH: f64 = 20.0;
const A4_POINTS: usize = 200;
const A4_TOL: f64 = 1e-10;

/// A fully specified control problem with its precomputed ingredients.
#[derive(Debug, Clone)]
pub struct Problem {
    pub model: LevyModel,
    pub cost: CostModel,
    pub delta: f64,
    pub roots: RootSet,
    pub sup: ExtremumLaw,
    pub inf: ExtremumLaw,
    pub h: ExpPoly,
    pub q: ExpPoly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assumption4Report {
    pub left_grid_max_q: f64,
    pub right_grid_monotone: bool,
    pub grid: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSearch {
    pub x_star: f64,
    pub q_at_root: f64,
    pub assumption4: Assumption4Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo_offset: f64,
    pub hi_offset: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            lo_offset: -8.0,
            hi_offset: 8.0,
            points: 400,
        }
    }
}

impl GridSpec {
    pub fn points_around(&self, center: f64) -> Vec<f64> {
        linspace(center + self.lo_offset, center + self.hi_offset, self.points)
    }
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HjbReport {
    pub barrier: f64,
    pub grid: GridSpec,
    pub tol: f64,
    /// max |𝓛u − δu + f| over grid points left of the barrier.
    pub max_abs_residual_left: f64,
    /// min (𝓛u − δu + f) over grid points at or right of the barrier.
    pub min_residual_right: f64,
    /// max (u′ − c) over the whole grid.
    pub max_gradient_excess: f64,
    /// max |u′ − c| at or right of the barrier.
    pub max_abs_gradient_gap_right: f64,
    pub pass: bool,
}

impl Problem {
    pub fn new(model: LevyModel, cost: CostModel, delta: f64) -> Result<Self> {
        let roots = solve_phi_equals_delta(&model, delta)?;
        let sup = roots.extremum_law(&model, Extremum::Sup)?;
        let inf = roots.extremum_law(&model, Extremum::Inf)?;
        let h = cost.h_function(&model, delta)?;
        let q = cost.q_function(&model, delta, &roots)?;
        Ok(Self {
            model,
            cost,
            delta,
            roots,
            sup,
            inf,
            h,
            q,
        })
    }

    /// Magnitude used to turn relative tolerances into absolute ones.
    pub fn scale_at(&self, x: f64) -> f64 {
        1.0 + self.cost.f(x).abs() + self.cost.c(x).abs()
    }

    /// Root of Q by geometric bracket expansion from 0 and Brent, followed by
    /// the sign/monotonicity grid checks.
    pub fn find_threshold(&self) -> Result<ThresholdSearch> {
        let q = |x: f64| self.q.eval(x);
        let q0 = q(0.0);
        let x_star = if q0 == 0.0 {
            0.0
        } else {
            let dir = if q0 < 0.0 { 1.0 } else { -1.0 };
            let mut near = 0.0;
            let mut step = 1.0;
            let mut far = None;
            while step <= 2.0 * ROOT_SEARCH_LIMIT {
                let x = (dir * step).clamp(-ROOT_SEARCH_LIMIT, ROOT_SEARCH_LIMIT);
                let v = q(x);
                if v.is_nan() {
                    break;
                }
                if v.signum() != q0.signum() {
                    far = Some(x);
                    break;
                }
                near = x;
                step *= 2.0;
            }
            let far = far.ok_or(Error::NoRoot)?;
            let (lo, hi) = if near < far { (near, far) } else { (far, near) };
            brent(q, lo, hi, ROOT_XTOL, 500)?
        };
        let assumption4 = self.check_assumption4(x_star);
        let search = ThresholdSearch {
            x_star,
            q_at_root: q(x_star),
            assumption4,
        };
        if !search.assumption4.passed {
            return Err(Error::Assumption4Violation(format!(
                "x* = {x_star}: max Q on the left grid = {}, monotone on the right grid = {}",
                search.assumption4.left_grid_max_q, search.assumption4.right_grid_monotone
            )));
        }
        Ok(search)
    }

    /// Q ≤ 0 on [x*−20, x*] and Q non-decreasing on [x*, x*+20], 200 points each.
    pub fn check_assumption4(&self, x_star: f64) -> Assumption4Report {
        let tol = A4_TOL * self.scale_at(x_star);
        let left = linspace(x_star - A4_WIDTH, x_star, A4_POINTS);
        let left_grid_max_q = left
            .iter()
            .map(|&x| self.q.eval(x))
            .fold(f64::NEG_INFINITY, f64::max);
        let right: Vec<f64> = linspace(x_star, x_star + A4_WIDTH, A4_POINTS)
            .into_iter()
            .map(|x| self.q.eval(x))
            .collect();
        let right_grid_monotone = right
            .windows(2)
            .all(|w| w[1] >= w[0] - A4_TOL * (self.scale_at(x_star) + w[0].abs()));
        Assumption4Report {
            left_grid_max_q,
            right_grid_monotone,
            grid: format!(
                "{A4_POINTS} points on [x*-{A4_WIDTH}, x*] and {A4_POINTS} points on [x*, x*+{A4_WIDTH}]"
            ),
            passed: left_grid_max_q <= tol && right_grid_monotone,
        }
    }

    /// Explicit barrier for the exp-exp and n = 1 monomial-linear families.
    pub fn closed_form_threshold(&self) -> Option<f64> {
        closed_form_threshold(&self.cost, &self.model, self.delta, &self.roots)
    }

    pub fn stopping_value(&self, barrier: f64) -> Result<StoppingValue> {
        let inv = 1.0 / self.delta;
        let left = &self.h - &self.sup.sup_tail_transform(&self.q, barrier)?.scaled(inv);
        let right = &self.h - &self.sup.transform(&self.q)?.scaled(inv);
        Ok(StoppingValue {
            barrier,
            delta: self.delta,
            left,
            right,
            h: self.h.clone(),
            q: self.q.clone(),
            sup: self.sup.clone(),
        })
    }

    pub fn value_function(&self, v: &StoppingValue) -> Result<ValueFunction> {
        value_function(v, &self.cost, &self.model, self.delta)
    }

    pub fn hjb_residual_check(&self, u: &ValueFunction, grid: GridSpec) -> HjbReport {
        hjb_residual_check(u, &self.cost, &self.model, self.delta, grid)
    }

    /// Runs the whole pipeline: barrier, stopping value, value function and
    /// HJB certification.
    pub fn solve(&self, grid: GridSpec) -> Result<ThresholdSolution> {
        let search = self.find_threshold()?;
        let v = self.stopping_value(search.x_star)?;
        let u = self.value_function(&v)?;
        let hjb = self.hjb_residual_check(&u, grid);
        Ok(ThresholdSolution {
            x_star: search.x_star,
            closed_form_x_star: self.closed_form_threshold(),
            assumption4: search.assumption4,
            v,
            u,
            hjb,
        })
    }
}

pub fn find_threshold(cost: &CostModel, model: &LevyModel, delta: f64) -> Result<f64> {
    Ok(Problem::new(*model, *cost, delta)?.find_threshold()?.x_star)
}

pub fn closed_form_threshold(
    cost: &CostModel,
    model: &LevyModel,
    delta: f64,
    roots: &RootSet,
) -> Option<f64> {
    let up_pole = model.has_up_jumps().then(|| model.eta_up());
    let down_pole = model.has_down_jumps().then(|| model.eta_down());
    match cost.family() {
        CostFamily::ExpExp { a, alpha, b, beta } => {
            // log of 1/(E e^{αI} · E e^{−βS}) written in roots and poles
            let mut log_ratio = 0.0;
            for &g in &roots.negative_roots {
                log_ratio += ((g + alpha) / g).ln();
            }
            for &r in &roots.positive_roots {
                log_ratio += ((r + beta) / r).ln();
            }
            if let Some(e2) = down_pole {
                log_ratio += (e2 / (e2 + alpha)).ln();
            }
            if let Some(e1) = up_pole {
                log_ratio += (e1 / (e1 + beta)).ln();
            }
            Some(((delta * b / (a * alpha)).ln() + log_ratio) / (alpha + beta))
        }
        CostFamily::MonomialLinear { a, n: 1, .. } => {
            let es: f64 = roots.positive_roots.iter().map(|r| 1.0 / r).sum::<f64>()
                - up_pole.map_or(0.0, |e| 1.0 / e);
            let ei: f64 = down_pole.map_or(0.0, |e| 1.0 / e)
                - roots.negative_roots.iter().map(|g| 1.0 / g).sum::<f64>();
            Some((delta * es - 2.0 * a * ei) / (2.0 * a + delta))
        }
        _ => None,
    }
}

pub fn stopping_value(problem: &Problem, x_star: f64) -> Result<StoppingValue> {
    problem.stopping_value(x_star)
}

/// v for a given barrier, held as one exponential polynomial on each side.
#[derive(Debug, Clone)]
pub struct StoppingValue {
    pub barrier: f64,
    delta: f64,
    left: ExpPoly,
    right: ExpPoly,
    h: ExpPoly,
    q: ExpPoly,
    sup: ExtremumLaw,
}

impl StoppingValue {
    pub fn eval(&self, x: f64) -> f64 {
        self.piece(x).eval(x)
    }

    fn piece(&self, x: f64) -> &ExpPoly {
        if x < self.barrier {
            &self.left
        } else {
            &self.right
        }
    }

    pub fn left_piece(&self) -> &ExpPoly {
        &self.left
    }

    pub fn right_piece(&self) -> &ExpPoly {
        &self.right
    }

    /// v′(x), taking the right-hand piece at the barrier.
    pub fn derivative(&self, x: f64) -> f64 {
        self.piece(x).derivative().eval(x)
    }

    /// v′ from the left and from the right at the barrier.
    pub fn one_sided_derivatives_at_barrier(&self) -> (f64, f64) {
        let b = self.barrier;
        (self.left.derivative().eval(b), self.right.derivative().eval(b))
    }

    /// Pointwise evaluation through the expectation itself.
    pub fn eval_by_expectation(&self, x: f64) -> Result<f64> {
        let tail = self.sup.expect_closed(&self.q, x, Some(self.barrier))?;
        Ok(self.h.eval(x) - tail / self.delta)
    }
}

/// `W(x) = ∫_b^x v(y) dy`, piecewise exact.
#[derive(Debug, Clone)]
pub struct Primitive {
    barrier: f64,
    left: ExpPoly,
    right: ExpPoly,
    v_left: ExpPoly,
    v_right: ExpPoly,
    dv_left: ExpPoly,
    dv_right: ExpPoly,
}

impl Primitive {
    pub fn new(v: &StoppingValue) -> Self {
        let b = v.barrier;
        let anchor = |p: &ExpPoly| {
            let anti = p.antiderivative();
            let at_b = anti.eval(b);
            anti + ExpPoly::constant(-at_b)
        };
        Self {
            barrier: b,
            left: anchor(&v.left),
            right: anchor(&v.right),
            v_left: v.left.clone(),
            v_right: v.right.clone(),
            dv_left: v.left.derivative(),
            dv_right: v.right.derivative(),
        }
    }
}

impl Differentiable for Primitive {
    fn value(&self, x: f64) -> f64 {
        if x < self.barrier {
            self.left.eval(x)
        } else {
            self.right.eval(x)
        }
    }

    fn first(&self, x: f64) -> f64 {
        if x < self.barrier {
            self.v_left.eval(x)
        } else {
            self.v_right.eval(x)
        }
    }

    fn second(&self, x: f64) -> f64 {
        if x < self.barrier {
            self.dv_left.eval(x)
        } else {
            self.dv_right.eval(x)
        }
    }
}

/// u = W + (f(b) + 𝓛W(b))/δ.
#[derive(Debug, Clone)]
pub struct ValueFunction {
    pub barrier: f64,
    pub constant: f64,
    w: Primitive,
    v: StoppingValue,
}

impl ValueFunction {
    pub fn eval(&self, x: f64) -> f64 {
        self.w.value(x) + self.constant
    }

    pub fn stopping_value(&self) -> &StoppingValue {
        &self.v
    }

    pub fn primitive(&self) -> &Primitive {
        &self.w
    }
}

impl Differentiable for ValueFunction {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }
    fn first(&self, x: f64) -> f64 {
        self.w.first(x)
    }
    fn second(&self, x: f64) -> f64 {
        self.w.second(x)
    }
}

pub fn value_function(
    v: &StoppingValue,
    cost: &CostModel,
    model: &LevyModel,
    delta: f64,
) -> Result<ValueFunction> {
    let w = Primitive::new(v);
    let b = v.barrier;
    let lw = apply_generator(&w, model, b);
    let constant = (cost.f(b) + lw) / delta;
    if !constant.is_finite() {
        return Err(Error::Convergence(format!(
            "generator of the primitive at {b} is not finite"
        )));
    }
    Ok(ValueFunction {
        barrier: b,
        constant,
        w,
        v: v.clone(),
    })
}

pub fn hjb_residual(u: &ValueFunction, cost: &CostModel, model: &LevyModel, delta: f64, x: f64) -> f64 {
    apply_generator(u, model, x) - delta * u.eval(x) + cost.f(x)
}

pub fn hjb_residual_check(
    u: &ValueFunction,
    cost: &CostModel,
    model: &LevyModel,
    delta: f64,
    grid: GridSpec,
) -> HjbReport {
    let b = u.barrier;
    let tol = 1e-4 * (1.0 + cost.f(b).abs());
    let rows: Vec<(f64, f64, f64)> = grid
        .points_around(b)
        .into_par_iter()
        .map(|x| {
            let res = hjb_residual(u, cost, model, delta, x);
            let grad_gap = u.first(x) - cost.c(x);
            (x, res, grad_gap)
        })
        .collect();
    let mut max_abs_residual_left = 0.0f64;
    let mut min_residual_right = f64::INFINITY;
    let mut max_gradient_excess = f64::NEG_INFINITY;
    let mut max_abs_gradient_gap_right = 0.0f64;
    let mut min_residual = f64::INFINITY;
    for &(x, res, gap) in &rows {
        min_residual = min_residual.min(res);
        max_gradient_excess = max_gradient_excess.max(gap);
        if x < b {
            max_abs_residual_left = max_abs_residual_left.max(res.abs());
        } else {
            min_residual_right = min_residual_right.min(res);
            max_abs_gradient_gap_right = max_abs_gradient_gap_right.max(gap.abs());
        }
    }
    let pass = min_residual >= -tol
        && max_abs_residual_left <= tol
        && max_gradient_excess <= tol
        && max_abs_gradient_gap_right <= tol;
    HjbReport {
        barrier: b,
        grid,
        tol,
        max_abs_residual_left,
        min_residual_right,
        max_gradient_excess,
        max_abs_gradient_gap_right,
        pass,
    }
}

#[derive(Debug, Clone)]
pub struct ThresholdSolution {
    pub x_star: f64,
    pub closed_form_x_star: Option<f64>,
    pub assumption4: Assumption4Report,
    pub v: StoppingValue,
    pub u: ValueFunction,
    pub hjb: HjbReport,
}
