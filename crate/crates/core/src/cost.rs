//! Running and marginal control costs, and the functions the stopping
//! problem is built from:
//!
//! * `r = δ⁻¹(δ − 𝓛)c`, so that `E_x r(X_{e_δ}) = c(x)`;
//! * `H(x) = E_x ∫₀^∞ f′(X_s) e^{−δs} ds`;
//! * `Q(x) = E[(f′ − δr)(x + I)]`, whose root is the optimal barrier.
//!
//! With this normalisation `(H − c)(x) = δ⁻¹ E Q(x + S)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::fluctuation::{Extremum, RootSet};
use crate::levy::LevyModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CostFamily {
    /// f(x) = A e^{αx}, c(x) = B e^{−βx}.
    ExpExp { a: f64, alpha: f64, b: f64, beta: f64 },
    /// f(x) = A x^{2n} + B, c(x) = −x.
    MonomialLinear { a: f64, n: u32, b: f64 },
    /// f(x) = e^x, c(x) = A x² + B.
    ExpQuadratic { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CostFamily", into = "CostFamily")]
pub struct CostModel {
    family: CostFamily,
}

impl TryFrom<CostFamily> for CostModel {
    type Error = Error;
    fn try_from(family: CostFamily) -> Result<Self> {
        CostModel::new(family)
    }
}

impl From<CostModel> for CostFamily {
    fn from(c: CostModel) -> Self {
        c.family
    }
}

/// Result of scanning `max(|g₁|, |g₂|, …)/(1 + cosh θx)` on [−30, 30].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthScan {
    pub theta: f64,
    pub k: f64,
    pub bounded: bool,
}

const SCAN_HALF_WIDTH: f64 = 30.0;
const SCAN_POINTS: usize = 6001;

fn growth_scan(theta: f64, fs: &[ExpPoly]) -> GrowthScan {
    let ratio = |x: f64| -> f64 {
        let m = fs.iter().map(|f| f.eval(x).abs()).fold(0.0, f64::max);
        m / (1.0 + (theta * x).cosh())
    };
    let step = 2.0 * SCAN_HALF_WIDTH / (SCAN_POINTS - 1) as f64;
    let k = (0..SCAN_POINTS)
        .map(|i| ratio(-SCAN_HALF_WIDTH + i as f64 * step))
        .fold(0.0, f64::max);
    // Boundedness is decided from the terms: x^m e^{ax} is dominated by
    // cosh θx iff |a| < θ, or |a| = θ with m = 0.
    let bounded = k.is_finite()
        && fs.iter().flat_map(|f| f.terms()).all(|t| {
            let a = t.rate.abs();
            a < theta || (a == theta && t.power == 0)
        });
    GrowthScan { theta, k, bounded }
}

impl CostModel {
    pub fn new(family: CostFamily) -> Result<Self> {
        let finite = |v: f64| v.is_finite();
        match family {
            CostFamily::ExpExp { a, alpha, b, beta } => {
                if ![a, alpha, b, beta].iter().all(|&v| finite(v) && v > 0.0) {
                    return Err(Error::InvalidCost(
                        "exp-exp costs need A, α, B, β > 0".into(),
                    ));
                }
            }
            CostFamily::MonomialLinear { a, n, b } => {
                if !(finite(a) && a > 0.0 && finite(b) && n >= 1) {
                    return Err(Error::InvalidCost(
                        "monomial-linear costs need A > 0, n ≥ 1".into(),
                    ));
                }
            }
            CostFamily::ExpQuadratic { a, b } => {
                if !(finite(a) && a > 0.0 && finite(b)) {
                    return Err(Error::InvalidCost(
                        "exp-quadratic costs need A > 0".into(),
                    ));
                }
            }
        }
        Ok(Self { family })
    }

    pub fn exp_exp(a: f64, alpha: f64, b: f64, beta: f64) -> Result<Self> {
        Self::new(CostFamily::ExpExp { a, alpha, b, beta })
    }

    pub fn monomial_linear(a: f64, n: u32, b: f64) -> Result<Self> {
        Self::new(CostFamily::MonomialLinear { a, n, b })
    }

    pub fn exp_quadratic(a: f64, b: f64) -> Result<Self> {
        Self::new(CostFamily::ExpQuadratic { a, b })
    }

    pub fn family(&self) -> CostFamily {
        self.family
    }

    pub fn f_poly(&self) -> ExpPoly {
        match self.family {
            CostFamily::ExpExp { a, alpha, .. } => ExpPoly::exponential(a, alpha),
            CostFamily::MonomialLinear { a, n, b } => {
                ExpPoly::monomial(a, 2 * n) + ExpPoly::constant(b)
            }
            CostFamily::ExpQuadratic { .. } => ExpPoly::exponential(1.0, 1.0),
        }
    }

    pub fn f_prime_poly(&self) -> ExpPoly {
        self.f_poly().derivative()
    }

    pub fn c_poly(&self) -> ExpPoly {
        match self.family {
            CostFamily::ExpExp { b, beta, .. } => ExpPoly::exponential(b, -beta),
            CostFamily::MonomialLinear { .. } => ExpPoly::monomial(-1.0, 1),
            CostFamily::ExpQuadratic { a, b } => ExpPoly::monomial(a, 2) + ExpPoly::constant(b),
        }
    }

    pub fn f(&self, x: f64) -> f64 {
        match self.family {
            CostFamily::ExpExp { a, alpha, .. } => a * (alpha * x).exp(),
            CostFamily::MonomialLinear { a, n, b } => a * x.powi(2 * n as i32) + b,
            CostFamily::ExpQuadratic { .. } => x.exp(),
        }
    }

    pub fn f_prime(&self, x: f64) -> f64 {
        match self.family {
            CostFamily::ExpExp { a, alpha, .. } => a * alpha * (alpha * x).exp(),
            CostFamily::MonomialLinear { a, n, .. } => {
                2.0 * f64::from(n) * a * x.powi(2 * n as i32 - 1)
            }
            CostFamily::ExpQuadratic { .. } => x.exp(),
        }
    }

    pub fn f_second(&self, x: f64) -> f64 {
        match self.family {
            CostFamily::ExpExp { a, alpha, .. } => a * alpha * alpha * (alpha * x).exp(),
            CostFamily::MonomialLinear { a, n, .. } => {
                let n = f64::from(n);
                2.0 * n * (2.0 * n - 1.0) * a * x.powi(2 * n as i32 - 2)
            }
            CostFamily::ExpQuadratic { .. } => x.exp(),
        }
    }

    pub fn c(&self, x: f64) -> f64 {
        match self.family {
            CostFamily::ExpExp { b, beta, .. } => b * (-beta * x).exp(),
            CostFamily::MonomialLinear { .. } => -x,
            CostFamily::ExpQuadratic { a, b } => a * x * x + b,
        }
    }

    /// `∫_lo^hi c(y) dy`, i.e. the cost of pushing the state from `hi` down
    /// to `lo` in one jump.
    pub fn control_cost_integral(&self, lo: f64, hi: f64) -> f64 {
        match self.family {
            CostFamily::ExpExp { b, beta, .. } => {
                // B(e^{−β lo} − e^{−β hi})/β, written to keep precision for small gaps
                b * (-beta * lo).exp() * (-(-beta * (hi - lo)).exp_m1()) / beta
            }
            CostFamily::MonomialLinear { .. } => -0.5 * (hi * hi - lo * lo),
            CostFamily::ExpQuadratic { a, b } => {
                a * (hi.powi(3) - lo.powi(3)) / 3.0 + b * (hi - lo)
            }
        }
    }

    /// `r = δ⁻¹(δ − 𝓛)c` in closed form.
    pub fn r_function(&self, model: &LevyModel, delta: f64) -> Result<ExpPoly> {
        Ok(match self.family {
            CostFamily::ExpExp { b, beta, .. } => {
                let phi = model.characteristic_exponent(-beta)?;
                ExpPoly::exponential((delta - phi) / delta * b, -beta)
            }
            CostFamily::MonomialLinear { .. } => {
                ExpPoly::constant(model.mean() / delta) - ExpPoly::monomial(1.0, 1)
            }
            CostFamily::ExpQuadratic { a, b } => {
                let mean = model.mean();
                let var = model.variance_rate();
                ExpPoly::monomial(a, 2)
                    + ExpPoly::monomial(-2.0 * a * mean / delta, 1)
                    + ExpPoly::constant(b - a * var / delta)
            }
        })
    }

    /// `H = (δ − 𝓛)⁻¹ f′` in closed form where available, otherwise through
    /// the exact resolvent on exponential polynomials.
    pub fn h_function(&self, model: &LevyModel, delta: f64) -> Result<ExpPoly> {
        let gap = |z: f64| -> Result<f64> {
            let g = delta - model.characteristic_exponent(z)?;
            if g <= 0.0 {
                return Err(Error::Integrability(format!(
                    "δ − φ({z}) = {g} is not positive"
                )));
            }
            Ok(g)
        };
        Ok(match self.family {
            CostFamily::ExpExp { a, alpha, .. } => ExpPoly::exponential(a * alpha / gap(alpha)?, alpha),
            CostFamily::MonomialLinear { a, n: 1, .. } => {
                ExpPoly::monomial(2.0 * a / delta, 1)
                    + ExpPoly::constant(2.0 * a * model.mean() / (delta * delta))
            }
            CostFamily::MonomialLinear { .. } => self.f_prime_poly().resolvent(model, delta)?,
            CostFamily::ExpQuadratic { .. } => ExpPoly::exponential(1.0 / gap(1.0)?, 1.0),
        })
    }

    /// Q in closed form (in terms of the Wiener–Hopf factors).
    pub fn q_function(&self, model: &LevyModel, delta: f64, roots: &RootSet) -> Result<ExpPoly> {
        let inf = roots.extremum_law(model, Extremum::Inf)?;
        Ok(match self.family {
            CostFamily::ExpExp { a, alpha, b, beta } => {
                let k1 = a * alpha * roots.mgf_inf(model, alpha)?;
                let k2 = delta * b / roots.mgf_sup(model, -beta)?;
                ExpPoly::exponential(k1, alpha) - ExpPoly::exponential(k2, -beta)
            }
            CostFamily::MonomialLinear { a, n: 1, .. } => {
                let sup = roots.extremum_law(model, Extremum::Sup)?;
                let es = sup.raw_moment(1);
                let ei = inf.raw_moment(1);
                ExpPoly::monomial(2.0 * a + delta, 1)
                    + ExpPoly::constant(2.0 * a * ei - delta * es)
            }
            CostFamily::MonomialLinear { .. } => return self.q_function_generic(model, delta, roots),
            CostFamily::ExpQuadratic { a, b } => {
                let e_exp_i = roots.mgf_inf(model, 1.0)?;
                let ei = inf.raw_moment(1);
                let ei2 = inf.raw_moment(2);
                let mean = model.mean();
                let var = model.variance_rate();
                ExpPoly::exponential(e_exp_i, 1.0)
                    + ExpPoly::monomial(-delta * a, 2)
                    + ExpPoly::monomial(-2.0 * delta * a * ei + 2.0 * a * mean, 1)
                    + ExpPoly::constant(-delta * (a * ei2 + b) + a * (2.0 * ei * mean + var))
            }
        })
    }

    /// Q through the generic route x ↦ E[(f′ − δr)(x + I)].
    pub fn q_function_generic(
        &self,
        model: &LevyModel,
        delta: f64,
        roots: &RootSet,
    ) -> Result<ExpPoly> {
        let inf = roots.extremum_law(model, Extremum::Inf)?;
        let integrand = self.f_prime_poly() - self.r_function(model, delta)?.scaled(delta);
        inf.transform(&integrand)
    }

    /// Exponential growth bound on f, f′ and c.
    pub fn growth_scan(&self, theta: f64) -> GrowthScan {
        growth_scan(theta, &[self.f_poly(), self.f_prime_poly(), self.c_poly()])
    }

    /// Growth bound on r′ and f″, needed under unbounded variation.
    pub fn smoothness_scan(&self, model: &LevyModel, delta: f64, theta: f64) -> Result<GrowthScan> {
        let r_prime = self.r_function(model, delta)?.derivative();
        let f_second = self.f_prime_poly().derivative();
        Ok(growth_scan(theta, &[r_prime, f_second]))
    }

    /// Family-specific sufficient conditions that are reported rather than
    /// enforced.
    pub fn warnings(&self, model: &LevyModel) -> Vec<String> {
        let mut out = Vec::new();
        if let CostFamily::ExpQuadratic { a, .. } = self.family {
            if 2.0 * a > std::f64::consts::E {
                out.push(format!(
                    "2A = {} exceeds e; monotonicity of Q is not guaranteed",
                    2.0 * a
                ));
            }
            if model.mean() <= 0.0 {
                out.push(format!(
                    "E X₁ = {} is not positive; monotonicity of Q is not guaranteed",
                    model.mean()
                ));
            }
        }
        out
    }
}
