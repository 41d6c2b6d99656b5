//! Finite sums of `c · xᵐ · e^{ax}`.
//!
//! Every cost family in this crate, and every function built from them
//! (H, r, Q, the stopping value on either side of a barrier), lives in this
//! class. It is closed under shifts, differentiation, integration, the
//! generator of the Lévy model and its resolvent, which keeps the solver
//! exact up to rounding.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{factorial, LevyModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub power: u32,
    pub rate: f64,
}

impl Term {
    pub fn eval(&self, x: f64) -> f64 {
        let p = if self.power == 0 { 1.0 } else { x.powi(self.power as i32) };
        if self.rate == 0.0 {
            self.coef * p
        } else {
            self.coef * p * (self.rate * x).exp()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpPoly {
    terms: Vec<Term>,
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Antiderivative of `tᵐ e^{kt}` (without the exponential factor when k ≠ 0):
/// returns the polynomial P with `d/dt [e^{kt} P(t)] = tᵐ e^{kt}`.
fn exp_antiderivative_poly(m: u32, k: f64) -> Vec<(f64, u32)> {
    debug_assert!(k != 0.0);
    let mfact = factorial(m);
    (0..=m)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign * mfact / factorial(m - j) / k.powi(j as i32 + 1);
            (c, m - j)
        })
        .collect()
}

/// `∫_lo^hi tᵐ e^{kt} dt` for finite limits, or with `hi = +∞` (k < 0) or
/// `lo = −∞` (k > 0).
pub(crate) fn integral_monomial_exp(m: u32, k: f64, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    if k == 0.0 {
        assert!(lo.is_finite() && hi.is_finite(), "divergent polynomial integral");
        let n = f64::from(m + 1);
        return (hi.powi(m as i32 + 1) - lo.powi(m as i32 + 1)) / n;
    }
    let poly = exp_antiderivative_poly(m, k);
    let eval = |t: f64| -> f64 {
        if t.is_infinite() {
            // e^{kt} tⁿ → 0 in the admissible direction
            return 0.0;
        }
        let p: f64 = poly.iter().map(|&(c, j)| c * t.powi(j as i32)).sum();
        p * (k * t).exp()
    };
    eval(hi) - eval(lo)
}

impl ExpPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::term(c, 0, 0.0)
    }

    pub fn monomial(coef: f64, power: u32) -> Self {
        Self::term(coef, power, 0.0)
    }

    pub fn exponential(coef: f64, rate: f64) -> Self {
        Self::term(coef, 0, rate)
    }

    pub fn term(coef: f64, power: u32, rate: f64) -> Self {
        Self::from_terms(vec![Term { coef, power, rate }])
    }

    pub fn from_terms(terms: Vec<Term>) -> Self {
        Self { terms }.normalized()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merges like terms and drops zero coefficients.
    fn normalized(mut self) -> Self {
        self.terms.retain(|t| t.coef != 0.0);
        self.terms.sort_by(|a, b| {
            a.rate
                .partial_cmp(&b.rate)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.power.cmp(&b.power))
        });
        let mut out: Vec<Term> = Vec::with_capacity(self.terms.len());
        for t in self.terms {
            match out.last_mut() {
                Some(last) if last.rate == t.rate && last.power == t.power => last.coef += t.coef,
                _ => out.push(t),
            }
        }
        out.retain(|t| t.coef != 0.0);
        Self { terms: out }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn max_rate(&self) -> Option<f64> {
        self.terms.iter().map(|t| t.rate).reduce(f64::max)
    }

    pub fn min_rate(&self) -> Option<f64> {
        self.terms.iter().map(|t| t.rate).reduce(f64::min)
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| Term {
                    coef: t.coef * k,
                    ..*t
                })
                .collect(),
        )
    }

    pub fn derivative(&self) -> Self {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            if t.power > 0 {
                out.push(Term {
                    coef: t.coef * f64::from(t.power),
                    power: t.power - 1,
                    rate: t.rate,
                });
            }
            if t.rate != 0.0 {
                out.push(Term {
                    coef: t.coef * t.rate,
                    ..*t
                });
            }
        }
        Self::from_terms(out)
    }

    /// An antiderivative (no particular constant).
    pub fn antiderivative(&self) -> Self {
        let mut out = Vec::new();
        for t in &self.terms {
            if t.rate == 0.0 {
                out.push(Term {
                    coef: t.coef / f64::from(t.power + 1),
                    power: t.power + 1,
                    rate: 0.0,
                });
            } else {
                for (c, j) in exp_antiderivative_poly(t.power, t.rate) {
                    out.push(Term {
                        coef: t.coef * c,
                        power: j,
                        rate: t.rate,
                    });
                }
            }
        }
        Self::from_terms(out)
    }

    /// `x ↦ g(x + s)`.
    pub fn shifted(&self, s: f64) -> Self {
        let mut out = Vec::new();
        for t in &self.terms {
            let scale = t.coef * (t.rate * s).exp();
            for j in 0..=t.power {
                out.push(Term {
                    coef: scale * binomial(t.power, j) * s.powi((t.power - j) as i32),
                    power: j,
                    rate: t.rate,
                });
            }
        }
        Self::from_terms(out)
    }

    /// Exact generator: 𝓛[xᵐe^{ax}] = Σ_i C(m,i) φ⁽ⁱ⁾(a) x^{m−i} e^{ax}.
    pub fn apply_generator(&self, model: &LevyModel) -> Result<Self> {
        let mut out = Vec::new();
        for t in &self.terms {
            for i in 0..=t.power {
                let d = model.phi_derivative(t.rate, i)?;
                out.push(Term {
                    coef: t.coef * binomial(t.power, i) * d,
                    power: t.power - i,
                    rate: t.rate,
                });
            }
        }
        Ok(Self::from_terms(out))
    }

    /// Resolvent `(δ − 𝓛)⁻¹ g = E ∫₀^∞ e^{−δs} g(x + X_s) ds`, solved term by
    /// term in the triangular basis {xʲ e^{ax}}.
    pub fn resolvent(&self, model: &LevyModel, delta: f64) -> Result<Self> {
        let mut out = Vec::new();
        for t in &self.terms {
            let a = t.rate;
            let gap = delta - model.phi_derivative(a, 0)?;
            if gap <= 0.0 {
                return Err(Error::Integrability(format!(
                    "δ − φ({a}) = {gap} is not positive"
                )));
            }
            let m = t.power as usize;
            let derivs: Vec<f64> = (0..=t.power)
                .map(|i| model.phi_derivative(a, i))
                .collect::<Result<_>>()?;
            let mut d = vec![0.0; m + 1];
            d[m] = 1.0 / gap;
            for p in (0..m).rev() {
                let mut acc = 0.0;
                for (j, dj) in d.iter().enumerate().skip(p + 1) {
                    acc += binomial(j as u32, (j - p) as u32) * derivs[j - p] * dj;
                }
                d[p] = acc / gap;
            }
            for (p, dp) in d.into_iter().enumerate() {
                out.push(Term {
                    coef: t.coef * dp,
                    power: p as u32,
                    rate: a,
                });
            }
        }
        Ok(Self::from_terms(out))
    }

    /// `∫_lo^hi g(t) e^{kt} dt`, limits may be infinite where convergent.
    pub fn integral_against_exp(&self, k: f64, lo: f64, hi: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * integral_monomial_exp(t.power, t.rate + k, lo, hi))
            .sum()
    }
}

impl Add for ExpPoly {
    type Output = ExpPoly;
    fn add(mut self, rhs: ExpPoly) -> ExpPoly {
        self.terms.extend(rhs.terms);
        self.normalized()
    }
}

impl Add<&ExpPoly> for &ExpPoly {
    type Output = ExpPoly;
    fn add(self, rhs: &ExpPoly) -> ExpPoly {
        self.clone() + rhs.clone()
    }
}

impl Neg for ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        self.scaled(-1.0)
    }
}

impl Sub for ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: ExpPoly) -> ExpPoly {
        self + (-rhs)
    }
}

impl Sub<&ExpPoly> for &ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: &ExpPoly) -> ExpPoly {
        self.clone() - rhs.clone()
    }
}

impl Mul<f64> for ExpPoly {
    type Output = ExpPoly;
    fn mul(self, k: f64) -> ExpPoly {
        self.scaled(k)
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", t.coef)?;
            if t.power > 0 {
                write!(f, "·x^{}", t.power)?;
            }
            if t.rate != 0.0 {
                write!(f, "·e^({}x)", t.rate)?;
            }
        }
        Ok(())
    }
}
