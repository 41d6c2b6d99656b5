//! Roots of φ(z) = δ, Wiener–Hopf factors and the laws of the supremum S
//! and infimum I of the process killed at an independent Exp(δ) time.
//!
//! For two-sided exponential jumps both factors are rational:
//!
//! ```text
//! E e^{zS} = Π_i ρ_i/(ρ_i − z) · Π_{poles} (η₁ − z)/η₁
//! E e^{zI} = Π_i γ_i/(γ_i + z) · Π_{poles} (η₂ + z)/η₂
//! ```
//!
//! where the ρ_i (resp. −γ_i) are the positive (negative) roots of φ = δ and
//! a pole factor is present only when the corresponding side has jumps. The
//! laws are an atom at zero plus a mixture of exponentials, read off by
//! partial fractions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exppoly::{binomial, ExpPoly};
use crate::levy::{factorial, LevyModel};
use crate::quad::{adaptive_gauss_legendre, brent};

const BRACKET_STEPS: u32 = 200;
const ROOT_XTOL: f64 = 1e-14;
const CONFLUENT_TOL: f64 = 1e-10;
/// Quadrature horizon in units of the slowest mixture rate.
const TRUNCATION: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    /// Positive roots ρ₁ < ρ₂ < … of φ(z) = δ.
    pub positive_roots: Vec<f64>,
    /// Magnitudes γ₁ < γ₂ < … of the negative roots.
    pub negative_roots: Vec<f64>,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extremum {
    Sup,
    Inf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpComponent {
    pub weight: f64,
    pub rate: f64,
}

/// Atom at zero plus Σ wₖ rₖ e^{−rₖ|y|} on the half-line of the extremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremumLaw {
    pub which: Extremum,
    pub atom_at_zero: f64,
    pub mixture: Vec<ExpComponent>,
}

/// Either a closed-form integrand or an arbitrary function (quadrature).
pub enum Observable<'a> {
    Closed(&'a ExpPoly),
    Function(&'a dyn Fn(f64) -> f64),
}

/// Solves φ(z) = δ on each pole-delimited interval by bracketing and Brent.
pub fn solve_phi_equals_delta(model: &LevyModel, delta: f64) -> Result<RootSet> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain {
            value: delta,
            domain: "(0, ∞) for δ".into(),
        });
    }
    if model.is_trivial() {
        return Err(Error::InvalidModel(
            "a deterministic drift has no Wiener–Hopf factors".into(),
        ));
    }
    // g(s) = φ(sign·s) − δ for s > 0, so both sides use the same search.
    let side = |sign: f64, lambda: f64, eta: f64| -> Result<Vec<f64>> {
        let g = |s: f64| model.phi_unchecked(sign * s) - delta;
        let mut roots = Vec::new();
        if lambda > 0.0 {
            // (0, η): g(0) = −δ < 0 and g → +∞ at the pole.
            let mut lo = 0.0;
            let mut hi = None;
            for k in 1..=BRACKET_STEPS {
                let s = eta * (1.0 - 0.5f64.powi(k as i32));
                if s >= eta {
                    break;
                }
                if g(s) > 0.0 {
                    hi = Some(s);
                    break;
                }
                lo = s;
            }
            let hi = hi.ok_or_else(|| {
                Error::Convergence(format!("no bracket below the pole at {eta}"))
            })?;
            roots.push(brent(g, lo, hi, ROOT_XTOL, 500)?);
            if model.sigma() > 0.0 {
                // (η, ∞): g → −∞ just past the pole and → +∞ at infinity.
                let mut lo = None;
                for k in 1..=BRACKET_STEPS {
                    let s = eta * (1.0 + 0.5f64.powi(k as i32));
                    if s <= eta {
                        break;
                    }
                    if g(s) < 0.0 {
                        lo = Some(s);
                        break;
                    }
                }
                let mut lo = lo.ok_or_else(|| {
                    Error::Convergence(format!("no bracket above the pole at {eta}"))
                })?;
                let mut hi = None;
                let mut s = 2.0 * lo;
                for _ in 0..BRACKET_STEPS {
                    if g(s) > 0.0 {
                        hi = Some(s);
                        break;
                    }
                    lo = s;
                    s *= 2.0;
                }
                let hi = hi.ok_or_else(|| {
                    Error::Convergence("outer root bracket expansion failed".into())
                })?;
                roots.push(brent(g, lo, hi, ROOT_XTOL, 500)?);
            }
        } else if model.sigma() > 0.0 {
            let mut lo = 0.0;
            let mut s = 1.0;
            let mut hi = None;
            for _ in 0..BRACKET_STEPS {
                if g(s) > 0.0 {
                    hi = Some(s);
                    break;
                }
                lo = s;
                s *= 2.0;
            }
            let hi = hi.ok_or_else(|| Error::Convergence("root bracket expansion failed".into()))?;
            roots.push(brent(g, lo, hi, ROOT_XTOL, 500)?);
        }
        Ok(roots)
    };
    let positive_roots = side(1.0, model.lambda_up(), model.eta_up())?;
    let negative_roots = side(-1.0, model.lambda_down(), model.eta_down())?;
    Ok(RootSet {
        positive_roots,
        negative_roots,
        delta,
    })
}

fn up_poles(model: &LevyModel) -> Vec<f64> {
    if model.has_up_jumps() {
        vec![model.eta_up()]
    } else {
        Vec::new()
    }
}

fn down_poles(model: &LevyModel) -> Vec<f64> {
    if model.has_down_jumps() {
        vec![model.eta_down()]
    } else {
        Vec::new()
    }
}

impl RootSet {
    /// Largest |φ(root) − δ| over all roots.
    pub fn max_residual(&self, model: &LevyModel) -> f64 {
        self.positive_roots
            .iter()
            .map(|&r| model.phi_unchecked(r))
            .chain(self.negative_roots.iter().map(|&g| model.phi_unchecked(-g)))
            .map(|v| (v - self.delta).abs())
            .fold(0.0, f64::max)
    }

    /// Checks the strict interleaving of roots and poles.
    pub fn is_interleaved(&self, model: &LevyModel) -> bool {
        fn check(roots: &[f64], poles: &[f64]) -> bool {
            let mut chain: Vec<(f64, bool)> = roots.iter().map(|&r| (r, true)).collect();
            chain.extend(poles.iter().map(|&p| (p, false)));
            chain.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let strictly_increasing = chain.windows(2).all(|w| w[0].0 < w[1].0);
            let alternating = chain.windows(2).all(|w| w[0].1 != w[1].1);
            let starts_with_root = chain.first().is_none_or(|c| c.1);
            strictly_increasing && alternating && starts_with_root && roots.len() >= poles.len()
        }
        let pos_ok = self.positive_roots.iter().all(|&r| r > 0.0);
        let neg_ok = self.negative_roots.iter().all(|&g| g > 0.0);
        pos_ok
            && neg_ok
            && check(&self.positive_roots, &up_poles(model))
            && check(&self.negative_roots, &down_poles(model))
    }

    /// E e^{zS}, defined for z < min ρ.
    pub fn mgf_sup(&self, model: &LevyModel, z: f64) -> Result<f64> {
        if let Some(&r) = self.positive_roots.first() {
            if z >= r {
                return Err(Error::Domain {
                    value: z,
                    domain: format!("(−∞, {r})"),
                });
            }
        }
        let roots: f64 = self.positive_roots.iter().map(|&r| r / (r - z)).product();
        let poles: f64 = up_poles(model).iter().map(|&e| (e - z) / e).product();
        Ok(roots * poles)
    }

    /// E e^{zI}, defined for z > −min γ.
    pub fn mgf_inf(&self, model: &LevyModel, z: f64) -> Result<f64> {
        if let Some(&g) = self.negative_roots.first() {
            if z <= -g {
                return Err(Error::Domain {
                    value: z,
                    domain: format!("({}, ∞)", -g),
                });
            }
        }
        let roots: f64 = self.negative_roots.iter().map(|&g| g / (g + z)).product();
        let poles: f64 = down_poles(model).iter().map(|&e| (e + z) / e).product();
        Ok(roots * poles)
    }

    /// Partial-fraction decomposition of the Wiener–Hopf factor.
    pub fn extremum_law(&self, model: &LevyModel, which: Extremum) -> Result<ExtremumLaw> {
        let (roots, poles) = match which {
            Extremum::Sup => (&self.positive_roots, up_poles(model)),
            Extremum::Inf => (&self.negative_roots, down_poles(model)),
        };
        for (i, a) in roots.iter().enumerate() {
            for b in &roots[i + 1..] {
                if (a - b).abs() < CONFLUENT_TOL {
                    return Err(Error::Degenerate(format!(
                        "roots {a} and {b} coincide; confluent partial fractions unsupported"
                    )));
                }
            }
        }
        // In the variable y = ±z both factors read Π r/(r − y) · Π (e − y)/e.
        let mixture: Vec<ExpComponent> = roots
            .iter()
            .enumerate()
            .map(|(k, &rk)| {
                let others: f64 = roots
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != k)
                    .map(|(_, &ri)| ri / (ri - rk))
                    .product();
                let pole_part: f64 = poles.iter().map(|&e| (e - rk) / e).product();
                ExpComponent {
                    weight: others * pole_part,
                    rate: rk,
                }
            })
            .collect();
        let atom_at_zero = if roots.len() > poles.len() {
            0.0
        } else {
            let r: f64 = roots.iter().product();
            let p: f64 = poles.iter().product();
            r / p
        };
        Ok(ExtremumLaw {
            which,
            atom_at_zero,
            mixture,
        })
    }
}

pub fn mgf_sup(roots: &RootSet, model: &LevyModel, z: f64) -> Result<f64> {
    roots.mgf_sup(model, z)
}

pub fn mgf_inf(roots: &RootSet, model: &LevyModel, z: f64) -> Result<f64> {
    roots.mgf_inf(model, z)
}

pub fn extremum_law(roots: &RootSet, model: &LevyModel, which: Extremum) -> Result<ExtremumLaw> {
    roots.extremum_law(model, which)
}

pub fn moments(law: &ExtremumLaw) -> (f64, f64) {
    (law.raw_moment(1), law.raw_moment(2))
}

/// `e^{s} ∫_lo^hi tᵐ e^{kt} dt` with the exponential folded into each
/// endpoint so large shifts do not overflow.
fn scaled_integral(m: u32, k: f64, lo: f64, hi: f64, s: f64) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    if k == 0.0 {
        assert!(lo.is_finite() && hi.is_finite(), "divergent polynomial integral");
        let n = m as i32 + 1;
        return s.exp() * (hi.powi(n) - lo.powi(n)) / f64::from(m + 1);
    }
    let mfact = factorial(m);
    let at = |t: f64| -> f64 {
        if t.is_infinite() {
            return 0.0;
        }
        let mut p = 0.0;
        for j in 0..=m {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            p += sign * mfact / factorial(m - j) * t.powi((m - j) as i32) / k.powi(j as i32 + 1);
        }
        p * (s + k * t).exp()
    };
    at(hi) - at(lo)
}

impl ExtremumLaw {
    pub fn total_mass(&self) -> f64 {
        self.atom_at_zero + self.mixture.iter().map(|c| c.weight).sum::<f64>()
    }

    pub fn min_rate(&self) -> Option<f64> {
        self.mixture.iter().map(|c| c.rate).reduce(f64::min)
    }

    fn sign(&self) -> f64 {
        match self.which {
            Extremum::Sup => 1.0,
            Extremum::Inf => -1.0,
        }
    }

    /// E e^{zY} from the atom-plus-mixture representation.
    pub fn mgf(&self, z: f64) -> f64 {
        let s = self.sign();
        self.atom_at_zero
            + self
                .mixture
                .iter()
                .map(|c| c.weight * c.rate / (c.rate - s * z))
                .sum::<f64>()
    }

    /// E Yᵏ.
    pub fn raw_moment(&self, k: u32) -> f64 {
        self.tilted_moment(k, 0.0)
            .expect("polynomial moments always exist")
    }

    /// E[Yᵏ e^{aY}].
    pub fn tilted_moment(&self, k: u32, a: f64) -> Result<f64> {
        let s = self.sign();
        let mut total = if k == 0 { self.atom_at_zero } else { 0.0 };
        for c in &self.mixture {
            // ∫₀^∞ (s y)ᵏ e^{(s a − r) y} r dy
            let decay = c.rate - s * a;
            if decay <= 0.0 {
                return Err(Error::Integrability(format!(
                    "exponential rate {a} not dominated by mixture rate {}",
                    c.rate
                )));
            }
            let sign_k = if k % 2 == 1 { s } else { 1.0 };
            total += c.weight * c.rate * sign_k * factorial(k) / decay.powi(k as i32 + 1);
        }
        Ok(total)
    }

    fn check_integrable(&self, g: &ExpPoly) -> Result<()> {
        let s = self.sign();
        let Some(min_rate) = self.min_rate() else {
            return Ok(());
        };
        let worst = match self.which {
            Extremum::Sup => g.max_rate(),
            Extremum::Inf => g.min_rate(),
        };
        if let Some(a) = worst {
            if s * a >= min_rate {
                return Err(Error::Integrability(format!(
                    "exponential rate {a} not dominated by mixture rate {min_rate}"
                )));
            }
        }
        Ok(())
    }

    /// E[g(Y + shift) · 1{Y + shift ≥ from}] in closed form.
    pub fn expect_closed(&self, g: &ExpPoly, shift: f64, from: Option<f64>) -> Result<f64> {
        let lower = from.unwrap_or(f64::NEG_INFINITY);
        let mut total = if shift >= lower {
            self.atom_at_zero * g.eval(shift)
        } else {
            0.0
        };
        if self.mixture.is_empty() {
            return Ok(total);
        }
        if from.is_none() {
            self.check_integrable(g)?;
        }
        for c in &self.mixture {
            let r = c.rate;
            for t in g.terms() {
                let contrib = match self.which {
                    Extremum::Sup => {
                        // w r e^{r·shift} ∫_{max(shift, L)}^∞ tᵐ e^{(a − r)t} dt
                        if t.rate >= r {
                            return Err(Error::Integrability(format!(
                                "exponential rate {} not dominated by mixture rate {r}",
                                t.rate
                            )));
                        }
                        let lo = shift.max(lower);
                        scaled_integral(t.power, t.rate - r, lo, f64::INFINITY, r * shift)
                    }
                    Extremum::Inf => {
                        // w r e^{−r·shift} ∫_{L}^{shift} tᵐ e^{(a + r)t} dt
                        if lower == f64::NEG_INFINITY && t.rate + r <= 0.0 {
                            return Err(Error::Integrability(format!(
                                "exponential rate {} not dominated by mixture rate {r}",
                                t.rate
                            )));
                        }
                        scaled_integral(t.power, t.rate + r, lower, shift, -r * shift)
                    }
                };
                total += c.weight * r * t.coef * contrib;
            }
        }
        Ok(total)
    }

    /// Same expectation for an arbitrary integrand, by adaptive Gauss–Legendre
    /// on each mixture component truncated at 60 / (smallest rate).
    pub fn expect_fn(&self, g: &dyn Fn(f64) -> f64, shift: f64, from: Option<f64>) -> f64 {
        let lower = from.unwrap_or(f64::NEG_INFINITY);
        let mut total = if shift >= lower {
            self.atom_at_zero * g(shift)
        } else {
            0.0
        };
        let Some(min_rate) = self.min_rate() else {
            return total;
        };
        let span = TRUNCATION / min_rate;
        for c in &self.mixture {
            let r = c.rate;
            let part = match self.which {
                Extremum::Sup => {
                    let y0 = (lower - shift).max(0.0);
                    let f = |y: f64| g(y + shift) * r * (-r * (y - y0)).exp();
                    (-r * y0).exp() * adaptive_gauss_legendre(&f, y0, y0 + span, 1e-14, 1e-13)
                }
                Extremum::Inf => {
                    let y_lo = (lower - shift).max(-span);
                    if y_lo >= 0.0 {
                        0.0
                    } else {
                        let f = |y: f64| g(y + shift) * r * (r * y).exp();
                        adaptive_gauss_legendre(&f, y_lo, 0.0, 1e-14, 1e-13)
                    }
                }
            };
            total += c.weight * part;
        }
        total
    }

    pub fn expect(&self, g: Observable<'_>, shift: f64, from: Option<f64>) -> Result<f64> {
        match g {
            Observable::Closed(p) => self.expect_closed(p, shift, from),
            Observable::Function(f) => Ok(self.expect_fn(f, shift, from)),
        }
    }

    /// The function x ↦ E g(x + Y).
    pub fn transform(&self, g: &ExpPoly) -> Result<ExpPoly> {
        let mut out = ExpPoly::zero();
        for t in g.terms() {
            for j in 0..=t.power {
                let mom = self.tilted_moment(t.power - j, t.rate)?;
                out = out + ExpPoly::term(t.coef * binomial(t.power, j) * mom, j, t.rate);
            }
        }
        Ok(out)
    }

    /// For a supremum law, x ↦ E[g(x + S) 1{x + S ≥ b}] restricted to x < b,
    /// which is Σₖ Cₖ e^{rₖ x} with Cₖ = wₖ rₖ ∫_b^∞ g(t) e^{−rₖ t} dt.
    pub fn sup_tail_transform(&self, g: &ExpPoly, barrier: f64) -> Result<ExpPoly> {
        assert_eq!(self.which, Extremum::Sup, "tail transform is defined for S");
        let mut out = ExpPoly::zero();
        for c in &self.mixture {
            let mut coef = 0.0;
            for t in g.terms() {
                if t.rate >= c.rate {
                    return Err(Error::Integrability(format!(
                        "exponential rate {} not dominated by mixture rate {}",
                        t.rate, c.rate
                    )));
                }
                coef += t.coef
                    * scaled_integral(t.power, t.rate - c.rate, barrier, f64::INFINITY, 0.0);
            }
            out = out + ExpPoly::exponential(c.weight * c.rate * coef, c.rate);
        }
        Ok(out)
    }
}
