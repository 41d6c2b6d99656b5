//! Numerical infinitesimal generator
//!
//! ```text
//! 𝓛w(x) = μw′(x) + ½σ²w″(x) + λ₁∫₀^∞ (w(x+y) − w(x)) η₁e^{−η₁y} dy
//!                          + λ₂∫₀^∞ (w(x−y) − w(x)) η₂e^{−η₂y} dy
//! ```
//!
//! in the natural-drift convention. Jump integrals use adaptive
//! Gauss–Legendre on [0, 60/η], extended by doubling panels while the tail
//! still contributes.

use crate::levy::LevyModel;
use crate::quad::adaptive_gauss_legendre;

const JUMP_HORIZON: f64 = 60.0;
const MAX_EXTENSIONS: usize = 12;

/// A function with first and second derivatives. The defaults use
/// Richardson-extrapolated central differences.
pub trait Differentiable {
    fn value(&self, x: f64) -> f64;

    fn first(&self, x: f64) -> f64 {
        let h = fd_step(x);
        let d = |h: f64| (self.value(x + h) - self.value(x - h)) / (2.0 * h);
        (4.0 * d(0.5 * h) - d(h)) / 3.0
    }

    fn second(&self, x: f64) -> f64 {
        let h = 2.0 * fd_step(x);
        let fx = self.value(x);
        let d = |h: f64| (self.value(x + h) - 2.0 * fx + self.value(x - h)) / (h * h);
        (4.0 * d(0.5 * h) - d(h)) / 3.0
    }
}

fn fd_step(x: f64) -> f64 {
    1e-3 * x.abs().max(1.0)
}

/// Adapter giving a plain closure finite-difference derivatives.
pub struct Numeric<F>(pub F);

impl<F: Fn(f64) -> f64> Differentiable for Numeric<F> {
    fn value(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

/// 𝓛w(x).
pub fn apply_generator<W: Differentiable + ?Sized>(w: &W, model: &LevyModel, x: f64) -> f64 {
    let mut out = 0.0;
    if model.drift() != 0.0 {
        out += model.drift() * w.first(x);
    }
    if model.sigma() > 0.0 {
        out += 0.5 * model.sigma() * model.sigma() * w.second(x);
    }
    let wx = w.value(x);
    let tol = 1e-13 * (1.0 + wx.abs());
    if model.has_up_jumps() {
        let eta = model.eta_up();
        let g = |y: f64| (w.value(x + y) - wx) * eta * (-eta * y).exp();
        out += model.lambda_up() * jump_integral(&g, eta, tol);
    }
    if model.has_down_jumps() {
        let eta = model.eta_down();
        let g = |y: f64| (w.value(x - y) - wx) * eta * (-eta * y).exp();
        out += model.lambda_down() * jump_integral(&g, eta, tol);
    }
    out
}

/// `∫₀^∞ g` for an integrand carrying the jump density e^{−ηy}. Functions
/// growing almost as fast as e^{ηy} need more than the base window.
fn jump_integral<G: Fn(f64) -> f64>(g: &G, eta: f64, tol: f64) -> f64 {
    let mut hi = JUMP_HORIZON / eta;
    let mut total = adaptive_gauss_legendre(g, 0.0, hi, tol, 1e-12);
    for _ in 0..MAX_EXTENSIONS {
        let panel = adaptive_gauss_legendre(g, hi, 2.0 * hi, tol, 1e-12);
        if !panel.is_finite() {
            break;
        }
        total += panel;
        hi *= 2.0;
        if panel.abs() <= 1e-14 * (1.0 + total.abs()) {
            break;
        }
    }
    total
}
