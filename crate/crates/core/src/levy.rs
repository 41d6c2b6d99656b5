//! Jump-diffusion and compound-Poisson processes with two-sided exponential
//! jumps,
//!
//! ```text
//! X_t = x + μt + σB_t + Σ_{i ≤ N¹_t} Y¹_i − Σ_{i ≤ N²_t} Y²_i,
//! ```
//!
//! with N^k Poisson of intensity λ_k and Y^k ~ Exp(η_k). The drift μ is the
//! natural (uncompensated) drift, so
//!
//! ```text
//! φ(z) = log E e^{zX₁} = ½σ²z² + μz + λ₁z/(η₁ − z) − λ₂z/(η₂ + z)
//! ```
//!
//! and `E X₁ = μ + λ₁/η₁ − λ₂/η₂`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    JumpDiffusion,
    CompoundPoisson,
}

/// Raw parameters as they appear in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyParams {
    pub kind: ProcessKind,
    #[serde(default)]
    pub drift: f64,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub lambda_up: f64,
    #[serde(default)]
    pub lambda_down: f64,
    #[serde(default = "one")]
    pub eta_up: f64,
    #[serde(default = "one")]
    pub eta_down: f64,
}

fn one() -> f64 {
    1.0
}

/// A validated Lévy model. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LevyParams", into = "LevyParams")]
pub struct LevyModel {
    kind: ProcessKind,
    drift: f64,
    sigma: f64,
    lambda_up: f64,
    lambda_down: f64,
    eta_up: f64,
    eta_down: f64,
}

impl TryFrom<LevyParams> for LevyModel {
    type Error = Error;

    fn try_from(p: LevyParams) -> Result<Self> {
        LevyModel::new(
            p.kind,
            p.drift,
            p.sigma,
            p.lambda_up,
            p.lambda_down,
            p.eta_up,
            p.eta_down,
        )
    }
}

impl From<LevyModel> for LevyParams {
    fn from(m: LevyModel) -> Self {
        LevyParams {
            kind: m.kind,
            drift: m.drift,
            sigma: m.sigma,
            lambda_up: m.lambda_up,
            lambda_down: m.lambda_down,
            eta_up: m.eta_up,
            eta_down: m.eta_down,
        }
    }
}

/// Outcome of the exponential-moment check `max(φ(θ), φ(−θ)) < δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub delta: f64,
    pub theta: f64,
    pub theta_in_domain: bool,
    pub phi_plus: Option<f64>,
    pub phi_minus: Option<f64>,
    pub passed: bool,
    pub reason: Option<String>,
}

impl LevyModel {
    pub fn new(
        kind: ProcessKind,
        drift: f64,
        sigma: f64,
        lambda_up: f64,
        lambda_down: f64,
        eta_up: f64,
        eta_down: f64,
    ) -> Result<Self> {
        let all = [drift, sigma, lambda_up, lambda_down, eta_up, eta_down];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("parameters must be finite".into()));
        }
        if sigma < 0.0 || lambda_up < 0.0 || lambda_down < 0.0 {
            return Err(Error::InvalidModel(
                "sigma and jump intensities must be non-negative".into(),
            ));
        }
        if eta_up <= 0.0 || eta_down <= 0.0 {
            return Err(Error::InvalidModel("jump rates eta must be positive".into()));
        }
        match kind {
            ProcessKind::CompoundPoisson => {
                if sigma != 0.0 || drift != 0.0 {
                    return Err(Error::InvalidModel(
                        "compound Poisson model requires sigma = 0 and drift = 0".into(),
                    ));
                }
                if lambda_up + lambda_down <= 0.0 {
                    return Err(Error::InvalidModel(
                        "compound Poisson model needs a positive jump intensity".into(),
                    ));
                }
            }
            ProcessKind::JumpDiffusion => {
                if sigma <= 0.0 {
                    return Err(Error::InvalidModel(
                        "jump-diffusion model requires sigma > 0".into(),
                    ));
                }
            }
        }
        Ok(Self {
            kind,
            drift,
            sigma,
            lambda_up,
            lambda_down,
            eta_up,
            eta_down,
        })
    }

    pub fn jump_diffusion(
        drift: f64,
        sigma: f64,
        lambda_up: f64,
        lambda_down: f64,
        eta_up: f64,
        eta_down: f64,
    ) -> Result<Self> {
        Self::new(
            ProcessKind::JumpDiffusion,
            drift,
            sigma,
            lambda_up,
            lambda_down,
            eta_up,
            eta_down,
        )
    }

    pub fn compound_poisson(
        lambda_up: f64,
        lambda_down: f64,
        eta_up: f64,
        eta_down: f64,
    ) -> Result<Self> {
        Self::new(
            ProcessKind::CompoundPoisson,
            0.0,
            0.0,
            lambda_up,
            lambda_down,
            eta_up,
            eta_down,
        )
    }

    /// Brownian motion with drift (no jumps).
    pub fn brownian(drift: f64, sigma: f64) -> Result<Self> {
        Self::jump_diffusion(drift, sigma, 0.0, 0.0, 1.0, 1.0)
    }

    /// The deterministic path `x + μt`. Trivial as a Lévy process: the
    /// simulator accepts it, the fluctuation routines reject it.
    pub fn drift_only(drift: f64) -> Self {
        Self {
            kind: ProcessKind::JumpDiffusion,
            drift,
            sigma: 0.0,
            lambda_up: 0.0,
            lambda_down: 0.0,
            eta_up: 1.0,
            eta_down: 1.0,
        }
    }

    pub fn kind(&self) -> ProcessKind {
        self.kind
    }
    pub fn drift(&self) -> f64 {
        self.drift
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn lambda_up(&self) -> f64 {
        self.lambda_up
    }
    pub fn lambda_down(&self) -> f64 {
        self.lambda_down
    }
    pub fn eta_up(&self) -> f64 {
        self.eta_up
    }
    pub fn eta_down(&self) -> f64 {
        self.eta_down
    }

    pub fn has_up_jumps(&self) -> bool {
        self.lambda_up > 0.0
    }

    pub fn has_down_jumps(&self) -> bool {
        self.lambda_down > 0.0
    }

    pub fn is_trivial(&self) -> bool {
        self.sigma == 0.0 && self.lambda_up == 0.0 && self.lambda_down == 0.0
    }

    /// Unbounded variation iff there is a Brownian part.
    pub fn has_unbounded_variation(&self) -> bool {
        self.sigma > 0.0
    }

    /// Open interval on which φ is finite. A side without jumps has no pole.
    pub fn domain(&self) -> (f64, f64) {
        let lo = if self.has_down_jumps() {
            -self.eta_down
        } else {
            f64::NEG_INFINITY
        };
        let hi = if self.has_up_jumps() {
            self.eta_up
        } else {
            f64::INFINITY
        };
        (lo, hi)
    }

    pub fn in_domain(&self, z: f64) -> bool {
        let (lo, hi) = self.domain();
        z > lo && z < hi
    }

    fn check_domain(&self, z: f64) -> Result<()> {
        if self.in_domain(z) {
            Ok(())
        } else {
            let (lo, hi) = self.domain();
            Err(Error::Domain {
                value: z,
                domain: format!("({lo}, {hi})"),
            })
        }
    }

    /// φ(z) = log E e^{zX₁}.
    pub fn characteristic_exponent(&self, z: f64) -> Result<f64> {
        self.check_domain(z)?;
        Ok(self.phi_unchecked(z))
    }

    /// φ without the domain check; the caller keeps `z` strictly between the poles.
    pub(crate) fn phi_unchecked(&self, z: f64) -> f64 {
        let mut v = 0.5 * self.sigma * self.sigma * z * z + self.drift * z;
        if self.lambda_up > 0.0 {
            v += self.lambda_up * z / (self.eta_up - z);
        }
        if self.lambda_down > 0.0 {
            v -= self.lambda_down * z / (self.eta_down + z);
        }
        v
    }

    /// k-th derivative of φ at z.
    pub fn phi_derivative(&self, z: f64, k: u32) -> Result<f64> {
        self.check_domain(z)?;
        if k == 0 {
            return Ok(self.phi_unchecked(z));
        }
        let s2 = self.sigma * self.sigma;
        let mut v = match k {
            1 => s2 * z + self.drift,
            2 => s2,
            _ => 0.0,
        };
        let fact = factorial(k);
        if self.lambda_up > 0.0 {
            v += self.lambda_up * self.eta_up * fact / (self.eta_up - z).powi(k as i32 + 1);
        }
        if self.lambda_down > 0.0 {
            let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            v += sign * self.lambda_down * self.eta_down * fact
                / (self.eta_down + z).powi(k as i32 + 1);
        }
        Ok(v)
    }

    /// k-th cumulant of X₁.
    pub fn cumulant(&self, k: u32) -> f64 {
        self.phi_derivative(0.0, k)
            .expect("0 lies inside the domain of φ")
    }

    /// E X₁.
    pub fn mean(&self) -> f64 {
        let mut m = self.drift;
        if self.lambda_up > 0.0 {
            m += self.lambda_up / self.eta_up;
        }
        if self.lambda_down > 0.0 {
            m -= self.lambda_down / self.eta_down;
        }
        m
    }

    /// Var X₁ = σ² + 2λ₁/η₁² + 2λ₂/η₂².
    pub fn variance_rate(&self) -> f64 {
        let mut v = self.sigma * self.sigma;
        if self.lambda_up > 0.0 {
            v += 2.0 * self.lambda_up / (self.eta_up * self.eta_up);
        }
        if self.lambda_down > 0.0 {
            v += 2.0 * self.lambda_down / (self.eta_down * self.eta_down);
        }
        v
    }

    /// Checks `max(φ(θ), φ(−θ)) < δ` with θ strictly inside the domain.
    /// Failures are reported, not returned as errors.
    pub fn check_assumption1(&self, delta: f64, theta: f64) -> ValidationReport {
        let mut report = ValidationReport {
            delta,
            theta,
            theta_in_domain: false,
            phi_plus: None,
            phi_minus: None,
            passed: false,
            reason: None,
        };
        if !(delta > 0.0 && theta > 0.0) {
            report.reason = Some("delta and theta must be positive".into());
            return report;
        }
        if !(self.in_domain(theta) && self.in_domain(-theta)) {
            report.reason = Some("θ outside domain of φ".into());
            return report;
        }
        report.theta_in_domain = true;
        let plus = self.phi_unchecked(theta);
        let minus = self.phi_unchecked(-theta);
        report.phi_plus = Some(plus);
        report.phi_minus = Some(minus);
        report.passed = plus.max(minus) < delta;
        if !report.passed {
            report.reason = Some(format!(
                "max(φ(θ), φ(−θ)) = {} is not below δ = {delta}",
                plus.max(minus)
            ));
        }
        report
    }
}

pub(crate) fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}
