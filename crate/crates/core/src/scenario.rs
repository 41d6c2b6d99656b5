//! Scenario documents: one JSON file describing a model, a cost pair and
//! optional simulation settings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cost::{CostFamily, CostModel, GrowthScan};
use crate::error::{Error, Result};
use crate::levy::{LevyModel, LevyParams, ValidationReport};
use crate::mc::{SimConfig, DEFAULT_TAIL_TOLERANCE};
use crate::threshold::Problem;

pub const SCHEMA_VERSION: u32 = 1;

/// Scenarios shipped with the crate, by file name.
pub const BUNDLED: [(&str, &str); 3] = [
    (
        "paper_4_1_jd.json",
        include_str!("../../../scenarios/paper_4_1_jd.json"),
    ),
    (
        "paper_4_2_quadratic.json",
        include_str!("../../../scenarios/paper_4_2_quadratic.json"),
    ),
    (
        "paper_4_3_cpp.json",
        include_str!("../../../scenarios/paper_4_3_cpp.json"),
    ),
];

/// Optional overrides for [`SimConfig`]. Missing start and barrier default
/// to the optimal barrier.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barrier: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub model: LevyParams,
    pub cost: CostFamily,
    pub delta: f64,
    pub theta: f64,
    #[serde(default)]
    pub sim: SimOverrides,
    #[serde(default)]
    pub outputs: Vec<String>,
}

/// Everything `validate` checks, with an overall verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioValidation {
    pub passed: bool,
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
    pub assumption1: Option<ValidationReport>,
    pub growth: Option<GrowthScan>,
    /// Only checked when the process has a Brownian part.
    pub smoothness: Option<GrowthScan>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("scenario does not parse: {e}")))?;
        if s.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema {}, expected {SCHEMA_VERSION}",
                s.schema
            )));
        }
        Ok(s)
    }

    /// Reads a scenario file. I/O failures are returned separately from
    /// content errors.
    pub fn load(path: &Path) -> std::io::Result<Result<Self>> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::from_json(&text))
    }

    pub fn bundled(name: &str) -> Option<Self> {
        BUNDLED
            .iter()
            .find(|(n, _)| *n == name || n.trim_end_matches(".json") == name)
            .map(|(_, text)| Self::from_json(text).expect("bundled scenarios parse"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn levy_model(&self) -> Result<LevyModel> {
        LevyModel::try_from(self.model)
    }

    pub fn cost_model(&self) -> Result<CostModel> {
        CostModel::new(self.cost)
    }

    pub fn problem(&self) -> Result<Problem> {
        self.check_rates()?;
        Problem::new(self.levy_model()?, self.cost_model()?, self.delta)
    }

    fn check_rates(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Config(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::Config(format!("theta must be positive, got {}", self.theta)));
        }
        Ok(())
    }

    pub fn validate(&self) -> ScenarioValidation {
        let mut out = ScenarioValidation {
            passed: false,
            errors: Vec::new(),
            warnings: Vec::new(),
            assumption1: None,
            growth: None,
            smoothness: None,
        };
        if let Err(e) = self.check_rates() {
            out.errors.push(e.to_string());
        }
        let model = self.levy_model().map_err(|e| out.errors.push(e.to_string())).ok();
        let cost = self.cost_model().map_err(|e| out.errors.push(e.to_string())).ok();
        if let Some(m) = &model {
            let a1 = m.check_assumption1(self.delta, self.theta);
            if !a1.passed {
                out.errors.push(format!(
                    "exponential moment condition: {}",
                    a1.reason.clone().unwrap_or_default()
                ));
            }
            out.assumption1 = Some(a1);
        }
        if let Some(c) = &cost {
            let g = c.growth_scan(self.theta);
            if !g.bounded {
                out.errors.push(format!(
                    "f, f′ or c is not dominated by K(1 + cosh θx) for θ = {}",
                    self.theta
                ));
            }
            out.growth = Some(g);
        }
        if let (Some(m), Some(c)) = (&model, &cost) {
            out.warnings.extend(c.warnings(m));
            if m.has_unbounded_variation() && self.delta > 0.0 {
                match c.smoothness_scan(m, self.delta, self.theta) {
                    Ok(s) => {
                        if !s.bounded {
                            out.errors.push(format!(
                                "r′ or f″ is not dominated by K(1 + cosh θx) for θ = {}",
                                self.theta
                            ));
                        }
                        out.smoothness = Some(s);
                    }
                    Err(e) => out.errors.push(e.to_string()),
                }
            }
        }
        out.passed = out.errors.is_empty();
        out
    }

    /// Simulation settings with defaults filled in; `x_star` supplies the
    /// default start and barrier.
    pub fn sim_config(&self, x_star: f64) -> SimConfig {
        let o = &self.sim;
        SimConfig {
            horizon: o.horizon.unwrap_or(40.0 / self.delta),
            dt: o.dt.unwrap_or(1e-3),
            paths: o.paths.unwrap_or(10_000),
            seed: o.seed.unwrap_or(0),
            start_x: o.start_x.unwrap_or(x_star),
            barrier: o.barrier.unwrap_or(x_star),
            theta: self.theta,
            tail_tolerance: o.tail_tolerance.unwrap_or(DEFAULT_TAIL_TOLERANCE),
        }
    }
}
