//! JSON run configuration.

use std::path::Path;

use peakwidths::ballwidths::BallWidthKind;
use peakwidths::params::{CuspProfile, ProblemParams, SlowlyVarying, WeightSpec, WidthKind};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    #[default]
    Kolmogorov,
    Linear,
    Gelfand,
}

impl From<Kind> for WidthKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Kolmogorov => WidthKind::Kolmogorov,
            Kind::Linear => WidthKind::Linear,
            Kind::Gelfand => WidthKind::Gelfand,
        }
    }
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Kolmogorov => "kolmogorov",
            Kind::Linear => "linear",
            Kind::Gelfand => "gelfand",
        }
    }

    /// Linear widths of balls are not estimated; they share the Kolmogorov search.
    pub fn ball_kind(self) -> BallWidthKind {
        match self {
            Kind::Gelfand => BallWidthKind::Gelfand,
            _ => BallWidthKind::Kolmogorov,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub p: f64,
    pub q: f64,
    pub r: u32,
    pub d: u32,
    #[serde(default)]
    pub kind: Kind,
}

/// `z^-beta |ln z|^-alpha sv(|ln z|)`; `sv` lists `(depth, exponent)` factors of iterated logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weight {
    pub beta: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub sv: Vec<(u32, f64)>,
}

/// `z^sigma |ln z|^theta omega(|ln z|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cusp {
    pub sigma: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub omega: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HardySection {
    pub log2_tau_min: i32,
    pub log2_tau_max: i32,
    pub points: usize,
}

impl Default for HardySection {
    fn default() -> Self {
        Self {
            log2_tau_min: -16,
            log2_tau_max: -2,
            points: 15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PartitionSection {
    /// Schedule level is `n d`.
    pub n: u32,
    /// Number of breakpoints in the certified `z_k` partition.
    pub depth: usize,
    pub c_hat: f64,
}

impl Default for PartitionSection {
    fn default() -> Self {
        Self {
            n: 4,
            depth: 100,
            c_hat: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BallWidthsSection {
    pub nu: usize,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub kind: Kind,
    pub restarts: usize,
    pub samples: usize,
}

impl Default for BallWidthsSection {
    fn default() -> Self {
        Self {
            nu: 3,
            n: 1,
            p: 2.0,
            q: 1.0,
            kind: Kind::Kolmogorov,
            restarts: 64,
            samples: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecaySection {
    pub nmin: usize,
    pub nmax: usize,
    /// How many of the default plane-wave probes to use.
    pub probes: usize,
    pub bumps: bool,
}

impl Default for DecaySection {
    fn default() -> Self {
        Self {
            nmin: 64,
            nmax: 4096,
            probes: 3,
            bumps: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub problem: Problem,
    pub weight_g: Weight,
    pub weight_v: Weight,
    pub cusp: Cusp,
    #[serde(default)]
    pub hardy: HardySection,
    #[serde(default)]
    pub partition: PartitionSection,
    #[serde(default)]
    pub ballwidths: BallWidthsSection,
    #[serde(default)]
    pub decay: DecaySection,
}

/// Typed model objects built from a [`Config`].
#[derive(Debug, Clone)]
pub struct Model {
    pub params: ProblemParams,
    pub g: WeightSpec,
    pub v: WeightSpec,
    pub cusp: CuspProfile,
}

fn invalid(e: peakwidths::Error) -> Failure {
    Failure::Validation(e.to_string())
}

impl Config {
    /// Unreadable files and malformed JSON exit with 1; well-formed JSON of the wrong shape with 2.
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        serde_json::from_str(text).map_err(|e| match e.classify() {
            serde_json::error::Category::Data => Failure::Validation(format!("config schema: {e}")),
            _ => Failure::Config(format!("config is not valid JSON: {e}")),
        })
    }

    pub fn model(&self) -> Result<Model, Failure> {
        let pr = &self.problem;
        let params = ProblemParams::new(pr.p, pr.q, pr.r, pr.d, pr.kind.into()).map_err(invalid)?;
        let weight = |w: &Weight| -> Result<WeightSpec, Failure> {
            let sv = SlowlyVarying::new(w.sv.clone()).map_err(invalid)?;
            WeightSpec::new(w.beta, w.alpha, sv).map_err(invalid)
        };
        let omega = SlowlyVarying::new(self.cusp.omega.clone()).map_err(invalid)?;
        Ok(Model {
            params,
            g: weight(&self.weight_g)?,
            v: weight(&self.weight_v)?,
            cusp: CuspProfile::new(self.cusp.sigma, self.cusp.theta, omega).map_err(invalid)?,
        })
    }
}
