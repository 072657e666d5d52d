//! JSON system configuration: base descriptor, fiber family, endpoint and
//! analysis defaults.

use serde::{Deserialize, Serialize};

use crate::base::{FiniteOrbitBase, Sided};
use crate::base::BaseSystem;
use crate::error::{Error, Result};
use crate::skew::{classify, Classification, FiberFamily, SkewSystem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BaseConfig {
    /// Two fixed points plus the orbit window `theta_{-N} .. theta_N`.
    NoinvattrWindow { window: usize },
    Finite {
        labels: Vec<f64>,
        successor: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        predecessor: Option<Vec<usize>>,
    },
    Circle { omega: f64 },
    Shift { two_sided: bool },
}

impl BaseConfig {
    pub fn build(&self) -> Result<BaseSystem> {
        Ok(match self {
            BaseConfig::NoinvattrWindow { window } => BaseSystem::FiniteOrbit(FiniteOrbitBase::noinvattr(*window)?),
            BaseConfig::Finite { labels, successor, predecessor } => {
                BaseSystem::FiniteOrbit(FiniteOrbitBase::new(labels.clone(), successor.clone(), predecessor.clone())?)
            }
            BaseConfig::Circle { omega } => BaseSystem::circle(*omega)?,
            BaseConfig::Shift { two_sided } => BaseSystem::Shift {
                sided: if *two_sided { Sided::Two } else { Sided::One },
            },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisDefaults {
    pub grid_size: usize,
    pub tolerance: f64,
    pub depth: usize,
    pub stop_delta: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for AnalysisDefaults {
    fn default() -> Self {
        Self {
            grid_size: 10_000,
            tolerance: 1e-9,
            depth: 1000,
            stop_delta: 1e-12,
            samples: 64,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub base: BaseConfig,
    pub fiber: FiberFamily,
    pub endpoint: f64,
    /// Classification to attach; derived with `classify` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
    #[serde(default)]
    pub analysis: AnalysisDefaults,
}

fn default_name() -> String {
    "system".into()
}

/// Grid used when a classification has to be derived at load time.
const DERIVE_GRID: usize = 2048;

impl SystemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Config {
                path: format!("{path} (line {}, column {})", inner.line(), inner.column()),
                message: inner.to_string(),
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn build(&self) -> Result<SkewSystem> {
        let base = self.base.build()?;
        let declared = self.classification.unwrap_or(Classification::Unclassified);
        let sys = SkewSystem::new(self.name.clone(), base, self.fiber.clone(), self.endpoint, declared)?;
        if self.classification.is_some() || !sys.analyzable() {
            return Ok(sys);
        }
        let derived = classify(&sys, self.analysis.samples, DERIVE_GRID).classification;
        SkewSystem::new(self.name.clone(), sys.base().clone(), self.fiber.clone(), self.endpoint, derived)
    }
}
