//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_box_graph, build_interval_graph, FiniteGraph, GraphJson};
use crate::montecarlo::{AuditMode, EnergyInterval, ScheduleInputs};
use crate::msa::{Preset, ScaleParams};
use crate::operator::{Ensemble, EnsembleKind};
use crate::verify::Suite;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Interval { n: usize },
    Box { d: u32, side: usize },
    Inline { graph: GraphJson },
    File { path: PathBuf },
}

impl GraphSpec {
    pub fn build(&self) -> Result<FiniteGraph> {
        match self {
            GraphSpec::Interval { n } => build_interval_graph(*n),
            GraphSpec::Box { d, side } => build_box_graph(*d, *side),
            GraphSpec::Inline { graph } => FiniteGraph::from_json(graph),
            GraphSpec::File { path } => {
                let text = std::fs::read_to_string(path)?;
                let json: GraphJson = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                FiniteGraph::from_json(&json)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub coupling: f64,
}

impl EnsembleSpec {
    pub fn build(&self) -> Ensemble {
        match self.kind {
            EnsembleKind::Uniform01 => Ensemble::uniform(self.coupling),
            EnsembleKind::Gaussian01 => Ensemble::gaussian(self.coupling),
        }
    }
}

/// A preset with optional overrides of individual exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub preset: Preset,
    #[serde(default = "one")]
    pub m: f64,
    #[serde(default = "default_l0")]
    pub l0: u64,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub kappa: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn default_l0() -> u64 {
    8
}

impl Default for ParamsSpec {
    fn default() -> Self {
        ParamsSpec {
            preset: Preset::Section2,
            m: 1.0,
            l0: default_l0(),
            alpha: None,
            beta: None,
            tau: None,
            rho: None,
            sigma: None,
            delta: None,
            kappa: None,
        }
    }
}

impl ParamsSpec {
    pub fn resolve(&self, d: u32) -> Result<ScaleParams> {
        let mut p = match self.preset {
            Preset::Section2 => ScaleParams::section2(self.m, self.l0),
            Preset::Section8 => ScaleParams::section8(self.m, self.l0),
            Preset::Custom => {
                let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::Config(format!("custom preset needs `{name}`")));
                let mut p = ScaleParams::section2(self.m, self.l0);
                p.alpha = need(self.alpha, "alpha")?;
                p.beta = need(self.beta, "beta")?;
                p.tau = need(self.tau, "tau")?;
                p.rho = need(self.rho, "rho")?;
                p.preset = Preset::Custom;
                p
            }
        };
        if let Some(v) = self.alpha {
            p.alpha = v;
        }
        if let Some(v) = self.beta {
            p.beta = v;
        }
        if let Some(v) = self.tau {
            p.tau = v;
        }
        if let Some(v) = self.rho {
            p.rho = v;
        }
        if self.sigma.is_some() {
            p.sigma = self.sigma;
        }
        if self.delta.is_some() {
            p.delta = self.delta;
        }
        if let Some(k) = self.kappa {
            p = p.with_kappa(k, d);
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateQuantity {
    Pk,
    Qk,
    Wegner,
    DisjointTail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GkSpec {
    pub x: usize,
    pub y: usize,
    pub l: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Classify {
        #[serde(default)]
        center: Option<usize>,
        radius: u64,
        /// Enables the tunneling and CNR verdicts with sub-balls of this radius.
        #[serde(default)]
        small_radius: Option<u64>,
    },
    Estimate {
        quantity: EstimateQuantity,
        scale: u64,
        #[serde(default)]
        centers: Option<Vec<usize>>,
        #[serde(default)]
        epsilons: Option<Vec<f64>>,
        /// Radius of the enclosing ball of the disjoint-count experiment.
        #[serde(default)]
        big: Option<u64>,
    },
    Induction {
        #[serde(default)]
        center: Option<usize>,
        small: u64,
        big: u64,
        #[serde(default = "default_mode")]
        mode: AuditMode,
    },
    Coverage {
        #[serde(default)]
        center: Option<usize>,
        scale: u64,
        schedule: ScheduleInputs,
    },
    TwoVolume {
        x: usize,
        y: usize,
        scale: u64,
        schedule: ScheduleInputs,
    },
    Dynamics {
        #[serde(default)]
        origin: Option<usize>,
        distances: Vec<u64>,
        #[serde(default)]
        audit: Option<GkSpec>,
    },
    Verify {
        suite: Suite,
        #[serde(default)]
        inject_q: Option<f64>,
    },
}

fn default_mode() -> AuditMode {
    AuditMode::Section5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    #[serde(default = "default_prefix")]
    pub prefix: String,
}

fn default_prefix() -> String {
    "msa-lab".into()
}

impl OutputSpec {
    pub fn trials_path(&self) -> PathBuf {
        self.dir.join(format!("{}_trials.csv", self.prefix))
    }

    pub fn summary_path(&self) -> PathBuf {
        self.dir.join(format!("{}_summary.json", self.prefix))
    }

    pub fn decay_path(&self) -> PathBuf {
        self.dir.join(format!("{}_decay.csv", self.prefix))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub params: ParamsSpec,
    pub experiment: Experiment,
    #[serde(default)]
    pub trials: u64,
    #[serde(default)]
    pub seed_base: u64,
    #[serde(default)]
    pub energy: Option<f64>,
    #[serde(default)]
    pub interval: Option<EnergyInterval>,
    #[serde(default)]
    pub grid_step: Option<f64>,
    /// Volume constant C_d; probed from the graph when absent.
    #[serde(default)]
    pub c_d: Option<f64>,
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn energy(&self) -> Result<f64> {
        self.energy.ok_or_else(|| Error::Config("this experiment needs `energy`".into()))
    }

    pub fn interval(&self) -> Result<EnergyInterval> {
        let i = self.interval.ok_or_else(|| Error::Config("this experiment needs `interval`".into()))?;
        EnergyInterval::new(i.lo, i.hi).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "graph": {"kind": "interval", "n": 64},
        "ensemble": {"kind": "uniform01", "coupling": 1.0},
        "experiment": {"kind": "verify", "suite": "lemmas"},
        "output": {"dir": "out"}
    }"#;

    #[test]
    fn minimal_config_and_defaults() {
        let c = ExperimentConfig::from_json(BASE).unwrap();
        assert_eq!(c.trials, 0);
        assert_eq!(c.params.preset, Preset::Section2);
        assert_eq!(c.output.prefix, "msa-lab");
        assert_eq!(c.graph.build().unwrap().len(), 64);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = BASE.replace("\"trials\"", "\"x\"").replace("\"output\"", "\"bogus\": 1, \"output\"");
        assert!(matches!(ExperimentConfig::from_json(&bad), Err(Error::Config(_))));
        let bad = BASE.replace("\"n\": 64", "\"n\": 64, \"m\": 3");
        assert!(ExperimentConfig::from_json(&bad).is_err());
        let bad = BASE.replace("\"suite\": \"lemmas\"", "\"suite\": \"lemmas\", \"extra\": true");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }

    #[test]
    fn params_resolution() {
        let p = ParamsSpec { preset: Preset::Section8, m: 0.5, ..Default::default() }.resolve(1).unwrap();
        assert_eq!(p.sigma, Some(1.0 / 3.0));
        assert_eq!(p.m, 0.5);
        let custom = ParamsSpec { preset: Preset::Custom, ..Default::default() };
        assert!(custom.resolve(1).is_err());
        let over = ParamsSpec { beta: Some(0.4), kappa: Some(12.0), ..Default::default() }.resolve(1).unwrap();
        assert_eq!(over.beta, 0.4);
        assert!(over.theta.is_some());
    }
}
