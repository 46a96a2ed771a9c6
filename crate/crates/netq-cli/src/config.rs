//! The single JSON config document shared by all subcommands.
//!
//! Sections: `game`, `network`, `dynamics`, `experiment`, `output`.
//! Each subcommand reads the sections it needs and ignores the rest,
//! so one file can drive a simulation, a bounds table, and a sweep.
//! Validation failures name the offending field.

use netq::dynamics::{
    DynamicsConfig, DEFAULT_DT, DEFAULT_LEARNING_RATE, DEFAULT_REL_THRESHOLD, DEFAULT_STEPS,
    DEFAULT_TAIL, DEFAULT_VAR_THRESHOLD,
};
use netq::error::{Error, Result};
use netq::experiments::{
    default_p_grid, default_t_grid, DynamicsSettings, HistogramConfig, SweepConfig, SweepNetwork,
};
use netq::game::GameFamily;
use netq::graph::{sample_er, sample_sb, AdjacencyMatrix, ErParams, SbParams};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    pub game: Option<GameFamily>,
    pub network: Option<NetworkSection>,
    #[serde(default)]
    pub dynamics: DynamicsSection,
    pub experiment: Option<ExperimentSection>,
    #[serde(default)]
    pub output: OutputSection,
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
        let config: CliConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.dynamics.validate()?;
        if let Some(network) = &self.network {
            network.validate()?;
        }
        if let Some(experiment) = &self.experiment {
            experiment.validate()?;
        }
        Ok(())
    }

    pub fn game_required(&self) -> Result<&GameFamily> {
        self.game
            .as_ref()
            .ok_or_else(|| Error::invalid("config needs a \"game\" section for this command"))
    }

    pub fn network_required(&self) -> Result<&NetworkSection> {
        self.network
            .as_ref()
            .ok_or_else(|| Error::invalid("config needs a \"network\" section for this command"))
    }

    pub fn experiment_required(&self) -> Result<&ExperimentSection> {
        self.experiment
            .as_ref()
            .ok_or_else(|| Error::invalid("config needs an \"experiment\" section for this command"))
    }
}

/// Network models: two random families plus two deterministic
/// conveniences (a clique and isolated agents) for small examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum NetworkSection {
    Er {
        n: usize,
        p: f64,
    },
    Sb {
        community_sizes: Vec<usize>,
        p_within: Vec<f64>,
        q_between: f64,
    },
    Complete {
        n: usize,
    },
    Empty {
        n: usize,
    },
}

impl NetworkSection {
    fn validate(&self) -> Result<()> {
        match self {
            NetworkSection::Er { n, p } => {
                if *n == 0 {
                    return Err(Error::invalid("network.n must be positive"));
                }
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::invalid(format!(
                        "network.p must lie in [0, 1], got {p}"
                    )));
                }
            }
            NetworkSection::Sb {
                community_sizes,
                p_within,
                q_between,
            } => {
                if community_sizes.is_empty() || community_sizes.contains(&0) {
                    return Err(Error::invalid(
                        "network.community_sizes must be non-empty and positive",
                    ));
                }
                if p_within.len() != community_sizes.len() {
                    return Err(Error::invalid(
                        "network.p_within must have one entry per community",
                    ));
                }
                if p_within.iter().any(|p| !(0.0..=1.0).contains(p))
                    || !(0.0..=1.0).contains(q_between)
                {
                    return Err(Error::invalid(
                        "network probabilities p_within / q_between must lie in [0, 1]",
                    ));
                }
            }
            NetworkSection::Complete { n } | NetworkSection::Empty { n } => {
                if *n == 0 {
                    return Err(Error::invalid("network.n must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn sb_params(&self) -> Option<SbParams> {
        match self {
            NetworkSection::Sb {
                community_sizes,
                p_within,
                q_between,
            } => Some(SbParams {
                community_sizes: community_sizes.clone(),
                p_within: p_within.clone(),
                q_between: *q_between,
            }),
            _ => None,
        }
    }

    /// Samples (or constructs) the concrete graph for one run.
    pub fn realize(&self, seed: u64) -> Result<AdjacencyMatrix> {
        match self {
            NetworkSection::Er { n, p } => sample_er(&ErParams { n: *n, p: *p }, seed),
            NetworkSection::Sb { .. } => sample_sb(&self.sb_params().expect("sb variant"), seed),
            NetworkSection::Complete { n } => Ok(AdjacencyMatrix::complete(*n)),
            NetworkSection::Empty { n } => Ok(AdjacencyMatrix::empty(*n)),
        }
    }
}

/// Scalar dynamics parameters applied uniformly to every agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSection {
    pub temperature: f64,
    pub learning_rate: f64,
    pub steps: usize,
    pub tail: usize,
    pub var_threshold: f64,
    pub rel_threshold: f64,
    pub dt: f64,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        DynamicsSection {
            temperature: 1.0,
            learning_rate: DEFAULT_LEARNING_RATE,
            steps: DEFAULT_STEPS,
            tail: DEFAULT_TAIL,
            var_threshold: DEFAULT_VAR_THRESHOLD,
            rel_threshold: DEFAULT_REL_THRESHOLD,
            dt: DEFAULT_DT,
        }
    }
}

impl DynamicsSection {
    fn validate(&self) -> Result<()> {
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::invalid(format!(
                "dynamics.temperature must be positive, got {}",
                self.temperature
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate < 1.0) {
            return Err(Error::invalid(format!(
                "dynamics.learning_rate must lie in (0, 1), got {}",
                self.learning_rate
            )));
        }
        if self.steps == 0 || self.tail == 0 || self.tail > self.steps {
            return Err(Error::invalid(format!(
                "dynamics.steps/tail must satisfy 1 <= tail <= steps, got steps {} tail {}",
                self.steps, self.tail
            )));
        }
        if !(self.var_threshold > 0.0) || !(self.rel_threshold > 0.0) {
            return Err(Error::invalid(
                "dynamics.var_threshold and dynamics.rel_threshold must be positive",
            ));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(format!(
                "dynamics.dt must be positive, got {}",
                self.dt
            )));
        }
        Ok(())
    }

    pub fn to_config(&self, agents: usize) -> DynamicsConfig {
        DynamicsConfig {
            temperatures: vec![self.temperature; agents],
            learning_rates: vec![self.learning_rate; agents],
            steps: self.steps,
            tail: self.tail,
            dt: self.dt,
        }
    }

    pub fn to_settings(&self) -> DynamicsSettings {
        DynamicsSettings {
            learning_rate: self.learning_rate,
            steps: self.steps,
            tail: self.tail,
            var_threshold: self.var_threshold,
            rel_threshold: self.rel_threshold,
        }
    }
}

fn default_heatmap_runs() -> usize {
    20
}

fn default_boundary_runs() -> usize {
    50
}

fn default_histogram_q() -> f64 {
    0.1
}

fn default_histogram_t() -> f64 {
    0.5
}

fn default_simulations() -> usize {
    128
}

/// What a `sweep` invocation computes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentSection {
    Heatmap {
        #[serde(default = "default_t_grid")]
        t_grid: Vec<f64>,
        #[serde(default = "default_p_grid")]
        p_grid: Vec<f64>,
        n_values: Vec<usize>,
        #[serde(default = "default_heatmap_runs")]
        runs_per_cell: usize,
        /// Together with `q_values`, switches the sweep from ER to
        /// equal-size stochastic block networks.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        community_size: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q_values: Option<Vec<f64>>,
    },
    Boundary {
        #[serde(default = "default_t_grid")]
        t_grid: Vec<f64>,
        #[serde(default = "default_p_grid")]
        p_grid: Vec<f64>,
        n_values: Vec<usize>,
        #[serde(default = "default_boundary_runs")]
        runs_per_cell: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        community_size: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q_values: Option<Vec<f64>>,
    },
    Histogram {
        p_communities: Vec<f64>,
        community_size: usize,
        #[serde(default = "default_histogram_q")]
        q: f64,
        #[serde(default = "default_histogram_t")]
        t: f64,
        #[serde(default = "default_simulations")]
        simulations: usize,
    },
}

fn sweep_network(
    community_size: &Option<usize>,
    q_values: &Option<Vec<f64>>,
) -> Result<SweepNetwork> {
    match (community_size, q_values) {
        (None, None) => Ok(SweepNetwork::Er),
        (Some(size), Some(q)) => Ok(SweepNetwork::Sb {
            community_size: *size,
            q_values: q.clone(),
        }),
        _ => Err(Error::invalid(
            "experiment.community_size and experiment.q_values must be set together",
        )),
    }
}

impl ExperimentSection {
    fn validate(&self) -> Result<()> {
        // Grid/shape details are validated by the experiment builders;
        // here only the cross-field pairing that the builders cannot
        // see.
        if let ExperimentSection::Heatmap {
            community_size,
            q_values,
            ..
        }
        | ExperimentSection::Boundary {
            community_size,
            q_values,
            ..
        } = self
        {
            sweep_network(community_size, q_values)?;
        }
        Ok(())
    }

    /// Assembles the sweep description for heatmap/boundary kinds.
    pub fn sweep_config(
        &self,
        family: &GameFamily,
        dynamics: &DynamicsSection,
        base_seed: u64,
    ) -> Result<SweepConfig> {
        let (t_grid, p_grid, n_values, runs, community_size, q_values) = match self {
            ExperimentSection::Heatmap {
                t_grid,
                p_grid,
                n_values,
                runs_per_cell,
                community_size,
                q_values,
            }
            | ExperimentSection::Boundary {
                t_grid,
                p_grid,
                n_values,
                runs_per_cell,
                community_size,
                q_values,
            } => (t_grid, p_grid, n_values, runs_per_cell, community_size, q_values),
            ExperimentSection::Histogram { .. } => {
                return Err(Error::invalid(
                    "histogram experiments do not define a sweep grid",
                ))
            }
        };
        let config = SweepConfig {
            family: family.clone(),
            network: sweep_network(community_size, q_values)?,
            t_grid: t_grid.clone(),
            p_grid: p_grid.clone(),
            n_values: n_values.clone(),
            runs_per_cell: *runs,
            dynamics: dynamics.to_settings(),
            base_seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn histogram_config(
        &self,
        family: &GameFamily,
        dynamics: &DynamicsSection,
        base_seed: u64,
    ) -> Result<HistogramConfig> {
        match self {
            ExperimentSection::Histogram {
                p_communities,
                community_size,
                q,
                t,
                simulations,
            } => {
                let config = HistogramConfig {
                    family: family.clone(),
                    p_communities: p_communities.clone(),
                    community_size: *community_size,
                    q: *q,
                    t: *t,
                    simulations: *simulations,
                    dynamics: dynamics.to_settings(),
                    base_seed,
                };
                config.validate()?;
                Ok(config)
            }
            _ => Err(Error::invalid(
                "this experiment kind does not define a histogram",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub prefix: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: None,
            prefix: "run".to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let text = r#"{
            "game": {"family": "sato"},
            "network": {"model": "complete", "n": 3}
        }"#;
        let config: CliConfig = serde_json::from_str(text).unwrap();
        config.validate().unwrap();
        assert_eq!(config.dynamics, DynamicsSection::default());
        assert_eq!(config.dynamics.temperature, 1.0);
        assert_eq!(config.output.prefix, "run");
        assert!(config.experiment.is_none());
    }

    #[test]
    fn unknown_top_level_section_is_rejected() {
        let text = r#"{"games": {"family": "sato"}}"#;
        assert!(serde_json::from_str::<CliConfig>(text).is_err());
    }

    #[test]
    fn negative_temperature_names_the_field() {
        let text = r#"{
            "game": {"family": "sato"},
            "network": {"model": "complete", "n": 3},
            "dynamics": {"temperature": -1.0}
        }"#;
        let config: CliConfig = serde_json::from_str(text).unwrap();
        let err = config.validate().unwrap_err().to_string();
        assert!(err.contains("temperature"), "message was: {err}");
    }

    #[test]
    fn network_models_realize() {
        let er = NetworkSection::Er { n: 8, p: 0.5 };
        assert_eq!(er.realize(3).unwrap().n(), 8);
        let complete = NetworkSection::Complete { n: 4 };
        assert_eq!(complete.realize(0).unwrap().edge_count(), 6);
        let empty = NetworkSection::Empty { n: 4 };
        assert_eq!(empty.realize(0).unwrap().edge_count(), 0);
        let sb = NetworkSection::Sb {
            community_sizes: vec![3, 3],
            p_within: vec![1.0, 1.0],
            q_between: 0.0,
        };
        let g = sb.realize(1).unwrap();
        assert_eq!(g.n(), 6);
        assert_eq!(g.edge_count(), 6);
    }

    #[test]
    fn experiment_kinds_build_library_configs() {
        let text = r#"{
            "game": {"family": "sato"},
            "experiment": {
                "kind": "heatmap",
                "n_values": [10],
                "runs_per_cell": 2
            }
        }"#;
        let config: CliConfig = serde_json::from_str(text).unwrap();
        let sweep = config
            .experiment
            .as_ref()
            .unwrap()
            .sweep_config(config.game.as_ref().unwrap(), &config.dynamics, 1)
            .unwrap();
        assert_eq!(sweep.t_grid.len(), 22);
        assert_eq!(sweep.p_grid.len(), 5);
        assert_eq!(sweep.network, SweepNetwork::Er);

        let text = r#"{
            "game": {"family": "sato"},
            "experiment": {
                "kind": "histogram",
                "p_communities": [0.1, 0.2],
                "community_size": 4
            }
        }"#;
        let config: CliConfig = serde_json::from_str(text).unwrap();
        let histogram = config
            .experiment
            .as_ref()
            .unwrap()
            .histogram_config(config.game.as_ref().unwrap(), &config.dynamics, 1)
            .unwrap();
        assert_eq!(histogram.q, 0.1);
        assert_eq!(histogram.t, 0.5);
        assert_eq!(histogram.simulations, 128);
    }

    #[test]
    fn sb_sweep_needs_both_extra_fields() {
        let text = r#"{
            "experiment": {
                "kind": "boundary",
                "n_values": [8],
                "community_size": 4
            }
        }"#;
        let config: CliConfig = serde_json::from_str(text).unwrap();
        assert!(config.validate().is_err());
    }
}
