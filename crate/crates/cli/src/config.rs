use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use pdflow_core::certify::{Frame, FrequencyGrid, DEFAULT_TOLERANCE};
use pdflow_core::distgraph::{
    build_graph, DistributedProblem, GlobalCondition, Graph, GraphDoc, GraphKind,
};
use pdflow_core::dynamics::{FlowKind, IntegrateOptions, DEFAULT_STEP, DEFAULT_WINDOW_FRACTION};
use pdflow_core::problem::{
    library_instance, ConvexityClass, Function, ObjectiveOracle, ProblemDoc, ProblemInstance,
    Solution,
};

use crate::error::{CliError, Result};

/// Where the problem instance comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSource {
    /// One of the built-in instances, by name.
    Library(String),
    Inline(Box<ProblemDoc>),
    /// Path to a problem JSON file, relative to the config file.
    File(PathBuf),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    #[default]
    Zero,
    /// Uniform entries in `[−scale, scale]` drawn from the config seed.
    Random {
        #[serde(default = "one")]
        scale: f64,
    },
    Explicit {
        x: Vec<f64>,
        #[serde(default)]
        lambda: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Explicit(GraphDoc),
    Family { kind: GraphKind, n_nodes: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentDoc {
    pub objective: Function,
    pub declared_l: f64,
    #[serde(default)]
    pub declared_mu: f64,
    #[serde(default)]
    pub convexity_class: ConvexityClass,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributedSpec {
    pub graph: GraphSpec,
    pub agents: Vec<AgentDoc>,
    #[serde(default = "one")]
    pub alpha: f64,
    pub global: GlobalCondition,
}

/// One experiment, as read from the `--config` JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub problem: Option<ProblemSource>,
    #[serde(default)]
    pub distributed: Option<DistributedSpec>,
    #[serde(default = "default_flow")]
    pub flow: FlowKind,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Overrides the penalty parameter of the instance.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "default_window")]
    pub window_fraction: f64,
    #[serde(default)]
    pub grid: FrequencyGrid,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Certification frame; defaults to original for square constraints and
    /// transformed otherwise.
    #[serde(default)]
    pub frame: Option<Frame>,
    /// Strong-convexity modulus for the transformed frame; defaults to the declared μ.
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}
fn default_flow() -> FlowKind {
    FlowKind::Augmented
}
fn default_horizon() -> f64 {
    10.0
}
fn default_step() -> f64 {
    DEFAULT_STEP
}
fn default_stride() -> usize {
    10
}
fn default_window() -> f64 {
    DEFAULT_WINDOW_FRACTION
}
fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub horizon: Option<f64>,
    pub step: Option<f64>,
    pub alpha: Option<f64>,
    pub rho_grid_points: Option<usize>,
    pub seed: Option<u64>,
    pub frame: Option<Frame>,
    pub window_fraction: Option<f64>,
}

/// A validated config together with the directory relative paths resolve against.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub base_dir: PathBuf,
}

/// Parses a config document. Errors name the offending field path and the
/// line and column of the JSON text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path.is_empty() || path == "." {
            CliError::config(inner.to_string())
        } else {
            CliError::config(format!("field `{path}`: {inner}"))
        }
    })?;
    de.end().map_err(|e| CliError::config(e.to_string()))?;
    Ok(cfg)
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<Experiment> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    let mut config = parse_config(&text)?;
    config.apply(overrides);
    config.validate()?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Experiment { config, base_dir })
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::config(format!(
            "field `{name}`: must be positive, got {v}"
        )))
    }
}

impl ExperimentConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.out {
            self.out = Some(v.clone());
        }
        if let Some(v) = o.horizon {
            self.horizon = v;
        }
        if let Some(v) = o.step {
            self.step = v;
        }
        if let Some(v) = o.alpha {
            self.alpha = Some(v);
            if let Some(d) = &mut self.distributed {
                d.alpha = v;
            }
        }
        if let Some(v) = o.rho_grid_points {
            self.grid.points = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.frame {
            self.frame = Some(v);
        }
        if let Some(v) = o.window_fraction {
            self.window_fraction = v;
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("horizon", self.horizon)?;
        positive("step", self.step)?;
        if self.step > self.horizon {
            return Err(CliError::config(format!(
                "field `step`: {} exceeds the horizon {}",
                self.step, self.horizon
            )));
        }
        if self.stride == 0 {
            return Err(CliError::config("field `stride`: must be at least 1"));
        }
        if !(self.window_fraction > 0.0 && self.window_fraction <= 1.0) {
            return Err(CliError::config(format!(
                "field `window_fraction`: must lie in (0, 1], got {}",
                self.window_fraction
            )));
        }
        if !self.tolerance.is_finite() {
            return Err(CliError::config("field `tolerance`: must be finite"));
        }
        if let Some(a) = self.alpha {
            positive("alpha", a)?;
        }
        if let Some(d) = &self.distributed {
            positive("distributed.alpha", d.alpha)?;
        }
        if let Some(mu) = self.mu {
            if !(mu.is_finite() && mu >= 0.0) {
                return Err(CliError::config(format!(
                    "field `mu`: must be nonnegative, got {mu}"
                )));
            }
        }
        if let InitialState::Random { scale } = self.initial {
            positive("initial.scale", scale)?;
        }
        self.grid
            .validate()
            .map_err(|e| CliError::config(format!("field `grid`: {e}")))?;
        Ok(())
    }

    pub fn integrate_options(&self) -> IntegrateOptions {
        IntegrateOptions::fixed(self.horizon, self.step, self.stride)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| PathBuf::from("pdflow-out"))
    }
}

impl Experiment {
    pub fn problem(&self) -> Result<ProblemInstance> {
        let source = self
            .config
            .problem
            .as_ref()
            .ok_or_else(|| CliError::config("field `problem`: missing"))?;
        let p = match source {
            ProblemSource::Library(name) => library_instance(name)?,
            ProblemSource::Inline(doc) => ProblemInstance::try_from((**doc).clone())?,
            ProblemSource::File(rel) => {
                let path = self.base_dir.join(rel);
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    CliError::config(format!("cannot read problem file {}: {e}", path.display()))
                })?;
                let mut de = serde_json::Deserializer::from_str(&text);
                let doc: ProblemDoc = serde_path_to_error::deserialize(&mut de).map_err(|e| {
                    CliError::config(format!(
                        "problem file {}: field `{}`: {}",
                        path.display(),
                        e.path(),
                        e.inner()
                    ))
                })?;
                ProblemInstance::try_from(doc)?
            }
        };
        match self.config.alpha {
            Some(a) => Ok(p.with_alpha(a)?),
            None => Ok(p),
        }
    }

    pub fn distributed(&self) -> Result<DistributedProblem> {
        let spec = self
            .config
            .distributed
            .as_ref()
            .ok_or_else(|| CliError::config("field `distributed`: missing"))?;
        let graph = match &spec.graph {
            GraphSpec::Explicit(doc) => Graph::try_from(doc.clone())?,
            GraphSpec::Family { kind, n_nodes } => build_graph(*kind, *n_nodes, self.config.seed)?,
        };
        if spec.agents.is_empty() {
            return Err(CliError::config(
                "field `distributed.agents`: at least one agent is required",
            ));
        }
        let agents = spec
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| {
                ObjectiveOracle::new(
                    a.objective.clone(),
                    a.declared_l,
                    a.declared_mu,
                    a.convexity_class,
                )
                .map_err(|e| CliError::config(format!("field `distributed.agents[{i}]`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DistributedProblem::new(
            agents,
            graph,
            spec.alpha,
            spec.global.clone(),
        )?)
    }

    /// Initial primal-dual state for dimensions `(n, m)`.
    pub fn initial_state(&self, n: usize, m: usize) -> Result<Solution> {
        match &self.config.initial {
            InitialState::Zero => Ok(Solution {
                x: vec![0.0; n],
                lambda: vec![0.0; m],
            }),
            InitialState::Random { scale } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
                let mut draw = |k: usize| {
                    (0..k)
                        .map(|_| rng.gen_range(-*scale..=*scale))
                        .collect::<Vec<_>>()
                };
                let x = draw(n);
                let lambda = draw(m);
                Ok(Solution { x, lambda })
            }
            InitialState::Explicit { x, lambda } => {
                let lambda = lambda.clone().unwrap_or_else(|| vec![0.0; m]);
                if x.len() != n || lambda.len() != m {
                    return Err(CliError::config(format!(
                        "field `initial`: expected x of length {n} and lambda of length {m}, got {} and {}",
                        x.len(),
                        lambda.len()
                    )));
                }
                Ok(Solution {
                    x: x.clone(),
                    lambda,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let cfg = parse_config(r#"{"problem": {"library": "affine_square"}}"#).unwrap();
        assert_eq!(cfg.horizon, 10.0);
        assert_eq!(cfg.step, DEFAULT_STEP);
        assert_eq!(cfg.grid.points, 200);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn errors_name_the_field() {
        let err = parse_config("{\n  \"horizon\": \"ten\"\n}")
            .unwrap_err()
            .to_string();
        assert!(err.contains("horizon") && err.contains("line 2"), "{err}");
        let err = parse_config(r#"{"horizn": 1}"#).unwrap_err().to_string();
        assert!(err.contains("horizn"), "{err}");
        let mut cfg = parse_config(r#"{"horizon": 0}"#).unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("horizon"));
        cfg.apply(&Overrides {
            horizon: Some(3.0),
            ..Overrides::default()
        });
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn random_initial_state_follows_seed() {
        let cfg =
            parse_config(r#"{"initial": {"kind": "random", "scale": 2}, "seed": 9}"#).unwrap();
        let e = Experiment {
            config: cfg,
            base_dir: PathBuf::new(),
        };
        let a = e.initial_state(3, 2).unwrap();
        let b = e.initial_state(3, 2).unwrap();
        assert_eq!(a, b);
        assert!(a.x.iter().chain(&a.lambda).all(|v| v.abs() <= 2.0));
    }
}
