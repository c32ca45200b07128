//! Synthetic episode generation.
//!
//! Ground truths and agent predictions are drawn from keyed random streams
//! (see [`crate::rng`]): the truth of record `r` in episode `e` comes from
//! `(seed, e, r, TRUTH)`, the human's prediction from `(seed, e, r, HUMAN)`
//! and the AI's from `(seed, e, r, AI)`. A configuration therefore maps to
//! exactly one set of logs, independent of evaluation order.

mod config;
mod sweep;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub use config::{parse_scenario, scenario_to_toml};
pub use sweep::{row_seed, sweep, sweep_by_name, SweepAxis, SweepRow};

use crate::domain::{EpisodeLog, InteractionRecord, OutputKind, Prediction, TaskSpec};
use crate::error::{Error, Result};
use crate::protocols::{run_protocol, ProtocolKind, ProtocolSpec};
use crate::rng::{keyed_rng, tag};

const SUM_TOLERANCE: f64 = 1e-9;

/// Error model of one agent.
#[derive(Debug, Clone, PartialEq)]
pub enum AgentModel {
    /// `truth + bias + N(0, noise_sd^2)`, real-scalar tasks only.
    AdditiveBias { bias: f64, noise_sd: f64 },
    /// With probability `error_rate` emit a wrong label: drawn from the
    /// truth's row of `confusion` when given, uniformly among the other
    /// labels otherwise.
    LabelFlip {
        error_rate: f64,
        confusion: Option<Vec<Vec<f64>>>,
    },
    /// Always emits the truth.
    Perfect,
}

impl AgentModel {
    fn kind_name(&self) -> &'static str {
        match self {
            AgentModel::AdditiveBias { .. } => "additive-bias",
            AgentModel::LabelFlip { .. } => "label-flip",
            AgentModel::Perfect => "perfect",
        }
    }

    fn validate(&self, who: &str, task: &TaskSpec) -> Result<()> {
        let field = |f: &str| format!("{who}.{f}");
        match self {
            AgentModel::Perfect => Ok(()),
            AgentModel::AdditiveBias { bias, noise_sd } => {
                if !task.output_kind.is_real() {
                    return Err(Error::config(field("kind"), "additive-bias needs a real-scalar task"));
                }
                if !bias.is_finite() {
                    return Err(Error::config(field("bias"), "must be finite"));
                }
                if !(noise_sd.is_finite() && *noise_sd >= 0.0) {
                    return Err(Error::config(field("noise_sd"), "must be finite and >= 0"));
                }
                Ok(())
            }
            AgentModel::LabelFlip { error_rate, confusion } => {
                let Some(labels) = task.output_kind.labels() else {
                    return Err(Error::config(field("kind"), "label-flip needs a categorical or binary task"));
                };
                if !(0.0..=1.0).contains(error_rate) {
                    return Err(Error::config(field("error_rate"), "must lie in [0, 1]"));
                }
                if let Some(m) = confusion {
                    if m.len() != labels.len() {
                        return Err(Error::config(
                            field("confusion"),
                            format!("needs {} rows, one per label", labels.len()),
                        ));
                    }
                    for (i, row) in m.iter().enumerate() {
                        let f = format!("{who}.confusion[{i}]");
                        if row.len() != labels.len() {
                            return Err(Error::config(f, format!("needs {} entries", labels.len())));
                        }
                        if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                            return Err(Error::config(f, "entries must be finite and >= 0"));
                        }
                        let sum: f64 = row.iter().sum();
                        if (sum - 1.0).abs() > SUM_TOLERANCE {
                            return Err(Error::config(f, format!("row sums to {sum}, expected 1")));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    fn predict(&self, truth: &Prediction, kind: &OutputKind, rng: &mut ChaCha8Rng) -> Prediction {
        match (self, truth) {
            (AgentModel::Perfect, _) => truth.clone(),
            (AgentModel::AdditiveBias { bias, noise_sd }, Prediction::Real(t)) => {
                let noise = if *noise_sd > 0.0 {
                    Normal::new(0.0, *noise_sd).expect("validated sd").sample(rng)
                } else {
                    0.0
                };
                Prediction::Real(t + bias + noise)
            }
            (AgentModel::LabelFlip { error_rate, confusion }, Prediction::Label(t)) => {
                if *error_rate == 0.0 || rng.random::<f64>() >= *error_rate {
                    return truth.clone();
                }
                let labels = kind.labels().unwrap_or_default();
                let ti = labels.iter().position(|l| l == t).unwrap_or(0);
                let idx = match confusion {
                    Some(m) => pick_weighted(&m[ti], rng.random::<f64>()),
                    None if labels.len() > 1 => {
                        let k = rng.random_range(0..labels.len() as u64 - 1) as usize;
                        if k >= ti {
                            k + 1
                        } else {
                            k
                        }
                    }
                    None => ti,
                };
                Prediction::Label(labels[idx].clone())
            }
            // unreachable for validated configurations
            _ => truth.clone(),
        }
    }
}

/// Index `i` with `sum(w[..i]) <= u < sum(w[..=i])`, falling back to the
/// last positive weight when rounding leaves `u` past the total.
fn pick_weighted(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum TruthDistribution {
    UniformReal { lo: f64, hi: f64 },
    CategoricalWeights(Vec<f64>),
}

impl TruthDistribution {
    fn validate(&self, task: &TaskSpec) -> Result<()> {
        match self {
            TruthDistribution::UniformReal { lo, hi } => {
                if !task.output_kind.is_real() {
                    return Err(Error::config("truth.kind", "uniform-real needs a real-scalar task"));
                }
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(Error::config("truth.hi", "need finite lo <= hi"));
                }
                Ok(())
            }
            TruthDistribution::CategoricalWeights(w) => {
                let Some(labels) = task.output_kind.labels() else {
                    return Err(Error::config("truth.kind", "categorical-weights needs a categorical or binary task"));
                };
                if w.len() != labels.len() {
                    return Err(Error::config(
                        "truth.weights",
                        format!("needs {} weights, one per label", labels.len()),
                    ));
                }
                if w.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return Err(Error::config("truth.weights", "weights must be finite and >= 0"));
                }
                let sum: f64 = w.iter().sum();
                if (sum - 1.0).abs() > SUM_TOLERANCE {
                    return Err(Error::config("truth.weights", format!("weights sum to {sum}, expected 1")));
                }
                Ok(())
            }
        }
    }

    fn sample(&self, kind: &OutputKind, rng: &mut ChaCha8Rng) -> Prediction {
        let u: f64 = rng.random();
        match self {
            TruthDistribution::UniformReal { lo, hi } => Prediction::Real(lo + (hi - lo) * u),
            TruthDistribution::CategoricalWeights(w) => {
                let labels = kind.labels().unwrap_or_default();
                Prediction::Label(labels[pick_weighted(w, u)].clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario_id: String,
    pub task: TaskSpec,
    pub n_records: usize,
    pub n_episodes: usize,
    pub human: AgentModel,
    pub ai: AgentModel,
    pub protocol: ProtocolSpec,
    pub truth: TruthDistribution,
    pub lambda: f64,
    pub seed: u64,
    pub cost_unit: String,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.scenario_id.is_empty() || self.scenario_id.contains(['\n', '\r', '\t', '/', '\\']) {
            return Err(Error::config("scenario_id", "must be non-empty and free of path separators and control characters"));
        }
        self.task.check().map_err(|e| Error::config("task", e.to_string()))?;
        if self.n_records == 0 {
            return Err(Error::config("n_records", "must be >= 1"));
        }
        if self.n_episodes == 0 {
            return Err(Error::config("n_episodes", "must be >= 1"));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::config("lambda", "must be finite and > 0"));
        }
        if self.cost_unit.contains(['\n', '\r']) {
            return Err(Error::config("cost_unit", "must not contain line breaks"));
        }
        self.human.validate("human", &self.task)?;
        self.ai.validate("ai", &self.task)?;
        self.truth.validate(&self.task)?;
        self.protocol.validate().map_err(|e| match e {
            Error::InvalidProtocol { field, message } => Error::config(format!("protocol.{field}"), message),
            other => Error::config("protocol", other.to_string()),
        })?;
        if self.protocol.protocol_id.contains(['\n', '\r']) {
            return Err(Error::config("protocol.protocol_id", "must not contain line breaks"));
        }
        let needs_real = matches!(
            self.protocol.kind,
            ProtocolKind::Averaging { .. } | ProtocolKind::IterativeDeliberation { .. }
        );
        if needs_real && !self.task.output_kind.is_real() {
            return Err(Error::config("protocol.kind", "protocol requires real-scalar outputs"));
        }
        Ok(())
    }

    pub fn episode_id(&self, episode: usize) -> String {
        format!("{}-{:04}", self.scenario_id, episode)
    }
}

/// Generates `n_episodes` logs of `n_records` records each.
pub fn simulate(config: &ScenarioConfig) -> Result<Vec<EpisodeLog>> {
    config.validate()?;
    (0..config.n_episodes)
        .map(|e| simulate_episode(config, e))
        .collect()
}

fn simulate_episode(config: &ScenarioConfig, episode: usize) -> Result<EpisodeLog> {
    let kind = &config.task.output_kind;
    let (seed, e) = (config.seed, episode as u64);
    let records = (0..config.n_records)
        .map(|r| {
            let r64 = r as u64;
            let truth = config.truth.sample(kind, &mut keyed_rng(seed, e, r64, tag::TRUTH));
            let human = config.human.predict(&truth, kind, &mut keyed_rng(seed, e, r64, tag::HUMAN));
            let ai = config.ai.predict(&truth, kind, &mut keyed_rng(seed, e, r64, tag::AI));
            let outcome = run_protocol(&config.protocol, &human, &ai, Some(&truth), &config.task)?;
            let mut rec = InteractionRecord::new(format!("r{r:06}"), truth, human, ai, outcome.y_team, outcome.cost_incurred);
            rec.rounds = Some(outcome.rounds_used);
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EpisodeLog {
        episode_id: config.episode_id(episode),
        task: config.task.clone(),
        protocol_id: config.protocol.protocol_id.clone(),
        cost_unit: config.cost_unit.clone(),
        records,
    })
}

impl AgentModel {
    pub fn name(&self) -> &'static str {
        self.kind_name()
    }
}
