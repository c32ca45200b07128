//! TOML scenario files.
//!
//! ```toml
//! scenario_id = "opposite-bias"
//! n_records = 10
//! n_episodes = 100
//! lambda = 0.1
//! seed = 7                 # optional
//! cost_unit = "minute"     # optional
//!
//! [task]
//! task_id = "estimate"
//! output_kind = "real-scalar"
//! loss_kind = "squared-error"
//!
//! [truth]
//! kind = "uniform-real"
//! lo = 0.0
//! hi = 10.0
//!
//! [human]
//! kind = "additive-bias"
//! bias = -1.0
//! noise_sd = 0.0
//!
//! [ai]
//! kind = "additive-bias"
//! bias = 0.5
//! noise_sd = 0.0
//!
//! [protocol]
//! protocol_id = "averaging-0.5"
//! kind = "averaging"
//! weight_human = 0.5
//! base_cost = 0.1
//! per_round_cost = 0.0
//! ```
//!
//! Syntax errors carry a line and column; semantic errors name the offending
//! field (`human.noise_sd`, `ai.confusion[1]`, ...).

use serde::{Deserialize, Serialize};

use super::{AgentModel, ScenarioConfig, TruthDistribution};
use crate::domain::TaskSpec;
use crate::error::{Error, Result};
use crate::protocols::{ProtocolKind, ProtocolSpec};
use crate::DEFAULT_SEED;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    scenario_id: String,
    n_records: usize,
    n_episodes: usize,
    lambda: f64,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    cost_unit: Option<String>,
    task: TaskSpec,
    truth: RawTruth,
    human: RawAgent,
    ai: RawAgent,
    protocol: RawProtocol,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTruth {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgent {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bias: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise_sd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    confusion: Option<Vec<Vec<f64>>>,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProtocol {
    protocol_id: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight_human: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rounds: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    step: Option<f64>,
    #[serde(default)]
    base_cost: f64,
    #[serde(default)]
    per_round_cost: f64,
}

/// Parses and validates a scenario file.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        Error::parse(line, column, e.message().trim_end().to_string())
    })?;
    let config = ScenarioConfig {
        scenario_id: raw.scenario_id,
        task: raw.task,
        n_records: raw.n_records,
        n_episodes: raw.n_episodes,
        human: agent("human", raw.human)?,
        ai: agent("ai", raw.ai)?,
        protocol: protocol(raw.protocol)?,
        truth: truth(raw.truth)?,
        lambda: raw.lambda,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        cost_unit: raw.cost_unit.unwrap_or_else(|| "unit".to_string()),
    };
    config.validate()?;
    Ok(config)
}

/// Canonical TOML form; `parse_scenario` of the result gives back `config`.
pub fn scenario_to_toml(config: &ScenarioConfig) -> String {
    let raw = RawScenario {
        scenario_id: config.scenario_id.clone(),
        n_records: config.n_records,
        n_episodes: config.n_episodes,
        lambda: config.lambda,
        seed: Some(config.seed),
        cost_unit: Some(config.cost_unit.clone()),
        task: config.task.clone(),
        truth: match &config.truth {
            TruthDistribution::UniformReal { lo, hi } => RawTruth {
                kind: "uniform-real".into(),
                lo: Some(*lo),
                hi: Some(*hi),
                ..Default::default()
            },
            TruthDistribution::CategoricalWeights(w) => RawTruth {
                kind: "categorical-weights".into(),
                weights: Some(w.clone()),
                ..Default::default()
            },
        },
        human: raw_agent(&config.human),
        ai: raw_agent(&config.ai),
        protocol: raw_protocol(&config.protocol),
    };
    toml::to_string(&raw).expect("scenario serializes")
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn required<T>(value: Option<T>, field: String, kind: &str) -> Result<T> {
    value.ok_or_else(|| Error::config(field, format!("required for kind `{kind}`")))
}

fn unused(present: &[(&str, bool)], section: &str, kind: &str) -> Result<()> {
    match present.iter().find(|(_, p)| *p) {
        Some((name, _)) => Err(Error::config(
            format!("{section}.{name}"),
            format!("not used by kind `{kind}`"),
        )),
        None => Ok(()),
    }
}

fn agent(section: &str, raw: RawAgent) -> Result<AgentModel> {
    let f = |name: &str| format!("{section}.{name}");
    let kind = raw.kind.as_str();
    match kind {
        "additive-bias" => {
            unused(&[("error_rate", raw.error_rate.is_some()), ("confusion", raw.confusion.is_some())], section, kind)?;
            Ok(AgentModel::AdditiveBias {
                bias: required(raw.bias, f("bias"), kind)?,
                noise_sd: raw.noise_sd.unwrap_or(0.0),
            })
        }
        "label-flip" => {
            unused(&[("bias", raw.bias.is_some()), ("noise_sd", raw.noise_sd.is_some())], section, kind)?;
            Ok(AgentModel::LabelFlip {
                error_rate: required(raw.error_rate, f("error_rate"), kind)?,
                confusion: raw.confusion,
            })
        }
        "perfect" => {
            unused(
                &[
                    ("bias", raw.bias.is_some()),
                    ("noise_sd", raw.noise_sd.is_some()),
                    ("error_rate", raw.error_rate.is_some()),
                    ("confusion", raw.confusion.is_some()),
                ],
                section,
                kind,
            )?;
            Ok(AgentModel::Perfect)
        }
        other => Err(Error::config(
            f("kind"),
            format!("unknown agent kind `{other}` (expected additive-bias, label-flip or perfect)"),
        )),
    }
}

fn raw_agent(model: &AgentModel) -> RawAgent {
    let kind = model.name().to_string();
    match model {
        AgentModel::AdditiveBias { bias, noise_sd } => RawAgent {
            kind,
            bias: Some(*bias),
            noise_sd: Some(*noise_sd),
            ..Default::default()
        },
        AgentModel::LabelFlip { error_rate, confusion } => RawAgent {
            kind,
            error_rate: Some(*error_rate),
            confusion: confusion.clone(),
            ..Default::default()
        },
        AgentModel::Perfect => RawAgent {
            kind,
            ..Default::default()
        },
    }
}

fn truth(raw: RawTruth) -> Result<TruthDistribution> {
    let kind = raw.kind.as_str();
    match kind {
        "uniform-real" => {
            unused(&[("weights", raw.weights.is_some())], "truth", kind)?;
            Ok(TruthDistribution::UniformReal {
                lo: required(raw.lo, "truth.lo".into(), kind)?,
                hi: required(raw.hi, "truth.hi".into(), kind)?,
            })
        }
        "categorical-weights" => {
            unused(&[("lo", raw.lo.is_some()), ("hi", raw.hi.is_some())], "truth", kind)?;
            Ok(TruthDistribution::CategoricalWeights(required(
                raw.weights,
                "truth.weights".into(),
                kind,
            )?))
        }
        other => Err(Error::config(
            "truth.kind",
            format!("unknown truth kind `{other}` (expected uniform-real or categorical-weights)"),
        )),
    }
}

fn protocol(raw: RawProtocol) -> Result<ProtocolSpec> {
    let f = |name: &str| format!("protocol.{name}");
    let kind = raw.kind.as_str();
    let params = [
        ("threshold", raw.threshold.is_some()),
        ("weight_human", raw.weight_human.is_some()),
        ("rounds", raw.rounds.is_some()),
        ("step", raw.step.is_some()),
    ];
    let others = |keep: &[&str]| -> Vec<(&str, bool)> {
        params.iter().copied().filter(|(n, _)| !keep.contains(n)).collect()
    };
    let parsed = match kind {
        "self-reliance" => ProtocolKind::SelfReliance,
        "ai-reliance" => ProtocolKind::AiReliance,
        "oracle-selector" => ProtocolKind::OracleSelector,
        "threshold-selector" => ProtocolKind::ThresholdSelector {
            threshold: required(raw.threshold, f("threshold"), kind)?,
        },
        "averaging" => ProtocolKind::Averaging {
            weight_human: required(raw.weight_human, f("weight_human"), kind)?,
        },
        "iterative-deliberation" => ProtocolKind::IterativeDeliberation {
            rounds: required(raw.rounds, f("rounds"), kind)?,
            step: required(raw.step, f("step"), kind)?,
        },
        other => {
            return Err(Error::config(
                f("kind"),
                format!(
                    "unknown protocol kind `{other}` (expected self-reliance, ai-reliance, oracle-selector, \
                     threshold-selector, averaging or iterative-deliberation)"
                ),
            ))
        }
    };
    let keep: &[&str] = match parsed {
        ProtocolKind::ThresholdSelector { .. } => &["threshold"],
        ProtocolKind::Averaging { .. } => &["weight_human"],
        ProtocolKind::IterativeDeliberation { .. } => &["rounds", "step"],
        _ => &[],
    };
    unused(&others(keep), "protocol", kind)?;
    Ok(ProtocolSpec::new(raw.protocol_id, parsed).with_costs(raw.base_cost, raw.per_round_cost))
}

fn raw_protocol(spec: &ProtocolSpec) -> RawProtocol {
    let mut raw = RawProtocol {
        protocol_id: spec.protocol_id.clone(),
        kind: spec.kind.name().to_string(),
        base_cost: spec.base_cost,
        per_round_cost: spec.per_round_cost,
        ..Default::default()
    };
    match spec.kind {
        ProtocolKind::ThresholdSelector { threshold } => raw.threshold = Some(threshold),
        ProtocolKind::Averaging { weight_human } => raw.weight_human = Some(weight_human),
        ProtocolKind::IterativeDeliberation { rounds, step } => {
            raw.rounds = Some(rounds);
            raw.step = Some(step);
        }
        _ => {}
    }
    raw
}
