//! One-parameter sweeps over a base scenario.

use std::fmt;
use std::str::FromStr;

use super::{simulate, AgentModel, ScenarioConfig};
use crate::error::{Error, Result};
use crate::metrics::{evaluate_episode, stability_profile};
use crate::numeric::mean;
use crate::protocols::ProtocolKind;

/// A scalar knob of a [`ScenarioConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Lambda,
    NRecords,
    NEpisodes,
    Agent { ai: bool, param: AgentParam },
    Protocol(ProtocolParam),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentParam {
    Bias,
    NoiseSd,
    ErrorRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolParam {
    BaseCost,
    PerRoundCost,
    Rounds,
    Step,
    Threshold,
    WeightHuman,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let agent_param = |p: &str| match p {
            "bias" => Some(AgentParam::Bias),
            "noise_sd" => Some(AgentParam::NoiseSd),
            "error_rate" => Some(AgentParam::ErrorRate),
            _ => None,
        };
        let protocol_param = |p: &str| match p {
            "base_cost" => Some(ProtocolParam::BaseCost),
            "per_round_cost" => Some(ProtocolParam::PerRoundCost),
            "rounds" => Some(ProtocolParam::Rounds),
            "step" => Some(ProtocolParam::Step),
            "threshold" => Some(ProtocolParam::Threshold),
            "weight_human" => Some(ProtocolParam::WeightHuman),
            _ => None,
        };
        let axis = match s {
            "lambda" => Some(SweepAxis::Lambda),
            "n_records" => Some(SweepAxis::NRecords),
            "n_episodes" => Some(SweepAxis::NEpisodes),
            _ => match s.split_once('.') {
                Some(("human", p)) => agent_param(p).map(|param| SweepAxis::Agent { ai: false, param }),
                Some(("ai", p)) => agent_param(p).map(|param| SweepAxis::Agent { ai: true, param }),
                Some(("protocol", p)) => protocol_param(p).map(SweepAxis::Protocol),
                Some(_) => None,
                // Agent parameters are ambiguous without a prefix.
                None => protocol_param(s).map(SweepAxis::Protocol),
            },
        };
        axis.ok_or_else(|| Error::UnknownAxis(s.to_string()))
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SweepAxis::Lambda => "lambda".to_string(),
            SweepAxis::NRecords => "n_records".to_string(),
            SweepAxis::NEpisodes => "n_episodes".to_string(),
            SweepAxis::Agent { ai, param } => {
                let p = match param {
                    AgentParam::Bias => "bias",
                    AgentParam::NoiseSd => "noise_sd",
                    AgentParam::ErrorRate => "error_rate",
                };
                format!("{}.{p}", if *ai { "ai" } else { "human" })
            }
            SweepAxis::Protocol(p) => {
                let p = match p {
                    ProtocolParam::BaseCost => "base_cost",
                    ProtocolParam::PerRoundCost => "per_round_cost",
                    ProtocolParam::Rounds => "rounds",
                    ProtocolParam::Step => "step",
                    ProtocolParam::Threshold => "threshold",
                    ProtocolParam::WeightHuman => "weight_human",
                };
                format!("protocol.{p}")
            }
        };
        f.write_str(&s)
    }
}

fn as_count(axis: SweepAxis, v: f64) -> Result<u64> {
    if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(Error::config(axis.to_string(), format!("needs a non-negative integer, got {v}")))
    }
}

impl SweepAxis {
    /// Returns `base` with this knob set to `value`. Fails when the knob
    /// does not exist on the base scenario (e.g. `human.error_rate` for an
    /// additive-bias human).
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut cfg = base.clone();
        let missing = || Error::config(self.to_string(), "not a parameter of the base scenario");
        match self {
            SweepAxis::Lambda => cfg.lambda = value,
            SweepAxis::NRecords => cfg.n_records = as_count(self, value)? as usize,
            SweepAxis::NEpisodes => cfg.n_episodes = as_count(self, value)? as usize,
            SweepAxis::Agent { ai, param } => {
                let model = if ai { &mut cfg.ai } else { &mut cfg.human };
                match (model, param) {
                    (AgentModel::AdditiveBias { bias, .. }, AgentParam::Bias) => *bias = value,
                    (AgentModel::AdditiveBias { noise_sd, .. }, AgentParam::NoiseSd) => *noise_sd = value,
                    (AgentModel::LabelFlip { error_rate, .. }, AgentParam::ErrorRate) => *error_rate = value,
                    _ => return Err(missing()),
                }
            }
            SweepAxis::Protocol(p) => match (p, &mut cfg.protocol.kind) {
                (ProtocolParam::BaseCost, _) => cfg.protocol.base_cost = value,
                (ProtocolParam::PerRoundCost, _) => cfg.protocol.per_round_cost = value,
                (ProtocolParam::Rounds, ProtocolKind::IterativeDeliberation { rounds, .. }) => {
                    *rounds = as_count(self, value)? as u32
                }
                (ProtocolParam::Step, ProtocolKind::IterativeDeliberation { step, .. }) => *step = value,
                (ProtocolParam::Threshold, ProtocolKind::ThresholdSelector { threshold }) => *threshold = value,
                (ProtocolParam::WeightHuman, ProtocolKind::Averaging { weight_human }) => *weight_human = value,
                _ => return Err(missing()),
            },
        }
        Ok(cfg)
    }
}

/// Per-value summary of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub mean_gross_gain: f64,
    /// Fraction of episodes with CTP = 1.
    pub stability: f64,
    pub mean_net_gain: f64,
}

/// Seed of row `index`: row 0 reproduces the base scenario exactly.
pub fn row_seed(base_seed: u64, index: usize) -> u64 {
    base_seed.wrapping_add(index as u64)
}

pub fn sweep(base: &ScenarioConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>> {
    base.validate()?;
    values
        .iter()
        .enumerate()
        .map(|(i, &value)| {
            let mut cfg = axis.apply(base, value)?;
            cfg.seed = row_seed(base.seed, i);
            let logs = simulate(&cfg)?;
            let reports = logs
                .iter()
                .map(|l| evaluate_episode(l, cfg.lambda))
                .collect::<Result<Vec<_>>>()?;
            let gross: Vec<f64> = reports.iter().map(|r| r.gross_gain).collect();
            let net: Vec<f64> = reports.iter().map(|r| r.net_gain).collect();
            let profile = stability_profile(&logs, cfg.lambda)?;
            Ok(SweepRow {
                value,
                mean_gross_gain: mean(&gross).expect("at least one episode"),
                stability: profile.stability,
                mean_net_gain: mean(&net).expect("at least one episode"),
            })
        })
        .collect()
}

pub fn sweep_by_name(base: &ScenarioConfig, axis: &str, values: &[f64]) -> Result<Vec<SweepRow>> {
    sweep(base, axis.parse()?, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::tests::opposite_bias;

    #[test]
    fn axis_names_round_trip() {
        for name in [
            "lambda",
            "n_records",
            "n_episodes",
            "human.bias",
            "ai.noise_sd",
            "human.error_rate",
            "protocol.rounds",
            "protocol.step",
            "protocol.threshold",
            "protocol.weight_human",
            "protocol.base_cost",
            "protocol.per_round_cost",
        ] {
            let axis: SweepAxis = name.parse().unwrap();
            assert_eq!(axis.to_string(), name);
        }
        assert_eq!("rounds".parse::<SweepAxis>().unwrap(), SweepAxis::Protocol(ProtocolParam::Rounds));
        for bad in ["noise_sd", "bias", "human.rounds", "robot.bias", ""] {
            assert!(matches!(bad.parse::<SweepAxis>(), Err(Error::UnknownAxis(_))), "{bad}");
        }
    }

    #[test]
    fn lambda_sweep_prices_the_cost() {
        let rows = sweep(&opposite_bias(1.0), SweepAxis::Lambda, &[0.05, 0.1875, 0.5]).unwrap();
        let expected = [0.1375, 0.0, -0.3125];
        for (row, want) in rows.iter().zip(expected) {
            assert!((row.mean_gross_gain - 0.1875).abs() < 1e-12);
            assert_eq!(row.stability, 1.0);
            assert!((row.mean_net_gain - want).abs() < 1e-12, "{} vs {want}", row.mean_net_gain);
        }
    }

    #[test]
    fn rounds_sweep_is_monotone() {
        let mut base = opposite_bias(1.0);
        base.protocol.kind = ProtocolKind::IterativeDeliberation { rounds: 1, step: 0.5 };
        base.protocol.per_round_cost = 0.05;
        let rows = sweep_by_name(&base, "protocol.rounds", &[0.0, 1.0, 2.0, 4.0]).unwrap();
        // gross gain is the same for every rounds value, net falls with cost
        for w in rows.windows(2) {
            assert!(w[1].mean_net_gain < w[0].mean_net_gain);
        }
    }

    #[test]
    fn missing_parameter_is_an_error() {
        let base = opposite_bias(1.0);
        assert!(matches!(
            sweep_by_name(&base, "human.error_rate", &[0.1]),
            Err(Error::Config { .. })
        ));
        assert!(matches!(sweep_by_name(&base, "n_records", &[1.5]), Err(Error::Config { .. })));
        assert!(matches!(sweep_by_name(&base, "lambda", &[0.0]), Err(Error::Config { .. })));
    }

    #[test]
    fn first_row_matches_base() {
        let mut base = opposite_bias(1.0);
        base.human = AgentModel::AdditiveBias { bias: 0.0, noise_sd: 1.0 };
        let rows = sweep(&base, SweepAxis::Lambda, &[base.lambda]).unwrap();
        let logs = simulate(&base).unwrap();
        let profile = stability_profile(&logs, base.lambda).unwrap();
        assert_eq!(rows[0].stability, profile.stability);
    }
}
