//! Team-performance measures computed from episode logs.
//!
//! The three empirical losses are means of the task's pointwise loss. CTP is
//! 1 exactly when the team's loss is strictly below both individual losses;
//! the gross gain is `min(L_H, L_AI) - L_HAI` and is reported for every
//! episode, including negative values; the net gain charges the interaction
//! cost at a conversion rate `lambda` (loss units per cost unit).

mod bootstrap;
mod reliance;
mod stability;

use std::fmt;

use num_traits::Num;
use serde::{Deserialize, Serialize};

pub use bootstrap::{bootstrap, bootstrap_gain, BootstrapConfig, BootstrapInterval, BootstrapStatistic};
pub use reliance::{classify_reliance, reliance_breakdown, RelianceVerdict};
pub use stability::{check_homogeneous, stability_profile, windowed_stability, StabilityProfile};

use crate::domain::{validate_episode, EpisodeLog};
use crate::error::{Error, Result};
use crate::numeric;

/// Mean pointwise losses of the human, the AI and the team over one episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSummary {
    pub n: usize,
    pub loss_human: f64,
    pub loss_ai: f64,
    pub loss_team: f64,
}

impl LossSummary {
    pub fn new(loss_human: f64, loss_ai: f64, loss_team: f64) -> Self {
        LossSummary {
            n: 1,
            loss_human,
            loss_ai,
            loss_team,
        }
    }

    pub fn best_individual(&self) -> f64 {
        self.loss_human.min(self.loss_ai)
    }
}

/// Pointwise `[human, ai, team]` losses for every record, in record order.
pub fn pointwise_losses(log: &EpisodeLog) -> Result<Vec<[f64; 3]>> {
    if log.records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let loss = log.task.loss_kind;
    if !loss.is_compatible(&log.task.output_kind) {
        return Err(Error::IncompatibleLoss {
            loss: loss.name().into(),
            output: log.task.output_kind.name().into(),
        });
    }
    log.records
        .iter()
        .map(|r| {
            Ok([
                loss.pointwise(&r.y_human, &r.y_true)?,
                loss.pointwise(&r.y_ai, &r.y_true)?,
                loss.pointwise(&r.y_team, &r.y_true)?,
            ])
        })
        .collect()
}

pub(crate) fn summarize(losses: &[[f64; 3]]) -> LossSummary {
    let column = |k: usize| {
        let v: Vec<f64> = losses.iter().map(|row| row[k]).collect();
        numeric::mean(&v).unwrap_or(0.0)
    };
    LossSummary {
        n: losses.len(),
        loss_human: column(0),
        loss_ai: column(1),
        loss_team: column(2),
    }
}

pub fn aggregate_losses(log: &EpisodeLog) -> Result<LossSummary> {
    Ok(summarize(&pointwise_losses(log)?))
}

/// Strict complementarity indicator: 1 iff `L_HAI < min(L_H, L_AI)`.
pub fn ctp(summary: &LossSummary) -> u8 {
    u8::from(summary.loss_team < summary.best_individual())
}

/// Tolerance variant: 1 iff the gross gain exceeds `margin`. A margin of 0
/// reproduces [`ctp`].
pub fn ctp_with_margin(summary: &LossSummary, margin: f64) -> u8 {
    if margin == 0.0 {
        ctp(summary)
    } else {
        u8::from(gross_gain(summary) > margin)
    }
}

pub fn gross_gain(summary: &LossSummary) -> f64 {
    summary.best_individual() - summary.loss_team
}

// Negated comparisons so that NaN fails both checks.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn check_rate<T: Num + PartialOrd>(lambda: &T, total_cost: &T) -> Result<()> {
    if !(*lambda > T::zero()) {
        return Err(Error::InvalidConversionRate);
    }
    if !(*total_cost >= T::zero()) {
        return Err(Error::InvalidCost);
    }
    Ok(())
}

/// `gross - lambda * total_cost`.
///
/// Generic so the same code path can be checked under exact rational
/// arithmetic.
pub fn net_gain<T: Num + PartialOrd + Clone>(gross: T, lambda: T, total_cost: T) -> Result<T> {
    check_rate(&lambda, &total_cost)?;
    Ok(gross - lambda * total_cost)
}

/// `gross / total_cost`, undefined at zero cost.
pub fn efficiency_ratio<T: Num + PartialOrd + Clone>(gross: T, total_cost: T) -> Option<T> {
    if total_cost > T::zero() {
        Some(gross / total_cost)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Efficiency {
    Efficient,
    Inefficient,
    UndefinedZeroCost,
}

impl fmt::Display for Efficiency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Efficiency::Efficient => "efficient",
            Efficiency::Inefficient => "inefficient",
            Efficiency::UndefinedZeroCost => "undefined-zero-cost",
        })
    }
}

/// Efficient iff the net gain is positive, which for a positive cost is the
/// same as `gross / total_cost > lambda`. Zero cost leaves the ratio test
/// undefined.
pub fn efficiency_verdict<T: Num + PartialOrd + Clone>(gross: T, lambda: T, total_cost: T) -> Result<Efficiency> {
    check_rate(&lambda, &total_cost)?;
    if total_cost == T::zero() {
        return Ok(Efficiency::UndefinedZeroCost);
    }
    let net = gross - lambda * total_cost;
    Ok(if net > T::zero() {
        Efficiency::Efficient
    } else {
        Efficiency::Inefficient
    })
}

/// An individual agent with zero loss: strict complementarity is then out of
/// reach whatever the protocol does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegenerateCase {
    PerfectAi,
    PerfectHuman,
    BothPerfect,
}

impl DegenerateCase {
    pub fn detect(summary: &LossSummary) -> Option<Self> {
        match (summary.loss_human == 0.0, summary.loss_ai == 0.0) {
            (true, true) => Some(DegenerateCase::BothPerfect),
            (false, true) => Some(DegenerateCase::PerfectAi),
            (true, false) => Some(DegenerateCase::PerfectHuman),
            (false, false) => None,
        }
    }

    pub fn note(self) -> &'static str {
        match self {
            DegenerateCase::PerfectAi => {
                "degenerate case: the AI has zero loss, so no team can strictly outperform it (CTP = 0 by construction)"
            }
            DegenerateCase::PerfectHuman => {
                "degenerate case: the human has zero loss, so no team can strictly outperform them (CTP = 0 by construction)"
            }
            DegenerateCase::BothPerfect => {
                "degenerate case: human and AI both have zero loss (CTP = 0 by construction)"
            }
        }
    }
}

/// Everything [`evaluate_episode`] derives from one log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub episode_id: String,
    pub n: usize,
    pub loss_human: f64,
    pub loss_ai: f64,
    pub loss_team: f64,
    pub ctp: u8,
    pub gross_gain: f64,
    pub total_cost: f64,
    pub lambda: f64,
    pub net_gain: f64,
    pub efficiency_ratio: Option<f64>,
    pub efficient: Efficiency,
    pub degenerate: Option<DegenerateCase>,
}

impl GainReport {
    pub fn summary(&self) -> LossSummary {
        LossSummary {
            n: self.n,
            loss_human: self.loss_human,
            loss_ai: self.loss_ai,
            loss_team: self.loss_team,
        }
    }

    /// Gross gain is only a complementarity gain when it is positive.
    pub fn gain_is_positive(&self) -> bool {
        self.gross_gain > 0.0
    }
}

pub fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConversionRate)
    }
}

pub fn evaluate_episode(log: &EpisodeLog, lambda: f64) -> Result<GainReport> {
    check_lambda(lambda)?;
    let summary = aggregate_losses(log)?;
    let violations = validate_episode(log);
    if !violations.is_empty() {
        return Err(Error::InvalidEpisode(violations));
    }
    let total_cost = numeric::exact_sum(log.records.iter().map(|r| r.cost));
    Ok(report_from_parts(&log.episode_id, summary, total_cost, lambda))
}

pub(crate) fn report_from_parts(episode_id: &str, summary: LossSummary, total_cost: f64, lambda: f64) -> GainReport {
    let gross = gross_gain(&summary);
    GainReport {
        episode_id: episode_id.to_string(),
        n: summary.n,
        loss_human: summary.loss_human,
        loss_ai: summary.loss_ai,
        loss_team: summary.loss_team,
        ctp: ctp(&summary),
        gross_gain: gross,
        total_cost,
        lambda,
        net_gain: gross - lambda * total_cost,
        efficiency_ratio: efficiency_ratio(gross, total_cost),
        efficient: if total_cost == 0.0 {
            Efficiency::UndefinedZeroCost
        } else if gross - lambda * total_cost > 0.0 {
            Efficiency::Efficient
        } else {
            Efficiency::Inefficient
        },
        degenerate: DegenerateCase::detect(&summary),
    }
}
