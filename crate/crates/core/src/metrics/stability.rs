use serde::{Deserialize, Serialize};

use crate::domain::EpisodeLog;
use crate::error::{Error, Result};

use super::{check_lambda, evaluate_episode};

/// CTP outcomes over a sequence of windows.
///
/// `stability` is the fraction of windows with CTP = 1. Binary outcomes are
/// never averaged into anything else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityProfile {
    /// Records per window; `None` when each episode is one window.
    pub window_size: Option<usize>,
    pub ctp_series: Vec<u8>,
    pub stability: f64,
    /// Gross gain per window.
    pub gain_series: Vec<f64>,
    /// Net gain per window at the profile's lambda.
    pub net_gain_series: Vec<f64>,
}

impl StabilityProfile {
    fn from_series(window_size: Option<usize>, reports: impl IntoIterator<Item = (u8, f64, f64)>) -> Self {
        let mut ctp_series = Vec::new();
        let mut gain_series = Vec::new();
        let mut net_gain_series = Vec::new();
        for (c, g, n) in reports {
            ctp_series.push(c);
            gain_series.push(g);
            net_gain_series.push(n);
        }
        let ones = ctp_series.iter().filter(|&&c| c == 1).count();
        let stability = if ctp_series.is_empty() {
            0.0
        } else {
            ones as f64 / ctp_series.len() as f64
        };
        StabilityProfile {
            window_size,
            ctp_series,
            stability,
            gain_series,
            net_gain_series,
        }
    }
}

/// Every log must share the first log's task and protocol.
pub fn check_homogeneous(logs: &[EpisodeLog]) -> Result<()> {
    let first = logs.first().ok_or(Error::NoEpisodes)?;
    for log in &logs[1..] {
        if log.task != first.task {
            return Err(Error::HeterogeneousEpisodes(format!(
                "episode `{}` has task `{}`, expected `{}`",
                log.episode_id, log.task.task_id, first.task.task_id
            )));
        }
        if log.protocol_id != first.protocol_id {
            return Err(Error::HeterogeneousEpisodes(format!(
                "episode `{}` has protocol `{}`, expected `{}`",
                log.episode_id, log.protocol_id, first.protocol_id
            )));
        }
    }
    Ok(())
}

/// One window per episode, in the given (temporal) order.
pub fn stability_profile(logs: &[EpisodeLog], lambda: f64) -> Result<StabilityProfile> {
    check_lambda(lambda)?;
    check_homogeneous(logs)?;
    let reports = logs
        .iter()
        .map(|l| evaluate_episode(l, lambda))
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityProfile::from_series(
        None,
        reports.iter().map(|r| (r.ctp, r.gross_gain, r.net_gain)),
    ))
}

/// Splits one episode into consecutive windows of `window` records and
/// profiles them. Records are ordered by timestamp when every record has
/// one, otherwise by position. A shorter trailing window is kept.
pub fn windowed_stability(log: &EpisodeLog, window: usize, lambda: f64) -> Result<StabilityProfile> {
    if window == 0 {
        return Err(Error::InvalidWindow);
    }
    check_lambda(lambda)?;
    if log.records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut records = log.records.clone();
    let stamps: Option<Vec<_>> = records.iter().map(|r| r.parsed_timestamp()).collect();
    if let Some(stamps) = stamps {
        let mut keyed: Vec<_> = stamps.into_iter().zip(records).collect();
        keyed.sort_by_key(|(t, _)| *t);
        records = keyed.into_iter().map(|(_, r)| r).collect();
    }
    let reports = records
        .chunks(window)
        .enumerate()
        .map(|(i, chunk)| {
            let sub = EpisodeLog {
                episode_id: format!("{}#w{i}", log.episode_id),
                records: chunk.to_vec(),
                ..log.clone()
            };
            evaluate_episode(&sub, lambda)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityProfile::from_series(
        Some(window),
        reports.iter().map(|r| (r.ctp, r.gross_gain, r.net_gain)),
    ))
}
