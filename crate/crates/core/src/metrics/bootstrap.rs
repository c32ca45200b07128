//! Percentile bootstrap over record-level resampling.
//!
//! Resample `b` draws its `n` indices from the keyed stream
//! `(seed, b, 0, BOOTSTRAP)`, so every resample is reproducible on its own
//! and the interval is bit-identical for a fixed seed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::EpisodeLog;
use crate::error::{Error, Result};
use crate::numeric;
use crate::rng::{keyed_rng, tag};

use super::{check_lambda, gross_gain, pointwise_losses, summarize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BootstrapStatistic {
    GrossGain,
    NetGain,
    LossTeam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapInterval {
    pub statistic: BootstrapStatistic,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub resamples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub statistic: BootstrapStatistic,
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            statistic: BootstrapStatistic::GrossGain,
            resamples: 1000,
            level: 0.95,
            seed: crate::DEFAULT_SEED,
        }
    }
}

pub const MIN_RESAMPLES: usize = 100;

/// Gross-gain interval with explicit parameters.
pub fn bootstrap_gain(
    log: &EpisodeLog,
    lambda: f64,
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<BootstrapInterval> {
    bootstrap(
        log,
        lambda,
        &BootstrapConfig {
            statistic: BootstrapStatistic::GrossGain,
            resamples,
            level,
            seed,
        },
    )
}

pub fn bootstrap(log: &EpisodeLog, lambda: f64, config: &BootstrapConfig) -> Result<BootstrapInterval> {
    check_lambda(lambda)?;
    if config.resamples < MIN_RESAMPLES {
        return Err(Error::InvalidBootstrap(format!(
            "resamples must be >= {MIN_RESAMPLES}, got {}",
            config.resamples
        )));
    }
    if !(config.level > 0.0 && config.level < 1.0) {
        return Err(Error::InvalidBootstrap(format!(
            "level must lie in (0, 1), got {}",
            config.level
        )));
    }
    let n = log.records.len();
    if n < 2 {
        return Err(Error::InsufficientRecords(n));
    }
    let losses = pointwise_losses(log)?;
    let costs: Vec<f64> = log.records.iter().map(|r| r.cost).collect();

    let statistic = |rows: &[[f64; 3]], cost: f64| {
        let s = summarize(rows);
        match config.statistic {
            BootstrapStatistic::GrossGain => gross_gain(&s),
            BootstrapStatistic::NetGain => gross_gain(&s) - lambda * cost,
            BootstrapStatistic::LossTeam => s.loss_team,
        }
    };

    let point = statistic(&losses, numeric::exact_sum(costs.iter().copied()));
    let mut stats = Vec::with_capacity(config.resamples);
    let mut rows = Vec::with_capacity(n);
    for b in 0..config.resamples {
        let mut rng = keyed_rng(config.seed, b as u64, 0, tag::BOOTSTRAP);
        rows.clear();
        let mut acc = numeric::ExactSum::new();
        for _ in 0..n {
            let i = rng.random_range(0..n as u64) as usize;
            rows.push(losses[i]);
            acc.add(costs[i]);
        }
        stats.push(statistic(&rows, acc.value()));
    }
    stats.sort_by(f64::total_cmp);
    let alpha = (1.0 - config.level) / 2.0;
    Ok(BootstrapInterval {
        statistic: config.statistic,
        point,
        lower: percentile(&stats, alpha),
        upper: percentile(&stats, 1.0 - alpha),
        level: config.level,
        resamples: config.resamples,
        seed: config.seed,
    })
}

/// Linear interpolation between order statistics at rank `p * (len - 1)`.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    if frac == 0.0 || sorted[lo] == sorted[hi] {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}
