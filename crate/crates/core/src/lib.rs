//! Evaluation toolkit for prediction-task human-AI teams.
//!
//! The crate is organised around an [`EpisodeLog`]: one dataset of labelled
//! instances, each carrying the human's, the AI's and the team's prediction
//! plus the interaction cost spent on it. From a log the [`metrics`] module
//! derives the three empirical losses, the binary complementarity indicator
//! (CTP), gross and net complementarity gain and an efficiency verdict.
//!
//! [`protocols`] turns a pair of agent predictions into a team prediction,
//! [`simulator`] synthesises logs from agent error models, [`ingest`] reads
//! and writes the on-disk formats and [`assurance`] assembles the minimal
//! reporting checklist.

pub mod assurance;
pub mod domain;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod numeric;
pub mod protocols;
pub mod rng;
pub mod simulator;

pub use domain::{
    validate_episode, EpisodeLog, InteractionRecord, LossKind, OutputKind, Prediction, TaskSpec,
    Violation,
};
pub use error::{Error, Result};
pub use metrics::{
    aggregate_losses, bootstrap_gain, classify_reliance, ctp, efficiency_verdict,
    evaluate_episode, gross_gain, net_gain, stability_profile, Efficiency, GainReport,
    LossSummary, RelianceVerdict, StabilityProfile,
};
pub use assurance::{build_report, parse_report, render_report, validate_report, AssuranceReport, RenderStyle};
pub use protocols::{run_protocol, ProtocolKind, ProtocolOutcome, ProtocolSpec};
pub use simulator::{parse_scenario, simulate, sweep, ScenarioConfig, SweepAxis, SweepRow};

/// Version string stamped into generated reports.
pub const TOOLKIT_VERSION: &str = concat!("ctpkit-core ", env!("CARGO_PKG_VERSION"));

/// Seed used whenever the caller does not supply one.
pub const DEFAULT_SEED: u64 = 20_240_917;
