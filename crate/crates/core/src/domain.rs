//! Domain types shared by every module: tasks, predictions, interaction
//! records and episode logs. Pure data plus structural validation.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single prediction or ground-truth value.
///
/// Binary tasks are categorical tasks with a two-label set, so two variants
/// cover every output kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    Real(f64),
    Label(String),
}

impl Prediction {
    pub fn as_real(&self) -> Option<f64> {
        match self {
            Prediction::Real(v) => Some(*v),
            Prediction::Label(_) => None,
        }
    }

    pub fn as_label(&self) -> Option<&str> {
        match self {
            Prediction::Label(l) => Some(l),
            Prediction::Real(_) => None,
        }
    }

    pub fn label(s: impl Into<String>) -> Self {
        Prediction::Label(s.into())
    }
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // Display for f64 is the shortest representation that round-trips.
            Prediction::Real(v) => write!(f, "{v}"),
            Prediction::Label(l) => f.write_str(l),
        }
    }
}

/// Output space of a prediction task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutputKind {
    RealScalar,
    Categorical(Vec<String>),
    Binary(Vec<String>),
}

impl OutputKind {
    pub fn name(&self) -> &'static str {
        match self {
            OutputKind::RealScalar => "real-scalar",
            OutputKind::Categorical(_) => "categorical",
            OutputKind::Binary(_) => "binary",
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        match self {
            OutputKind::RealScalar => None,
            OutputKind::Categorical(l) | OutputKind::Binary(l) => Some(l),
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, OutputKind::RealScalar)
    }

    /// Checks that `value` belongs to this output space.
    pub fn check(&self, value: &Prediction) -> std::result::Result<(), String> {
        match (self, value) {
            (OutputKind::RealScalar, Prediction::Real(v)) if v.is_finite() => Ok(()),
            (OutputKind::RealScalar, Prediction::Real(v)) => Err(format!("non-finite value {v}")),
            (OutputKind::RealScalar, Prediction::Label(l)) => {
                Err(format!("label `{l}` in a real-scalar task"))
            }
            (kind, Prediction::Label(l)) => {
                if kind.labels().unwrap_or_default().iter().any(|x| x == l) {
                    Ok(())
                } else {
                    Err(format!("label `{l}` is not in the task's label set"))
                }
            }
            (kind, Prediction::Real(v)) => Err(format!("number {v} in a {} task", kind.name())),
        }
    }
}

/// Pointwise loss of a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    SquaredError,
    AbsoluteError,
    ZeroOne,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::SquaredError => "squared-error",
            LossKind::AbsoluteError => "absolute-error",
            LossKind::ZeroOne => "zero-one",
        }
    }

    pub fn is_compatible(self, output: &OutputKind) -> bool {
        match self {
            LossKind::SquaredError | LossKind::AbsoluteError => output.is_real(),
            LossKind::ZeroOne => !output.is_real(),
        }
    }

    /// Loss of `prediction` against `truth`. Fails if either value has the
    /// wrong variant for this loss.
    pub fn pointwise(self, prediction: &Prediction, truth: &Prediction) -> Result<f64> {
        match (self, prediction, truth) {
            (LossKind::SquaredError, Prediction::Real(p), Prediction::Real(t)) => {
                let d = p - t;
                Ok(d * d)
            }
            (LossKind::AbsoluteError, Prediction::Real(p), Prediction::Real(t)) => Ok((p - t).abs()),
            (LossKind::ZeroOne, Prediction::Label(p), Prediction::Label(t)) => {
                Ok(if p == t { 0.0 } else { 1.0 })
            }
            _ => Err(Error::ValueMismatch(format!(
                "{} cannot compare `{prediction}` with `{truth}`",
                self.name()
            ))),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "squared-error" => Ok(LossKind::SquaredError),
            "absolute-error" => Ok(LossKind::AbsoluteError),
            "zero-one" => Ok(LossKind::ZeroOne),
            other => Err(format!("unknown loss_kind `{other}`")),
        }
    }
}

/// A prediction task: output space plus pointwise loss. Inputs are only
/// ever referenced through opaque instance ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTask", into = "RawTask")]
pub struct TaskSpec {
    pub task_id: String,
    pub output_kind: OutputKind,
    pub loss_kind: LossKind,
}

impl TaskSpec {
    pub fn new(task_id: impl Into<String>, output_kind: OutputKind, loss_kind: LossKind) -> Result<Self> {
        let task = TaskSpec {
            task_id: task_id.into(),
            output_kind,
            loss_kind,
        };
        task.check()?;
        Ok(task)
    }

    pub fn real(task_id: impl Into<String>, loss_kind: LossKind) -> Result<Self> {
        Self::new(task_id, OutputKind::RealScalar, loss_kind)
    }

    pub fn categorical<S: Into<String>>(
        task_id: impl Into<String>,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let labels = labels.into_iter().map(Into::into).collect();
        Self::new(task_id, OutputKind::Categorical(labels), LossKind::ZeroOne)
    }

    pub fn binary(task_id: impl Into<String>, negative: &str, positive: &str) -> Result<Self> {
        Self::new(
            task_id,
            OutputKind::Binary(vec![negative.to_string(), positive.to_string()]),
            LossKind::ZeroOne,
        )
    }

    /// Structural invariants: label set shape and loss/output compatibility.
    pub fn check(&self) -> Result<()> {
        self.problems().into_iter().next().map_or(Ok(()), Err)
    }

    fn problems(&self) -> Vec<Error> {
        let mut out = Vec::new();
        if let Err(msg) = check_text("task_id", &self.task_id) {
            out.push(Error::InvalidTask(msg));
        }
        if let Some(labels) = self.output_kind.labels() {
            if labels.is_empty() {
                out.push(Error::InvalidTask("label set is empty".into()));
            }
            if matches!(self.output_kind, OutputKind::Binary(_)) && labels.len() != 2 {
                out.push(Error::InvalidTask(format!(
                    "binary tasks need exactly 2 labels, got {}",
                    labels.len()
                )));
            }
            let mut seen = HashSet::new();
            for l in labels {
                if !seen.insert(l.as_str()) {
                    out.push(Error::InvalidTask(format!("duplicate label `{l}`")));
                }
                if l.is_empty() || l.trim() != l || l.contains([',', '\t', '\n', '\r']) {
                    out.push(Error::InvalidTask(format!(
                        "label `{l}` must be non-empty, have no surrounding whitespace and contain no comma, tab or newline"
                    )));
                }
            }
        }
        if !self.loss_kind.is_compatible(&self.output_kind) {
            out.push(Error::IncompatibleLoss {
                loss: self.loss_kind.name().into(),
                output: self.output_kind.name().into(),
            });
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    task_id: String,
    output_kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    loss_kind: LossKind,
}

impl TryFrom<RawTask> for TaskSpec {
    type Error = Error;

    fn try_from(raw: RawTask) -> Result<Self> {
        let output_kind = output_kind_from_parts(&raw.output_kind, raw.labels)?;
        TaskSpec::new(raw.task_id, output_kind, raw.loss_kind)
    }
}

impl From<TaskSpec> for RawTask {
    fn from(t: TaskSpec) -> Self {
        RawTask {
            task_id: t.task_id,
            output_kind: t.output_kind.name().to_string(),
            labels: t.output_kind.labels().map(<[String]>::to_vec),
            loss_kind: t.loss_kind,
        }
    }
}

/// Builds an [`OutputKind`] from its name and optional label list.
pub fn output_kind_from_parts(name: &str, labels: Option<Vec<String>>) -> Result<OutputKind> {
    match (name, labels) {
        ("real-scalar", None) => Ok(OutputKind::RealScalar),
        ("real-scalar", Some(_)) => Err(Error::InvalidTask("real-scalar tasks take no labels".into())),
        ("categorical", Some(l)) => Ok(OutputKind::Categorical(l)),
        ("binary", Some(l)) => Ok(OutputKind::Binary(l)),
        ("categorical" | "binary", None) => {
            Err(Error::InvalidTask(format!("{name} tasks need a label set")))
        }
        (other, _) => Err(Error::InvalidTask(format!("unknown output_kind `{other}`"))),
    }
}

/// One labelled instance: truth, the three predictions and the interaction
/// cost charged for it.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionRecord {
    pub instance_id: String,
    pub y_true: Prediction,
    pub y_human: Prediction,
    pub y_ai: Prediction,
    pub y_team: Prediction,
    pub cost: f64,
    /// RFC 3339 instant, kept verbatim.
    pub timestamp: Option<String>,
    /// Number of interaction rounds applied.
    pub rounds: Option<u32>,
}

impl InteractionRecord {
    pub fn new(
        instance_id: impl Into<String>,
        y_true: Prediction,
        y_human: Prediction,
        y_ai: Prediction,
        y_team: Prediction,
        cost: f64,
    ) -> Self {
        InteractionRecord {
            instance_id: instance_id.into(),
            y_true,
            y_human,
            y_ai,
            y_team,
            cost,
            timestamp: None,
            rounds: None,
        }
    }

    /// Shorthand for real-valued records.
    pub fn real(instance_id: impl Into<String>, truth: f64, human: f64, ai: f64, team: f64, cost: f64) -> Self {
        Self::new(
            instance_id,
            Prediction::Real(truth),
            Prediction::Real(human),
            Prediction::Real(ai),
            Prediction::Real(team),
            cost,
        )
    }

    pub fn parsed_timestamp(&self) -> Option<chrono::DateTime<chrono::FixedOffset>> {
        self.timestamp
            .as_deref()
            .and_then(|t| chrono::DateTime::parse_from_rfc3339(t).ok())
    }
}

/// All records of one dataset evaluated under one protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub episode_id: String,
    pub task: TaskSpec,
    pub protocol_id: String,
    pub cost_unit: String,
    pub records: Vec<InteractionRecord>,
}

impl EpisodeLog {
    pub fn n(&self) -> usize {
        self.records.len()
    }

    /// Same task and protocol, i.e. the logs describe one process.
    pub fn is_homogeneous_with(&self, other: &EpisodeLog) -> bool {
        self.task == other.task && self.protocol_id == other.protocol_id
    }
}

/// A broken invariant, located by record and field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub instance_id: Option<String>,
    pub field: String,
    pub message: String,
}

impl Violation {
    fn episode(field: &str, message: impl Into<String>) -> Self {
        Violation {
            instance_id: None,
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn record(id: &str, field: &str, message: impl Into<String>) -> Self {
        Violation {
            instance_id: Some(id.to_string()),
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.instance_id {
            Some(id) => write!(f, "record `{id}`, {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

fn check_text(field: &str, value: &str) -> std::result::Result<(), String> {
    if value.contains(['\n', '\r']) {
        Err(format!("{field} must not contain line breaks"))
    } else {
        Ok(())
    }
}

/// Lists every invariant the log breaks; an empty list means the log is
/// valid. Never fails and never mutates the log.
pub fn validate_episode(log: &EpisodeLog) -> Vec<Violation> {
    let mut out = Vec::new();
    for (field, value) in [
        ("episode_id", &log.episode_id),
        ("protocol_id", &log.protocol_id),
        ("cost_unit", &log.cost_unit),
    ] {
        if let Err(msg) = check_text(field, value) {
            out.push(Violation::episode(field, msg));
        }
    }
    for p in log.task.problems() {
        out.push(Violation::episode("task", p.to_string()));
    }
    if log.records.is_empty() {
        out.push(Violation::episode("records", "episode has no records"));
    }

    let kind = &log.task.output_kind;
    let mut seen = HashSet::new();
    for r in &log.records {
        let id = r.instance_id.as_str();
        if id.is_empty() || id.contains(['\t', '\n', '\r']) {
            out.push(Violation::record(
                id,
                "instance_id",
                "must be non-empty and contain no tab or line break",
            ));
        }
        if !seen.insert(id) {
            out.push(Violation::record(id, "instance_id", "duplicate instance_id"));
        }
        for (field, value) in [
            ("y_true", &r.y_true),
            ("y_human", &r.y_human),
            ("y_ai", &r.y_ai),
            ("y_team", &r.y_team),
        ] {
            if let Err(msg) = kind.check(value) {
                out.push(Violation::record(id, field, msg));
            }
        }
        if !(r.cost.is_finite() && r.cost >= 0.0) {
            out.push(Violation::record(id, "cost", format!("cost must be finite and >= 0, got {}", r.cost)));
        }
        if let Some(ts) = &r.timestamp {
            if chrono::DateTime::parse_from_rfc3339(ts).is_err() {
                out.push(Violation::record(id, "timestamp", format!("`{ts}` is not an RFC 3339 instant")));
            }
        }
    }
    out
}
