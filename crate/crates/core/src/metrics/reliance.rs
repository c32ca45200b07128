use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{EpisodeLog, InteractionRecord, Prediction, TaskSpec};

/// Per-instance reliance behaviour.
///
/// The four contrastive cases need exactly one agent to be right. When both
/// agents are right (or both wrong) a selection is recorded as
/// `BothCorrectSelection` / `BothWrongSelection`; a team output matching
/// neither agent is `NonRelianceOutput`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelianceVerdict {
    AppropriateSelfReliance,
    AppropriateAiReliance,
    InappropriateSelfReliance,
    InappropriateAiReliance,
    BothCorrectSelection,
    BothWrongSelection,
    NonRelianceOutput,
}

impl RelianceVerdict {
    pub const ALL: [RelianceVerdict; 7] = [
        RelianceVerdict::AppropriateSelfReliance,
        RelianceVerdict::AppropriateAiReliance,
        RelianceVerdict::InappropriateSelfReliance,
        RelianceVerdict::InappropriateAiReliance,
        RelianceVerdict::BothCorrectSelection,
        RelianceVerdict::BothWrongSelection,
        RelianceVerdict::NonRelianceOutput,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelianceVerdict::AppropriateSelfReliance => "appropriate-self-reliance",
            RelianceVerdict::AppropriateAiReliance => "appropriate-ai-reliance",
            RelianceVerdict::InappropriateSelfReliance => "inappropriate-self-reliance",
            RelianceVerdict::InappropriateAiReliance => "inappropriate-ai-reliance",
            RelianceVerdict::BothCorrectSelection => "both-correct-selection",
            RelianceVerdict::BothWrongSelection => "both-wrong-selection",
            RelianceVerdict::NonRelianceOutput => "non-reliance-output",
        }
    }

    pub fn is_appropriate(self) -> bool {
        matches!(
            self,
            RelianceVerdict::AppropriateSelfReliance | RelianceVerdict::AppropriateAiReliance
        )
    }
}

impl fmt::Display for RelianceVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which of the two agents counts as "right" on this record.
///
/// Categorical: exact match with the truth. Real-scalar: strictly smaller
/// pointwise loss than the other agent; a tie makes both right when the
/// shared loss is zero and both wrong otherwise.
fn correctness(record: &InteractionRecord, task: &TaskSpec) -> (bool, bool) {
    if task.output_kind.is_real() {
        let loss = |p: &Prediction| {
            task.loss_kind
                .pointwise(p, &record.y_true)
                .unwrap_or(f64::INFINITY)
        };
        let (h, a) = (loss(&record.y_human), loss(&record.y_ai));
        if h < a {
            (true, false)
        } else if a < h {
            (false, true)
        } else {
            let both = h == 0.0;
            (both, both)
        }
    } else {
        (record.y_human == record.y_true, record.y_ai == record.y_true)
    }
}

pub fn classify_reliance(record: &InteractionRecord, task: &TaskSpec) -> RelianceVerdict {
    let follows_human = record.y_team == record.y_human;
    let follows_ai = record.y_team == record.y_ai;
    if !follows_human && !follows_ai {
        return RelianceVerdict::NonRelianceOutput;
    }
    match correctness(record, task) {
        (true, false) if follows_human => RelianceVerdict::AppropriateSelfReliance,
        (true, false) => RelianceVerdict::InappropriateAiReliance,
        (false, true) if follows_ai => RelianceVerdict::AppropriateAiReliance,
        (false, true) => RelianceVerdict::InappropriateSelfReliance,
        (true, true) => RelianceVerdict::BothCorrectSelection,
        (false, false) => RelianceVerdict::BothWrongSelection,
    }
}

/// Verdict counts over a log; every verdict appears as a key.
pub fn reliance_breakdown(log: &EpisodeLog) -> BTreeMap<RelianceVerdict, usize> {
    let mut counts: BTreeMap<_, _> = RelianceVerdict::ALL.iter().map(|v| (*v, 0)).collect();
    for r in &log.records {
        *counts.entry(classify_reliance(r, &log.task)).or_default() += 1;
    }
    counts
}
