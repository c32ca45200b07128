//! Interaction protocols.
//!
//! A protocol is an interaction function applied some number of rounds to
//! the pair `(human input, AI input)`, followed by an output function that
//! forms the team prediction. Selector protocols never update the inputs
//! (the interaction function is the identity) and always output one of the
//! two agents' predictions.
//!
//! The oracle selector reads the ground truth. It is an analysis device that
//! bounds what any selector could achieve, not a deployable protocol.

use serde::{Deserialize, Serialize};

use crate::domain::{Prediction, TaskSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProtocolKind {
    SelfReliance,
    AiReliance,
    /// Picks whichever agent has the smaller loss against the truth; ties go
    /// to the human.
    OracleSelector,
    /// Defers to the AI when the two agents agree to within `threshold`.
    ThresholdSelector { threshold: f64 },
    /// One exchange that moves both inputs to
    /// `weight_human * human + (1 - weight_human) * ai`.
    Averaging { weight_human: f64 },
    /// Each round moves both inputs toward their midpoint by `step`; the
    /// output is the final midpoint.
    IterativeDeliberation { rounds: u32, step: f64 },
}

impl ProtocolKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProtocolKind::SelfReliance => "self-reliance",
            ProtocolKind::AiReliance => "ai-reliance",
            ProtocolKind::OracleSelector => "oracle-selector",
            ProtocolKind::ThresholdSelector { .. } => "threshold-selector",
            ProtocolKind::Averaging { .. } => "averaging",
            ProtocolKind::IterativeDeliberation { .. } => "iterative-deliberation",
        }
    }

    fn needs_real(&self) -> bool {
        matches!(
            self,
            ProtocolKind::Averaging { .. } | ProtocolKind::IterativeDeliberation { .. }
        )
    }

    fn rounds(&self) -> u32 {
        match self {
            ProtocolKind::Averaging { .. } => 1,
            ProtocolKind::IterativeDeliberation { rounds, .. } => *rounds,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub protocol_id: String,
    #[serde(flatten)]
    pub kind: ProtocolKind,
    pub base_cost: f64,
    pub per_round_cost: f64,
}

impl ProtocolSpec {
    pub fn new(protocol_id: impl Into<String>, kind: ProtocolKind) -> Self {
        ProtocolSpec {
            protocol_id: protocol_id.into(),
            kind,
            base_cost: 0.0,
            per_round_cost: 0.0,
        }
    }

    pub fn with_costs(mut self, base_cost: f64, per_round_cost: f64) -> Self {
        self.base_cost = base_cost;
        self.per_round_cost = per_round_cost;
        self
    }

    /// True for the four selector kinds, whose interaction function is the
    /// identity.
    pub fn is_trivial(&self) -> bool {
        matches!(
            self.kind,
            ProtocolKind::SelfReliance
                | ProtocolKind::AiReliance
                | ProtocolKind::OracleSelector
                | ProtocolKind::ThresholdSelector { .. }
        )
    }

    /// `base_cost + rounds * per_round_cost`.
    pub fn cost_for(&self, rounds: u32) -> f64 {
        self.base_cost + f64::from(rounds) * self.per_round_cost
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, message: String| {
            Err(Error::InvalidProtocol {
                field: field.to_string(),
                message,
            })
        };
        for (field, v) in [("base_cost", self.base_cost), ("per_round_cost", self.per_round_cost)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(field, format!("must be finite and >= 0, got {v}"));
            }
        }
        match self.kind {
            ProtocolKind::ThresholdSelector { threshold } if !(threshold.is_finite() && threshold >= 0.0) => {
                bad("threshold", format!("must be finite and >= 0, got {threshold}"))
            }
            ProtocolKind::Averaging { weight_human } if !(0.0..=1.0).contains(&weight_human) => {
                bad("weight_human", format!("must lie in [0, 1], got {weight_human}"))
            }
            ProtocolKind::IterativeDeliberation { step, .. } if !(step > 0.0 && step <= 1.0) => {
                bad("step", format!("must lie in (0, 1], got {step}"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOutcome {
    pub y_team: Prediction,
    pub rounds_used: u32,
    pub cost_incurred: f64,
    /// Inputs before the first round, then after each round.
    pub trace: Vec<(Prediction, Prediction)>,
}

fn real_pair(human: &Prediction, ai: &Prediction) -> Result<(f64, f64)> {
    match (human, ai) {
        (Prediction::Real(h), Prediction::Real(a)) => Ok((*h, *a)),
        _ => Err(Error::RequiresRealScalar),
    }
}

fn interact(kind: &ProtocolKind, human: f64, ai: f64) -> (f64, f64) {
    match *kind {
        ProtocolKind::Averaging { weight_human } => {
            let v = weight_human * human + (1.0 - weight_human) * ai;
            (v, v)
        }
        ProtocolKind::IterativeDeliberation { step, .. } => {
            let mid = 0.5 * human + 0.5 * ai;
            (human + step * (mid - human), ai + step * (mid - ai))
        }
        _ => (human, ai),
    }
}

pub fn run_protocol(
    spec: &ProtocolSpec,
    y_human: &Prediction,
    y_ai: &Prediction,
    y_true: Option<&Prediction>,
    task: &TaskSpec,
) -> Result<ProtocolOutcome> {
    spec.validate()?;
    let kind = &spec.kind;
    if kind.needs_real() && !task.output_kind.is_real() {
        return Err(Error::RequiresRealScalar);
    }
    for (who, v) in [("y_human", y_human), ("y_ai", y_ai)] {
        task.output_kind
            .check(v)
            .map_err(|m| Error::ValueMismatch(format!("{who}: {m}")))?;
    }

    let rounds = kind.rounds();
    let mut trace = vec![(y_human.clone(), y_ai.clone())];
    if rounds > 0 {
        let (mut h, mut a) = real_pair(y_human, y_ai)?;
        for _ in 0..rounds {
            (h, a) = interact(kind, h, a);
            trace.push((Prediction::Real(h), Prediction::Real(a)));
        }
    }
    let (human, ai) = trace.last().cloned().expect("trace starts with the inputs");

    let y_team = match kind {
        ProtocolKind::SelfReliance => human,
        ProtocolKind::AiReliance => ai,
        ProtocolKind::OracleSelector => {
            let truth = y_true.ok_or(Error::OracleRequiresTruth)?;
            let lh = task.loss_kind.pointwise(&human, truth)?;
            let la = task.loss_kind.pointwise(&ai, truth)?;
            if la < lh {
                ai
            } else {
                human
            }
        }
        ProtocolKind::ThresholdSelector { threshold } => {
            let agree = match (&human, &ai) {
                (Prediction::Real(h), Prediction::Real(a)) => (h - a).abs() <= *threshold,
                (h, a) => h == a,
            };
            if agree {
                ai
            } else {
                human
            }
        }
        ProtocolKind::Averaging { .. } => human,
        ProtocolKind::IterativeDeliberation { .. } => {
            let (h, a) = real_pair(&human, &ai)?;
            Prediction::Real(0.5 * h + 0.5 * a)
        }
    };

    Ok(ProtocolOutcome {
        y_team,
        rounds_used: rounds,
        cost_incurred: spec.cost_for(rounds),
        trace,
    })
}
