//! The minimal reporting checklist as a typed, validated report.
//!
//! Four items are computed from episode logs (performance, complementarity
//! evidence, interaction cost, efficient complementarity); the remaining
//! seven are narrative and must be supplied by the authors of the report.
//! The efficient-complementarity item is additionally incomplete until the
//! conversion rate lambda has a written justification.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{EpisodeLog, TaskSpec};
use crate::error::{Error, Result};
use crate::metrics::{
    bootstrap, check_homogeneous, check_lambda, efficiency_ratio, efficiency_verdict, net_gain, evaluate_episode, pointwise_losses,
    report_from_parts, stability_profile, summarize, BootstrapConfig, BootstrapInterval, Efficiency, GainReport,
    StabilityProfile,
};
use crate::numeric::{exact_sum, format_significant, mean};
use crate::TOOLKIT_VERSION;

pub const REPORT_SCHEMA: &str = "ctpkit.assurance-report/v1";

/// Reliability-indicator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RiCategory {
    /// Technical performance and operational behaviour.
    RI1,
    /// Operationalization of the concepts the task is about.
    RI2,
    /// Social and institutional arrangements.
    RI3,
}

impl fmt::Display for RiCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RiCategory::RI1 => "RI1",
            RiCategory::RI2 => "RI2",
            RiCategory::RI3 => "RI3",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ItemId {
    AiScope,
    Protocol,
    UserCompetence,
    Performance,
    ComplementarityEvidence,
    InteractionCost,
    EfficientComplementarity,
    UncertaintyDiscipline,
    EpistemicValidity,
    UpdateDrift,
    MonitoringAccountability,
}

use RiCategory::{RI1, RI2, RI3};

impl ItemId {
    /// Canonical checklist order.
    pub const ALL: [ItemId; 11] = [
        ItemId::AiScope,
        ItemId::Protocol,
        ItemId::UserCompetence,
        ItemId::Performance,
        ItemId::ComplementarityEvidence,
        ItemId::InteractionCost,
        ItemId::EfficientComplementarity,
        ItemId::UncertaintyDiscipline,
        ItemId::EpistemicValidity,
        ItemId::UpdateDrift,
        ItemId::MonitoringAccountability,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ItemId::AiScope => "ai-scope",
            ItemId::Protocol => "protocol",
            ItemId::UserCompetence => "user-competence",
            ItemId::Performance => "performance",
            ItemId::ComplementarityEvidence => "complementarity-evidence",
            ItemId::InteractionCost => "interaction-cost",
            ItemId::EfficientComplementarity => "efficient-complementarity",
            ItemId::UncertaintyDiscipline => "uncertainty-discipline",
            ItemId::EpistemicValidity => "epistemic-validity",
            ItemId::UpdateDrift => "update-drift",
            ItemId::MonitoringAccountability => "monitoring-accountability",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ItemId::AiScope => "AI scope and conditions of use",
            ItemId::Protocol => "Protocol",
            ItemId::UserCompetence => "User competence",
            ItemId::Performance => "Performance",
            ItemId::ComplementarityEvidence => "Complementarity evidence",
            ItemId::InteractionCost => "Interaction cost",
            ItemId::EfficientComplementarity => "Efficient complementarity",
            ItemId::UncertaintyDiscipline => "Uncertainty discipline",
            ItemId::EpistemicValidity => "Epistemic validity",
            ItemId::UpdateDrift => "Update and drift management",
            ItemId::MonitoringAccountability => "Monitoring and accountability",
        }
    }

    pub fn ri_tags(self) -> &'static [RiCategory] {
        match self {
            ItemId::AiScope => &[RI2, RI3],
            ItemId::Protocol => &[RI1, RI3],
            ItemId::UserCompetence => &[RI3],
            ItemId::Performance => &[RI1],
            ItemId::ComplementarityEvidence => &[RI1],
            ItemId::InteractionCost => &[RI3],
            ItemId::EfficientComplementarity => &[RI1, RI3],
            ItemId::UncertaintyDiscipline => &[RI1, RI2],
            ItemId::EpistemicValidity => &[RI2],
            ItemId::UpdateDrift => &[RI3],
            ItemId::MonitoringAccountability => &[RI3],
        }
    }

    /// The minimum the item has to document.
    pub fn requirement(self) -> &'static str {
        match self {
            ItemId::AiScope => {
                "intended use, in- and out-of-scope cases, environmental assumptions, abstention/escalation triggers"
            }
            ItemId::Protocol => {
                "how AI outputs are consulted and integrated, disagreement handling, escalation or second review, \
                 how the team output is produced"
            }
            ItemId::UserCompetence => "who is authorized, training content and cadence, competence checks, failure modes covered",
            ItemId::Performance => "human, AI and team losses under the task loss",
            ItemId::ComplementarityEvidence => "CTP, gross and net gain, with magnitude and stability over time",
            ItemId::InteractionCost => "the cost term with its definition and unit, cost categories and how costs are estimated",
            ItemId::EfficientComplementarity => {
                "net gain and whether it is positive, the efficiency ratio, the threshold lambda and how lambda is justified"
            }
            ItemId::UncertaintyDiscipline => {
                "when predictive uncertainty triggers human review and how it is communicated and acted upon"
            }
            ItemId::EpistemicValidity => "why target, labels and features suit the decision purpose",
            ItemId::UpdateDrift => "versioning, re-modelling and re-evaluation triggers, change communication",
            ItemId::MonitoringAccountability => {
                "post-deployment tracking, incident reporting, auditing, responsibility assignment"
            }
        }
    }

    /// Items filled from metrics rather than prose.
    pub fn is_quantitative(self) -> bool {
        matches!(
            self,
            ItemId::Performance | ItemId::ComplementarityEvidence | ItemId::InteractionCost | ItemId::EfficientComplementarity
        )
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ItemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ItemId::ALL
            .into_iter()
            .find(|i| i.id() == s)
            .ok_or_else(|| Error::InvalidReport(format!("unknown checklist item `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ItemStatus {
    Complete,
    Missing,
    Invalid,
}

impl fmt::Display for ItemStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ItemStatus::Complete => "complete",
            ItemStatus::Missing => "missing",
            ItemStatus::Invalid => "invalid",
        })
    }
}

/// Quantitative artifacts attached to an item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    /// Losses, gain and cost over all records of all episodes.
    Pooled { report: GainReport },
    Episodes { reports: Vec<GainReport> },
    Stability { profile: StabilityProfile },
    Bootstrap { intervals: Vec<BootstrapInterval> },
    Cost {
        unit: String,
        total: f64,
        mean_per_episode: f64,
        per_episode: Vec<f64>,
    },
    /// Per-episode basis: the gain is a mean loss while the cost is summed
    /// over a dataset, so pooling episodes would inflate the cost only.
    Efficiency {
        lambda: f64,
        mean_gross_gain: f64,
        mean_cost: f64,
        net_gain: f64,
        efficiency_ratio: Option<f64>,
        verdict: Efficiency,
        efficient_episodes: usize,
        n_episodes: usize,
    },
}

impl Evidence {
    fn kind(&self) -> &'static str {
        match self {
            Evidence::Pooled { .. } => "pooled",
            Evidence::Episodes { .. } => "episodes",
            Evidence::Stability { .. } => "stability",
            Evidence::Bootstrap { .. } => "bootstrap",
            Evidence::Cost { .. } => "cost",
            Evidence::Efficiency { .. } => "efficiency",
        }
    }
}

fn required_evidence(item: ItemId) -> &'static [&'static str] {
    match item {
        ItemId::Performance => &["pooled"],
        ItemId::ComplementarityEvidence => &["episodes", "stability"],
        ItemId::InteractionCost => &["cost"],
        ItemId::EfficientComplementarity => &["efficiency"],
        _ => &[],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChecklistItem {
    pub item_id: ItemId,
    pub ri_tags: Vec<RiCategory>,
    pub status: ItemStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evidence: Vec<Evidence>,
}

/// Additional, domain-specific items. Never part of the canonical eleven.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionItem {
    pub name: String,
    pub ri_tags: Vec<RiCategory>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssuranceReport {
    pub schema: String,
    pub report_id: String,
    pub task: TaskSpec,
    pub protocol_id: String,
    pub cost_unit: String,
    pub lambda: f64,
    pub lambda_justification: Option<String>,
    pub items: Vec<ChecklistItem>,
    #[serde(default)]
    pub extensions: Vec<ExtensionItem>,
    pub created_at: Option<String>,
    pub toolkit_version: String,
}

impl AssuranceReport {
    pub fn item(&self, id: ItemId) -> Option<&ChecklistItem> {
        self.items.iter().find(|i| i.item_id == id)
    }

    pub fn complete_count(&self) -> usize {
        let deficient: Vec<ItemId> = validate_report(self).iter().map(|d| d.item_id).collect();
        ItemId::ALL.iter().filter(|id| !deficient.contains(id)).count()
    }
}

/// Author-supplied inputs to [`build_report`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportInputs {
    pub report_id: Option<String>,
    pub narrative: BTreeMap<ItemId, String>,
    pub lambda_justification: Option<String>,
    pub created_at: Option<String>,
    pub extensions: Vec<ExtensionItem>,
    /// Per-episode bootstrap intervals for the complementarity item.
    pub bootstrap: Option<BootstrapConfig>,
}

pub fn build_report(logs: &[EpisodeLog], lambda: f64, inputs: &ReportInputs) -> Result<AssuranceReport> {
    check_lambda(lambda)?;
    check_homogeneous(logs)?;
    let first = &logs[0];
    let reports = logs
        .iter()
        .map(|l| evaluate_episode(l, lambda))
        .collect::<Result<Vec<_>>>()?;
    let profile = stability_profile(logs, lambda)?;

    let mut losses = Vec::new();
    for log in logs {
        losses.extend(pointwise_losses(log)?);
    }
    let per_episode: Vec<f64> = reports.iter().map(|r| r.total_cost).collect();
    let total = exact_sum(per_episode.iter().copied());
    let pooled = report_from_parts("pooled", summarize(&losses), total, lambda);

    let mut evidence: BTreeMap<ItemId, Vec<Evidence>> = BTreeMap::new();
    evidence.insert(ItemId::Performance, vec![Evidence::Pooled { report: pooled.clone() }]);
    let mut comp = vec![
        Evidence::Episodes { reports: reports.clone() },
        Evidence::Stability { profile },
    ];
    if let Some(cfg) = &inputs.bootstrap {
        let intervals = logs.iter().map(|l| bootstrap(l, lambda, cfg)).collect::<Result<Vec<_>>>()?;
        comp.push(Evidence::Bootstrap { intervals });
    }
    evidence.insert(ItemId::ComplementarityEvidence, comp);
    let mean_gross = mean(&reports.iter().map(|r| r.gross_gain).collect::<Vec<_>>()).expect("non-empty");
    let mean_cost = mean(&per_episode).expect("non-empty");
    evidence.insert(
        ItemId::InteractionCost,
        vec![Evidence::Cost {
            unit: first.cost_unit.clone(),
            total,
            mean_per_episode: mean_cost,
            per_episode,
        }],
    );
    evidence.insert(
        ItemId::EfficientComplementarity,
        vec![Evidence::Efficiency {
            lambda,
            mean_gross_gain: mean_gross,
            mean_cost,
            net_gain: net_gain(mean_gross, lambda, mean_cost)?,
            efficiency_ratio: efficiency_ratio(mean_gross, mean_cost),
            verdict: efficiency_verdict(mean_gross, lambda, mean_cost)?,
            efficient_episodes: reports.iter().filter(|r| r.efficient == Efficiency::Efficient).count(),
            n_episodes: reports.len(),
        }],
    );

    let mut report = AssuranceReport {
        schema: REPORT_SCHEMA.to_string(),
        report_id: inputs
            .report_id
            .clone()
            .unwrap_or_else(|| format!("{}-{}", first.task.task_id, first.protocol_id)),
        task: first.task.clone(),
        protocol_id: first.protocol_id.clone(),
        cost_unit: first.cost_unit.clone(),
        lambda,
        lambda_justification: inputs.lambda_justification.clone().filter(|t| !t.trim().is_empty()),
        items: Vec::new(),
        extensions: inputs.extensions.clone(),
        created_at: inputs.created_at.clone(),
        toolkit_version: TOOLKIT_VERSION.to_string(),
    };
    report.items = ItemId::ALL
        .into_iter()
        .map(|id| ChecklistItem {
            item_id: id,
            ri_tags: id.ri_tags().to_vec(),
            status: ItemStatus::Missing,
            text: inputs.narrative.get(&id).filter(|t| !t.trim().is_empty()).cloned(),
            evidence: evidence.remove(&id).unwrap_or_default(),
        })
        .collect();
    for i in 0..report.items.len() {
        let status = assess(&report, &report.items[i]).map_or(ItemStatus::Complete, |(s, _)| s);
        report.items[i].status = status;
    }
    Ok(report)
}

/// One shortcoming of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deficiency {
    pub item_id: ItemId,
    pub status: ItemStatus,
    pub requirement: String,
    pub reason: String,
}

impl fmt::Display for Deficiency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}]: {} (requires: {})",
            self.item_id, self.status, self.reason, self.requirement
        )
    }
}

/// Status the item's content supports, with a reason when not complete.
fn assess(report: &AssuranceReport, item: &ChecklistItem) -> Option<(ItemStatus, String)> {
    let id = item.item_id;
    if item.ri_tags != id.ri_tags() {
        return Some((ItemStatus::Invalid, "RI tags differ from the checklist assignment".into()));
    }
    if !id.is_quantitative() {
        return match &item.text {
            Some(t) if !t.trim().is_empty() => None,
            _ => Some((ItemStatus::Missing, "no documentation supplied".into())),
        };
    }
    if item.evidence.is_empty() {
        return Some((ItemStatus::Missing, "no quantitative evidence attached".into()));
    }
    for kind in required_evidence(id) {
        if !item.evidence.iter().any(|e| e.kind() == *kind) {
            return Some((ItemStatus::Invalid, format!("missing `{kind}` evidence")));
        }
    }
    if id == ItemId::EfficientComplementarity {
        if !(report.lambda.is_finite() && report.lambda > 0.0) {
            return Some((ItemStatus::Invalid, format!("lambda must be > 0, got {}", report.lambda)));
        }
        let consistent = item.evidence.iter().all(|e| match e {
            Evidence::Efficiency { lambda, .. } => *lambda == report.lambda,
            _ => true,
        });
        if !consistent {
            return Some((ItemStatus::Invalid, "evidence was computed with a different lambda".into()));
        }
        if report.lambda_justification.as_deref().is_none_or(|t| t.trim().is_empty()) {
            return Some((ItemStatus::Invalid, "no statement of how lambda is justified".into()));
        }
    }
    None
}

/// One deficiency per canonical item that is absent, duplicated, or whose
/// content does not support completion. Empty iff the report is complete.
pub fn validate_report(report: &AssuranceReport) -> Vec<Deficiency> {
    let mut out = Vec::new();
    for id in ItemId::ALL {
        let found: Vec<&ChecklistItem> = report.items.iter().filter(|i| i.item_id == id).collect();
        let problem = match found.as_slice() {
            [] => Some((ItemStatus::Missing, "item absent from report".to_string())),
            [item] => assess(report, item).or_else(|| {
                (item.status != ItemStatus::Complete)
                    .then(|| (ItemStatus::Invalid, format!("marked {} although its content is complete", item.status)))
            }),
            more => Some((ItemStatus::Invalid, format!("item appears {} times", more.len()))),
        };
        if let Some((status, reason)) = problem {
            out.push(Deficiency {
                item_id: id,
                status,
                requirement: id.requirement().to_string(),
                reason,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderStyle {
    Machine,
    Human,
}

pub fn render_report(report: &AssuranceReport, style: RenderStyle) -> String {
    match style {
        RenderStyle::Machine => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        RenderStyle::Human => render_human(report),
    }
}

pub fn parse_report(text: &str) -> Result<AssuranceReport> {
    let report: AssuranceReport = serde_json::from_str(text)
        .map_err(|e| Error::InvalidReport(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    if report.schema != REPORT_SCHEMA {
        return Err(Error::InvalidReport(format!(
            "unsupported schema `{}` (expected {REPORT_SCHEMA})",
            report.schema
        )));
    }
    Ok(report)
}

fn g(x: f64) -> String {
    format_significant(x, 6)
}

fn tags(t: &[RiCategory]) -> String {
    t.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn render_human(report: &AssuranceReport) -> String {
    let deficiencies = validate_report(report);
    let mut s = String::new();
    let _ = writeln!(s, "Assurance report: {}", report.report_id);
    let _ = writeln!(
        s,
        "task: {} ({}, {})    protocol: {}",
        report.task.task_id,
        report.task.output_kind.name(),
        report.task.loss_kind,
        report.protocol_id
    );
    let _ = writeln!(s, "lambda: {} loss units per {}", g(report.lambda), report.cost_unit);
    if let Some(t) = &report.created_at {
        let _ = writeln!(s, "created: {t}");
    }
    let _ = writeln!(s, "toolkit: {}", report.toolkit_version);

    for (n, id) in ItemId::ALL.into_iter().enumerate() {
        let marker = match deficiencies.iter().find(|d| d.item_id == id) {
            None => "ok".to_string(),
            Some(d) => format!("[{}] {}", d.status.to_string().to_uppercase(), d.reason),
        };
        let _ = writeln!(s, "\n{:>2}. {} [{}]  {}", n + 1, id.title(), tags(id.ri_tags()), marker);
        let Some(item) = report.item(id) else {
            let _ = writeln!(s, "    requires: {}", id.requirement());
            continue;
        };
        for e in &item.evidence {
            render_evidence(&mut s, e);
        }
        if id == ItemId::EfficientComplementarity {
            if let Some(j) = &report.lambda_justification {
                let _ = writeln!(s, "    lambda justification: {j}");
            }
        }
        match &item.text {
            Some(t) => {
                for line in t.lines() {
                    let _ = writeln!(s, "    {line}");
                }
            }
            None if !id.is_quantitative() => {
                let _ = writeln!(s, "    requires: {}", id.requirement());
            }
            None => {}
        }
    }
    for ext in &report.extensions {
        let _ = writeln!(s, "\n +. {} [{}]  extension", ext.name, tags(&ext.ri_tags));
        for line in ext.text.lines() {
            let _ = writeln!(s, "    {line}");
        }
    }
    let _ = writeln!(s, "\n{}/{} complete", ItemId::ALL.len() - deficiencies.len(), ItemId::ALL.len());
    s
}

fn render_evidence(s: &mut String, e: &Evidence) {
    match e {
        Evidence::Pooled { report: r } => {
            let _ = writeln!(
                s,
                "    L_H = {}  L_AI = {}  L_HAI = {}  (n = {})",
                g(r.loss_human),
                g(r.loss_ai),
                g(r.loss_team),
                r.n
            );
            if let Some(d) = r.degenerate {
                let _ = writeln!(s, "    note: {}", d.note());
            }
        }
        Evidence::Episodes { reports } => {
            let _ = writeln!(s, "    {:<24} {:>4} {:>12} {:>12}", "episode", "ctp", "gross_gain", "net_gain");
            for r in reports {
                let _ = writeln!(
                    s,
                    "    {:<24} {:>4} {:>12} {:>12}",
                    r.episode_id,
                    r.ctp,
                    g(r.gross_gain),
                    g(r.net_gain)
                );
            }
        }
        Evidence::Stability { profile } => {
            let _ = writeln!(
                s,
                "    stability: {} ({} of {} windows with CTP = 1)",
                g(profile.stability),
                profile.ctp_series.iter().filter(|c| **c == 1).count(),
                profile.ctp_series.len()
            );
        }
        Evidence::Bootstrap { intervals } => {
            for b in intervals {
                let _ = writeln!(
                    s,
                    "    bootstrap {:?}: {} [{}, {}] at level {}",
                    b.statistic,
                    g(b.point),
                    g(b.lower),
                    g(b.upper),
                    g(b.level)
                );
            }
        }
        Evidence::Cost {
            unit,
            total,
            mean_per_episode,
            ..
        } => {
            let _ = writeln!(s, "    total cost: {} {unit}  (mean per episode {})", g(*total), g(*mean_per_episode));
        }
        Evidence::Efficiency {
            net_gain,
            efficiency_ratio,
            verdict,
            efficient_episodes,
            n_episodes,
            ..
        } => {
            let ratio = efficiency_ratio.map_or("undefined".to_string(), g);
            let _ = writeln!(
                s,
                "    per episode: net gain {}  ratio {}  verdict {}  ({} of {} episodes efficient)",
                g(*net_gain),
                ratio,
                verdict,
                efficient_episodes,
                n_episodes
            );
        }
    }
}
