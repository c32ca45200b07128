use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ctpkit_core::assurance::{
    build_report, parse_report, render_report, validate_report, ExtensionItem, ItemId, RenderStyle, ReportInputs,
};
use ctpkit_core::ingest::{
    read_log, read_manifest, write_log, write_manifest, write_sweep_table, SweepTable, MANIFEST_FILE,
};
use ctpkit_core::metrics::{
    bootstrap, reliance_breakdown, windowed_stability, BootstrapConfig, BootstrapInterval, BootstrapStatistic,
    RelianceVerdict,
};
use ctpkit_core::simulator::{parse_scenario, simulate as run_simulation, sweep as run_sweep, ScenarioConfig};
use ctpkit_core::{evaluate_episode, stability_profile, EpisodeLog, GainReport, StabilityProfile};
use serde::{Deserialize, Serialize};

use crate::args::{BootstrapArgs, EvaluateArgs, Format, ReportArgs, SimulateArgs, SweepArgs, ValidateArgs};
use crate::output::{
    bootstrap_line, color_enabled, g, gain_block, gain_line, json, reliance_block, stability_block, sweep_table,
};

const EVALUATION_SCHEMA: &str = "ctpkit.evaluation/v1";

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_log(path: &Path) -> Result<EpisodeLog> {
    let text = read_text(path)?;
    read_log(&text).with_context(|| format!("{}", path.display()))
}

/// Logs listed in `dir/manifest.txt`, in manifest order.
fn load_dir(dir: &Path) -> Result<Vec<EpisodeLog>> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest = read_text(&manifest_path)?;
    let files = read_manifest(&manifest).with_context(|| format!("{}", manifest_path.display()))?;
    files.iter().map(|f| load_log(&dir.join(f))).collect()
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn bootstrap_config(b: &BootstrapArgs) -> BootstrapConfig {
    BootstrapConfig {
        resamples: b.resamples,
        level: b.level,
        seed: b.seed,
        statistic: BootstrapStatistic::GrossGain,
    }
}

#[derive(Serialize)]
struct EpisodeEvaluation {
    report: GainReport,
    reliance: BTreeMap<RelianceVerdict, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    windows: Option<StabilityProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bootstrap: Option<BootstrapInterval>,
}

#[derive(Serialize)]
struct Evaluation {
    schema: &'static str,
    lambda: f64,
    episodes: Vec<EpisodeEvaluation>,
    /// Across episodes; present when a manifest directory was evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    stability: Option<StabilityProfile>,
}

pub fn evaluate(a: &EvaluateArgs, format: Format) -> Result<()> {
    let (logs, across) = if a.path.is_dir() {
        (load_dir(&a.path)?, true)
    } else {
        (vec![load_log(&a.path)?], false)
    };
    let mut episodes = Vec::new();
    for log in &logs {
        let ctx = || format!("episode {}", log.episode_id);
        episodes.push(EpisodeEvaluation {
            report: evaluate_episode(log, a.lambda).with_context(ctx)?,
            reliance: reliance_breakdown(log),
            windows: a
                .window
                .map(|w| windowed_stability(log, w, a.lambda))
                .transpose()
                .with_context(ctx)?,
            bootstrap: if a.bootstrap.bootstrap {
                Some(bootstrap(log, a.lambda, &bootstrap_config(&a.bootstrap)).with_context(ctx)?)
            } else {
                None
            },
        });
    }
    let stability = if across { Some(stability_profile(&logs, a.lambda)?) } else { None };
    let eval = Evaluation {
        schema: EVALUATION_SCHEMA,
        lambda: a.lambda,
        episodes,
        stability,
    };

    let text = match format {
        Format::Machine => json(&eval),
        Format::Human => {
            let color = a.out.is_none() && color_enabled();
            let mut s = String::new();
            for (e, log) in eval.episodes.iter().zip(&logs) {
                gain_block(&mut s, &e.report, &log.cost_unit, color);
                reliance_block(&mut s, &e.reliance);
                if let Some(w) = &e.windows {
                    stability_block(&mut s, &format!("  windows of {}", a.window.unwrap_or(0)), w);
                }
                if let Some(b) = &e.bootstrap {
                    bootstrap_line(&mut s, b);
                }
                s.push('\n');
            }
            if let Some(p) = &eval.stability {
                stability_block(&mut s, "across episodes", p);
            }
            s
        }
    };
    emit(a.out.as_ref(), &text)
}

fn load_scenario(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig> {
    let mut cfg = parse_scenario(&read_text(path)?).with_context(|| format!("{}", path.display()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct SimulationSummary {
    scenario_id: String,
    seed: u64,
    lambda: f64,
    files: Vec<String>,
    episodes: Vec<GainReport>,
}

pub fn simulate(a: &SimulateArgs, format: Format) -> Result<()> {
    let cfg = load_scenario(&a.config, a.seed)?;
    let logs = run_simulation(&cfg)?;
    fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    let mut files = Vec::new();
    let mut reports = Vec::new();
    for (i, log) in logs.iter().enumerate() {
        let name = format!("episode-{i:04}.log");
        write_text(&a.out.join(&name), &write_log(log)?)?;
        files.push(name);
        reports.push(evaluate_episode(log, cfg.lambda)?);
    }
    write_text(&a.out.join(MANIFEST_FILE), &write_manifest(&files))?;

    let text = match format {
        Format::Machine => json(&SimulationSummary {
            scenario_id: cfg.scenario_id.clone(),
            seed: cfg.seed,
            lambda: cfg.lambda,
            files,
            episodes: reports,
        }),
        Format::Human => {
            let color = color_enabled();
            let mut s = format!(
                "{}: {} episodes of {} records, seed {}, lambda {}\n",
                cfg.scenario_id,
                cfg.n_episodes,
                cfg.n_records,
                cfg.seed,
                g(cfg.lambda)
            );
            for r in &reports {
                let _ = writeln!(s, "{:<28} {}", r.episode_id, gain_line(r, color));
            }
            let _ = writeln!(s, "wrote {} logs and {MANIFEST_FILE} to {}", reports.len(), a.out.display());
            s
        }
    };
    print!("{text}");
    Ok(())
}

pub fn sweep(a: &SweepArgs, format: Format) -> Result<()> {
    let cfg = load_scenario(&a.config, a.seed)?;
    let rows = run_sweep(&cfg, a.axis, &a.values)?;
    let table = SweepTable {
        scenario_id: cfg.scenario_id.clone(),
        axis: a.axis.to_string(),
        rows,
    };
    let text = write_sweep_table(&table);
    write_text(&a.out, &text)?;
    match format {
        Format::Machine => print!("{text}"),
        Format::Human => print!("{}", sweep_table(&table.axis, &table.rows)),
    }
    Ok(())
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct NarrativeFile {
    report_id: Option<String>,
    lambda_justification: Option<String>,
    #[serde(default)]
    items: BTreeMap<String, String>,
    #[serde(default)]
    extensions: Vec<ExtensionItem>,
}

fn load_narrative(path: &Path) -> Result<NarrativeFile> {
    let text = read_text(path)?;
    toml::from_str(&text).with_context(|| format!("{}", path.display()))
}

pub fn report(a: &ReportArgs, format: Format) -> Result<()> {
    let logs = load_dir(&a.log_dir)?;
    let narrative = match &a.narrative {
        Some(p) => load_narrative(p)?,
        None => NarrativeFile::default(),
    };
    let mut items = BTreeMap::new();
    for (key, text) in narrative.items {
        let id: ItemId = key
            .parse()
            .with_context(|| format!("narrative file: items.{key}"))?;
        items.insert(id, text);
    }
    let inputs = ReportInputs {
        report_id: a.report_id.clone().or(narrative.report_id),
        narrative: items,
        lambda_justification: a.lambda_justification.clone().or(narrative.lambda_justification),
        created_at: a.created_at.clone(),
        extensions: narrative.extensions,
        bootstrap: a.bootstrap.bootstrap.then(|| bootstrap_config(&a.bootstrap)),
    };
    let report = build_report(&logs, a.lambda, &inputs)?;
    let machine = render_report(&report, RenderStyle::Machine);
    write_text(&a.out, &machine)?;
    match format {
        Format::Machine => print!("{machine}"),
        Format::Human => print!("{}", render_report(&report, RenderStyle::Human)),
    }
    let deficiencies = validate_report(&report);
    if !deficiencies.is_empty() {
        eprintln!("{} of 11 checklist items missing or invalid:", deficiencies.len());
        for d in &deficiencies {
            eprintln!("  {d}");
        }
    }
    Ok(())
}

pub fn validate(a: &ValidateArgs, format: Format) -> Result<()> {
    let text = read_text(&a.path)?;
    if text.trim_start().starts_with('{') {
        let report = parse_report(&text).with_context(|| format!("{}", a.path.display()))?;
        let deficiencies = validate_report(&report);
        match format {
            Format::Machine => print!("{}", json(&deficiencies)),
            Format::Human => {
                for d in &deficiencies {
                    println!("{d}");
                }
                println!("{}/11 complete", 11 - deficiencies.len());
            }
        }
        if !deficiencies.is_empty() {
            bail!("{} checklist item(s) missing or invalid", deficiencies.len());
        }
    } else {
        let log = read_log(&text).with_context(|| format!("{}", a.path.display()))?;
        match format {
            Format::Machine => print!("{}", json(&serde_json::json!({"episode_id": log.episode_id, "records": log.n(), "valid": true}))),
            Format::Human => println!("{}: valid log, episode {}, {} records", a.path.display(), log.episode_id, log.n()),
        }
    }
    Ok(())
}
