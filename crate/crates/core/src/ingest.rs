//! Text formats: episode logs, study manifests and sweep tables.
//!
//! # Episode log (`#ctpkit-log v1`)
//!
//! ```text
//! #ctpkit-log v1
//! # episode_id: opposite-bias-0000
//! # task_id: opposite-bias
//! # output_kind: real-scalar
//! # loss_kind: squared-error
//! # protocol_id: averaging-0.5
//! # cost_unit: minute
//! instance_id  y_true  y_human  y_ai  y_team  cost
//! r0  0  -1  0.5  -0.25  0.1
//! ```
//!
//! Header lines are `# key: value`; categorical and binary tasks add
//! `# labels: A,B` after `output_kind`. The column row is tab-separated and
//! lists the six required columns followed by the optional `timestamp`
//! and `rounds` columns, each present only if some record carries it (an
//! empty cell means absent). One record per line, tab-separated, every line
//! terminated by `\n`. Reals are written in the shortest decimal form that
//! parses back to the same `f64`.
//!
//! The canonical form is exactly what [`write_log`] produces; any canonical
//! file reads and re-writes byte for byte.
//!
//! # Manifest (`#ctpkit-manifest v1`)
//!
//! One episode file name per line, relative to the manifest, in temporal
//! order.
//!
//! # Sweep table (`#ctpkit-sweep v1`)
//!
//! Header lines `# scenario_id:` and `# axis:`, then a tab-separated table
//! with columns `value`, `mean_gross_gain`, `stability`, `mean_net_gain`.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::domain::{
    output_kind_from_parts, validate_episode, EpisodeLog, InteractionRecord, LossKind, OutputKind, Prediction,
    TaskSpec,
};
use crate::error::{Error, Result};
use crate::simulator::SweepRow;

pub const LOG_MAGIC: &str = "#ctpkit-log v1";
pub const MANIFEST_MAGIC: &str = "#ctpkit-manifest v1";
pub const SWEEP_MAGIC: &str = "#ctpkit-sweep v1";
pub const MANIFEST_FILE: &str = "manifest.txt";

const REQUIRED_COLUMNS: [&str; 6] = ["instance_id", "y_true", "y_human", "y_ai", "y_team", "cost"];
const HEADER_KEYS: [&str; 7] = [
    "episode_id",
    "task_id",
    "output_kind",
    "labels",
    "loss_kind",
    "protocol_id",
    "cost_unit",
];

/// Splits into lines, accepting a missing final newline.
fn lines(text: &str) -> Vec<&str> {
    let mut v: Vec<&str> = text.split('\n').collect();
    if v.last() == Some(&"") {
        v.pop();
    }
    v
}

fn check_magic(lines: &[&str], magic: &str) -> Result<()> {
    let first = lines.first().copied().unwrap_or("");
    if first == magic {
        return Ok(());
    }
    let (family, _) = magic.split_once(' ').expect("magic has a version");
    match first.strip_prefix(family) {
        Some(rest) if rest.starts_with(' ') => Err(Error::parse(
            1,
            1,
            format!("unsupported format version `{}` (expected `{magic}`)", rest.trim()),
        )),
        _ => Err(Error::parse(1, 1, format!("expected `{magic}` on the first line"))),
    }
}

/// Parses `# key: value` lines starting at index 1. Returns the pairs with
/// their 1-based line numbers and the index of the first non-header line.
type Header<'a> = Vec<(usize, &'a str, &'a str)>;

fn header_block<'a>(lines: &[&'a str]) -> Result<(Header<'a>, usize)> {
    let mut out: Header<'a> = Vec::new();
    let mut i = 1;
    while i < lines.len() && lines[i].starts_with('#') {
        let lineno = i + 1;
        let body = lines[i]
            .strip_prefix("# ")
            .ok_or_else(|| Error::parse(lineno, 1, "header lines must start with `# `"))?;
        let (key, value) = body
            .split_once(": ")
            .or_else(|| body.strip_suffix(':').map(|k| (k, "")))
            .ok_or_else(|| Error::parse(lineno, 3, "expected `# key: value`"))?;
        if out.iter().any(|(_, k, _)| *k == key) {
            return Err(Error::parse(lineno, 3, format!("duplicate header key `{key}`")));
        }
        out.push((lineno, key, value));
        i += 1;
    }
    Ok((out, i))
}

fn parse_value(kind: &OutputKind, raw: &str, line: usize, column: usize) -> Result<Prediction> {
    match kind {
        OutputKind::RealScalar => match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Prediction::Real(v)),
            _ => Err(Error::parse(line, column, format!("`{raw}` is not a finite number"))),
        },
        _ => {
            if kind.labels().unwrap_or_default().iter().any(|l| l == raw) {
                Ok(Prediction::Label(raw.to_string()))
            } else {
                Err(Error::parse(line, column, format!("`{raw}` is not in the label set")))
            }
        }
    }
}

pub fn read_log(text: &str) -> Result<EpisodeLog> {
    let lines = lines(text);
    check_magic(&lines, LOG_MAGIC)?;
    let (header, mut i) = header_block(&lines)?;

    for (lineno, key, _) in &header {
        if !HEADER_KEYS.contains(key) {
            return Err(Error::parse(*lineno, 3, format!("unknown header key `{key}`")));
        }
    }
    let get = |key: &str| header.iter().find(|(_, k, _)| *k == key).map(|(l, _, v)| (*l, *v));
    let require = |key: &str| {
        get(key).ok_or_else(|| Error::parse(i + 1, 1, format!("missing header key `{key}`")))
    };

    let (_, episode_id) = require("episode_id")?;
    let (_, task_id) = require("task_id")?;
    let (kind_line, kind_name) = require("output_kind")?;
    let (loss_line, loss_name) = require("loss_kind")?;
    let (_, protocol_id) = require("protocol_id")?;
    let (_, cost_unit) = require("cost_unit")?;
    let labels = get("labels").map(|(_, v)| v.split(',').map(str::to_string).collect::<Vec<_>>());

    let loss_kind: LossKind = loss_name.parse().map_err(|m: String| Error::parse(loss_line, 3, m))?;
    let output_kind =
        output_kind_from_parts(kind_name, labels).map_err(|e| Error::parse(kind_line, 3, e.to_string()))?;
    let task = TaskSpec::new(task_id, output_kind, loss_kind).map_err(|e| Error::parse(kind_line, 3, e.to_string()))?;

    // column row
    let col_line = i + 1;
    let columns: Vec<&str> = lines
        .get(i)
        .ok_or_else(|| Error::parse(col_line, 1, "missing column row"))?
        .split('\t')
        .collect();
    if columns.len() < REQUIRED_COLUMNS.len() || columns[..6] != REQUIRED_COLUMNS {
        return Err(Error::parse(
            col_line,
            1,
            format!("column row must start with {}", REQUIRED_COLUMNS.join(", ")),
        ));
    }
    let optional = &columns[6..];
    let (has_ts, has_rounds) = match optional {
        [] => (false, false),
        ["timestamp"] => (true, false),
        ["rounds"] => (false, true),
        ["timestamp", "rounds"] => (true, true),
        _ => {
            return Err(Error::parse(
                col_line,
                7,
                "optional columns are `timestamp` then `rounds`",
            ))
        }
    };
    i += 1;
    let first_record_line = i + 1;

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (offset, line) in lines[i..].iter().enumerate() {
        let lineno = i + offset + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != columns.len() {
            return Err(Error::parse(
                lineno,
                fields.len().min(columns.len()) + 1,
                format!("expected {} fields, found {}", columns.len(), fields.len()),
            ));
        }
        let id = fields[0];
        if id.is_empty() {
            return Err(Error::parse(lineno, 1, "empty instance_id"));
        }
        if !seen.insert(id) {
            return Err(Error::parse(lineno, 1, format!("duplicate instance_id `{id}`")));
        }
        let kind = &task.output_kind;
        let cost = match fields[5].parse::<f64>() {
            Ok(c) if c.is_finite() && c >= 0.0 => c,
            Ok(c) => return Err(Error::parse(lineno, 6, format!("cost must be >= 0, got {c}"))),
            Err(_) => return Err(Error::parse(lineno, 6, format!("`{}` is not a number", fields[5]))),
        };
        let mut record = InteractionRecord::new(
            id,
            parse_value(kind, fields[1], lineno, 2)?,
            parse_value(kind, fields[2], lineno, 3)?,
            parse_value(kind, fields[3], lineno, 4)?,
            parse_value(kind, fields[4], lineno, 5)?,
            cost,
        );
        let mut col = 6;
        if has_ts {
            let ts = fields[col];
            col += 1;
            if !ts.is_empty() {
                if chrono::DateTime::parse_from_rfc3339(ts).is_err() {
                    return Err(Error::parse(lineno, col, format!("`{ts}` is not an RFC 3339 instant")));
                }
                record.timestamp = Some(ts.to_string());
            }
        }
        if has_rounds {
            let r = fields[col];
            col += 1;
            if !r.is_empty() {
                record.rounds =
                    Some(r.parse().map_err(|_| Error::parse(lineno, col, format!("`{r}` is not a round count")))?);
            }
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::parse(lines.len() + 1, 1, "log has no records"));
    }

    let log = EpisodeLog {
        episode_id: episode_id.to_string(),
        task,
        protocol_id: protocol_id.to_string(),
        cost_unit: cost_unit.to_string(),
        records,
    };
    if let Some(v) = validate_episode(&log).into_iter().next() {
        let line = v
            .instance_id
            .as_ref()
            .and_then(|id| log.records.iter().position(|r| &r.instance_id == id))
            .map_or(1, |k| first_record_line + k);
        return Err(Error::parse(line, 1, v.to_string()));
    }
    Ok(log)
}

/// Canonical text form of a valid log.
pub fn write_log(log: &EpisodeLog) -> Result<String> {
    let violations = validate_episode(log);
    if !violations.is_empty() {
        return Err(Error::InvalidEpisode(violations));
    }
    let mut out = String::new();
    out.push_str(LOG_MAGIC);
    out.push('\n');
    let _ = writeln!(out, "# episode_id: {}", log.episode_id);
    let _ = writeln!(out, "# task_id: {}", log.task.task_id);
    let _ = writeln!(out, "# output_kind: {}", log.task.output_kind.name());
    if let Some(labels) = log.task.output_kind.labels() {
        let _ = writeln!(out, "# labels: {}", labels.join(","));
    }
    let _ = writeln!(out, "# loss_kind: {}", log.task.loss_kind);
    let _ = writeln!(out, "# protocol_id: {}", log.protocol_id);
    let _ = writeln!(out, "# cost_unit: {}", log.cost_unit);

    let has_ts = log.records.iter().any(|r| r.timestamp.is_some());
    let has_rounds = log.records.iter().any(|r| r.rounds.is_some());
    out.push_str(&REQUIRED_COLUMNS.join("\t"));
    if has_ts {
        out.push_str("\ttimestamp");
    }
    if has_rounds {
        out.push_str("\trounds");
    }
    out.push('\n');

    for r in &log.records {
        let _ = write!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.instance_id, r.y_true, r.y_human, r.y_ai, r.y_team, r.cost
        );
        if has_ts {
            let _ = write!(out, "\t{}", r.timestamp.as_deref().unwrap_or(""));
        }
        if has_rounds {
            out.push('\t');
            if let Some(n) = r.rounds {
                let _ = write!(out, "{n}");
            }
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn read_manifest(text: &str) -> Result<Vec<String>> {
    let lines = lines(text);
    check_magic(&lines, MANIFEST_MAGIC)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in lines.iter().enumerate().skip(1) {
        if line.is_empty() || line.contains('\t') || line.starts_with('#') {
            return Err(Error::parse(i + 1, 1, "expected one episode file name per line"));
        }
        if !seen.insert(*line) {
            return Err(Error::parse(i + 1, 1, format!("`{line}` listed twice")));
        }
        out.push(line.to_string());
    }
    if out.is_empty() {
        return Err(Error::parse(lines.len() + 1, 1, "manifest lists no episodes"));
    }
    Ok(out)
}

pub fn write_manifest<S: AsRef<str>>(files: &[S]) -> String {
    let mut out = String::from(MANIFEST_MAGIC);
    out.push('\n');
    for f in files {
        out.push_str(f.as_ref());
        out.push('\n');
    }
    out
}

/// Sweep output as read back from a table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub scenario_id: String,
    pub axis: String,
    pub rows: Vec<SweepRow>,
}

const SWEEP_COLUMNS: [&str; 4] = ["value", "mean_gross_gain", "stability", "mean_net_gain"];

pub fn write_sweep_table(table: &SweepTable) -> String {
    let mut out = String::from(SWEEP_MAGIC);
    out.push('\n');
    let _ = writeln!(out, "# scenario_id: {}", table.scenario_id);
    let _ = writeln!(out, "# axis: {}", table.axis);
    out.push_str(&SWEEP_COLUMNS.join("\t"));
    out.push('\n');
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            r.value, r.mean_gross_gain, r.stability, r.mean_net_gain
        );
    }
    out
}

pub fn read_sweep_table(text: &str) -> Result<SweepTable> {
    let lines = lines(text);
    check_magic(&lines, SWEEP_MAGIC)?;
    let (header, i) = header_block(&lines)?;
    let get = |key: &str| {
        header
            .iter()
            .find(|(_, k, _)| *k == key)
            .map(|(_, _, v)| v.to_string())
            .ok_or_else(|| Error::parse(i + 1, 1, format!("missing header key `{key}`")))
    };
    let scenario_id = get("scenario_id")?;
    let axis = get("axis")?;
    if lines.get(i).map(|l| l.split('\t').collect::<Vec<_>>()) != Some(SWEEP_COLUMNS.to_vec()) {
        return Err(Error::parse(i + 1, 1, format!("column row must be {}", SWEEP_COLUMNS.join(", "))));
    }
    let mut rows = Vec::new();
    for (offset, line) in lines[i + 1..].iter().enumerate() {
        let lineno = i + offset + 2;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::parse(lineno, fields.len().min(4) + 1, "expected 4 fields"));
        }
        let mut v = [0.0; 4];
        for (k, f) in fields.iter().enumerate() {
            v[k] = f
                .parse()
                .map_err(|_| Error::parse(lineno, k + 1, format!("`{f}` is not a number")))?;
        }
        rows.push(SweepRow {
            value: v[0],
            mean_gross_gain: v[1],
            stability: v[2],
            mean_net_gain: v[3],
        });
    }
    Ok(SweepTable { scenario_id, axis, rows })
}
