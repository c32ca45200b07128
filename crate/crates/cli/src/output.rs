use std::fmt::Write as _;
use std::io::IsTerminal;

use ctpkit_core::metrics::{BootstrapInterval, RelianceVerdict};
use ctpkit_core::numeric::format_significant;
use ctpkit_core::{Efficiency, GainReport, StabilityProfile, SweepRow};
use serde::Serialize;

pub fn g(x: f64) -> String {
    format_significant(x, 6)
}

/// Colour only on a terminal and only when NO_COLOR is unset.
pub fn color_enabled() -> bool {
    std::env::var_os("NO_COLOR").is_none() && std::io::stdout().is_terminal()
}

fn paint(text: &str, good: bool, color: bool) -> String {
    if color {
        format!("\x1b[{}m{text}\x1b[0m", if good { 32 } else { 31 })
    } else {
        text.to_string()
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn gain_line(r: &GainReport, color: bool) -> String {
    format!(
        "{}  gross_gain={}  net_gain={}  {}",
        paint(&format!("ctp={}", r.ctp), r.ctp == 1, color),
        g(r.gross_gain),
        g(r.net_gain),
        paint(&r.efficient.to_string(), r.efficient == Efficiency::Efficient, color)
    )
}

pub fn gain_block(out: &mut String, r: &GainReport, unit: &str, color: bool) {
    let _ = writeln!(out, "episode {}  (n = {})", r.episode_id, r.n);
    let _ = writeln!(out, "  L_H    {}", g(r.loss_human));
    let _ = writeln!(out, "  L_AI   {}", g(r.loss_ai));
    let _ = writeln!(out, "  L_HAI  {}", g(r.loss_team));
    let _ = writeln!(out, "  {}", gain_line(r, color));
    let ratio = r.efficiency_ratio.map_or("undefined".to_string(), g);
    let _ = writeln!(
        out,
        "  total_cost={} {unit}  lambda={}  efficiency_ratio={ratio}",
        g(r.total_cost),
        g(r.lambda)
    );
    if let Some(d) = r.degenerate {
        let _ = writeln!(out, "  note: {}", d.note());
    }
}

pub fn reliance_block(out: &mut String, counts: &std::collections::BTreeMap<RelianceVerdict, usize>) {
    let _ = writeln!(out, "  reliance:");
    for (v, n) in counts {
        let _ = writeln!(out, "    {:<28} {n}", v.name());
    }
}

pub fn stability_block(out: &mut String, label: &str, p: &StabilityProfile) {
    let hits = p.ctp_series.iter().filter(|c| **c == 1).count();
    let _ = writeln!(
        out,
        "{label}: stability={}  ({hits} of {} windows with ctp=1)",
        g(p.stability),
        p.ctp_series.len()
    );
}

pub fn bootstrap_line(out: &mut String, b: &BootstrapInterval) {
    let _ = writeln!(
        out,
        "  bootstrap {:?}: {} [{}, {}]  level={} resamples={} seed={}",
        b.statistic,
        g(b.point),
        g(b.lower),
        g(b.upper),
        g(b.level),
        b.resamples,
        b.seed
    );
}

pub fn sweep_table(axis: &str, rows: &[SweepRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>14} {:>16} {:>10} {:>16}",
        axis, "mean_gross_gain", "stability", "mean_net_gain"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>14} {:>16} {:>10} {:>16}",
            g(r.value),
            g(r.mean_gross_gain),
            g(r.stability),
            g(r.mean_net_gain)
        );
    }
    out
}
