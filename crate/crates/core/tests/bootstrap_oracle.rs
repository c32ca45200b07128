//! Bootstrap intervals recomputed independently in exact arithmetic from
//! the documented resampling stream.

use ctpkit_core::domain::{EpisodeLog, InteractionRecord, LossKind, TaskSpec};
use ctpkit_core::metrics::bootstrap_gain;
use ctpkit_core::rng::{keyed_rng, tag};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;

fn log20() -> EpisodeLog {
    let rows: Vec<(f64, f64, f64, f64)> = (0..20)
        .map(|i| {
            let t = f64::from(i) * 0.5;
            let h = t + [1.0, -0.5, 0.25, 2.0][i as usize % 4];
            let a = t - [0.5, 1.5, -1.0, 0.25][i as usize % 4];
            (t, h, a, 0.5 * h + 0.5 * a)
        })
        .collect();
    EpisodeLog {
        episode_id: "b20".into(),
        task: TaskSpec::real("t", LossKind::SquaredError).unwrap(),
        protocol_id: "avg".into(),
        cost_unit: "minute".into(),
        records: rows
            .iter()
            .enumerate()
            .map(|(i, &(t, h, a, m))| InteractionRecord::real(format!("r{i}"), t, h, a, m, 0.1))
            .collect(),
    }
}

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

#[test]
fn matches_exact_recomputation() {
    let log = log20();
    let (resamples, level, seed) = (500, 0.9, 42);
    let got = bootstrap_gain(&log, 0.1, resamples, level, seed).unwrap();

    let sq = |y: f64, t: f64| (y - t) * (y - t);
    let losses: Vec<[f64; 3]> = log
        .records
        .iter()
        .map(|r| {
            let t = r.y_true.as_real().unwrap();
            [sq(r.y_human.as_real().unwrap(), t), sq(r.y_ai.as_real().unwrap(), t), sq(r.y_team.as_real().unwrap(), t)]
        })
        .collect();
    let gross = |idx: &[usize]| -> f64 {
        let mut sums = [q(0.0), q(0.0), q(0.0)];
        for &i in idx {
            for k in 0..3 {
                sums[k] += q(losses[i][k]);
            }
        }
        let n = q(idx.len() as f64);
        let m: Vec<BigRational> = sums.iter().map(|s| s / &n).collect();
        let best = if m[0] < m[1] { &m[0] } else { &m[1] };
        (best - &m[2]).to_f64().unwrap()
    };

    let n = log.records.len();
    let all: Vec<usize> = (0..n).collect();
    assert!((got.point - gross(&all)).abs() < 1e-12);

    let mut stats: Vec<f64> = (0..resamples)
        .map(|b| {
            let mut rng = keyed_rng(seed, b as u64, 0, tag::BOOTSTRAP);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n as u64) as usize).collect();
            gross(&idx)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let pct = |p: f64| {
        let h = p * (stats.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(stats.len() - 1);
        stats[lo] + (h - lo as f64) * (stats[hi] - stats[lo])
    };
    assert!((got.lower - pct(0.05)).abs() < 1e-12, "{} vs {}", got.lower, pct(0.05));
    assert!((got.upper - pct(0.95)).abs() < 1e-12, "{} vs {}", got.upper, pct(0.95));
    assert!(got.lower <= got.point && got.point <= got.upper);
}

#[test]
fn seed_changes_interval_not_point() {
    let log = log20();
    let a = bootstrap_gain(&log, 0.1, 200, 0.95, 1).unwrap();
    let b = bootstrap_gain(&log, 0.1, 200, 0.95, 2).unwrap();
    assert_eq!(a.point, b.point);
    assert_ne!((a.lower, a.upper), (b.lower, b.upper));
    assert_eq!(a, bootstrap_gain(&log, 0.1, 200, 0.95, 1).unwrap());
}
