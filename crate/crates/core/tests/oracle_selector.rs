//! The oracle selector attains the smallest team loss of any selector:
//! checked against every one of the 2^n human/AI assignments.

use ctpkit_core::domain::{EpisodeLog, InteractionRecord, LossKind, OutputKind, Prediction, TaskSpec};
use ctpkit_core::metrics::aggregate_losses;
use ctpkit_core::numeric::mean;
use ctpkit_core::protocols::{run_protocol, ProtocolKind, ProtocolSpec};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn loss(kind: LossKind, y: &Prediction, t: &Prediction) -> f64 {
    match (kind, y, t) {
        (LossKind::SquaredError, Prediction::Real(y), Prediction::Real(t)) => (y - t) * (y - t),
        (LossKind::AbsoluteError, Prediction::Real(y), Prediction::Real(t)) => (y - t).abs(),
        (LossKind::ZeroOne, y, t) => f64::from(u8::from(y != t)),
        _ => unreachable!(),
    }
}

fn exact_mean(values: &[f64]) -> BigRational {
    let sum = values
        .iter()
        .map(|v| BigRational::from_float(*v).unwrap())
        .fold(BigRational::from_integer(0.into()), |a, b| a + b);
    sum / BigRational::from_integer(values.len().into())
}

fn random_prediction(task: &TaskSpec, rng: &mut ChaCha8Rng) -> Prediction {
    match &task.output_kind {
        OutputKind::RealScalar => {
            // coarse grid values give frequent exact ties
            if rng.random_bool(0.3) {
                Prediction::Real(f64::from(rng.random_range(-3i32..4)))
            } else {
                Prediction::Real(rng.random_range(-10.0..10.0))
            }
        }
        kind => {
            let labels = kind.labels().unwrap();
            Prediction::Label(labels[rng.random_range(0..labels.len())].clone())
        }
    }
}

fn check(task: &TaskSpec, n: usize, rng: &mut ChaCha8Rng) {
    let oracle = ProtocolSpec::new("oracle", ProtocolKind::OracleSelector);
    let mut records = Vec::new();
    for i in 0..n {
        let t = random_prediction(task, rng);
        let h = random_prediction(task, rng);
        let a = random_prediction(task, rng);
        let out = run_protocol(&oracle, &h, &a, Some(&t), task).unwrap();
        assert!(out.y_team == h || out.y_team == a);
        records.push(InteractionRecord::new(format!("r{i}"), t, h, a, out.y_team, 0.0));
    }
    let log = EpisodeLog {
        episode_id: "e".into(),
        task: task.clone(),
        protocol_id: "oracle".into(),
        cost_unit: "unit".into(),
        records,
    };
    let oracle_loss = aggregate_losses(&log).unwrap().loss_team;

    let kind = task.loss_kind;
    let pairs: Vec<(f64, f64)> = log
        .records
        .iter()
        .map(|r| (loss(kind, &r.y_human, &r.y_true), loss(kind, &r.y_ai, &r.y_true)))
        .collect();
    // Gray-code walk: consecutive assignments differ in one record, so the
    // exact sum needs one update per step.
    let exact: Vec<(BigRational, BigRational)> = pairs
        .iter()
        .map(|(h, a)| (BigRational::from_float(*h).unwrap(), BigRational::from_float(*a).unwrap()))
        .collect();
    let mut sum = exact.iter().fold(BigRational::from_integer(0.into()), |acc, (h, _)| acc + h);
    let (mut best_sum, mut best_mask) = (sum.clone(), 0u32);
    let mut mask = 0u32;
    for step in 1u32..(1 << n) {
        let bit = step.trailing_zeros() as usize;
        let (h, a) = &exact[bit];
        if mask >> bit & 1 == 0 {
            sum += a - h;
        } else {
            sum += h - a;
        }
        mask ^= 1 << bit;
        if sum < best_sum {
            best_sum = sum.clone();
            best_mask = mask;
        }
    }
    let best_losses: Vec<f64> = pairs
        .iter()
        .enumerate()
        .map(|(i, (h, a))| if best_mask >> i & 1 == 1 { *a } else { *h })
        .collect();
    let best_exact = best_sum / BigRational::from_integer(n.into());
    let oracle_losses: Vec<f64> = log.records.iter().map(|r| loss(kind, &r.y_team, &r.y_true)).collect();
    assert_eq!(exact_mean(&oracle_losses), best_exact, "oracle is not minimal");
    assert_eq!(oracle_loss, mean(&best_losses).unwrap(), "reported loss differs from the minimum");
}

#[test]
fn oracle_attains_selector_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let tasks = [
        TaskSpec::real("sq", LossKind::SquaredError).unwrap(),
        TaskSpec::real("abs", LossKind::AbsoluteError).unwrap(),
        TaskSpec::categorical("cat", ["a", "b", "c"]).unwrap(),
        TaskSpec::binary("bin", "no", "yes").unwrap(),
    ];
    for task in &tasks {
        for n in 1..=10 {
            for _ in 0..25 {
                check(task, n, &mut rng);
            }
        }
    }
}
