use super::*;
use crate::env::{BanditInstance, DelaySpec};

fn det(d: u32) -> DelaySpec {
    DelaySpec::Deterministic { value: d }
}

fn env(sense: PayoffSense, max_delay: u32, arms: Vec<DelaySpec>, horizon: u64, seed: u64) -> Environment {
    Environment::new(BanditInstance::new(max_delay, sense, arms).unwrap(), horizon, seed)
}

fn opts() -> AgentOptions {
    AgentOptions::default()
}

/// Round-robin over the active set and no plays of eliminated arms, per segment.
fn assert_round_robin<F: Scalar>(run: &AgentRun<F>, arms: usize) {
    let mut plays = run.plays.iter().peekable();
    for seg in &run.segments {
        let end = seg.start + seg.steps;
        let mut active = vec![true; arms];
        let mut counts = vec![0u64; arms];
        let mut elims = run.eliminations.iter().filter(|e| e.t > seg.start && e.t <= end).peekable();
        while let Some(p) = plays.next_if(|p| p.t < end) {
            while let Some(e) = elims.next_if(|e| e.t <= p.t) {
                active[e.arm] = false;
            }
            assert!(active[p.arm], "eliminated arm {} played at {}", p.arm, p.t);
            counts[p.arm] += 1;
            let live: Vec<u64> = (0..arms).filter(|&a| active[a]).map(|a| counts[a]).collect();
            let spread = live.iter().max().unwrap() - live.iter().min().unwrap();
            assert!(spread <= 1, "round-robin broken at t={}", p.t);
        }
    }
    assert!(plays.next().is_none());
}

#[test]
fn cse_identical_arms_never_eliminate() {
    let mut e = env(PayoffSense::Cost, 20, vec![det(5), det(5)], 3000, 1);
    let cfg = ThresholdedConfig { budget: 3000, threshold: 10.0 };
    let run = cse_run::<f64>(&mut e, &cfg, &opts()).unwrap();
    assert_eq!(run.status, Status::Success);
    assert!(run.eliminations.is_empty());
    assert_eq!(run.final_active(), &[0, 1]);
    assert_eq!(run.steps_used, 3000);
}

#[test]
fn cse_tiny_threshold_fails_on_hand_stepped_instance() {
    // One Det(4) arm, D = 4, T = 64. After the n-th play (t = n + 1) the
    // last min(n, 4) plays are missing with elapsed times 1..=4, all others
    // observed with payoff 1, and the full-information window holds n - 4.
    let log_t = 64f64.ln();
    let r = |c: usize| (2.0 * log_t / c.max(1) as f64).sqrt();
    let fail_at = (1usize..=64)
        .find(|&n| {
            let m = n.min(4);
            let elapsed: f64 = (1..=m).map(|k| k as f64 / 4.0).sum();
            let l1 = (elapsed + (n - m) as f64) / n as f64 - r(n);
            let nf = n.saturating_sub(4);
            let l2 = if nf == 0 { 0.0 } else { 1.0 } - r(nf);
            let l3 = 0.25 * (m as f64 / 2.0 - 8.0 * log_t - 1.0);
            l1.max(l2).max(l3) > 1e-9
        })
        .unwrap();
    assert_eq!(fail_at, 12);

    let mut e = env(PayoffSense::Cost, 4, vec![det(4)], 64, 0);
    let run = cse_run::<f64>(&mut e, &ThresholdedConfig { budget: 64, threshold: 1e-9 }, &opts()).unwrap();
    assert_eq!(run.status, Status::Fail);
    assert_eq!(run.steps_used, fail_at as u64);
    assert_eq!(run.eliminations, vec![Elimination { t: fail_at as u64 + 1, arm: 0, active_count: 1 }]);
}

#[test]
fn cse_never_drops_best_arm_when_threshold_is_safe() {
    for seed in 0..100 {
        let mut e = env(PayoffSense::Cost, 100, vec![det(10), det(100)], 10_000, seed);
        let run = cse_run::<f64>(&mut e, &ThresholdedConfig { budget: 10_000, threshold: 1.0 }, &opts()).unwrap();
        assert!(!run.was_eliminated(0), "seed {seed}");
        assert_eq!(run.status, Status::Success);
    }
}

#[test]
fn threshold_must_be_finite_and_non_negative() {
    let mut e = env(PayoffSense::Cost, 4, vec![det(1)], 10, 0);
    for b in [-1.0, f64::NAN, f64::INFINITY] {
        assert!(cse_run::<f64>(&mut e, &ThresholdedConfig { budget: 10, threshold: b }, &opts()).is_err());
    }
}

#[test]
fn cse_budget_below_arm_count_plays_partial_round() {
    let mut e = env(PayoffSense::Cost, 10, vec![det(1), det(2), det(3)], 100, 0);
    let run = cse_run::<f64>(&mut e, &ThresholdedConfig { budget: 2, threshold: 1.0 }, &opts()).unwrap();
    assert_eq!(run.status, Status::Success);
    assert_eq!(run.plays.iter().map(|p| p.arm).collect::<Vec<_>>(), vec![0, 1]);
}

#[test]
fn bdse_zero_delays_single_segment() {
    let mut e = env(PayoffSense::Cost, 50, vec![det(0), det(0), det(0)], 5000, 3);
    let run = bdse_run::<f64>(&mut e, &opts()).unwrap();
    assert_eq!(run.segment_count(), 1);
    assert_eq!(run.threshold_history.len(), 1);
    assert_eq!(run.threshold_history[0].threshold, 1.0 / 50.0);
    assert_eq!(run.steps_used, 5000);
}

#[test]
fn bdse_segment_cap_on_two_deterministic_arms() {
    for &d_star in &[50u32, 100, 200, 400] {
        let mut e = env(PayoffSense::Cost, 2000, vec![det(2000), det(d_star)], 30_000, 1);
        let run = bdse_run::<f64>(&mut e, &opts()).unwrap();
        let cap = (d_star as f64).log2().ceil() as usize + 1;
        assert!(run.segment_count() <= cap, "d*={d_star}: {} > {cap}", run.segment_count());
        assert!(!run.segments.last().unwrap().final_active.is_empty());
        assert_eq!(run.final_active(), &[1]);
        assert_round_robin(&run, 2);
        for w in run.threshold_history.windows(2) {
            assert_eq!(w[1].threshold, 2.0 * w[0].threshold);
        }
    }
}

#[test]
fn rse_zero_threshold_identical_arms() {
    let mut e = env(PayoffSense::Reward, 20, vec![det(7), det(7)], 3000, 0);
    let run = rse_run::<f64>(&mut e, &ThresholdedConfig { budget: 3000, threshold: 0.0 }, &opts()).unwrap();
    assert!(run.eliminations.is_empty());
    assert_eq!(run.status, Status::Success);
}

#[test]
fn rse_unit_threshold_fails_on_hand_stepped_instance() {
    // One Det(0) arm, D = 4, T = 64: after n plays every payoff (0) is
    // observed, so UCB = min(r(n), r(n - 4)) and Fail comes at r(n) < 1.
    let log_t = 64f64.ln();
    let r = |c: usize| (2.0 * log_t / c.max(1) as f64).sqrt();
    let fail_at = (1usize..=64).find(|&n| r(n).min(r(n.saturating_sub(4))) < 1.0).unwrap();
    assert_eq!(fail_at, 9);

    let mut e = env(PayoffSense::Reward, 4, vec![det(0)], 64, 0);
    let run = rse_run::<f64>(&mut e, &ThresholdedConfig { budget: 64, threshold: 1.0 }, &opts()).unwrap();
    assert_eq!(run.status, Status::Fail);
    assert_eq!(run.steps_used, fail_at as u64);
}

#[test]
fn rse_never_drops_best_arm_when_threshold_is_safe() {
    for seed in 0..100 {
        let mut e = env(PayoffSense::Reward, 100, vec![det(50), det(100)], 10_000, seed);
        let run = rse_run::<f64>(&mut e, &ThresholdedConfig { budget: 10_000, threshold: 0.9 }, &opts()).unwrap();
        assert!(!run.was_eliminated(1), "seed {seed}");
        assert_eq!(run.status, Status::Success);
    }
}

#[test]
fn bhse_single_segment_when_optimum_is_one() {
    let mut e = env(PayoffSense::Reward, 100, vec![det(100)], 2000, 0);
    assert_eq!(bhse_run::<f64>(&mut e, &opts()).unwrap().segment_count(), 1);
    let mut e = env(PayoffSense::Reward, 100, vec![det(100), det(50), det(0), det(0), det(0)], 20_000, 0);
    let run = bhse_run::<f64>(&mut e, &opts()).unwrap();
    assert_eq!(run.segment_count(), 1);
    assert_eq!(run.final_active(), &[0]);
    assert_round_robin(&run, 5);
}

#[test]
fn bhse_eighth_optimum_needs_at_most_three_halvings() {
    for seed in 0..10 {
        let arms = vec![
            DelaySpec::TwoPoint { p: 0.875, low: 0, high: 800 },
            det(50),
            DelaySpec::TwoPoint { p: 0.5, low: 0, high: 20 },
        ];
        let mut e = env(PayoffSense::Reward, 800, arms, 40_000, seed);
        let run = bhse_run::<f64>(&mut e, &opts()).unwrap();
        assert!(run.segment_count() <= 4, "seed {seed}: {}", run.segment_count());
        assert!(run.threshold_history.last().unwrap().threshold >= 0.125);
        assert!(!run.segments.last().unwrap().final_active.is_empty());
        assert!(run.final_active().contains(&0));
    }
}

#[test]
fn bhse_threshold_drops_to_zero_after_log_t_failures() {
    let cap = (4096f64).log2().ceil() as usize;
    let mut b = 1.0f64;
    let mut seq = vec![b];
    for failures in 1..=cap {
        b = halve_or_zero(b, failures, cap);
        seq.push(b);
    }
    assert_eq!(seq[cap - 1], 2f64.powi(-(cap as i32 - 1)));
    assert_eq!(seq[cap], 0.0);
    // a zero-delay instance keeps failing while B is large
    let mut e = env(PayoffSense::Reward, 10, vec![det(0), det(0)], 4096, 0);
    let run = bhse_run::<f64>(&mut e, &opts()).unwrap();
    assert!(run.segment_count() > 1);
    for w in run.threshold_history.windows(2) {
        assert_eq!(w[1].threshold, w[0].threshold / 2.0);
    }
    assert_eq!(run.status, Status::Success);
    assert_eq!(run.steps_used, 4096);
}

#[test]
fn sepk_identical_arms_and_separation() {
    let mut e = env(PayoffSense::Cost, 20, vec![det(4), det(4), det(4)], 3000, 0);
    assert!(sepk_run::<f64>(&mut e, &opts()).unwrap().eliminations.is_empty());
    let mut e = env(PayoffSense::Cost, 100, vec![det(10), det(100)], 10_000, 0);
    let run = sepk_run::<f64>(&mut e, &opts()).unwrap();
    assert_eq!(run.final_active(), &[0]);
    assert_round_robin(&run, 2);
}

#[test]
fn fullinfo_identical_arms() {
    let mut e = env(PayoffSense::Reward, 20, vec![det(9), det(9)], 3000, 0);
    assert!(fullinfo_se_run::<f64>(&mut e, &opts()).unwrap().eliminations.is_empty());
}

#[test]
fn same_seed_same_trace() {
    let arms = || {
        vec![
            DelaySpec::DiscretizedTruncNormal { mean_raw: 30.0, std_raw: 40.0 },
            DelaySpec::TwoPoint { p: 0.4, low: 0, high: 200 },
            DelaySpec::DiscretizedTruncNormal { mean_raw: 120.0, std_raw: 10.0 },
        ]
    };
    for algo in [Algorithm::Bdse, Algorithm::Sepk, Algorithm::FullinfoSe] {
        let a = algo.run::<f64>(&mut env(PayoffSense::Cost, 200, arms(), 8000, 42), &opts()).unwrap();
        let b = algo.run::<f64>(&mut env(PayoffSense::Cost, 200, arms(), 8000, 42), &opts()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_round_robin(&a, 3);
    }
}

#[test]
fn keep_history_variant_runs() {
    let o = AgentOptions { keep_history: true, ..opts() };
    let mut e = env(PayoffSense::Cost, 2000, vec![det(2000), det(100)], 30_000, 0);
    let run = bdse_run::<f64>(&mut e, &o).unwrap();
    assert_eq!(run.final_active(), &[1]);
    assert_eq!(run.steps_used, 30_000);
    let mut e = env(PayoffSense::Reward, 800, vec![det(100), det(50), det(0)], 30_000, 0);
    let run = bhse_run::<f64>(&mut e, &o).unwrap();
    assert!(run.final_active().contains(&0));
}

#[test]
fn wrappers_check_the_sense() {
    let mut cost = env(PayoffSense::Cost, 10, vec![det(1), det(2)], 100, 0);
    let mut reward = env(PayoffSense::Reward, 10, vec![det(1), det(2)], 100, 0);
    assert!(bhse_run::<f64>(&mut cost, &opts()).is_err());
    assert!(bdse_run::<f64>(&mut reward, &opts()).is_err());
    assert!(sepk_run::<f64>(&mut reward, &opts()).is_err());
}

#[test]
fn f32_agents_agree_on_deterministic_instance() {
    let run64 = bdse_run::<f64>(&mut env(PayoffSense::Cost, 100, vec![det(10), det(100)], 5000, 0), &opts()).unwrap();
    let run32 = bdse_run::<f32>(&mut env(PayoffSense::Cost, 100, vec![det(10), det(100)], 5000, 0), &opts()).unwrap();
    assert_eq!(run64.final_active(), run32.final_active());
    assert_eq!(run64.segment_count(), run32.segment_count());
}

#[test]
fn algorithm_names_parse() {
    for a in Algorithm::ALL {
        assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
    }
    assert!(matches!("ucb".parse::<Algorithm>(), Err(Error::UnknownAlgorithm(_))));
}
