//! Confidence bounds computed from an [`ArmSnapshot`].
//!
//! All logarithms are natural. Bounds are deliberately left unclipped: they
//! may leave `[0, 1]`, and the elimination rules only compare them.

use crate::env::Delay;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stats::ArmSnapshot;

/// Multipliers of `log T` in the missing-count bounds.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoundConstants {
    /// Coefficient in `L3 = |S|/D (m/2 - c log T - 1)`.
    pub missing_lcb_log: f64,
    /// Coefficient in the partial-knowledge upper bound `(2m + c log T + 1) / recent`.
    pub missing_ucb_log: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        Self { missing_lcb_log: 8.0, missing_ucb_log: 8.0 }
    }
}

/// Horizon, delay scale and active-set size shared by every bound in a round.
#[derive(Clone, Copy, Debug)]
pub struct BoundContext<F> {
    pub horizon: u64,
    pub max_delay: Delay,
    pub active_count: usize,
    pub log_t: F,
    pub constants: BoundConstants,
}

impl<F: Scalar> BoundContext<F> {
    /// `horizon` is floored at 2 so that `log T > 0`.
    pub fn new(horizon: u64, max_delay: Delay, active_count: usize) -> Self {
        Self::with_constants(horizon, max_delay, active_count, BoundConstants::default())
    }

    pub fn with_constants(horizon: u64, max_delay: Delay, active_count: usize, constants: BoundConstants) -> Self {
        let horizon = horizon.max(2);
        Self {
            horizon,
            max_delay,
            active_count: active_count.max(1),
            log_t: F::of_u64(horizon).ln(),
            constants,
        }
    }

    pub fn with_active(mut self, active_count: usize) -> Self {
        self.active_count = active_count.max(1);
        self
    }

    fn d(&self) -> F {
        F::of_u64(self.max_delay as u64)
    }
}

/// `sqrt(2 log T / max(count, 1))`.
#[inline]
pub fn conf_radius<F: Scalar>(count: usize, log_t: F) -> F {
    (F::lit(2.0) * log_t / F::of_usize(count.max(1))).sqrt()
}

/// Lower bound on the mean implied by the number of missing plays.
#[inline]
pub fn missing_count_lcb<F: Scalar>(m: usize, ctx: &BoundContext<F>) -> F {
    let half = F::of_usize(m) / F::lit(2.0);
    F::of_usize(ctx.active_count) / ctx.d() * (half - F::lit(ctx.constants.missing_lcb_log) * ctx.log_t - F::one())
}

/// The three cost-side lower bounds and their maximum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostLcb<F> {
    pub lcb: F,
    pub l1: F,
    pub l2: F,
    pub l3: F,
}

fn require_played<F>(snap: &ArmSnapshot<F>) -> Result<()> {
    if snap.n == 0 {
        Err(Error::UnplayedArm { arm: snap.arm })
    } else {
        Ok(())
    }
}

pub fn lcb_cost<F: Scalar>(snap: &ArmSnapshot<F>, ctx: &BoundContext<F>) -> Result<CostLcb<F>> {
    require_played(snap)?;
    let l1 = snap.mu_minus - conf_radius(snap.n, ctx.log_t);
    let l2 = snap.mu_full - conf_radius(snap.n_full, ctx.log_t);
    let l3 = missing_count_lcb(snap.m, ctx);
    Ok(CostLcb { lcb: l1.max(l2).max(l3), l1, l2, l3 })
}

pub fn ucb_cost<F: Scalar>(snap: &ArmSnapshot<F>, ctx: &BoundContext<F>) -> F {
    snap.mu_full + conf_radius(snap.n_full, ctx.log_t)
}

/// The two reward-side upper bounds and their minimum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardUcb<F> {
    pub ucb: F,
    pub u1: F,
    pub u2: F,
}

pub fn ucb_reward<F: Scalar>(snap: &ArmSnapshot<F>, ctx: &BoundContext<F>) -> Result<RewardUcb<F>> {
    require_played(snap)?;
    let u1 = snap.mu_plus + conf_radius(snap.n, ctx.log_t);
    let u2 = snap.mu_full + conf_radius(snap.n_full, ctx.log_t);
    Ok(RewardUcb { ucb: u1.min(u2), u1, u2 })
}

pub fn lcb_reward<F: Scalar>(snap: &ArmSnapshot<F>, ctx: &BoundContext<F>) -> F {
    snap.mu_full - conf_radius(snap.n_full, ctx.log_t)
}

/// Bounds used by successive elimination with partial knowledge.
///
/// `recent` is the number of plays of the arm in the last `D` steps.
pub fn sepk_bounds<F: Scalar>(snap: &ArmSnapshot<F>, recent: usize, ctx: &BoundContext<F>) -> (F, F) {
    let radius = conf_radius(snap.n, ctx.log_t);
    let lcb = (snap.mu_minus - radius).max(missing_count_lcb(snap.m, ctx));
    let m = F::of_usize(snap.m);
    let count_ucb =
        (F::lit(2.0) * m + F::lit(ctx.constants.missing_ucb_log) * ctx.log_t + F::one()) / F::of_usize(recent.max(1));
    let ucb = (snap.mu_plus + radius).min(count_ucb);
    (lcb, ucb)
}

/// Full-information interval `mu_F -/+ radius(|F|)`.
pub fn full_info_interval<F: Scalar>(snap: &ArmSnapshot<F>, ctx: &BoundContext<F>) -> (F, F) {
    let r = conf_radius(snap.n_full, ctx.log_t);
    (snap.mu_full - r, snap.mu_full + r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ctx(log_t: f64, d: Delay, active: usize) -> BoundContext<f64> {
        BoundContext { horizon: 0, max_delay: d, active_count: active, log_t, constants: BoundConstants::default() }
    }

    fn snap(n: usize, m: usize, mu_minus: f64, mu_plus: f64, mu_full: f64, n_full: usize) -> ArmSnapshot<f64> {
        ArmSnapshot { arm: 0, t: 0, n, m, mu_minus, mu_plus, mu_full, n_full }
    }

    #[test]
    fn radius_examples() {
        assert_abs_diff_eq!(conf_radius(0, 2.0), 2.0);
        assert_abs_diff_eq!(conf_radius(8, 1.0), 0.5);
        assert_abs_diff_eq!(conf_radius(40_000, 2.0), 0.01, epsilon = 1e-15);
    }

    #[test]
    fn radius_monotone() {
        for c in 1..200 {
            assert!(conf_radius(c + 1, 3.0f64) < conf_radius(c, 3.0));
        }
        assert!(conf_radius(5, 3.0f64) < conf_radius(5, 3.5));
    }

    #[test]
    fn context_log_is_natural() {
        let c = BoundContext::<f64>::new(1000, 10, 3);
        assert_abs_diff_eq!(c.log_t, 1000f64.ln());
        assert_eq!(BoundContext::<f64>::new(1, 10, 3).horizon, 2);
    }

    #[test]
    fn l3_without_missing_is_inert() {
        let c = ctx(2.0, 10, 3);
        let l = lcb_cost(&snap(5, 0, 0.1, 0.1, 0.0, 0), &c).unwrap();
        assert_abs_diff_eq!(l.l3, -0.3 * 17.0);
        assert!(l.l3 < 0.0);
    }

    #[test]
    fn l3_example() {
        let c = ctx(1.0, 10, 3);
        assert_abs_diff_eq!(missing_count_lcb(20, &c), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn cost_lcb_composes_worked_snapshot() {
        let s = snap(3, 1, 0.5 / 3.0, 1.4 / 3.0, 0.0, 0);
        let c = ctx(2.0, 10, 1);
        let l = lcb_cost(&s, &c).unwrap();
        assert_abs_diff_eq!(l.l1, 0.5 / 3.0 - (4.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(l.l1, -0.988, epsilon = 1e-3);
        assert_abs_diff_eq!(l.l2, -2.0);
        assert_eq!(l.lcb, l.l1.max(l.l2).max(l.l3));
    }

    #[test]
    fn unplayed_arm_is_precondition_error() {
        let c = ctx(2.0, 10, 1);
        assert!(matches!(lcb_cost(&snap(0, 0, 0.0, 0.0, 0.0, 0), &c), Err(Error::UnplayedArm { .. })));
        assert!(ucb_reward(&snap(0, 0, 0.0, 0.0, 0.0, 0), &c).is_err());
    }

    #[test]
    fn cost_ucb_examples() {
        let c = ctx(2.0, 10, 1);
        assert_abs_diff_eq!(ucb_cost(&snap(1, 1, 0.0, 1.0, 0.0, 0), &c), 2.0);
        assert_abs_diff_eq!(ucb_cost(&snap(3, 0, 0.0, 0.0, 0.4, 1), &c), 2.4);
        let mut prev = f64::INFINITY;
        for nf in 1..100 {
            let u = ucb_cost(&snap(200, 0, 0.0, 0.0, 0.4, nf), &c);
            assert!(u < prev && u > 0.4);
            prev = u;
        }
    }

    #[test]
    fn reward_bound_examples() {
        let c = ctx(2.0, 10, 1);
        let u = ucb_reward(&snap(3, 1, 0.5 / 3.0, 1.4 / 3.0, 0.0, 0), &c).unwrap();
        assert_abs_diff_eq!(u.u1, 1.4 / 3.0 + (4.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(u.u2, 2.0);
        assert_eq!(u.ucb, u.u1);
        let zero = ucb_reward(&snap(4, 0, 0.0, 0.0, 0.0, 0), &c).unwrap();
        assert_abs_diff_eq!(zero.u1, conf_radius(4, 2.0));
        assert_abs_diff_eq!(lcb_reward(&snap(4, 0, 0.0, 0.0, 0.0, 0), &c), -2.0);
        assert_abs_diff_eq!(lcb_reward(&snap(8, 0, 0.0, 0.0, 0.5, 4), &c), -0.5);
    }

    #[test]
    fn sepk_examples() {
        let c = ctx(1.0, 10, 2);
        let (_, ucb) = sepk_bounds(&snap(100, 0, 0.9, 5.0, 0.0, 0), 5, &c);
        assert_abs_diff_eq!(ucb, 1.8, epsilon = 1e-15);
        let (_, ucb0) = sepk_bounds(&snap(100, 0, 0.9, 20.0, 0.0, 0), 0, &c);
        assert_abs_diff_eq!(ucb0, 9.0);
    }

    #[test]
    fn bounds_are_bit_reproducible() {
        let s = snap(17, 4, 0.21, 0.43, 0.3, 9);
        let c = ctx(7.3, 100, 4);
        assert_eq!(lcb_cost(&s, &c).unwrap(), lcb_cost(&s, &c).unwrap());
        assert_eq!(sepk_bounds(&s, 3, &c), sepk_bounds(&s, 3, &c));
    }

    // Snapshots consistent with some underlying set of plays: m <= n, the
    // observed payoff sum lies in [0, n - m], missing ages in [0, D].
    fn consistent_snapshot() -> impl Strategy<Value = (ArmSnapshot<f64>, usize, BoundContext<f64>)> {
        (1usize..400, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 2u64..1_000_000, 1u32..500, 1usize..8)
            .prop_map(|(n, mf, obs, age, full, horizon, d, active)| {
                let m = ((n as f64) * mf) as usize;
                let sum_obs = obs * (n - m) as f64;
                let ages = age * m as f64;
                let n_full = ((n - m) as f64 * full) as usize;
                let recent = (n - n_full).max(m);
                let s = ArmSnapshot {
                    arm: 0,
                    t: 0,
                    n,
                    m,
                    mu_minus: (ages + sum_obs) / n as f64,
                    mu_plus: (m as f64 + sum_obs) / n as f64,
                    mu_full: if n_full == 0 { 0.0 } else { obs },
                    n_full,
                };
                (s, recent, BoundContext::new(horizon, d, active))
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn reward_lcb_below_ucb((s, _, c) in consistent_snapshot()) {
            let u = ucb_reward(&s, &c).unwrap();
            prop_assert!(lcb_reward(&s, &c) <= u.ucb);
        }

        #[test]
        fn cost_estimates_ordered((s, _, _c) in consistent_snapshot()) {
            prop_assert!(s.mu_minus <= s.mu_plus + 1e-12);
        }
    }
}
