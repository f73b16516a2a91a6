//! Closed-form Age-of-Block-Information (AoBI) analysis.
//!
//! The minimum average AoBI splits into three parts: the monitoring gap
//! `½(T_p + T_mine)` (λ at its upper bound), the network validation time and
//! the network communication time. Both service terms scale with the number
//! of forward/validate rounds needed to cover all `N` miners.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{NetworkParams, OMEGA_K_UNIT_TOLERANCE};
use crate::scalar::Real;

/// Downward nudge applied to the round logarithm before taking the ceiling,
/// so an exactly-integral log evaluated a few ulps high is not bumped a round.
pub const ROUND_CEIL_NUDGE: f64 = 1.0e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RoundBranch {
    /// ω̄k = 1: each round adds exactly k miners.
    OmegaKEqualsOne,
    /// ω̄k > 1: coverage grows geometrically.
    OmegaKGreaterOne,
}

impl RoundBranch {
    pub fn label(self) -> &'static str {
        match self {
            RoundBranch::OmegaKEqualsOne => "omega_k_eq_1",
            RoundBranch::OmegaKGreaterOne => "omega_k_gt_1",
        }
    }
}

/// Number of forward/validate rounds (m + 1) to reach the whole network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsensusRounds {
    pub rounds: u64,
    pub branch: RoundBranch,
}

/// Smallest `m + 1` with `k + ω̄k² + … + ω̄^m k^{m+1} ≥ N`.
///
/// Uses `⌈N/k⌉` when ω̄k is 1 (within [`OMEGA_K_UNIT_TOLERANCE`]) and
/// `⌈log_{ω̄k}((N(ω̄k − 1) + k)/k)⌉` otherwise.
pub fn consensus_rounds<T: Real>(n: u64, k: u64, omega_bar: T) -> Result<ConsensusRounds> {
    if n == 0 {
        return Err(Error::invalid("n_miners", 0.0, "must be at least 1"));
    }
    if k == 0 {
        return Err(Error::invalid("k_adjacent", 0.0, "must be at least 1"));
    }
    // Rounds are integers; evaluate in f64 whatever the caller's scalar is.
    let omega_k = omega_bar.as_f64() * k as f64;
    if !(omega_k >= 1.0 - OMEGA_K_UNIT_TOLERANCE) {
        return Err(Error::CoverageUnreachable { product: omega_k });
    }
    if (omega_k - 1.0).abs() <= OMEGA_K_UNIT_TOLERANCE {
        return Ok(ConsensusRounds {
            rounds: n.div_ceil(k),
            branch: RoundBranch::OmegaKEqualsOne,
        });
    }
    let (nf, kf) = (n as f64, k as f64);
    let target = (nf * (omega_k - 1.0) + kf) / kf;
    let log = target.ln() / omega_k.ln();
    let rounds = (log - ROUND_CEIL_NUDGE).ceil().max(1.0) as u64;
    Ok(ConsensusRounds {
        rounds,
        branch: RoundBranch::OmegaKGreaterOne,
    })
}

pub fn rounds_for<T: Real>(p: &NetworkParams<T>) -> ConsensusRounds {
    consensus_rounds(p.n_miners(), p.k_adjacent(), p.omega_bar())
        .expect("validated params guarantee omega_bar * k >= 1")
}

/// Per-round validation bound `R_v N B_max² / (4 C τ T_p)`.
pub fn validation_per_round<T: Real>(p: &NetworkParams<T>) -> T {
    let b = T::from_count(p.b_max());
    p.r_validate() * T::from_count(p.n_miners()) * b * b
        / (T::lit(4.0) * p.cloud_compute() * p.tau() * p.t_pack())
}

/// Per-round communication bound `P_size τ T_p ω̄ (N/M) / (R_c W)`.
pub fn communication_per_round<T: Real>(p: &NetworkParams<T>) -> T {
    p.p_size() * p.block_size() * p.omega_bar() * p.miners_per_station()
        / (p.r_c() * p.bandwidth_w())
}

/// Lower bound on the network validation time E[T_vm] = 1/Ξ.
pub fn validation_time_bound<T: Real>(p: &NetworkParams<T>) -> T {
    T::from_count(rounds_for(p).rounds) * validation_per_round(p)
}

/// Lower bound on the network communication time E[T_cm] = 1/H.
pub fn communication_time_bound<T: Real>(p: &NetworkParams<T>) -> T {
    T::from_count(rounds_for(p).rounds) * communication_per_round(p)
}

/// The three additive parts of the minimum average AoBI, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct AobiBreakdown<T> {
    pub monitoring_term: T,
    pub validation_term: T,
    pub communication_term: T,
    pub total: T,
    pub rounds: ConsensusRounds,
}

pub fn min_average_aobi<T: Real>(p: &NetworkParams<T>) -> AobiBreakdown<T> {
    let rounds = rounds_for(p);
    let r = T::from_count(rounds.rounds);
    let monitoring_term = T::lit(0.5) * (p.t_pack() + p.t_mine());
    let validation_term = r * validation_per_round(p);
    let communication_term = r * communication_per_round(p);
    AobiBreakdown {
        monitoring_term,
        validation_term,
        communication_term,
        total: monitoring_term + validation_term + communication_term,
        rounds,
    }
}

/// Shape of the AoBI curve over τ, written `φ(τ) = aτ + b/τ` up to the
/// round factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct Monotonicity<T> {
    /// `B_max √(R_v M R_c W / (C P_size ω̄))`; below 2 the curve is increasing.
    pub condition_value: T,
    pub monotone_increasing: bool,
    /// Linear coefficient `a = P_size T_p ω̄ N / (M R_c W)`.
    pub slope_a: T,
    /// Hyperbolic coefficient `b = R_v N B_max² / (4 C T_p)`.
    pub hyperbolic_b: T,
    /// Unconstrained minimiser `√(b/a)`, possibly outside the τ range.
    pub tau_star: T,
    /// `tau_star` clipped to `[1/T_p, B_max/T_p]`.
    pub tau_star_feasible: T,
}

pub fn monotonicity_condition<T: Real>(p: &NetworkParams<T>) -> Monotonicity<T> {
    let n = T::from_count(p.n_miners());
    let m = T::from_count(p.n_base_stations());
    let b_max = T::from_count(p.b_max());
    let slope_a = p.p_size() * p.t_pack() * p.omega_bar() * n / (m * p.r_c() * p.bandwidth_w());
    let hyperbolic_b =
        p.r_validate() * n * b_max * b_max / (T::lit(4.0) * p.cloud_compute() * p.t_pack());
    let condition_value = b_max
        * (p.r_validate() * m * p.r_c() * p.bandwidth_w()
            / (p.cloud_compute() * p.p_size() * p.omega_bar()))
        .sqrt();
    let tau_star = (hyperbolic_b / slope_a).sqrt();
    let (lo, hi) = p.tau_range();
    Monotonicity {
        condition_value,
        monotone_increasing: condition_value < T::lit(2.0),
        slope_a,
        hyperbolic_b,
        tau_star,
        tau_star_feasible: tau_star.max(lo).min(hi),
    }
}

/// Evaluates [`min_average_aobi`] at each τ, in input order.
pub fn aobi_tau_sweep<T: Real>(
    p: &NetworkParams<T>,
    tau_grid: &[T],
) -> Result<Vec<(T, AobiBreakdown<T>)>> {
    tau_grid
        .iter()
        .map(|&tau| Ok((tau, min_average_aobi(&p.with_tau(tau)?))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::RawNetworkParams;

    fn table() -> NetworkParams<f64> {
        RawNetworkParams::table_defaults().validate().unwrap()
    }

    /// Cumulative-coverage loop, independent of the logarithm route.
    fn rounds_by_counting(n: u64, k: u64, omega_bar: f64) -> u64 {
        let ratio = omega_bar * k as f64;
        let mut covered = 0.0;
        let mut term = k as f64;
        let mut rounds = 0;
        while covered < n as f64 {
            covered += term;
            term *= ratio;
            rounds += 1;
        }
        rounds
    }

    #[test]
    fn seed_round_covers_small_network() {
        let r = consensus_rounds(3, 3, 1.0).unwrap();
        assert_eq!(r.rounds, 1);
        assert_eq!(r.branch, RoundBranch::OmegaKGreaterOne);
    }

    #[test]
    fn unit_omega_k_uses_ceiling() {
        let r = consensus_rounds(100, 2, 0.5).unwrap();
        assert_eq!(r.rounds, 50);
        assert_eq!(r.branch, RoundBranch::OmegaKEqualsOne);
        assert_eq!(consensus_rounds(101, 2, 0.5).unwrap().rounds, 51);
    }

    #[test]
    fn table_scale_rounds() {
        assert_eq!(rounds_by_counting(4000, 3, 0.8), 9);
        assert_eq!(consensus_rounds(4000, 3, 0.8).unwrap().rounds, 9);
        assert_eq!(consensus_rounds(4000, 3, 0.8_f32).unwrap().rounds, 9);
    }

    #[test]
    fn sub_unit_omega_k_rejected() {
        assert!(matches!(
            consensus_rounds(100, 2, 0.4),
            Err(Error::CoverageUnreachable { .. })
        ));
    }

    #[test]
    fn table_validation_bound() {
        let v = validation_time_bound(&table());
        assert!((v - 0.45).abs() < 1e-12, "{v}");
    }

    #[test]
    fn table_communication_bound() {
        let c = communication_time_bound(&table());
        assert!((c - 0.864).abs() < 1e-12, "{c}");
    }

    #[test]
    fn communication_on_unit_branch_uses_ceiling_factor() {
        let p = table()
            .with_raw(|r| {
                r.n_miners = 100;
                r.k_adjacent = 2;
                r.omega_bar = 0.5;
            })
            .unwrap();
        let per = communication_per_round(&p);
        assert_eq!(communication_time_bound(&p), 50.0 * per);
        assert_eq!(validation_time_bound(&p), 50.0 * validation_per_round(&p));
    }

    #[test]
    fn doubling_tau_halves_validation_factor() {
        let p = table();
        let q = p.with_tau(2.0).unwrap();
        assert_eq!(validation_per_round(&q), validation_per_round(&p) / 2.0);
    }

    #[test]
    fn unconstrained_limit_leaves_monitoring_only() {
        let p = table()
            .with_raw(|r| {
                r.cloud_compute = f64::INFINITY;
                r.bandwidth_w = f64::INFINITY;
            })
            .unwrap();
        let a = min_average_aobi(&p);
        assert_eq!(a.validation_term, 0.0);
        assert_eq!(a.communication_term, 0.0);
        assert_eq!(a.total, 310.0);
    }

    #[test]
    fn table_total() {
        let a = min_average_aobi(&table());
        assert!((a.total - 311.314).abs() < 1e-9, "{}", a.total);
        assert_eq!(
            a.total,
            a.monitoring_term + a.validation_term + a.communication_term
        );
        assert_eq!(a.rounds.rounds, 9);
    }

    #[test]
    fn table_condition_value() {
        let m = monotonicity_condition(&table());
        let expected = 100.0 * (1.0_f64 / 12.0).sqrt();
        assert!((m.condition_value - expected).abs() < 1e-9);
        assert!((m.condition_value - 28.87).abs() < 5e-3);
        assert!(!m.monotone_increasing);
        // τ* = √(b/a) lies inside [0.05, 5] for the table values.
        let (lo, hi) = table().tau_range();
        assert!(m.tau_star > lo && m.tau_star < hi);
        assert_eq!(m.tau_star, m.tau_star_feasible);
    }

    #[test]
    fn large_compute_makes_curve_monotone() {
        let p = table().with_raw(|r| r.cloud_compute *= 1.0e6).unwrap();
        let m = monotonicity_condition(&p);
        assert!((m.condition_value - 0.02887).abs() < 1e-4);
        assert!(m.monotone_increasing);
        assert_eq!(m.tau_star_feasible, p.tau_range().0);
    }

    #[test]
    fn condition_invariant_under_joint_compute_bandwidth_scaling() {
        let p = table();
        let q = p
            .with_raw(|r| {
                r.cloud_compute *= 7.0;
                r.bandwidth_w *= 7.0;
            })
            .unwrap();
        let (a, b) = (monotonicity_condition(&p), monotonicity_condition(&q));
        assert!((a.condition_value - b.condition_value).abs() < 1e-9);
    }

    #[test]
    fn singleton_sweep_matches_single_call() {
        let p = table();
        let s = aobi_tau_sweep(&p, &[2.5]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].1, min_average_aobi(&p.with_tau(2.5).unwrap()));
    }

    #[test]
    fn sweep_rejects_out_of_range_point() {
        assert!(aobi_tau_sweep(&table(), &[1.0, 6.0]).is_err());
    }

    #[test]
    fn monotone_regime_sweep_increases() {
        let p = table().with_raw(|r| r.cloud_compute *= 1.0e6).unwrap();
        let grid: Vec<f64> = (1..=10).map(|j| 0.5 * j as f64).collect();
        let s = aobi_tau_sweep(&p, &grid).unwrap();
        assert!(s.windows(2).all(|w| w[0].1.total < w[1].1.total));
    }

    #[test]
    fn interior_minimiser_regime_is_u_shaped() {
        let p = table();
        let grid = crate::scalar::linspace(0.05, 5.0, 2001);
        let s = aobi_tau_sweep(&p, &grid).unwrap();
        let (argmin, _) = s
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .1.total.partial_cmp(&b.1 .1.total).unwrap())
            .unwrap();
        let tau_star = monotonicity_condition(&p).tau_star;
        assert!((grid[argmin] - tau_star).abs() <= grid[1] - grid[0]);
        assert!(s[0].1.total > s[argmin].1.total);
        assert!(s[2000].1.total > s[argmin].1.total);
    }
}
