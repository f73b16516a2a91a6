//! Two-population forwarding game between block propagators (share `x`
//! forwarding) and block receivers (share `y` forwarding).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{rk4_step, Autonomous};
use crate::params::PayoffParams;
use crate::scalar::Real;

pub const DEFAULT_GAME_STEP: f64 = 0.05;
pub const DEFAULT_STEPS_PER_EPOCH: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct GameState<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> GameState<T> {
    pub fn new(x: T, y: T) -> Result<Self> {
        for (field, v) in [("x", x), ("y", y)] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::invalid(field, v.as_f64(), "must lie in [0, 1]"));
            }
        }
        Ok(Self { x, y })
    }

    /// ∞-norm distance to another state.
    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

/// Expected payoffs of each strategy given the opposing population's mix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectedRevenues<T> {
    /// Propagator forwards.
    pub g1y: T,
    /// Propagator withholds.
    pub g1n: T,
    /// Propagator population average.
    pub g1: T,
    /// Receiver forwards.
    pub g2y: T,
    /// Receiver withholds.
    pub g2n: T,
    /// Receiver population average.
    pub g2: T,
}

pub fn expected_revenues<T: Real>(
    state: &GameState<T>,
    pay: &PayoffParams<T>,
) -> ExpectedRevenues<T> {
    let GameState { x, y } = *state;
    let one = T::one();
    let di = pay.extra_reward();
    let dp = pay.delta_p();
    let du = pay.delta_u();
    let er = pay.punishment_cost();
    let g1y = y * di + du + dp - (one - y) * er;
    let g1n = (one - y) * dp;
    let g2y = x * (di + du + dp);
    let g2n = x * dp;
    ExpectedRevenues {
        g1y,
        g1n,
        g1: x * g1y + (one - x) * g1n,
        g2y,
        g2n,
        g2: y * g2y + (one - y) * g2n,
    }
}

/// Advantage of forwarding for a propagator, `g1y − g1n`.
pub fn propagator_advantage<T: Real>(y: T, pay: &PayoffParams<T>) -> T {
    y * (pay.extra_reward() + pay.delta_p() + pay.punishment_cost()) + pay.delta_u()
        - pay.punishment_cost()
}

/// `(dx/dt, dy/dt)`.
pub fn replicator_rhs<T: Real>(state: &GameState<T>, pay: &PayoffParams<T>) -> (T, T) {
    let GameState { x, y } = *state;
    let one = T::one();
    let dx = x * (one - x) * propagator_advantage(y, pay);
    let dy = x * y * (one - y) * (pay.extra_reward() + pay.delta_u());
    (dx, dy)
}

/// Closed-form Jacobian of [`replicator_rhs`], row-major.
pub fn jacobian<T: Real>(state: &GameState<T>, pay: &PayoffParams<T>) -> [[T; 2]; 2] {
    let GameState { x, y } = *state;
    let one = T::one();
    let two = T::lit(2.0);
    let gain = pay.extra_reward() + pay.delta_p() + pay.punishment_cost();
    let receiver = pay.extra_reward() + pay.delta_u();
    [
        [
            (one - two * x) * propagator_advantage(y, pay),
            x * (one - x) * gain,
        ],
        [y * (one - y) * receiver, x * receiver * (one - two * y)],
    ]
}

/// The `y` level at which propagators are indifferent,
/// `(εR − ΔU) / (ΔI + ΔP + εR)`.
pub fn receiver_threshold<T: Real>(pay: &PayoffParams<T>) -> Result<T> {
    let denom = pay.extra_reward() + pay.delta_p() + pay.punishment_cost();
    if denom == T::zero() {
        return Err(Error::ZeroThresholdDenominator);
    }
    Ok((pay.punishment_cost() - pay.delta_u()) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stability {
    #[serde(rename = "ESS")]
    Ess,
    Saddle,
    Unstable,
    Degenerate,
}

impl Stability {
    /// det > 0 and tr < 0 is an ESS. A zero determinant is reported as a
    /// saddle unless the trace vanishes too.
    pub fn from_det_tr<T: Real>(det: T, tr: T) -> Self {
        let zero = T::zero();
        if det > zero {
            if tr < zero {
                Stability::Ess
            } else if tr > zero {
                Stability::Unstable
            } else {
                Stability::Degenerate
            }
        } else if det < zero {
            Stability::Saddle
        } else if tr == zero {
            Stability::Degenerate
        } else {
            Stability::Saddle
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct EquilibriumReport<T> {
    pub point: GameState<T>,
    pub det: T,
    pub tr: T,
    pub class: Stability,
}

/// Reports for the pure-strategy equilibria `(0,0)`, `(1,0)` and `(1,1)`.
///
/// The determinant and trace use the published closed forms. At `(1,0)`
/// these differ from the Jacobian evaluated there (see [`jacobian`]), which
/// gives `det = (εR − ΔU)(ΔI + ΔU)`.
pub fn classify_equilibria<T: Real>(pay: &PayoffParams<T>) -> Vec<EquilibriumReport<T>> {
    let zero = T::zero();
    let one = T::one();
    let di = pay.extra_reward();
    let dp = pay.delta_p();
    let du = pay.delta_u();
    let er = pay.punishment_cost();
    let receiver = di + du;
    let points = [
        (GameState { x: zero, y: zero }, zero, du - er),
        (GameState { x: one, y: zero }, zero, di + dp + du),
        (
            GameState { x: one, y: one },
            receiver * (di + dp + du),
            -T::lit(2.0) * receiver - dp,
        ),
    ];
    points
        .into_iter()
        .map(|(point, det, tr)| EquilibriumReport {
            point,
            det,
            tr,
            class: Stability::from_det_tr(det, tr),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct GameOptions<T> {
    /// RK4 step in time units.
    pub step: T,
    /// Steps per recorded epoch; one epoch is `step * steps_per_epoch`.
    pub steps_per_epoch: usize,
    pub max_epochs: usize,
    /// Convergence when `‖(dx, dy)‖∞ < tol` at an epoch boundary.
    pub tol: T,
}

impl<T: Real> GameOptions<T> {
    pub fn new(max_epochs: usize, tol: T) -> Self {
        Self {
            step: T::lit(DEFAULT_GAME_STEP),
            steps_per_epoch: DEFAULT_STEPS_PER_EPOCH,
            max_epochs,
            tol,
        }
    }

    /// Runs for exactly `max_epochs`, never stopping early.
    pub fn fixed_length(epochs: usize) -> Self {
        Self::new(epochs, T::zero())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameSolution<T> {
    /// State at every epoch boundary, starting with the initial state.
    pub trajectory: Vec<GameState<T>>,
    pub terminal: GameState<T>,
    pub converged: bool,
}

impl<T: Real> GameSolution<T> {
    pub fn epochs(&self) -> usize {
        self.trajectory.len() - 1
    }

    /// First epoch at which `y` reaches `level`.
    pub fn first_epoch_y_at_least(&self, level: T) -> Option<usize> {
        self.trajectory.iter().position(|s| s.y >= level)
    }

    /// `y` at `epoch`, holding the terminal value beyond the trajectory.
    pub fn y_at(&self, epoch: usize) -> T {
        self.trajectory.get(epoch).unwrap_or(&self.terminal).y
    }
}

struct Replicator<'a, T: Real>(&'a PayoffParams<T>);

impl<T: Real> Autonomous<T, 2> for Replicator<'_, T> {
    fn derivative(&self, s: &[T; 2]) -> [T; 2] {
        let (dx, dy) = replicator_rhs(&GameState { x: s[0], y: s[1] }, self.0);
        [dx, dy]
    }
}

/// Integrates the replicator dynamics from `(x0, y0)` with the default step.
pub fn solve_game<T: Real>(
    x0: T,
    y0: T,
    pay: &PayoffParams<T>,
    max_epochs: usize,
    tol: T,
) -> Result<GameSolution<T>> {
    solve_game_with(x0, y0, pay, &GameOptions::new(max_epochs, tol))
}

pub fn solve_game_with<T: Real>(
    x0: T,
    y0: T,
    pay: &PayoffParams<T>,
    opts: &GameOptions<T>,
) -> Result<GameSolution<T>> {
    let start = GameState::new(x0, y0)?;
    if !(opts.step > T::zero()) || !opts.step.is_finite() {
        return Err(Error::invalid(
            "step",
            opts.step.as_f64(),
            "must be positive and finite",
        ));
    }
    if opts.steps_per_epoch == 0 {
        return Err(Error::invalid("steps_per_epoch", 0.0, "must be at least 1"));
    }
    let system = Replicator(pay);
    let settled = |s: &[T; 2]| {
        let d = system.derivative(s);
        d[0].abs().max(d[1].abs()) < opts.tol
    };
    let mut y = [start.x, start.y];
    let mut trajectory = Vec::with_capacity(opts.max_epochs.min(1 << 16) + 1);
    trajectory.push(start);
    let mut converged = settled(&y);
    let mut epoch = 0;
    while !converged && epoch < opts.max_epochs {
        for _ in 0..opts.steps_per_epoch {
            y = rk4_step(&system, &y, opts.step);
        }
        epoch += 1;
        trajectory.push(GameState { x: y[0], y: y[1] });
        converged = settled(&y);
    }
    Ok(GameSolution {
        terminal: *trajectory.last().expect("non-empty"),
        trajectory,
        converged,
    })
}

/// One [`solve_game_with`] per start, returned in input order.
pub fn phase_portrait<T: Real>(
    pay: &PayoffParams<T>,
    starts: &[GameState<T>],
    opts: &GameOptions<T>,
) -> Result<Vec<GameSolution<T>>> {
    starts
        .par_iter()
        .map(|s| solve_game_with(s.x, s.y, pay, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fig3a() -> PayoffParams<f64> {
        PayoffParams::from_benefits(0.3, 0.5, 0.2, 0.1, 1.0).unwrap()
    }

    fn st(x: f64, y: f64) -> GameState<f64> {
        GameState::new(x, y).unwrap()
    }

    #[test]
    fn state_bounds() {
        assert!(GameState::new(1.2, 0.5).is_err());
        assert!(GameState::new(0.5, -0.1).is_err());
        assert!(GameState::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn receivers_earn_nothing_without_propagators() {
        let r = expected_revenues(&st(0.0, 0.7), &fig3a());
        assert_eq!((r.g2y, r.g2n, r.g2), (0.0, 0.0, 0.0));
    }

    #[test]
    fn no_punishment_when_all_receivers_forward() {
        let r = expected_revenues(&st(0.4, 1.0), &fig3a());
        assert!((r.g1y - 1.0).abs() < 1e-15);
    }

    #[test]
    fn revenue_example() {
        let r = expected_revenues(&st(0.5, 0.5), &fig3a());
        assert!((r.g1y - 0.80).abs() < 1e-12);
        assert!((r.g1n - 0.25).abs() < 1e-12);
        assert!((r.g1 - 0.525).abs() < 1e-12);
        assert!((r.g2y - 0.5).abs() < 1e-12);
        assert!((r.g2n - 0.25).abs() < 1e-12);
        assert!((r.g2 - 0.375).abs() < 1e-12);
    }

    #[test]
    fn rhs_example() {
        let (dx, dy) = replicator_rhs(&st(0.5, 0.5), &fig3a());
        assert!((dx - 0.1375).abs() < 1e-12);
        assert!((dy - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn rhs_matches_payoff_differences() {
        let pay = fig3a();
        let s = st(0.3, 0.6);
        let r = expected_revenues(&s, &pay);
        let (dx, dy) = replicator_rhs(&s, &pay);
        assert!((dx - s.x * (r.g1y - r.g1)).abs() < 1e-15);
        assert!((dy - s.y * (r.g2y - r.g2)).abs() < 1e-15);
    }

    #[test]
    fn receivers_frozen_when_benefits_cancel() {
        let pay = PayoffParams::from_benefits(0.2, 0.5, -0.2, 0.1, 1.0).unwrap();
        for (x, y) in [(0.1, 0.2), (0.5, 0.5), (0.9, 0.7)] {
            assert_eq!(replicator_rhs(&st(x, y), &pay).1, 0.0);
        }
    }

    #[test]
    fn pure_corners_are_fixed() {
        let pay = fig3a();
        for (x, y) in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)] {
            assert_eq!(replicator_rhs(&st(x, y), &pay), (0.0, 0.0));
        }
        for y in [0.0, 0.3, 0.8, 1.0] {
            assert_eq!(replicator_rhs(&st(0.0, y), &pay), (0.0, 0.0));
        }
    }

    #[test]
    fn threshold_line_freezes_propagators() {
        let pay = PayoffParams::from_benefits(0.3, 0.5, 0.05, 0.2, 1.0).unwrap();
        let y = receiver_threshold(&pay).unwrap();
        assert!(y > 0.0 && y < 1.0);
        for x in [0.2, 0.5, 0.8] {
            assert!(replicator_rhs(&st(x, y), &pay).0.abs() < 1e-16);
        }
    }

    #[test]
    fn threshold_examples() {
        let pay = PayoffParams::from_benefits(0.3, 0.5, 0.1, 0.1, 1.0).unwrap();
        assert_eq!(receiver_threshold(&pay).unwrap(), 0.0);
        let t = receiver_threshold(&fig3a()).unwrap();
        assert!((t + 0.1 / 0.9).abs() < 1e-15);
        let neg = PayoffParams::from_benefits(0.1, 0.2, -0.5, 0.1, 1.0).unwrap();
        assert!(receiver_threshold(&neg).unwrap() > 1.0);
    }

    #[test]
    fn threshold_denominator_positive_for_valid_payoffs() {
        let pay = PayoffParams::<f64>::from_benefits(0.0, 1e-300, 0.1, 0.1, 0.0).unwrap();
        assert!(receiver_threshold(&pay).unwrap().is_finite());
    }

    #[test]
    fn classification_rule() {
        assert_eq!(Stability::from_det_tr(1.0, -1.0), Stability::Ess);
        assert_eq!(Stability::from_det_tr(1.0, 1.0), Stability::Unstable);
        assert_eq!(Stability::from_det_tr(1.0, 0.0), Stability::Degenerate);
        assert_eq!(Stability::from_det_tr(-1.0, -1.0), Stability::Saddle);
        assert_eq!(Stability::from_det_tr(0.0, 0.3), Stability::Saddle);
        assert_eq!(Stability::from_det_tr(0.0, 0.0), Stability::Degenerate);
    }

    #[test]
    fn fig3a_equilibria() {
        let reps = classify_equilibria(&fig3a());
        assert_eq!(reps.len(), 3);
        assert_eq!(reps[0].class, Stability::Saddle);
        assert_eq!(reps[1].class, Stability::Saddle);
        assert!((reps[2].det - 0.5).abs() < 1e-12);
        assert!((reps[2].tr + 1.5).abs() < 1e-12);
        assert_eq!(reps[2].class, Stability::Ess);
    }

    #[test]
    fn negative_receiver_benefit_is_not_ess() {
        let pay = PayoffParams::from_benefits(0.1, 0.5, -0.3, 0.1, 1.0).unwrap();
        let reps = classify_equilibria(&pay);
        assert!(reps[2].det <= 0.0);
        assert_ne!(reps[2].class, Stability::Ess);
    }

    fn finite_difference(s: &GameState<f64>, pay: &PayoffParams<f64>) -> [[f64; 2]; 2] {
        let h = 1e-6;
        let f = |x: f64, y: f64| {
            let (a, b) = replicator_rhs(&GameState { x, y }, pay);
            [a, b]
        };
        let fx = (f(s.x + h, s.y), f(s.x - h, s.y));
        let fy = (f(s.x, s.y + h), f(s.x, s.y - h));
        [
            [
                (fx.0[0] - fx.1[0]) / (2.0 * h),
                (fy.0[0] - fy.1[0]) / (2.0 * h),
            ],
            [
                (fx.0[1] - fx.1[1]) / (2.0 * h),
                (fy.0[1] - fy.1[1]) / (2.0 * h),
            ],
        ]
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let pay = PayoffParams::from_benefits(
                rng.random_range(0.0..1.0),
                rng.random_range(0.05..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.05..1.0),
                rng.random_range(0.0..1.0),
            )
            .unwrap();
            let s = st(rng.random_range(0.05..0.95), rng.random_range(0.05..0.95));
            let exact = jacobian(&s, &pay);
            let approx = finite_difference(&s, &pay);
            for r in 0..2 {
                for c in 0..2 {
                    let scale = exact[r][c].abs().max(1e-3);
                    assert!((exact[r][c] - approx[r][c]).abs() / scale < 1e-6);
                }
            }
        }
    }

    #[test]
    fn jacobian_at_unit_corner_agrees_with_closed_form() {
        let pay = fig3a();
        let j = jacobian(&st(1.0, 1.0), &pay);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let rep = classify_equilibria(&pay)[2];
        assert!((det - rep.det).abs() < 1e-12);
        assert!((j[0][0] + j[1][1] - rep.tr).abs() < 1e-12);
    }

    #[test]
    fn boundary_start_is_fixed_immediately() {
        let sol = solve_game(1.0, 1.0, &fig3a(), 100, 1e-9).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.epochs(), 0);
        assert_eq!(sol.terminal, st(1.0, 1.0));
    }

    #[test]
    fn fig3a_converges_to_full_forwarding() {
        let sol = solve_game(0.2, 0.2, &fig3a(), 10_000, 1e-9).unwrap();
        assert!(sol.converged);
        assert!(sol.terminal.distance(&st(1.0, 1.0)) < 1e-3);
    }

    #[test]
    fn non_convergence_is_flagged() {
        let sol = solve_game(0.2, 0.2, &fig3a(), 2, 1e-12).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.trajectory.len(), 3);
    }

    #[test]
    fn step_halving_agrees() {
        let pay = fig3a();
        let coarse = solve_game_with(0.2, 0.2, &pay, &GameOptions::fixed_length(15)).unwrap();
        let fine = solve_game_with(
            0.2,
            0.2,
            &pay,
            &GameOptions {
                step: 0.025,
                steps_per_epoch: 40,
                ..GameOptions::fixed_length(15)
            },
        )
        .unwrap();
        for (a, b) in coarse.trajectory.iter().zip(&fine.trajectory) {
            assert!(a.distance(b) < 1e-6);
        }
    }

    #[test]
    fn portrait_matches_individual_solves() {
        let pay = fig3a();
        let opts = GameOptions::new(200, 1e-8);
        let starts = [st(0.1, 0.9), st(0.5, 0.5), st(0.9, 0.1)];
        let all = phase_portrait(&pay, &starts, &opts).unwrap();
        for (s, sol) in starts.iter().zip(&all) {
            assert_eq!(*sol, solve_game_with(s.x, s.y, &pay, &opts).unwrap());
        }
    }

    #[test]
    fn propagators_back_off_when_receivers_lose() {
        // ΔI + ΔU < 0 with a threshold inside (0, 1)
        let pay = PayoffParams::from_benefits(0.1, 0.6, -0.3, 0.1, 0.5).unwrap();
        let t = receiver_threshold(&pay).unwrap();
        assert!(t > 0.0 && t < 1.0);
        let sol = solve_game(0.5, t + 0.3, &pay, 2000, 1e-10).unwrap();
        let peak_x = sol.trajectory.iter().map(|s| s.x).fold(0.0, f64::max);
        assert!(peak_x > 0.5);
        assert!(sol.terminal.x < 0.5);
    }

    #[test]
    fn larger_extra_reward_reaches_full_forwarding_sooner() {
        let epoch = |di: f64| {
            let pay = PayoffParams::from_benefits(di, 0.5, 0.2, 0.1, 1.0).unwrap();
            solve_game_with(0.2, 0.2, &pay, &GameOptions::fixed_length(400))
                .unwrap()
                .first_epoch_y_at_least(0.99)
                .unwrap()
        };
        let seq: Vec<usize> = [0.0, 0.1, 0.3, 0.6, 1.0].into_iter().map(epoch).collect();
        assert!(seq.windows(2).all(|w| w[1] <= w[0]), "{seq:?}");
    }

    #[test]
    fn single_precision_solve() {
        let pay = PayoffParams::<f32>::from_benefits(0.3, 0.5, 0.2, 0.1, 1.0).unwrap();
        let sol = solve_game(0.2f32, 0.2, &pay, 1000, 1e-5).unwrap();
        assert!(sol.terminal.distance(&GameState { x: 1.0, y: 1.0 }) < 1e-3);
    }

    proptest! {
        #[test]
        fn trajectories_stay_in_unit_square(
            x0 in 0.0..=1.0f64, y0 in 0.0..=1.0f64,
            di in 0.0..2.0f64, dp in 0.01..2.0f64, du in -2.0..2.0f64,
            eps in 0.01..1.0f64, risk in 0.0..2.0f64,
        ) {
            let pay = PayoffParams::from_benefits(di, dp, du, eps, risk).unwrap();
            let sol = solve_game_with(x0, y0, &pay, &GameOptions::fixed_length(60)).unwrap();
            for s in &sol.trajectory {
                prop_assert!(s.x >= -1e-9 && s.x <= 1.0 + 1e-9);
                prop_assert!(s.y >= -1e-9 && s.y <= 1.0 + 1e-9);
            }
        }

        #[test]
        fn ess_basin(
            x0 in 0.01..0.99f64, y0 in 0.01..0.99f64,
            di in 0.0..1.0f64, dp in 0.05..1.0f64, excess in 0.01..1.0f64, er in 0.0..0.5f64,
        ) {
            // ΔU > εR makes the (1,1) corner globally attracting in the interior
            let pay = PayoffParams::from_benefits(di, dp, er + excess, 1.0, er).unwrap();
            let sol = solve_game(x0, y0, &pay, 20_000, 1e-10).unwrap();
            let corner = GameState { x: 1.0, y: 1.0 };
            prop_assert!(sol.terminal.distance(&corner) < 1e-3);
        }

        #[test]
        fn unit_corner_is_ess_iff_receivers_gain(
            di in 0.0..1.0f64, dp in 0.01..1.0f64, du in -1.0..1.0f64,
        ) {
            let pay = PayoffParams::from_benefits(di, dp, du, 0.1, 1.0).unwrap();
            let reps = classify_equilibria(&pay);
            prop_assert_eq!(reps[2].class == Stability::Ess, di + du > 0.0);
        }
    }
}
