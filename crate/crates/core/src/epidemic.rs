//! Mean-field ignorant/spreader/unspreader/refuser/evildoer dynamics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{rk4_step, Autonomous};
use crate::params::PropagationProbabilities;
use crate::scalar::Real;

/// How far a raw component may leave `[0, 1]` before the step is rejected.
pub const DENSITY_BAND_SLACK: f64 = 1.0e-3;

/// Lower end of the steady-state bisection bracket; keeps the search away
/// from the trivial root at zero.
pub const STEADY_STATE_BRACKET_LO: f64 = 1.0e-9;

pub const COMPONENT_NAMES: [&str; 5] = ["i", "s", "u", "r", "e"];

/// Proportions of ignorants, spreaders, unspreaders, refusers and evildoers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct StateDensities<T> {
    pub i: T,
    pub s: T,
    pub u: T,
    pub r: T,
    pub e: T,
}

impl<T: Real> StateDensities<T> {
    pub fn new(i: T, s: T, u: T, r: T, e: T) -> Self {
        Self { i, s, u, r, e }
    }

    pub fn to_array(self) -> [T; 5] {
        [self.i, self.s, self.u, self.r, self.e]
    }

    pub fn from_array(a: [T; 5]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4])
    }

    pub fn sum(&self) -> T {
        self.i + self.s + self.u + self.r + self.e
    }

    fn clamped(self) -> Self {
        Self::from_array(self.to_array().map(|c| c.max(T::zero()).min(T::one())))
    }
}

/// One spreader among `n` miners, everyone else ignorant.
pub fn initial_densities<T: Real>(n: u64) -> Result<StateDensities<T>> {
    if n < 2 {
        return Err(Error::invalid(
            "n_miners",
            n as f64,
            "need at least 2 miners so there is someone to inform",
        ));
    }
    let nf = T::from_count(n);
    Ok(StateDensities::new(
        T::from_count(n - 1) / nf,
        T::one() / nf,
        T::zero(),
        T::zero(),
        T::zero(),
    ))
}

/// Right-hand side of the mean-field equations, in `(i, s, u, r, e)` order.
pub fn ode_rhs<T: Real>(
    state: &StateDensities<T>,
    probs: &PropagationProbabilities<T>,
    k: u64,
) -> [T; 5] {
    MeanField::new(*probs, k).derivative(&state.to_array())
}

/// The mean-field system as an [`Autonomous`] ODE.
#[derive(Debug, Clone, Copy)]
pub struct MeanField<T: Real> {
    probs: PropagationProbabilities<T>,
    k: T,
}

impl<T: Real> MeanField<T> {
    pub fn new(probs: PropagationProbabilities<T>, k: u64) -> Self {
        Self {
            probs,
            k: T::from_count(k),
        }
    }
}

impl<T: Real> Autonomous<T, 5> for MeanField<T> {
    fn derivative(&self, y: &[T; 5]) -> [T; 5] {
        let [i, s, u, _r, e] = *y;
        let p = &self.probs;
        let one = T::one();
        let contact = self.k * (one - p.p_e()) * s * i;
        let spreader_exit = p.p_i() * (one + self.k * s) * s;
        [
            p.p_r() * e - p.p_e() * i - contact,
            p.p_f() * contact - spreader_exit,
            (one - p.p_f()) * contact - p.p_i() * u,
            spreader_exit + p.p_i() * u,
            p.p_e() * i - p.p_r() * e,
        ]
    }
}

/// Densities on a uniform time grid. Stored states are clamped to `[0, 1]`;
/// `min_raw_component` records the most negative unclamped value seen.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpidemicTrajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<StateDensities<T>>,
    pub probs: PropagationProbabilities<T>,
    pub k: u64,
    pub min_raw_component: T,
}

impl<T: Real> EpidemicTrajectory<T> {
    pub fn last(&self) -> &StateDensities<T> {
        self.states.last().expect("trajectory holds at least t = 0")
    }

    /// Maximum of one component over the trajectory.
    pub fn peak(&self, pick: impl Fn(&StateDensities<T>) -> T) -> T {
        self.states.iter().map(pick).fold(T::neg_infinity(), T::max)
    }
}

/// Integrates from `start` over `[0, horizon]` recording every step.
pub fn integrate<T: Real>(
    start: StateDensities<T>,
    probs: &PropagationProbabilities<T>,
    k: u64,
    horizon: T,
    step: T,
) -> Result<EpidemicTrajectory<T>> {
    integrate_sampled(start, probs, k, horizon, step, 1)
}

/// As [`integrate`], but keeps only every `record_every`-th grid point
/// (plus t = 0). The number of steps is `round(horizon / step)`.
pub fn integrate_sampled<T: Real>(
    start: StateDensities<T>,
    probs: &PropagationProbabilities<T>,
    k: u64,
    horizon: T,
    step: T,
    record_every: usize,
) -> Result<EpidemicTrajectory<T>> {
    if !(step > T::zero()) || !step.is_finite() {
        return Err(Error::invalid(
            "step",
            step.as_f64(),
            "must be positive and finite",
        ));
    }
    if !(horizon >= step) || !horizon.is_finite() {
        return Err(Error::invalid(
            "horizon",
            horizon.as_f64(),
            "must be finite and at least one step",
        ));
    }
    let record_every = record_every.max(1);
    let steps = (horizon / step).round().to_usize().unwrap_or(0).max(1);
    let system = MeanField::new(*probs, k);
    let lo = -T::lit(DENSITY_BAND_SLACK);
    let hi = T::one() + T::lit(DENSITY_BAND_SLACK);

    let mut y = start.to_array();
    let mut min_raw = y.iter().copied().fold(T::infinity(), T::min);
    let capacity = steps / record_every + 2;
    let mut times = Vec::with_capacity(capacity);
    let mut states = Vec::with_capacity(capacity);
    times.push(T::zero());
    states.push(start.clamped());

    for n in 1..=steps {
        y = rk4_step(&system, &y, step);
        let t = step * T::from_count(n as u64);
        for (j, &c) in y.iter().enumerate() {
            if !(c >= lo && c <= hi) {
                return Err(Error::StepTooLarge {
                    step: step.as_f64(),
                    time: t.as_f64(),
                    component: COMPONENT_NAMES[j],
                    value: c.as_f64(),
                });
            }
            min_raw = min_raw.min(c);
        }
        if n % record_every == 0 || n == steps {
            times.push(t);
            states.push(StateDensities::from_array(y).clamped());
        }
    }

    Ok(EpidemicTrajectory {
        times,
        states,
        probs: *probs,
        k,
        min_raw_component: min_raw,
    })
}

/// Terminal consensus level from the transcendental equation
/// `r = 1 − e^{−σ r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct SteadyState<T> {
    pub sigma: T,
    pub r_infinity: T,
    /// False when σ ≤ 1 and zero is the only root.
    pub nontrivial: bool,
}

/// `σ = (1 − P_e) P_f / P_i + 1`.
pub fn sigma<T: Real>(probs: &PropagationProbabilities<T>) -> T {
    (T::one() - probs.p_e()) * probs.p_f() / probs.p_i() + T::one()
}

pub fn steady_state<T: Real>(probs: &PropagationProbabilities<T>) -> SteadyState<T> {
    let sigma = sigma(probs);
    let r_infinity = consensus_root(sigma);
    SteadyState {
        sigma,
        r_infinity,
        nontrivial: r_infinity > T::zero(),
    }
}

/// Nontrivial root of `x + e^{−σx} − 1` in (0, 1), or zero when σ ≤ 1.
///
/// The auxiliary function is convex, negative just right of zero and
/// positive at one whenever σ > 1, so bisection on
/// `[STEADY_STATE_BRACKET_LO, 1]` converges to the unique interior root.
pub fn consensus_root<T: Real>(sigma: T) -> T {
    if !(sigma > T::one()) {
        return T::zero();
    }
    let f = |x: T| x + (-sigma * x).exp_m1();
    let mut lo = T::lit(STEADY_STATE_BRACKET_LO);
    // σ within ~1e-9 of one puts the root below the default bracket.
    while f(lo) >= T::zero() {
        lo = lo * T::lit(0.5);
        if lo < T::min_positive_value() {
            return T::zero();
        }
    }
    let mut hi = T::one();
    for _ in 0..256 {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbabilityAxis {
    /// P_f
    Forwarding,
    /// P_e
    Evil,
    /// P_i
    Immunity,
}

impl ProbabilityAxis {
    pub fn label(self) -> &'static str {
        match self {
            ProbabilityAxis::Forwarding => "p_f",
            ProbabilityAxis::Evil => "p_e",
            ProbabilityAxis::Immunity => "p_i",
        }
    }

    fn remaining(a: Self, b: Self) -> Option<Self> {
        use ProbabilityAxis::*;
        [Forwarding, Evil, Immunity]
            .into_iter()
            .find(|&c| c != a && c != b)
            .filter(|_| a != b)
    }
}

/// r(∞) over a grid of two probabilities with the third held fixed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsensusSurface<T: Real> {
    pub row_axis: ProbabilityAxis,
    pub row_values: Vec<T>,
    pub col_axis: ProbabilityAxis,
    pub col_values: Vec<T>,
    pub fixed_axis: ProbabilityAxis,
    pub fixed_value: T,
    /// Row-major, `row_values.len() × col_values.len()`.
    pub values: Vec<T>,
}

impl<T: Real> ConsensusSurface<T> {
    pub fn get(&self, row: usize, col: usize) -> T {
        self.values[row * self.col_values.len() + col]
    }

    pub fn row(&self, row: usize) -> &[T] {
        let w = self.col_values.len();
        &self.values[row * w..(row + 1) * w]
    }
}

pub fn consensus_level_surface<T: Real>(
    row_axis: ProbabilityAxis,
    row_values: &[T],
    col_axis: ProbabilityAxis,
    col_values: &[T],
    fixed_value: T,
) -> Result<ConsensusSurface<T>> {
    let fixed_axis = ProbabilityAxis::remaining(row_axis, col_axis).ok_or_else(|| {
        Error::Config(format!(
            "surface axes must differ, got {} twice",
            row_axis.label()
        ))
    })?;
    let cell = |rv: T, cv: T| -> Result<T> {
        let mut p = [T::zero(); 3];
        for (axis, v) in [(row_axis, rv), (col_axis, cv), (fixed_axis, fixed_value)] {
            p[axis as usize] = v;
        }
        let probs = PropagationProbabilities::new(p[0], p[1], T::zero(), p[2])?;
        Ok(steady_state(&probs).r_infinity)
    };
    let rows: Vec<Vec<T>> = row_values
        .par_iter()
        .map(|&rv| col_values.iter().map(|&cv| cell(rv, cv)).collect())
        .collect::<Result<_>>()?;
    Ok(ConsensusSurface {
        row_axis,
        row_values: row_values.to_vec(),
        col_axis,
        col_values: col_values.to_vec(),
        fixed_axis,
        fixed_value,
        values: rows.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn probs(pf: f64, pe: f64, pr: f64, pi: f64) -> PropagationProbabilities<f64> {
        PropagationProbabilities::new(pf, pe, pr, pi).unwrap()
    }

    #[test]
    fn initial_two_miners() {
        let s = initial_densities::<f64>(2).unwrap();
        assert_eq!(s.to_array(), [0.5, 0.5, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn initial_table_scale() {
        let s = initial_densities::<f64>(4000).unwrap();
        assert_eq!(s.i, 0.99975);
        assert_eq!(s.s, 0.00025);
        assert_eq!(s.sum(), 1.0);
    }

    #[test]
    fn initial_needs_two_miners() {
        assert!(initial_densities::<f64>(1).is_err());
    }

    #[test]
    fn rhs_without_spreaders() {
        let d = ode_rhs(
            &StateDensities::new(1.0, 0.0, 0.0, 0.0, 0.0),
            &probs(0.7, 0.2, 0.5, 0.4),
            3,
        );
        assert_eq!(d, [-0.2, 0.0, 0.0, 0.0, 0.2]);
    }

    #[test]
    fn rhs_spreader_growth_at_start() {
        let s0 = initial_densities::<f64>(4000).unwrap();
        let d = ode_rhs(&s0, &probs(0.5, 0.1, 0.3, 0.2), 3);
        let expected = 3.0 * 0.5 * 0.9 * 0.00025 * 0.99975 - 0.2 * (1.0 + 0.00075) * 0.00025;
        assert!((d[1] - expected).abs() < 1e-18);
        assert!((d[1] - 2.8738e-4).abs() < 5e-8);
    }

    proptest! {
        #[test]
        fn rhs_sums_to_zero(
            a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64, d in 0.0..1.0f64, e in 0.0..1.0f64,
            pf in 0.0..=1.0f64, pe in 0.0..=1.0f64, pr in 0.0..=1.0f64, pi in 0.01..=1.0f64,
            k in 1u64..8,
        ) {
            let total = a + b + c + d + e + 1e-12;
            let st = StateDensities::new(a / total, b / total, c / total, d / total, e / total);
            let dv = ode_rhs(&st, &probs(pf, pe, pr, pi), k);
            let sum: f64 = dv.iter().sum();
            prop_assert!(sum.abs() < 1e-12);
        }
    }

    #[test]
    fn zero_dynamics_keeps_state_constant() {
        let start = StateDensities::new(0.6, 0.0, 0.1, 0.3, 0.0);
        let traj = integrate(start, &probs(0.5, 0.0, 0.4, 0.2), 3, 5.0, 0.5).unwrap();
        assert_eq!(traj.states.len(), 11);
        // u decays into r at rate P_i, nothing else moves
        let last = traj.last();
        assert_eq!(last.i, 0.6);
        assert_eq!(last.s, 0.0);
        assert_eq!(last.e, 0.0);
        let fully_static = StateDensities::new(0.6, 0.0, 0.0, 0.4, 0.0);
        let t2 = integrate(fully_static, &probs(0.5, 0.0, 0.4, 0.2), 3, 5.0, 0.5).unwrap();
        assert!(t2.states.iter().all(|s| *s == fully_static));
    }

    #[test]
    fn trajectory_includes_origin_and_grid() {
        let s0 = initial_densities::<f64>(100).unwrap();
        let t = integrate(s0, &probs(0.5, 0.1, 0.3, 0.2), 3, 1.0, 0.25).unwrap();
        assert_eq!(t.times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(t.states[0], s0);
    }

    #[test]
    fn sampled_integration_thins_output() {
        let s0 = initial_densities::<f64>(100).unwrap();
        let p = probs(0.5, 0.1, 0.3, 0.2);
        let full = integrate(s0, &p, 3, 10.0, 0.01).unwrap();
        let thin = integrate_sampled(s0, &p, 3, 10.0, 0.01, 100).unwrap();
        assert_eq!(thin.states.len(), 11);
        assert_eq!(thin.last(), full.last());
        assert_eq!(thin.states[5], full.states[500]);
    }

    #[test]
    fn rejects_bad_step_and_horizon() {
        let s0 = initial_densities::<f64>(100).unwrap();
        let p = probs(0.5, 0.1, 0.3, 0.2);
        assert!(integrate(s0, &p, 3, 10.0, 0.0).is_err());
        assert!(integrate(s0, &p, 3, 0.001, 0.01).is_err());
    }

    #[test]
    fn oversized_step_rejected() {
        let s0 = StateDensities::new(0.5, 0.5, 0.0, 0.0, 0.0);
        let err = integrate(s0, &probs(1.0, 0.0, 0.0, 1.0), 6, 50.0, 5.0).unwrap_err();
        assert!(matches!(err, Error::StepTooLarge { .. }), "{err}");
        assert!(err.to_string().contains("smaller step"));
    }

    #[test]
    fn step_halving_agrees() {
        let s0 = initial_densities::<f64>(4000).unwrap();
        let p = probs(0.7, 0.1, 0.3, 0.2);
        let a = integrate_sampled(s0, &p, 3, 200.0, 0.01, 1000).unwrap();
        let b = integrate_sampled(s0, &p, 3, 200.0, 0.005, 1000).unwrap();
        assert!((a.last().r - b.last().r).abs() < 1e-3);
    }

    #[test]
    fn faster_forwarding_more_refusers() {
        let s0 = initial_densities::<f64>(4000).unwrap();
        let run = |pf| {
            integrate_sampled(s0, &probs(pf, 0.1, 0.3, 0.2), 3, 200.0, 0.01, 1000)
                .unwrap()
                .last()
                .r
        };
        assert!(run(0.9) > run(0.3));
    }

    #[test]
    fn sigma_one_gives_trivial_consensus() {
        let a = steady_state(&probs(0.0, 0.3, 0.5, 0.2));
        assert_eq!(a.sigma, 1.0);
        assert_eq!(a.r_infinity, 0.0);
        assert!(!a.nontrivial);
        let b = steady_state(&probs(0.6, 1.0, 0.5, 0.2));
        assert_eq!(b.r_infinity, 0.0);
    }

    /// x_{n+1} = 1 − e^{−σ x_n}, the contraction used as an independent check.
    fn fixed_point(sigma: f64) -> f64 {
        let mut x = 0.5;
        loop {
            let next = 1.0 - (-sigma * x).exp();
            if (next - x).abs() < 1e-12 {
                return next;
            }
            x = next;
        }
    }

    #[test]
    fn sigma_two_and_a_half() {
        let p = probs(0.5, 0.1, 0.3, 0.3);
        let st = steady_state(&p);
        assert!((st.sigma - 2.5).abs() < 1e-12);
        let oracle = fixed_point(2.5);
        assert!((oracle - 0.8926).abs() < 5e-5, "{oracle}");
        assert!((st.r_infinity - oracle).abs() < 1e-10);
    }

    #[test]
    fn root_is_strictly_below_one() {
        for sigma in [1.5_f64, 5.0, 20.0, 35.0] {
            let r = consensus_root(sigma);
            assert!(r > 0.0 && r < 1.0, "{sigma}: {r}");
            assert!((r - (1.0 - (-sigma * r).exp())).abs() <= 1e-10);
        }
    }

    #[test]
    fn root_near_critical_sigma() {
        let sigma = 1.0_f64 + 1e-10;
        let r = consensus_root(sigma);
        assert!(r > 0.0);
        assert!((r + (-sigma * r).exp_m1()).abs() < 1e-18);
    }

    #[test]
    fn root_in_single_precision() {
        let r = consensus_root(2.5_f32);
        assert!((r - 0.8926).abs() < 1e-4);
    }

    #[test]
    fn surface_rows_follow_monotone_orderings() {
        let pf: Vec<f64> = (1..=9).map(|j| j as f64 / 10.0).collect();
        let pi: Vec<f64> = (1..=9).map(|j| j as f64 / 10.0).collect();
        let s = consensus_level_surface(
            ProbabilityAxis::Immunity,
            &pi,
            ProbabilityAxis::Forwarding,
            &pf,
            0.2,
        )
        .unwrap();
        assert_eq!(s.fixed_axis, ProbabilityAxis::Evil);
        for r in 0..pi.len() {
            assert!(s.row(r).windows(2).all(|w| w[0] <= w[1]));
        }

        let pe: Vec<f64> = (0..=9).map(|j| j as f64 / 10.0).collect();
        let t = consensus_level_surface(
            ProbabilityAxis::Immunity,
            &pi,
            ProbabilityAxis::Evil,
            &pe,
            0.6,
        )
        .unwrap();
        for r in 0..pi.len() {
            assert!(t.row(r).windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn one_by_one_surface_is_single_call() {
        let s = consensus_level_surface(
            ProbabilityAxis::Forwarding,
            &[0.5],
            ProbabilityAxis::Immunity,
            &[0.18],
            0.1,
        )
        .unwrap();
        let direct = steady_state(&probs(0.5, 0.1, 0.0, 0.18)).r_infinity;
        assert_eq!(s.values, vec![direct]);
    }

    #[test]
    fn surface_rejects_repeated_axis_and_bad_values() {
        assert!(consensus_level_surface(
            ProbabilityAxis::Evil,
            &[0.1],
            ProbabilityAxis::Evil,
            &[0.2],
            0.5
        )
        .is_err());
        assert!(consensus_level_surface(
            ProbabilityAxis::Forwarding,
            &[0.1],
            ProbabilityAxis::Immunity,
            &[0.0],
            0.5
        )
        .is_err());
    }
}
