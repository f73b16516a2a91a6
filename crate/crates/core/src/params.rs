//! Validated parameter containers shared by every other module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Bandwidth units per base station used when a config omits `bandwidth_w`.
pub const DEFAULT_BANDWIDTH: f64 = 1.0e4;

/// ω̄k within this distance of 1 selects the linear (ceiling) round branch.
pub const OMEGA_K_UNIT_TOLERANCE: f64 = 1.0e-12;

/// Relative slack allowed when a config writes λ's upper bound as a decimal.
const LAMBDA_BOUND_SLACK: f64 = 1.0e-12;

fn default_bandwidth<T: Real>() -> T {
    T::lit(DEFAULT_BANDWIDTH)
}

/// Unvalidated network/blockchain constants, exactly as read from a config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
#[serde(deny_unknown_fields)]
pub struct RawNetworkParams<T> {
    pub n_miners: u64,
    pub n_base_stations: u64,
    pub k_adjacent: u64,
    pub cloud_compute: T,
    pub b_max: u64,
    pub t_pack: T,
    pub t_mine: T,
    pub r_validate: T,
    pub p_size: T,
    pub r_c: T,
    #[serde(default = "default_bandwidth")]
    pub bandwidth_w: T,
    pub omega_bar: T,
    pub tau: T,
    pub lambda_rate: T,
}

impl<T: Real> RawNetworkParams<T> {
    /// The simulation table values: N = 4000, k = 3, ω̄ = 0.8, τ = 1 and λ at
    /// its upper bound 1/(T_p + T_mine).
    pub fn table_defaults() -> Self {
        let t_pack = T::lit(20.0);
        let t_mine = T::lit(600.0);
        Self {
            n_miners: 4000,
            n_base_stations: 100,
            k_adjacent: 3,
            cloud_compute: T::lit(1.0e13),
            b_max: 100,
            t_pack,
            t_mine,
            r_validate: T::lit(1.0e6),
            p_size: T::lit(300.0),
            r_c: T::lit(200.0),
            bandwidth_w: default_bandwidth(),
            omega_bar: T::lit(0.8),
            tau: T::one(),
            lambda_rate: T::one() / (t_pack + t_mine),
        }
    }

    pub fn validate(self) -> Result<NetworkParams<T>> {
        NetworkParams::new(self)
    }
}

/// Physical and blockchain constants with every invariant checked.
///
/// Only constructible through [`NetworkParams::new`] (or deserialization,
/// which goes through the same checks), so holders may rely on:
/// `1/T_p ≤ τ ≤ B_max/T_p`, `0 < λ ≤ 1/(T_p + T_mine)`, `ω̄k ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
#[serde(try_from = "RawNetworkParams<T>", into = "RawNetworkParams<T>")]
pub struct NetworkParams<T: Real> {
    raw: RawNetworkParams<T>,
}

impl<T: Real> TryFrom<RawNetworkParams<T>> for NetworkParams<T> {
    type Error = Error;

    fn try_from(raw: RawNetworkParams<T>) -> Result<Self> {
        Self::new(raw)
    }
}

impl<T: Real> From<NetworkParams<T>> for RawNetworkParams<T> {
    fn from(p: NetworkParams<T>) -> Self {
        p.raw
    }
}

fn check_count(field: &'static str, v: u64) -> Result<()> {
    if v == 0 {
        return Err(Error::invalid(field, 0.0, "must be at least 1"));
    }
    Ok(())
}

fn check_positive_finite<T: Real>(field: &'static str, v: T) -> Result<()> {
    if !(v > T::zero()) || !v.is_finite() {
        return Err(Error::invalid(
            field,
            v.as_f64(),
            "must be positive and finite",
        ));
    }
    Ok(())
}

/// Capacities (compute, bandwidth) may be +∞ to express the unconstrained limit.
fn check_positive_capacity<T: Real>(field: &'static str, v: T) -> Result<()> {
    if !(v > T::zero()) {
        return Err(Error::invalid(field, v.as_f64(), "must be positive"));
    }
    Ok(())
}

impl<T: Real> NetworkParams<T> {
    pub fn new(raw: RawNetworkParams<T>) -> Result<Self> {
        check_count("n_miners", raw.n_miners)?;
        check_count("n_base_stations", raw.n_base_stations)?;
        check_count("k_adjacent", raw.k_adjacent)?;
        check_count("b_max", raw.b_max)?;
        check_positive_capacity("cloud_compute", raw.cloud_compute)?;
        check_positive_capacity("bandwidth_w", raw.bandwidth_w)?;
        check_positive_finite("t_pack", raw.t_pack)?;
        check_positive_finite("t_mine", raw.t_mine)?;
        check_positive_finite("r_validate", raw.r_validate)?;
        check_positive_finite("p_size", raw.p_size)?;
        check_positive_finite("r_c", raw.r_c)?;
        check_positive_finite("tau", raw.tau)?;
        check_positive_finite("lambda_rate", raw.lambda_rate)?;

        if !(raw.omega_bar > T::zero() && raw.omega_bar <= T::one()) {
            return Err(Error::invalid(
                "omega_bar",
                raw.omega_bar.as_f64(),
                "must lie in (0, 1]",
            ));
        }

        let tau_lo = T::one() / raw.t_pack;
        let tau_hi = T::from_count(raw.b_max) / raw.t_pack;
        if raw.tau < tau_lo {
            return Err(Error::invalid(
                "tau",
                raw.tau.as_f64(),
                format!("tau below 1/t_pack = {tau_lo}"),
            ));
        }
        if raw.tau > tau_hi {
            return Err(Error::invalid(
                "tau",
                raw.tau.as_f64(),
                format!("tau above b_max/t_pack = {tau_hi}"),
            ));
        }

        let lambda_hi = T::one() / (raw.t_pack + raw.t_mine);
        if raw.lambda_rate > lambda_hi * (T::one() + T::lit(LAMBDA_BOUND_SLACK)) {
            return Err(Error::invalid(
                "lambda_rate",
                raw.lambda_rate.as_f64(),
                format!("lambda_rate exceeds 1/(t_pack + t_mine) = {lambda_hi}"),
            ));
        }

        let omega_k = raw.omega_bar * T::from_count(raw.k_adjacent);
        if omega_k < T::one() - T::lit(OMEGA_K_UNIT_TOLERANCE) {
            return Err(Error::invalid(
                "omega_bar",
                raw.omega_bar.as_f64(),
                format!("omega_bar * k_adjacent = {omega_k} must be at least 1"),
            ));
        }

        Ok(Self { raw })
    }

    pub fn raw(&self) -> &RawNetworkParams<T> {
        &self.raw
    }

    pub fn n_miners(&self) -> u64 {
        self.raw.n_miners
    }
    pub fn n_base_stations(&self) -> u64 {
        self.raw.n_base_stations
    }
    pub fn k_adjacent(&self) -> u64 {
        self.raw.k_adjacent
    }
    pub fn cloud_compute(&self) -> T {
        self.raw.cloud_compute
    }
    pub fn b_max(&self) -> u64 {
        self.raw.b_max
    }
    pub fn t_pack(&self) -> T {
        self.raw.t_pack
    }
    pub fn t_mine(&self) -> T {
        self.raw.t_mine
    }
    pub fn r_validate(&self) -> T {
        self.raw.r_validate
    }
    pub fn p_size(&self) -> T {
        self.raw.p_size
    }
    pub fn r_c(&self) -> T {
        self.raw.r_c
    }
    pub fn bandwidth_w(&self) -> T {
        self.raw.bandwidth_w
    }
    pub fn omega_bar(&self) -> T {
        self.raw.omega_bar
    }
    pub fn tau(&self) -> T {
        self.raw.tau
    }
    pub fn lambda_rate(&self) -> T {
        self.raw.lambda_rate
    }

    /// Feasible packing-rate interval `[1/T_p, B_max/T_p]`.
    pub fn tau_range(&self) -> (T, T) {
        (
            T::one() / self.raw.t_pack,
            T::from_count(self.raw.b_max) / self.raw.t_pack,
        )
    }

    /// Transactions per block, `τ·T_p`.
    pub fn block_size(&self) -> T {
        self.raw.tau * self.raw.t_pack
    }

    pub fn omega_k(&self) -> T {
        self.raw.omega_bar * T::from_count(self.raw.k_adjacent)
    }

    /// Miners covered by one base station, `N/M`.
    pub fn miners_per_station(&self) -> T {
        T::from_count(self.raw.n_miners) / T::from_count(self.raw.n_base_stations)
    }

    pub fn with_tau(&self, tau: T) -> Result<Self> {
        Self::new(RawNetworkParams { tau, ..self.raw })
    }

    pub fn with_omega_bar(&self, omega_bar: T) -> Result<Self> {
        Self::new(RawNetworkParams {
            omega_bar,
            ..self.raw
        })
    }

    pub fn with_raw(&self, edit: impl FnOnce(&mut RawNetworkParams<T>)) -> Result<Self> {
        let mut raw = self.raw;
        edit(&mut raw);
        Self::new(raw)
    }
}

/// Parses a flat `key = value` file (TOML subset) or a JSON object.
pub fn parse_config<D: serde::de::DeserializeOwned>(text: &str) -> Result<D> {
    if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    } else {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
#[serde(deny_unknown_fields)]
pub struct RawProbabilities<T> {
    pub p_f: T,
    pub p_e: T,
    pub p_r: T,
    pub p_i: T,
}

/// The four per-round transition probabilities of the epidemic model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
#[serde(try_from = "RawProbabilities<T>", into = "RawProbabilities<T>")]
pub struct PropagationProbabilities<T: Real> {
    p_f: T,
    p_e: T,
    p_r: T,
    p_i: T,
}

impl<T: Real> TryFrom<RawProbabilities<T>> for PropagationProbabilities<T> {
    type Error = Error;
    fn try_from(r: RawProbabilities<T>) -> Result<Self> {
        Self::new(r.p_f, r.p_e, r.p_r, r.p_i)
    }
}

impl<T: Real> From<PropagationProbabilities<T>> for RawProbabilities<T> {
    fn from(p: PropagationProbabilities<T>) -> Self {
        RawProbabilities {
            p_f: p.p_f,
            p_e: p.p_e,
            p_r: p.p_r,
            p_i: p.p_i,
        }
    }
}

fn check_unit<T: Real>(field: &'static str, v: T) -> Result<()> {
    if !(v >= T::zero() && v <= T::one()) {
        return Err(Error::invalid(field, v.as_f64(), "must lie in [0, 1]"));
    }
    Ok(())
}

impl<T: Real> PropagationProbabilities<T> {
    /// Forwarding, evil, recovery and immunity probabilities, in that order.
    pub fn new(p_f: T, p_e: T, p_r: T, p_i: T) -> Result<Self> {
        check_unit("p_f", p_f)?;
        check_unit("p_e", p_e)?;
        check_unit("p_r", p_r)?;
        if !(p_i > T::zero() && p_i <= T::one()) {
            return Err(Error::invalid("p_i", p_i.as_f64(), "must lie in (0, 1]"));
        }
        Ok(Self { p_f, p_e, p_r, p_i })
    }

    pub fn p_f(&self) -> T {
        self.p_f
    }
    pub fn p_e(&self) -> T {
        self.p_e
    }
    pub fn p_r(&self) -> T {
        self.p_r
    }
    pub fn p_i(&self) -> T {
        self.p_i
    }

    pub fn with_forwarding(&self, p_f: T) -> Result<Self> {
        Self::new(p_f, self.p_e, self.p_r, self.p_i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
#[serde(deny_unknown_fields)]
pub struct RawPayoff<T> {
    pub reward_validate: T,
    pub cost_validate: T,
    pub reward_propagate: T,
    pub cost_propagate: T,
    pub extra_reward: T,
    pub punishment_risk: T,
    pub epsilon: T,
}

/// Rewards and costs of the two-population forwarding game.
///
/// `delta_p = P − Q` and `delta_u = I − M` are derived at construction and
/// cannot drift from the raw fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
#[serde(try_from = "RawPayoff<T>", into = "RawPayoff<T>")]
pub struct PayoffParams<T: Real> {
    raw: RawPayoff<T>,
    delta_p: T,
    delta_u: T,
}

impl<T: Real> TryFrom<RawPayoff<T>> for PayoffParams<T> {
    type Error = Error;
    fn try_from(r: RawPayoff<T>) -> Result<Self> {
        Self::new(r)
    }
}

impl<T: Real> From<PayoffParams<T>> for RawPayoff<T> {
    fn from(p: PayoffParams<T>) -> Self {
        p.raw
    }
}

impl<T: Real> PayoffParams<T> {
    pub fn new(raw: RawPayoff<T>) -> Result<Self> {
        let finite = [
            ("reward_validate", raw.reward_validate),
            ("cost_validate", raw.cost_validate),
            ("reward_propagate", raw.reward_propagate),
            ("cost_propagate", raw.cost_propagate),
            ("extra_reward", raw.extra_reward),
            ("punishment_risk", raw.punishment_risk),
            ("epsilon", raw.epsilon),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                return Err(Error::invalid(field, v.as_f64(), "must be finite"));
            }
        }
        if raw.extra_reward < T::zero() {
            return Err(Error::invalid(
                "extra_reward",
                raw.extra_reward.as_f64(),
                "must be non-negative",
            ));
        }
        if raw.punishment_risk < T::zero() {
            return Err(Error::invalid(
                "punishment_risk",
                raw.punishment_risk.as_f64(),
                "must be non-negative",
            ));
        }
        if !(raw.epsilon > T::zero()) {
            return Err(Error::invalid(
                "epsilon",
                raw.epsilon.as_f64(),
                "must be positive",
            ));
        }
        let delta_p = raw.reward_validate - raw.cost_validate;
        if !(delta_p > T::zero()) {
            return Err(Error::invalid(
                "cost_validate",
                raw.cost_validate.as_f64(),
                "validation reward must exceed validation cost",
            ));
        }
        Ok(Self {
            raw,
            delta_p,
            delta_u: raw.reward_propagate - raw.cost_propagate,
        })
    }

    /// Builds a payoff set from the net benefits directly. The raw fields are
    /// filled as `P = ΔP, Q = 0` and `I − M = ΔU` with the non-negative side
    /// carrying the magnitude.
    pub fn from_benefits(delta_i: T, delta_p: T, delta_u: T, epsilon: T, risk: T) -> Result<Self> {
        let (reward_propagate, cost_propagate) = if delta_u >= T::zero() {
            (delta_u, T::zero())
        } else {
            (T::zero(), -delta_u)
        };
        Self::new(RawPayoff {
            reward_validate: delta_p,
            cost_validate: T::zero(),
            reward_propagate,
            cost_propagate,
            extra_reward: delta_i,
            punishment_risk: risk,
            epsilon,
        })
    }

    pub fn raw(&self) -> &RawPayoff<T> {
        &self.raw
    }
    pub fn extra_reward(&self) -> T {
        self.raw.extra_reward
    }
    pub fn delta_p(&self) -> T {
        self.delta_p
    }
    pub fn delta_u(&self) -> T {
        self.delta_u
    }
    pub fn epsilon(&self) -> T {
        self.raw.epsilon
    }
    pub fn punishment_risk(&self) -> T {
        self.raw.punishment_risk
    }
    /// εR, the expected cost of forwarding to an evildoer.
    pub fn punishment_cost(&self) -> T {
        self.raw.epsilon * self.raw.punishment_risk
    }
}
