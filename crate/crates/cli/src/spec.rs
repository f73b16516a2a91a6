//! Experiment descriptions as read from config files and presets.

use std::path::PathBuf;

use blockfresh::abm::Mechanism;
use blockfresh::epidemic::ProbabilityAxis;
use blockfresh::params::{RawNetworkParams, RawPayoff, RawProbabilities};
use blockfresh::{NetworkParams, PayoffParams, PropagationProbabilities};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Run seeds for the stochastic kinds.
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub experiment: Experiment,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    AobiSweep(AobiSweepSpec),
    EpidemicRun(EpidemicSpec),
    SteadyStateSurface(SurfaceSpec),
    GamePortrait(GameSpec),
    AbmRun(AbmSpec),
    MechanismCompare(CompareSpec),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::AobiSweep(_) => "aobi_sweep",
            Experiment::EpidemicRun(_) => "epidemic_run",
            Experiment::SteadyStateSurface(_) => "steady_state_surface",
            Experiment::GamePortrait(_) => "game_portrait",
            Experiment::AbmRun(_) => "abm_run",
            Experiment::MechanismCompare(_) => "mechanism_compare",
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(
            self,
            Experiment::AbmRun(_) | Experiment::MechanismCompare(_)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkField {
    OmegaBar,
    NMiners,
    KAdjacent,
    CloudCompute,
    BandwidthW,
}

impl NetworkField {
    pub fn label(self) -> &'static str {
        match self {
            NetworkField::OmegaBar => "omega_bar",
            NetworkField::NMiners => "n_miners",
            NetworkField::KAdjacent => "k_adjacent",
            NetworkField::CloudCompute => "cloud_compute",
            NetworkField::BandwidthW => "bandwidth_w",
        }
    }

    pub fn apply(self, raw: &mut RawNetworkParams<f64>, value: f64) -> Result<(), CliError> {
        let count = |v: f64| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as u64)
            } else {
                Err(CliError::Validation(format!(
                    "{} must be a positive integer, got {v}",
                    self.label()
                )))
            }
        };
        match self {
            NetworkField::OmegaBar => raw.omega_bar = value,
            NetworkField::NMiners => raw.n_miners = count(value)?,
            NetworkField::KAdjacent => raw.k_adjacent = count(value)?,
            NetworkField::CloudCompute => raw.cloud_compute = value,
            NetworkField::BandwidthW => raw.bandwidth_w = value,
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkVary {
    pub field: NetworkField,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AobiSweepSpec {
    pub network: RawNetworkParams<f64>,
    /// Grid size over `[tau_min, tau_max]`.
    #[serde(default = "default_tau_points")]
    pub tau_points: usize,
    /// Defaults to the lower end of the admissible range, `1 / t_pack`.
    #[serde(default)]
    pub tau_min: Option<f64>,
    /// Defaults to the upper end, `b_max / t_pack`.
    #[serde(default)]
    pub tau_max: Option<f64>,
    /// One output series per value.
    #[serde(default)]
    pub vary: Option<NetworkVary>,
}

fn default_tau_points() -> usize {
    101
}

impl AobiSweepSpec {
    /// `(label, params)` per output series.
    pub fn series(&self) -> Result<Vec<(String, NetworkParams)>, CliError> {
        match &self.vary {
            None => Ok(vec![("aobi".into(), self.network.validate()?)]),
            Some(v) => {
                if v.values.is_empty() {
                    return Err(CliError::Validation("vary.values is empty".into()));
                }
                v.values
                    .iter()
                    .map(|&value| {
                        let mut raw = self.network;
                        v.field.apply(&mut raw, value)?;
                        Ok((format!("aobi_{}_{value}", v.field.label()), raw.validate()?))
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbabilityField {
    PF,
    PE,
    PR,
    PI,
}

impl ProbabilityField {
    pub fn label(self) -> &'static str {
        match self {
            ProbabilityField::PF => "p_f",
            ProbabilityField::PE => "p_e",
            ProbabilityField::PR => "p_r",
            ProbabilityField::PI => "p_i",
        }
    }

    fn apply(self, raw: &mut RawProbabilities<f64>, value: f64) {
        match self {
            ProbabilityField::PF => raw.p_f = value,
            ProbabilityField::PE => raw.p_e = value,
            ProbabilityField::PR => raw.p_r = value,
            ProbabilityField::PI => raw.p_i = value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbabilityVary {
    pub field: ProbabilityField,
    pub values: Vec<f64>,
}

/// `(tag, probabilities)` per series: `"base"` without a sweep.
pub fn probability_series(
    base: &RawProbabilities<f64>,
    vary: &Option<ProbabilityVary>,
) -> Result<Vec<(String, PropagationProbabilities)>, CliError> {
    match vary {
        None => Ok(vec![("base".into(), (*base).try_into()?)]),
        Some(v) => {
            if v.values.is_empty() {
                return Err(CliError::Validation("vary.values is empty".into()));
            }
            v.values
                .iter()
                .map(|&value| {
                    let mut raw = *base;
                    v.field.apply(&mut raw, value);
                    Ok((format!("{}_{value}", v.field.label()), raw.try_into()?))
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpidemicSpec {
    pub n_miners: u64,
    pub k: u64,
    pub probs: RawProbabilities<f64>,
    #[serde(default)]
    pub vary: Option<ProbabilityVary>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    /// Keep every n-th integration step in the output.
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_horizon() -> f64 {
    500.0
}
fn default_step() -> f64 {
    0.01
}
fn default_record_every() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub axis: ProbabilityAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub rows: AxisSpec,
    pub cols: AxisSpec,
    /// Value of the remaining probability.
    pub fixed_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    pub payoff: RawPayoff<f64>,
    /// Explicit `[x0, y0]` starts.
    #[serde(default)]
    pub starts: Vec<[f64; 2]>,
    /// Adds an interior `n × n` grid of starts at `j / (n + 1)`.
    #[serde(default)]
    pub grid_per_axis: Option<usize>,
    #[serde(default = "default_game_epochs")]
    pub max_epochs: usize,
    #[serde(default = "default_game_tol")]
    pub tol: f64,
    #[serde(default = "default_game_step")]
    pub step: f64,
    #[serde(default = "default_steps_per_epoch")]
    pub steps_per_epoch: usize,
}

fn default_game_epochs() -> usize {
    500
}
fn default_game_tol() -> f64 {
    1e-9
}
fn default_game_step() -> f64 {
    blockfresh::evogame::DEFAULT_GAME_STEP
}
fn default_steps_per_epoch() -> usize {
    blockfresh::evogame::DEFAULT_STEPS_PER_EPOCH
}

impl GameSpec {
    pub fn payoff(&self) -> Result<PayoffParams, CliError> {
        Ok(PayoffParams::new(self.payoff)?)
    }

    pub fn start_points(&self) -> Vec<[f64; 2]> {
        let mut pts = self.starts.clone();
        if let Some(n) = self.grid_per_axis {
            let at = |j: usize| j as f64 / (n + 1) as f64;
            for a in 1..=n {
                for b in 1..=n {
                    pts.push([at(a), at(b)]);
                }
            }
        }
        pts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbmSpec {
    pub n_miners: u64,
    pub k: u64,
    #[serde(default = "default_graph_seed")]
    pub graph_seed: u64,
    pub probs: RawProbabilities<f64>,
    #[serde(default)]
    pub vary: Option<ProbabilityVary>,
    /// Overrides the constant forwarding probability `probs.p_f`.
    #[serde(default)]
    pub mechanism: Option<Mechanism>,
    pub epochs: usize,
    /// Also integrate the mean-field model over the same horizon.
    #[serde(default = "default_true")]
    pub mean_field: bool,
    /// Step for the mean-field comparison.
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_graph_seed() -> u64 {
    42
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedMechanism {
    pub label: String,
    pub mechanism: Mechanism,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    pub n_miners: u64,
    pub k: u64,
    #[serde(default = "default_graph_seed")]
    pub graph_seed: u64,
    /// `P_e`, `P_r` and `P_i`; `p_f` is ignored.
    pub probs: RawProbabilities<f64>,
    pub mechanisms: Vec<NamedMechanism>,
    pub epochs: usize,
}

impl ExperimentSpec {
    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Validation(m));
        if self.name.trim().is_empty() {
            return bad("name must not be empty".into());
        }
        if self.experiment.is_stochastic() && self.seeds.is_empty() {
            return bad(format!(
                "{} needs at least one seed",
                self.experiment.kind()
            ));
        }
        match &self.experiment {
            Experiment::AobiSweep(s) => {
                if s.tau_points < 2 {
                    return bad("tau_points must be at least 2".into());
                }
                for (_, p) in s.series()? {
                    let (lo, hi) = p.tau_range();
                    let (a, b) = (s.tau_min.unwrap_or(lo), s.tau_max.unwrap_or(hi));
                    if !(a < b) {
                        return bad(format!("tau_min {a} must be below tau_max {b}"));
                    }
                    p.with_tau(a)?;
                    p.with_tau(b)?;
                }
            }
            Experiment::EpidemicRun(s) => {
                probability_series(&s.probs, &s.vary)?;
                blockfresh::epidemic::initial_densities::<f64>(s.n_miners)?;
                if s.record_every == 0 {
                    return bad("record_every must be at least 1".into());
                }
                if !(s.step > 0.0 && s.horizon >= s.step && s.horizon.is_finite()) {
                    return bad(format!(
                        "need 0 < step <= horizon, got step {} horizon {}",
                        s.step, s.horizon
                    ));
                }
            }
            Experiment::SteadyStateSurface(s) => {
                if s.rows.axis == s.cols.axis {
                    return bad("rows and cols must use different axes".into());
                }
                if s.rows.values.is_empty() || s.cols.values.is_empty() {
                    return bad("surface axes need at least one value".into());
                }
            }
            Experiment::GamePortrait(s) => {
                s.payoff()?;
                let pts = s.start_points();
                if pts.is_empty() {
                    return bad("game portrait needs starts or grid_per_axis".into());
                }
                for [x, y] in pts {
                    blockfresh::evogame::GameState::new(x, y)?;
                }
                if !(s.step > 0.0) || s.steps_per_epoch == 0 {
                    return bad("step and steps_per_epoch must be positive".into());
                }
            }
            Experiment::AbmRun(s) => {
                probability_series(&s.probs, &s.vary)?;
                if let Some(m) = &s.mechanism {
                    m.validate()?;
                }
                check_graph_shape(s.n_miners, s.k)?;
                if !(s.step > 0.0) {
                    return bad("step must be positive".into());
                }
            }
            Experiment::MechanismCompare(s) => {
                PropagationProbabilities::try_from(s.probs)?;
                check_graph_shape(s.n_miners, s.k)?;
                if s.mechanisms.is_empty() {
                    return bad("at least one mechanism is required".into());
                }
                let mut labels: Vec<&str> = Vec::new();
                for m in &s.mechanisms {
                    m.mechanism.validate()?;
                    if labels.contains(&m.label.as_str()) {
                        return bad(format!("duplicate mechanism label {}", m.label));
                    }
                    labels.push(&m.label);
                }
            }
        }
        Ok(())
    }
}

fn check_graph_shape(n: u64, k: u64) -> Result<(), CliError> {
    if k == 0 || k >= n || (n * k) % 2 == 1 {
        return Err(CliError::Validation(format!(
            "no {k}-regular graph on {n} miners (need 0 < k < n and n*k even)"
        )));
    }
    Ok(())
}
