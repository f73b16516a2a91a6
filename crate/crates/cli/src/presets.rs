//! Built-in experiments.
//!
//! Network constants default to the reference configuration: 4000 miners,
//! 100 base stations, fan-out 3, 10¹³ instructions/s of cloud compute,
//! 100-transaction blocks, 20 s packing, 600 s mining.

use std::path::PathBuf;

use blockfresh::abm::Mechanism;
use blockfresh::epidemic::ProbabilityAxis;
use blockfresh::params::{RawNetworkParams, RawPayoff, RawProbabilities};
use blockfresh::PayoffParams;
use serde::Serialize;

use crate::spec::*;

#[derive(Debug, Clone, Serialize)]
pub struct PresetInfo {
    pub name: &'static str,
    pub kind: &'static str,
    pub description: &'static str,
}

const CATALOG: &[(&str, &str)] = &[
    (
        "fig3a",
        "game portrait, receivers gain from forwarding: converges to full forwarding",
    ),
    (
        "fig3b",
        "game portrait, receivers lose but start above the threshold",
    ),
    (
        "fig3c",
        "game portrait, receivers lose and start below the threshold",
    ),
    (
        "fig4",
        "forwarding probability under greedy, incentive, flooding and gossip",
    ),
    (
        "fig4-reward-ratio",
        "incentive mechanism at propagation reward ratio I/M = 2 and 4",
    ),
    (
        "fig5",
        "mean-field refuser density for several forwarding probabilities",
    ),
    (
        "fig6",
        "mean-field spreader density for several forwarding probabilities",
    ),
    (
        "fig7",
        "minimum average AoBI over the packing rate, by forwarding density",
    ),
    (
        "fig8",
        "minimum average AoBI over the packing rate, by miner count",
    ),
    (
        "fig9",
        "minimum average AoBI over the packing rate, by fan-out",
    ),
    (
        "fig10",
        "minimum average AoBI in the monotone-increasing regime",
    ),
    (
        "fig11",
        "mean-field unspreader density for several recovery probabilities",
    ),
    (
        "fig12",
        "evildoer density for several forwarding probabilities, mean-field and agents",
    ),
    (
        "consensus-surface",
        "terminal consensus level over immunity and forwarding probability",
    ),
];

pub fn list_experiments() -> Vec<PresetInfo> {
    CATALOG
        .iter()
        .map(|&(name, description)| PresetInfo {
            name,
            kind: preset(name).expect("catalog entry").experiment.kind(),
            description,
        })
        .collect()
}

fn table() -> RawNetworkParams<f64> {
    RawNetworkParams::table_defaults()
}

fn base_probs(p_f: f64) -> RawProbabilities<f64> {
    RawProbabilities {
        p_f,
        p_e: 0.1,
        p_r: 0.3,
        p_i: 0.2,
    }
}

fn benefits(delta_i: f64, delta_p: f64, delta_u: f64, epsilon: f64, risk: f64) -> RawPayoff<f64> {
    *PayoffParams::from_benefits(delta_i, delta_p, delta_u, epsilon, risk)
        .expect("preset payoff")
        .raw()
}

/// Calibrated so the receiver share needs about 20 epochs to saturate at
/// `I/M = 2`.
fn incentive(reward_ratio: f64) -> PayoffParams {
    let cost_propagate = 0.25;
    PayoffParams::new(RawPayoff {
        reward_validate: 0.5,
        cost_validate: 0.0,
        reward_propagate: reward_ratio * cost_propagate,
        cost_propagate,
        extra_reward: 0.05,
        punishment_risk: 1.0,
        epsilon: 0.1,
    })
    .expect("preset payoff")
}

fn named(label: &str, mechanism: Mechanism) -> NamedMechanism {
    NamedMechanism {
        label: label.into(),
        mechanism,
    }
}

fn seeds() -> Vec<u64> {
    (0..30).collect()
}

fn spec(name: &str, seeds: Vec<u64>, experiment: Experiment) -> ExperimentSpec {
    ExperimentSpec {
        name: name.into(),
        output_dir: PathBuf::from("out").join(name),
        seeds,
        experiment,
    }
}

fn game(payoff: RawPayoff<f64>) -> Experiment {
    Experiment::GamePortrait(GameSpec {
        payoff,
        starts: Vec::new(),
        grid_per_axis: Some(9),
        max_epochs: 500,
        tol: 1e-9,
        step: blockfresh::evogame::DEFAULT_GAME_STEP,
        steps_per_epoch: blockfresh::evogame::DEFAULT_STEPS_PER_EPOCH,
    })
}

fn sweep(network: RawNetworkParams<f64>, field: NetworkField, values: &[f64]) -> Experiment {
    Experiment::AobiSweep(AobiSweepSpec {
        network,
        tau_points: 101,
        tau_min: None,
        tau_max: None,
        vary: Some(NetworkVary {
            field,
            values: values.to_vec(),
        }),
    })
}

fn epidemic(p_f: f64, field: ProbabilityField, values: &[f64], horizon: f64) -> Experiment {
    Experiment::EpidemicRun(EpidemicSpec {
        n_miners: 4000,
        k: 3,
        probs: base_probs(p_f),
        vary: Some(ProbabilityVary {
            field,
            values: values.to_vec(),
        }),
        horizon,
        step: 0.01,
        record_every: 10,
    })
}

const OMEGAS: [f64; 5] = [0.6, 0.7, 0.8, 0.9, 1.0];

pub fn preset(name: &str) -> Option<ExperimentSpec> {
    let fig4_probs = base_probs(0.2);
    Some(match name {
        "fig3a" => spec(name, vec![], game(benefits(0.3, 0.5, 0.2, 0.1, 1.0))),
        "fig3b" => spec(name, vec![], game(benefits(0.1, 0.6, -0.3, 0.1, 0.5))),
        "fig3c" => spec(name, vec![], game(benefits(0.05, 0.3, -0.4, 0.1, 1.0))),
        "fig4" => {
            let pay = incentive(2.0);
            spec(
                name,
                seeds(),
                Experiment::MechanismCompare(CompareSpec {
                    n_miners: 4000,
                    k: 3,
                    graph_seed: 42,
                    probs: fig4_probs,
                    mechanisms: vec![
                        named("greedy", Mechanism::Greedy { pay, prior_y: 0.2 }),
                        named(
                            "bpim",
                            Mechanism::Bpim {
                                pay,
                                x0: 0.2,
                                y0: 0.2,
                            },
                        ),
                        named(
                            "probabilistic_flooding",
                            Mechanism::probabilistic_flooding(),
                        ),
                        named("gossip", Mechanism::gossip()),
                    ],
                    epochs: 60,
                }),
            )
        }
        "fig4-reward-ratio" => spec(
            name,
            seeds(),
            Experiment::MechanismCompare(CompareSpec {
                n_miners: 4000,
                k: 3,
                graph_seed: 42,
                probs: fig4_probs,
                mechanisms: [2.0, 4.0]
                    .into_iter()
                    .map(|ratio| {
                        named(
                            &format!("bpim_reward_ratio_{ratio}"),
                            Mechanism::Bpim {
                                pay: incentive(ratio),
                                x0: 0.2,
                                y0: 0.2,
                            },
                        )
                    })
                    .collect(),
                epochs: 60,
            }),
        ),
        "fig5" => spec(
            name,
            vec![],
            epidemic(0.5, ProbabilityField::PF, &[0.3, 0.5, 0.7, 0.9], 100.0),
        ),
        "fig6" => spec(
            name,
            vec![],
            epidemic(0.5, ProbabilityField::PF, &[0.2, 0.4, 0.6, 0.8], 60.0),
        ),
        "fig7" => spec(
            name,
            vec![],
            sweep(table(), NetworkField::OmegaBar, &OMEGAS),
        ),
        "fig8" => spec(
            name,
            vec![],
            sweep(
                table(),
                NetworkField::NMiners,
                &[1000.0, 2000.0, 3000.0, 4000.0],
            ),
        ),
        "fig9" => spec(
            name,
            vec![],
            sweep(
                RawNetworkParams {
                    n_miners: 1000,
                    omega_bar: 0.5,
                    ..table()
                },
                NetworkField::KAdjacent,
                &[2.0, 3.0, 4.0, 5.0, 6.0],
            ),
        ),
        "fig10" => spec(
            name,
            vec![],
            sweep(
                RawNetworkParams {
                    cloud_compute: 1e19,
                    ..table()
                },
                NetworkField::OmegaBar,
                &OMEGAS,
            ),
        ),
        "fig11" => spec(
            name,
            vec![],
            epidemic(0.5, ProbabilityField::PR, &[0.1, 0.3, 0.5, 0.7, 0.9], 100.0),
        ),
        "fig12" => spec(
            name,
            seeds(),
            Experiment::AbmRun(AbmSpec {
                n_miners: 4000,
                k: 3,
                graph_seed: 42,
                probs: base_probs(0.5),
                vary: Some(ProbabilityVary {
                    field: ProbabilityField::PF,
                    values: vec![0.3, 0.5, 0.7, 0.9],
                }),
                mechanism: None,
                epochs: 100,
                mean_field: true,
                step: 0.01,
            }),
        ),
        "consensus-surface" => spec(
            name,
            vec![],
            Experiment::SteadyStateSurface(SurfaceSpec {
                rows: AxisSpec {
                    axis: ProbabilityAxis::Immunity,
                    values: (1..=20).map(|j| j as f64 / 20.0).collect(),
                },
                cols: AxisSpec {
                    axis: ProbabilityAxis::Forwarding,
                    values: (0..=20).map(|j| j as f64 / 20.0).collect(),
                },
                fixed_value: 0.2,
            }),
        ),
        _ => return None,
    })
}
