use serde::{Deserialize, Serialize};

use super::network::MinerNetwork;
use super::sim::Population;
use crate::error::{Error, Result};
use crate::evogame::{propagator_advantage, solve_game_with, GameOptions};
use crate::params::PayoffParams;

pub const GOSSIP_PROBABILITY: f64 = 0.2;
pub const FLOODING_INITIAL: f64 = 0.2;
pub const FLOODING_LEARNING_RATE: f64 = 0.05;

/// How a freshly contacted ignorant miner decides whether to forward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mechanism {
    /// Constant forwarding probability.
    Gossip { p: f64 },
    /// Each miner holds its own probability, scaled by `1 + learning_rate`
    /// per useful forward and divided by it per redundant one, kept within
    /// `[initial, 1]`.
    ProbabilisticFlooding { initial: f64, learning_rate: f64 },
    /// Forward exactly when forwarding pays more than withholding, judged
    /// from the share of informed neighbours that forwarded (`prior_y` when
    /// no neighbour is informed yet).
    Greedy {
        pay: PayoffParams<f64>,
        prior_y: f64,
    },
    /// Follow the receiver share `y(t)` of the replicator dynamics started
    /// from `(x0, y0)`.
    Bpim {
        pay: PayoffParams<f64>,
        x0: f64,
        y0: f64,
    },
}

impl Mechanism {
    pub fn gossip() -> Self {
        Mechanism::Gossip {
            p: GOSSIP_PROBABILITY,
        }
    }

    pub fn probabilistic_flooding() -> Self {
        Mechanism::ProbabilisticFlooding {
            initial: FLOODING_INITIAL,
            learning_rate: FLOODING_LEARNING_RATE,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Mechanism::Gossip { .. } => "gossip",
            Mechanism::ProbabilisticFlooding { .. } => "probabilistic_flooding",
            Mechanism::Greedy { .. } => "greedy",
            Mechanism::Bpim { .. } => "bpim",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |field: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(field, v, "must lie in [0, 1]"))
            }
        };
        match *self {
            Mechanism::Gossip { p } => unit("p", p),
            Mechanism::ProbabilisticFlooding {
                initial,
                learning_rate,
            } => {
                unit("initial", initial)?;
                if !(learning_rate >= 0.0 && learning_rate.is_finite()) {
                    return Err(Error::invalid(
                        "learning_rate",
                        learning_rate,
                        "must be non-negative and finite",
                    ));
                }
                Ok(())
            }
            Mechanism::Greedy { prior_y, .. } => unit("prior_y", prior_y),
            Mechanism::Bpim { x0, y0, .. } => {
                unit("x0", x0)?;
                unit("y0", y0)
            }
        }
    }

    pub(crate) fn policy(&self, n: usize, epochs: usize) -> Result<Policy> {
        self.validate()?;
        Ok(match *self {
            Mechanism::Gossip { p } => Policy::Constant(p),
            Mechanism::ProbabilisticFlooding {
                initial,
                learning_rate,
            } => Policy::Flooding {
                personal: vec![initial; n],
                floor: initial,
                factor: 1.0 + learning_rate,
                net_acks: vec![0; n],
            },
            Mechanism::Greedy { pay, prior_y } => Policy::Greedy { pay, prior_y },
            Mechanism::Bpim { pay, x0, y0 } => {
                let sol = solve_game_with(x0, y0, &pay, &GameOptions::fixed_length(epochs))?;
                Policy::Schedule(sol.trajectory.iter().map(|s| s.y).collect())
            }
        })
    }
}

/// Per-run mutable state of a [`Mechanism`].
pub(crate) enum Policy {
    Constant(f64),
    Flooding {
        personal: Vec<f64>,
        floor: f64,
        factor: f64,
        /// Useful minus redundant forwards in the current epoch, per sender.
        net_acks: Vec<i32>,
    },
    Greedy {
        pay: PayoffParams<f64>,
        prior_y: f64,
    },
    Schedule(Vec<f64>),
}

impl Policy {
    /// Probability that ignorant miner `w`, contacted during `epoch`,
    /// becomes a spreader.
    pub(crate) fn forward_probability(
        &self,
        w: usize,
        epoch: usize,
        net: &MinerNetwork,
        snapshot: &Population,
    ) -> f64 {
        match self {
            Policy::Constant(p) => *p,
            Policy::Flooding { personal, .. } => personal[w],
            Policy::Greedy { pay, prior_y } => {
                let y = neighbourhood_share(w, net, snapshot).unwrap_or(*prior_y);
                if propagator_advantage(y, pay) > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Policy::Schedule(ys) => ys.get(epoch).or(ys.last()).copied().unwrap_or(0.0),
        }
    }

    pub(crate) fn record_forward(&mut self, sender: usize, useful: bool) {
        if let Policy::Flooding { net_acks, .. } = self {
            net_acks[sender] += if useful { 1 } else { -1 };
        }
    }

    pub(crate) fn end_epoch(&mut self) {
        if let Policy::Flooding {
            personal,
            floor,
            factor,
            net_acks,
        } = self
        {
            for (p, a) in personal.iter_mut().zip(net_acks.iter_mut()) {
                if *a != 0 {
                    *p = (*p * factor.powi(*a)).clamp(*floor, 1.0);
                    *a = 0;
                }
            }
        }
    }

    /// Forwarding probability reported for `epoch`: the constant, the
    /// population mean, the share of miners for whom forwarding pays, or the
    /// scheduled `y(epoch)`.
    pub(crate) fn effective(&self, epoch: usize, net: &MinerNetwork, pop: &Population) -> f64 {
        match self {
            Policy::Constant(p) => *p,
            // Summing offsets from the floor keeps the mean exactly at or
            // above it.
            Policy::Flooding {
                personal, floor, ..
            } => floor + personal.iter().map(|p| p - floor).sum::<f64>() / personal.len() as f64,
            Policy::Greedy { .. } => {
                let willing = (0..net.n())
                    .filter(|&w| self.forward_probability(w, epoch, net, pop) > 0.0)
                    .count();
                willing as f64 / net.n() as f64
            }
            Policy::Schedule(_) => self.forward_probability(0, epoch, net, pop),
        }
    }
}

/// Share of informed neighbours of `w` that chose to forward.
fn neighbourhood_share(w: usize, net: &MinerNetwork, pop: &Population) -> Option<f64> {
    let mut informed = 0u32;
    let mut forwarded = 0u32;
    for &v in net.neighbors(w) {
        let v = v as usize;
        if pop.received[v] {
            informed += 1;
            forwarded += pop.forwarded[v] as u32;
        }
    }
    (informed > 0).then(|| forwarded as f64 / informed as f64)
}
