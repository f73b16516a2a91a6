use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use serde::{Deserialize, Serialize};

use super::rng::timeline_rng;
use super::sim::SimTrace;
use crate::aobi::{communication_per_round, rounds_for, validation_per_round};
use crate::error::{Error, Result};
use crate::params::NetworkParams;

/// Distribution of the per-round validation and communication times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceModel {
    /// Exponential with mean equal to the per-round bound.
    #[default]
    Exponential,
    /// Always zero; only the monitoring gap remains.
    Zero,
}

/// Per-miner decomposition of the age of block information, in seconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockTimeline {
    /// Gap between the freshest packed transaction and the end of mining.
    pub monitoring: Vec<f64>,
    /// Total validation time over all consensus rounds.
    pub validation: Vec<f64>,
    /// Total communication time over all consensus rounds.
    pub communication: Vec<f64>,
}

impl BlockTimeline {
    /// Draws a timeline for `miners` miners.
    ///
    /// The monitoring gap is a uniform cut of an exponential inter-generation
    /// interval with rate `λ`, so its mean is `1/(2λ)`. Each miner's
    /// validation and communication totals are sums of one exponential draw
    /// per consensus round, sampled directly as a gamma variate.
    pub fn draw(
        params: &NetworkParams<f64>,
        miners: usize,
        model: ServiceModel,
        rng: &mut impl Rng,
    ) -> Self {
        let gap = Exp::new(params.lambda_rate()).expect("validated positive rate");
        let rounds = rounds_for(params).rounds as f64;
        let service = |mean: f64| match model {
            ServiceModel::Exponential if mean > 0.0 => Gamma::new(rounds, mean).ok(),
            _ => None,
        };
        let validation = service(validation_per_round(params));
        let communication = service(communication_per_round(params));
        let mut t = BlockTimeline {
            monitoring: Vec::with_capacity(miners),
            validation: Vec::with_capacity(miners),
            communication: Vec::with_capacity(miners),
        };
        for _ in 0..miners {
            let cut: f64 = rng.random();
            t.monitoring.push(cut * gap.sample(rng));
            t.validation
                .push(validation.as_ref().map_or(0.0, |d| d.sample(rng)));
            t.communication
                .push(communication.as_ref().map_or(0.0, |d| d.sample(rng)));
        }
        t
    }

    pub fn len(&self) -> usize {
        self.monitoring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monitoring.is_empty()
    }

    /// Time from the end of mining until miner `i` holds a validated block.
    pub fn availability(&self, i: usize) -> f64 {
        self.validation[i] + self.communication[i]
    }

    pub fn age(&self, i: usize) -> f64 {
        self.monitoring[i] + self.availability(i)
    }

    pub fn mean_age(&self) -> f64 {
        (0..self.len()).map(|i| self.age(i)).sum::<f64>() / self.len() as f64
    }
}

/// Mean age of block information over the miners `trace` informed, for one
/// timeline drawn from `seed`.
pub fn empirical_aobi(
    trace: &SimTrace,
    params: &NetworkParams<f64>,
    model: ServiceModel,
    seed: u64,
) -> Result<f64> {
    if !trace.is_complete() {
        let c = trace.last().counts;
        return Err(Error::IncompleteTrace {
            spreaders: c[1],
            unspreaders: c[2],
        });
    }
    let mut rng = timeline_rng(seed);
    let timeline = BlockTimeline::draw(params, trace.informed as usize, model, &mut rng);
    Ok(timeline.mean_age())
}

/// `params` with `ω̄` replaced by the trace's realised forwarding density.
pub fn params_at_realized_density(
    trace: &SimTrace,
    params: &NetworkParams<f64>,
) -> Result<NetworkParams<f64>> {
    params.with_omega_bar(trace.realized_forwarding_density())
}
