//! Seeded agent-based block propagation on random regular graphs.

mod mechanism;
mod network;
mod rng;
mod sim;
mod timeline;

use rayon::prelude::*;
use serde::Serialize;

pub use mechanism::{Mechanism, FLOODING_INITIAL, FLOODING_LEARNING_RATE, GOSSIP_PROBABILITY};
pub use network::{build_network, MinerNetwork};
pub use rng::RNG_ALGORITHM;
pub use sim::{
    run_mechanism, run_simulation, step, EpochDraws, EpochRecord, MinerState, Population, SimTrace,
};
pub use timeline::{empirical_aobi, params_at_realized_density, BlockTimeline, ServiceModel};

use crate::error::{Error, Result};
use crate::params::PropagationProbabilities;

/// Runs every seed concurrently and returns the traces in seed order.
pub fn run_seeds(
    net: &MinerNetwork,
    probs: &PropagationProbabilities<f64>,
    mechanism: &Mechanism,
    epochs: usize,
    seeds: &[u64],
) -> Result<Vec<SimTrace>> {
    seeds
        .par_iter()
        .map(|&s| run_mechanism(net, probs, mechanism, epochs, s))
        .collect()
}

/// Element-wise mean of per-epoch densities over `traces`.
pub fn mean_densities(traces: &[SimTrace]) -> Vec<[f64; 5]> {
    let Some(first) = traces.first() else {
        return Vec::new();
    };
    let mut acc = vec![[0.0; 5]; first.records.len()];
    for t in traces {
        for (row, d) in acc.iter_mut().zip(t.densities()) {
            for j in 0..5 {
                row[j] += d[j];
            }
        }
    }
    let m = traces.len() as f64;
    acc.iter_mut()
        .for_each(|row| row.iter_mut().for_each(|v| *v /= m));
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MechanismSeries {
    pub mechanism: Mechanism,
    /// Seed-averaged forwarding probability per epoch.
    pub forwarding: Vec<f64>,
    /// Seed-averaged refuser density per epoch.
    pub refusers: Vec<f64>,
}

impl MechanismSeries {
    pub fn label(&self) -> &'static str {
        self.mechanism.label()
    }
}

/// Seed-averaged forwarding probability and refuser density for each
/// mechanism on a shared network.
pub fn compare_mechanisms(
    net: &MinerNetwork,
    probs: &PropagationProbabilities<f64>,
    mechanisms: &[Mechanism],
    epochs: usize,
    seeds: &[u64],
) -> Result<Vec<MechanismSeries>> {
    if seeds.is_empty() {
        return Err(Error::Config("at least one seed is required".into()));
    }
    mechanisms
        .iter()
        .map(|m| {
            let traces = run_seeds(net, probs, m, epochs, seeds)?;
            let runs = traces.len() as f64;
            let mut forwarding = vec![0.0; epochs + 1];
            let mut refusers = vec![0.0; epochs + 1];
            for t in &traces {
                for (e, r) in t.records.iter().enumerate() {
                    forwarding[e] += r.p_f_effective;
                    refusers[e] += r.counts[3] as f64 / t.n as f64;
                }
            }
            forwarding.iter_mut().for_each(|v| *v /= runs);
            refusers.iter_mut().for_each(|v| *v /= runs);
            Ok(MechanismSeries {
                mechanism: m.clone(),
                forwarding,
                refusers,
            })
        })
        .collect()
}
