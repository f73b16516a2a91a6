use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mechanism::{Mechanism, Policy};
use super::network::MinerNetwork;
use super::rng::{fill_uniforms, phase_rng, Phase, RNG_ALGORITHM};
use crate::error::Result;
use crate::params::PropagationProbabilities;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MinerState {
    Ignorant,
    Spreader,
    Unspreader,
    Refuser,
    Evildoer,
}

impl MinerState {
    pub const ALL: [MinerState; 5] = [
        MinerState::Ignorant,
        MinerState::Spreader,
        MinerState::Unspreader,
        MinerState::Refuser,
        MinerState::Evildoer,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

/// Per-miner state plus whether each miner has received the block and
/// whether it ever chose to forward it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Population {
    pub states: Vec<MinerState>,
    pub received: Vec<bool>,
    pub forwarded: Vec<bool>,
}

impl Population {
    /// Everyone ignorant except `seed_miner`, who holds the block.
    pub fn seeded(n: usize, seed_miner: usize) -> Self {
        let mut pop = Population {
            states: vec![MinerState::Ignorant; n],
            received: vec![false; n],
            forwarded: vec![false; n],
        };
        pop.states[seed_miner] = MinerState::Spreader;
        pop.received[seed_miner] = true;
        pop.forwarded[seed_miner] = true;
        pop
    }

    /// Counts in `(i, s, u, r, e)` order.
    pub fn counts(&self) -> [u64; 5] {
        let mut c = [0u64; 5];
        for s in &self.states {
            c[s.index()] += 1;
        }
        c
    }
}

/// Uniforms for one epoch, drawn up front from the `(epoch, phase)` streams.
#[derive(Debug, Default, Clone)]
pub struct EpochDraws {
    evil: Vec<f64>,
    contact: Vec<f64>,
    immunity: Vec<f64>,
    recovery: Vec<f64>,
}

impl EpochDraws {
    pub fn fill(&mut self, seed: u64, epoch: u64, n: usize, k: usize) {
        fill_uniforms(&mut self.evil, seed, epoch, Phase::Evil, n);
        fill_uniforms(&mut self.contact, seed, epoch, Phase::Contact, n * k);
        fill_uniforms(&mut self.immunity, seed, epoch, Phase::Immunity, n);
        fill_uniforms(&mut self.recovery, seed, epoch, Phase::Recovery, n);
    }
}

/// Advances one synchronous epoch with a fixed forwarding probability and
/// returns the number of block transmissions.
pub fn step(
    net: &MinerNetwork,
    pop: &mut Population,
    probs: &PropagationProbabilities<f64>,
    draws: &EpochDraws,
) -> u64 {
    let mut policy = Policy::Constant(probs.p_f());
    step_with(net, pop, probs, &mut policy, 0, draws)
}

/// The four phases, in order:
/// 1. ignorants turn evildoer with `P_e`;
/// 2. every spreader sends to all its neighbours: a first-contacted ignorant
///    becomes a spreader with the policy's probability, otherwise an
///    unspreader; a contacted spreader turns refuser with `P_i`;
/// 3. spreaders and unspreaders from before phase 2 turn refuser with `P_i`;
/// 4. evildoers revert to ignorant with `P_r`.
///
/// Phases 2 and 3 read the state as it was after phase 1.
pub(crate) fn step_with(
    net: &MinerNetwork,
    pop: &mut Population,
    probs: &PropagationProbabilities<f64>,
    policy: &mut Policy,
    epoch: usize,
    draws: &EpochDraws,
) -> u64 {
    use MinerState::*;
    let n = net.n();
    let k = net.k();

    for v in 0..n {
        if pop.states[v] == Ignorant && draws.evil[v] < probs.p_e() {
            pop.states[v] = Evildoer;
        }
    }

    let snapshot = pop.clone();
    let mut transmissions = 0u64;
    for v in 0..n {
        if snapshot.states[v] != Spreader {
            continue;
        }
        for (slot, &w) in net.neighbors(v).iter().enumerate() {
            let w = w as usize;
            let u = draws.contact[v * k + slot];
            transmissions += 1;
            let useful = snapshot.states[w] == Ignorant && pop.states[w] == Ignorant;
            if useful {
                let p = policy.forward_probability(w, epoch, net, &snapshot);
                pop.received[w] = true;
                if u < p {
                    pop.states[w] = Spreader;
                    pop.forwarded[w] = true;
                } else {
                    pop.states[w] = Unspreader;
                }
            } else if snapshot.states[w] == Spreader && pop.states[w] == Spreader && u < probs.p_i()
            {
                pop.states[w] = Refuser;
            }
            policy.record_forward(v, useful);
        }
    }

    for v in 0..n {
        let was = snapshot.states[v];
        if (was == Spreader || was == Unspreader)
            && pop.states[v] == was
            && draws.immunity[v] < probs.p_i()
        {
            pop.states[v] = Refuser;
        }
    }

    for v in 0..n {
        if pop.states[v] == Evildoer && draws.recovery[v] < probs.p_r() {
            pop.states[v] = Ignorant;
        }
    }

    policy.end_epoch();
    transmissions
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: u64,
    /// `(i, s, u, r, e)` counts.
    pub counts: [u64; 5],
    /// Forwarding probability in effect for the step leaving this epoch.
    pub p_f_effective: f64,
    /// Messages sent in the step that produced this epoch.
    pub transmissions: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimTrace {
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub mechanism: Mechanism,
    pub probs: PropagationProbabilities<f64>,
    pub rng_algorithm: &'static str,
    /// One record per epoch, starting with the initial assignment.
    pub records: Vec<EpochRecord>,
    /// Miners that received the block.
    pub informed: u64,
    /// Miners that received the block and chose to forward it.
    pub forwarders: u64,
}

impl SimTrace {
    pub fn epochs(&self) -> usize {
        self.records.len() - 1
    }

    pub fn last(&self) -> &EpochRecord {
        self.records
            .last()
            .expect("trace holds the initial assignment")
    }

    /// Per-epoch densities in `(i, s, u, r, e)` order.
    pub fn densities(&self) -> Vec<[f64; 5]> {
        let n = self.n as f64;
        self.records
            .iter()
            .map(|r| r.counts.map(|c| c as f64 / n))
            .collect()
    }

    /// True once no miner is still spreading or deciding.
    pub fn is_complete(&self) -> bool {
        let c = self.last().counts;
        c[1] == 0 && c[2] == 0
    }

    /// Fraction of informed miners that forwarded.
    pub fn realized_forwarding_density(&self) -> f64 {
        self.forwarders as f64 / self.informed as f64
    }
}

/// Runs with a constant forwarding probability `probs.p_f()`.
pub fn run_simulation(
    net: &MinerNetwork,
    probs: &PropagationProbabilities<f64>,
    epochs: usize,
    seed: u64,
) -> Result<SimTrace> {
    run_mechanism(
        net,
        probs,
        &Mechanism::Gossip { p: probs.p_f() },
        epochs,
        seed,
    )
}

/// Runs `epochs` steps where the mechanism supplies the forwarding
/// probability; `P_e`, `P_r` and `P_i` come from `probs`.
pub fn run_mechanism(
    net: &MinerNetwork,
    probs: &PropagationProbabilities<f64>,
    mechanism: &Mechanism,
    epochs: usize,
    seed: u64,
) -> Result<SimTrace> {
    let n = net.n();
    let mut policy = mechanism.policy(n, epochs)?;
    let first = phase_rng(seed, 0, Phase::Seed).random_range(0..n);
    let mut pop = Population::seeded(n, first);
    let mut records = Vec::with_capacity(epochs + 1);
    records.push(EpochRecord {
        epoch: 0,
        counts: pop.counts(),
        p_f_effective: policy.effective(0, net, &pop),
        transmissions: 0,
    });
    let mut draws = EpochDraws::default();
    for epoch in 0..epochs {
        draws.fill(seed, epoch as u64, n, net.k());
        let transmissions = step_with(net, &mut pop, probs, &mut policy, epoch, &draws);
        records.push(EpochRecord {
            epoch: epoch as u64 + 1,
            counts: pop.counts(),
            p_f_effective: policy.effective(epoch + 1, net, &pop),
            transmissions,
        });
    }
    Ok(SimTrace {
        seed,
        n,
        k: net.k(),
        mechanism: mechanism.clone(),
        probs: *probs,
        rng_algorithm: RNG_ALGORITHM,
        records,
        informed: pop.received.iter().filter(|&&r| r).count() as u64,
        forwarders: pop.forwarded.iter().filter(|&&f| f).count() as u64,
    })
}
