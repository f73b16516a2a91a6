//! Counter-based random streams.
//!
//! Every simulation draw comes from ChaCha8 seeded with the run seed and a
//! stream id derived from `(epoch, phase)`. Runs that differ only in their
//! probabilities therefore consume identical uniforms at identical
//! positions, which keeps comparisons across parameter values low-variance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Recorded in every output so traces can be regenerated elsewhere.
pub const RNG_ALGORITHM: &str = "chacha8-seed_from_u64-stream(epoch*8+phase)-v1";

const PHASES_PER_EPOCH: u64 = 8;
const GRAPH_STREAM: u64 = u64::MAX;
const TIMELINE_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub(crate) enum Phase {
    Evil = 0,
    Contact = 1,
    Immunity = 2,
    Recovery = 3,
    Seed = 7,
}

pub(crate) fn phase_rng(seed: u64, epoch: u64, phase: Phase) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch * PHASES_PER_EPOCH + phase as u64);
    rng
}

/// Overwrites `buf` with `len` uniforms in `[0, 1)` from one phase stream.
pub(crate) fn fill_uniforms(buf: &mut Vec<f64>, seed: u64, epoch: u64, phase: Phase, len: usize) {
    let mut rng = phase_rng(seed, epoch, phase);
    buf.clear();
    buf.extend((0..len).map(|_| rng.random::<f64>()));
}

pub(crate) fn graph_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(GRAPH_STREAM);
    rng
}

pub(crate) fn timeline_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(TIMELINE_STREAM);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        fill_uniforms(&mut a, 5, 3, Phase::Contact, 16);
        fill_uniforms(&mut b, 5, 3, Phase::Contact, 16);
        assert_eq!(a, b);
        fill_uniforms(&mut b, 5, 3, Phase::Evil, 16);
        assert_ne!(a, b);
        fill_uniforms(&mut b, 5, 4, Phase::Contact, 16);
        assert_ne!(a, b);
        assert!(a.iter().all(|u| (0.0..1.0).contains(u)));
    }

    #[test]
    fn prefix_is_stable_under_length() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        fill_uniforms(&mut a, 1, 0, Phase::Immunity, 8);
        fill_uniforms(&mut b, 1, 0, Phase::Immunity, 32);
        assert_eq!(a[..], b[..8]);
    }
}
