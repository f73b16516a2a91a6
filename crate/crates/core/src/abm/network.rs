use rand::Rng;
use serde::Serialize;

use super::rng::graph_rng;
use crate::error::{Error, Result};

/// Consecutive rejected pairings before a construction attempt is abandoned.
const MAX_PAIRING_FAILURES: usize = 1_000;
const MAX_RESTARTS: usize = 200;

/// A simple k-regular graph over `n` miners.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinerNetwork {
    n: usize,
    k: usize,
    seed: u64,
    /// Row `v` holds the `k` neighbours of miner `v`.
    adjacency: Vec<u32>,
}

impl MinerNetwork {
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[v * self.k..(v + 1) * self.k]
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).contains(&(b as u32))
    }
}

/// Samples a random simple `k`-regular graph by pairing vertex stubs,
/// rejecting self-loops and repeated edges as they are proposed, and
/// restarting when the remaining stubs cannot be paired.
pub fn build_network(n: u64, k: u64, seed: u64) -> Result<MinerNetwork> {
    let fail = |reason: &str| Error::Graph {
        n,
        k,
        reason: reason.to_owned(),
    };
    if k == 0 {
        return Err(fail("degree must be at least 1"));
    }
    if k >= n {
        return Err(fail("degree must be below the vertex count"));
    }
    if (n * k) % 2 == 1 {
        return Err(fail("n * k must be even"));
    }
    if n > u32::MAX as u64 {
        return Err(fail("too many vertices"));
    }
    let (n, k) = (n as usize, k as usize);
    let mut rng = graph_rng(seed);

    for _ in 0..MAX_RESTARTS {
        if let Some(adj) = try_pairing(n, k, &mut rng) {
            return Ok(MinerNetwork {
                n,
                k,
                seed,
                adjacency: adj.into_iter().flatten().collect(),
            });
        }
    }
    Err(fail(&format!(
        "pairing failed after {MAX_RESTARTS} restarts, try a different seed"
    )))
}

fn try_pairing(n: usize, k: usize, rng: &mut impl Rng) -> Option<Vec<Vec<u32>>> {
    let mut stubs: Vec<u32> = (0..n as u32)
        .flat_map(|v| std::iter::repeat_n(v, k))
        .collect();
    let mut adj: Vec<Vec<u32>> = vec![Vec::with_capacity(k); n];
    let mut failures = 0;
    while !stubs.is_empty() {
        let len = stubs.len();
        let a = rng.random_range(0..len);
        let mut b = rng.random_range(0..len - 1);
        if b >= a {
            b += 1;
        }
        let (u, w) = (stubs[a], stubs[b]);
        if u == w || adj[u as usize].contains(&w) {
            failures += 1;
            if failures >= MAX_PAIRING_FAILURES {
                return None;
            }
            continue;
        }
        failures = 0;
        adj[u as usize].push(w);
        adj[w as usize].push(u);
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        stubs.swap_remove(hi);
        stubs.swap_remove(lo);
    }
    Some(adj)
}
