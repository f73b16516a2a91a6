//! Scalar abstraction shared by the analytic modules.
//!
//! Everything that is pure math (round counting, the AoBI bounds, the
//! mean-field ODE, the replicator dynamics) is written against [`Real`] so it
//! runs unchanged in `f32` or `f64`. The agent-based simulator is `f64` only.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type usable by the analytic modules.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Panics only for values the target type
    /// cannot represent at all, which never happens for `f32`/`f64`.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + Serialize
        + DeserializeOwned
        + 'static
{
}

/// `n` evenly spaced points over `[lo, hi]` with both endpoints exact.
pub fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let last = n - 1;
            let span = hi - lo;
            (0..n)
                .map(|j| {
                    if j == last {
                        hi
                    } else {
                        lo + span * T::from_count(j as u64) / T::from_count(last as u64)
                    }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints_are_exact() {
        let g = linspace(0.05_f64, 5.0, 101);
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.05);
        assert_eq!(g[100], 5.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(linspace(1.0_f32, 2.0, 1), vec![1.0]);
        assert!(linspace(1.0_f32, 2.0, 0).is_empty());
    }
}
