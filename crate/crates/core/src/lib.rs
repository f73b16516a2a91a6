//! Block propagation modelling for public blockchains.
//!
//! * [`aobi`]: closed-form minimum average age of block information and the
//!   packing-rate trade-off.
//! * [`epidemic`]: five-state mean-field propagation dynamics and the
//!   terminal consensus level.
//! * [`evogame`]: forwarding incentives as a two-population replicator game.
//! * [`abm`]: seeded agent-based simulation on random regular graphs.
//!
//! The analytic modules are generic over [`Real`]; the aliases below fix the
//! scalar to `f64`.
//!
//! ```
//! use blockfresh::aobi::min_average_aobi;
//! use blockfresh::epidemic::{initial_densities, integrate, steady_state};
//! use blockfresh::{PropagationProbabilities, RawNetworkParams};
//!
//! let params = RawNetworkParams::table_defaults().validate()?;
//! let aobi = min_average_aobi(&params);
//! assert_eq!(aobi.rounds.rounds, 9);
//! assert!((aobi.total - 311.314).abs() < 1e-9);
//!
//! // new(p_f, p_e, p_r, p_i)
//! let probs = PropagationProbabilities::new(0.5, 0.1, 0.3, 0.2)?;
//! let traj = integrate(initial_densities(4000)?, &probs, 3, 500.0, 0.01)?;
//! assert!(traj.last().s < 1e-6);
//! assert!(steady_state(&probs).r_infinity > 0.5);
//! # Ok::<(), blockfresh::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abm;
pub mod aobi;
pub mod epidemic;
pub mod error;
pub mod evogame;
pub mod export;
pub mod ode;
pub mod params;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type NetworkParams = params::NetworkParams<f64>;
pub type RawNetworkParams = params::RawNetworkParams<f64>;
pub type PropagationProbabilities = params::PropagationProbabilities<f64>;
pub type PayoffParams = params::PayoffParams<f64>;
pub type StateDensities = epidemic::StateDensities<f64>;
pub type EpidemicTrajectory = epidemic::EpidemicTrajectory<f64>;
pub type AobiBreakdown = aobi::AobiBreakdown<f64>;
pub type GameState = evogame::GameState<f64>;
pub type GameSolution = evogame::GameSolution<f64>;
pub type EquilibriumReport = evogame::EquilibriumReport<f64>;
