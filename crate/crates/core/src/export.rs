//! CSV and JSON writers for every result type.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! results always produce byte-identical files.

use std::io::Write;

use serde::Serialize;

use crate::abm::Mechanism;
use crate::abm::{MechanismSeries, SimTrace, RNG_ALGORITHM};
use crate::aobi::AobiBreakdown;
use crate::epidemic::{ConsensusSurface, EpidemicTrajectory, StateDensities};
use crate::error::Result;
use crate::evogame::{EquilibriumReport, GameSolution};
use crate::params::PropagationProbabilities;

fn rows<W: Write>(
    out: W,
    header: &[&str],
    body: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in body {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn f(v: f64) -> String {
    format!("{v}")
}

pub fn write_aobi_sweep<W: Write>(out: W, sweep: &[(f64, AobiBreakdown<f64>)]) -> Result<()> {
    rows(
        out,
        &[
            "tau",
            "monitoring_s",
            "validation_s",
            "communication_s",
            "total_s",
            "rounds",
            "branch",
        ],
        sweep.iter().map(|(tau, b)| {
            vec![
                f(*tau),
                f(b.monitoring_term),
                f(b.validation_term),
                f(b.communication_term),
                f(b.total),
                b.rounds.rounds.to_string(),
                b.rounds.branch.label().to_owned(),
            ]
        }),
    )
}

fn density_row(t: f64, s: &StateDensities<f64>) -> Vec<String> {
    vec![f(t), f(s.i), f(s.s), f(s.u), f(s.r), f(s.e)]
}

pub fn write_trajectory<W: Write>(out: W, traj: &EpidemicTrajectory<f64>) -> Result<()> {
    rows(
        out,
        &["t", "i", "s", "u", "r", "e"],
        traj.times
            .iter()
            .zip(&traj.states)
            .map(|(&t, s)| density_row(t, s)),
    )
}

/// Long format: one row per grid cell.
pub fn write_surface<W: Write>(out: W, surface: &ConsensusSurface<f64>) -> Result<()> {
    let header = [
        surface.row_axis.label(),
        surface.col_axis.label(),
        "r_infinity",
    ];
    let body = surface.row_values.iter().enumerate().flat_map(|(r, &rv)| {
        surface
            .col_values
            .iter()
            .enumerate()
            .map(move |(c, &cv)| vec![f(rv), f(cv), f(surface.get(r, c))])
    });
    rows(out, &header, body)
}

pub fn write_game_trajectory<W: Write>(out: W, sol: &GameSolution<f64>) -> Result<()> {
    rows(
        out,
        &["epoch", "x", "y"],
        sol.trajectory
            .iter()
            .enumerate()
            .map(|(e, s)| vec![e.to_string(), f(s.x), f(s.y)]),
    )
}

pub fn write_equilibria<W: Write>(out: W, reports: &[EquilibriumReport<f64>]) -> Result<()> {
    write_json(out, reports)
}

pub fn write_sim_trace<W: Write>(out: W, trace: &SimTrace) -> Result<()> {
    rows(
        out,
        &[
            "epoch",
            "count_i",
            "count_s",
            "count_u",
            "count_r",
            "count_e",
            "p_f_effective",
            "transmissions",
        ],
        trace.records.iter().map(|r| {
            let mut row = vec![r.epoch.to_string()];
            row.extend(r.counts.iter().map(u64::to_string));
            row.push(f(r.p_f_effective));
            row.push(r.transmissions.to_string());
            row
        }),
    )
}

/// Seed-averaged densities, one row per epoch.
pub fn write_mean_densities<W: Write>(out: W, densities: &[[f64; 5]]) -> Result<()> {
    rows(
        out,
        &["epoch", "i", "s", "u", "r", "e"],
        densities.iter().enumerate().map(|(e, d)| {
            let mut row = vec![e.to_string()];
            row.extend(d.iter().map(|&v| f(v)));
            row
        }),
    )
}

pub fn write_mechanism_series<W: Write>(out: W, series: &MechanismSeries) -> Result<()> {
    rows(
        out,
        &["epoch", "forwarding", "refusers"],
        series
            .forwarding
            .iter()
            .zip(&series.refusers)
            .enumerate()
            .map(|(e, (&p, &r))| vec![e.to_string(), f(p), f(r)]),
    )
}

/// Everything needed to regenerate one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub probs: PropagationProbabilities<f64>,
    pub mechanism: Mechanism,
    pub rng_algorithm: &'static str,
    pub epochs: usize,
}

impl RunManifest {
    pub fn of(trace: &SimTrace) -> Self {
        RunManifest {
            seed: trace.seed,
            n: trace.n,
            k: trace.k,
            probs: trace.probs,
            mechanism: trace.mechanism.clone(),
            rng_algorithm: RNG_ALGORITHM,
            epochs: trace.epochs(),
        }
    }
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}
