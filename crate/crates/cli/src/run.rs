//! Executes an [`ExperimentSpec`] and writes its files.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use blockfresh::abm::{
    build_network, compare_mechanisms, mean_densities, run_seeds, Mechanism, RNG_ALGORITHM,
};
use blockfresh::aobi::{aobi_tau_sweep, monotonicity_condition};
use blockfresh::epidemic::{
    consensus_level_surface, initial_densities, integrate_sampled, steady_state,
};
use blockfresh::evogame::{
    classify_equilibria, phase_portrait, receiver_threshold, GameOptions, GameState,
};
use blockfresh::export::{self, RunManifest};
use blockfresh::scalar::linspace;
use log::info;
use serde::Serialize;

use crate::error::CliError;
use crate::spec::*;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Summary written next to the data files as `manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentManifest {
    pub name: String,
    pub kind: &'static str,
    pub artifact_version: &'static str,
    pub rng_algorithm: &'static str,
    pub wall_time_s: f64,
    pub spec: ExperimentSpec,
    pub output_dir: PathBuf,
    /// Data files, relative to `output_dir`, excluding the manifest.
    pub files: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

type Files = Vec<(String, Vec<u8>)>;

fn render(write: impl FnOnce(&mut Vec<u8>) -> blockfresh::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn csv_table(header: &[&str], rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

/// Validates, computes every output in memory, then writes the files in
/// order followed by the manifest.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentManifest, CliError> {
    spec.validate()?;
    let started = Instant::now();
    let files = match &spec.experiment {
        Experiment::AobiSweep(s) => aobi_sweep(s)?,
        Experiment::EpidemicRun(s) => epidemic_run(s)?,
        Experiment::SteadyStateSurface(s) => surface(s)?,
        Experiment::GamePortrait(s) => game_portrait(s)?,
        Experiment::AbmRun(s) => abm_run(s, &spec.seeds)?,
        Experiment::MechanismCompare(s) => mechanism_compare(s, &spec.seeds)?,
    };
    fs::create_dir_all(&spec.output_dir).map_err(|e| {
        CliError::Runtime(format!("cannot create {}: {e}", spec.output_dir.display()))
    })?;
    for (name, bytes) in &files {
        let path = spec.output_dir.join(name);
        fs::write(&path, bytes)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    let manifest = ExperimentManifest {
        name: spec.name.clone(),
        kind: spec.experiment.kind(),
        artifact_version: ARTIFACT_VERSION,
        rng_algorithm: RNG_ALGORITHM,
        wall_time_s: started.elapsed().as_secs_f64(),
        spec: spec.clone(),
        output_dir: spec.output_dir.clone(),
        files: files.into_iter().map(|(n, _)| n).collect(),
    };
    let bytes = render(|b| export::write_json(b, &manifest))?;
    fs::write(spec.output_dir.join(MANIFEST_FILE), bytes)?;
    info!(
        "{}: wrote {} files to {} in {:.2}s",
        spec.name,
        manifest.files.len(),
        spec.output_dir.display(),
        manifest.wall_time_s
    );
    Ok(manifest)
}

#[derive(Serialize)]
struct SweepSummary {
    series: String,
    condition_value: f64,
    monotone_increasing: bool,
    tau_star: f64,
    tau_star_feasible: f64,
    argmin_tau: f64,
    min_total_s: f64,
}

fn aobi_sweep(s: &AobiSweepSpec) -> Result<Files, CliError> {
    let mut files = Files::new();
    let mut summary = Vec::new();
    for (label, params) in s.series()? {
        let (lo, hi) = params.tau_range();
        let grid = linspace(
            s.tau_min.unwrap_or(lo),
            s.tau_max.unwrap_or(hi),
            s.tau_points,
        );
        let sweep = aobi_tau_sweep(&params, &grid)?;
        let best = sweep
            .iter()
            .min_by(|a, b| a.1.total.total_cmp(&b.1.total))
            .expect("non-empty grid");
        let m = monotonicity_condition(&params);
        summary.push(SweepSummary {
            series: label.clone(),
            condition_value: m.condition_value,
            monotone_increasing: m.monotone_increasing,
            tau_star: m.tau_star,
            tau_star_feasible: m.tau_star_feasible,
            argmin_tau: best.0,
            min_total_s: best.1.total,
        });
        files.push((
            format!("{label}.csv"),
            render(|b| export::write_aobi_sweep(b, &sweep))?,
        ));
    }
    files.push((
        "monotonicity.json".into(),
        render(|b| export::write_json(b, &summary))?,
    ));
    Ok(files)
}

fn peak(states: &[[f64; 5]], j: usize) -> f64 {
    states
        .iter()
        .map(|d| d[j])
        .fold(f64::NEG_INFINITY, f64::max)
}

fn epidemic_run(s: &EpidemicSpec) -> Result<Files, CliError> {
    let start = initial_densities(s.n_miners)?;
    let mut files = Files::new();
    let mut rows = Vec::new();
    for (tag, probs) in probability_series(&s.probs, &s.vary)? {
        let traj = integrate_sampled(start, &probs, s.k, s.horizon, s.step, s.record_every)?;
        let states: Vec<[f64; 5]> = traj.states.iter().map(|d| d.to_array()).collect();
        let last = traj.last();
        rows.push(vec![
            tag.clone(),
            peak(&states, 1).to_string(),
            peak(&states, 2).to_string(),
            peak(&states, 4).to_string(),
            last.r.to_string(),
            steady_state(&probs).r_infinity.to_string(),
            traj.min_raw_component.to_string(),
        ]);
        files.push((
            format!("trajectory_{tag}.csv"),
            render(|b| export::write_trajectory(b, &traj))?,
        ));
    }
    files.push((
        "summary.csv".into(),
        csv_table(
            &[
                "series",
                "peak_s",
                "peak_u",
                "peak_e",
                "final_r",
                "r_infinity",
                "min_raw_component",
            ],
            rows,
        ),
    ));
    Ok(files)
}

fn surface(s: &SurfaceSpec) -> Result<Files, CliError> {
    let surf = consensus_level_surface(
        s.rows.axis,
        &s.rows.values,
        s.cols.axis,
        &s.cols.values,
        s.fixed_value,
    )?;
    Ok(vec![(
        "surface.csv".into(),
        render(|b| export::write_surface(b, &surf))?,
    )])
}

#[derive(Serialize)]
struct GameSummary {
    receiver_threshold: f64,
    delta_i: f64,
    delta_p: f64,
    delta_u: f64,
    punishment_cost: f64,
}

fn game_portrait(s: &GameSpec) -> Result<Files, CliError> {
    let pay = s.payoff()?;
    let starts = s
        .start_points()
        .into_iter()
        .map(|[x, y]| GameState::new(x, y))
        .collect::<blockfresh::Result<Vec<_>>>()?;
    let opts = GameOptions {
        step: s.step,
        steps_per_epoch: s.steps_per_epoch,
        max_epochs: s.max_epochs,
        tol: s.tol,
    };
    let sols = phase_portrait(&pay, &starts, &opts)?;
    let mut files = Files::new();
    files.push((
        "equilibria.json".into(),
        render(|b| export::write_equilibria(b, &classify_equilibria(&pay)))?,
    ));
    let summary = GameSummary {
        receiver_threshold: receiver_threshold(&pay)?,
        delta_i: pay.extra_reward(),
        delta_p: pay.delta_p(),
        delta_u: pay.delta_u(),
        punishment_cost: pay.punishment_cost(),
    };
    files.push((
        "summary.json".into(),
        render(|b| export::write_json(b, &summary))?,
    ));
    let width = sols.len().to_string().len();
    let mut rows = Vec::new();
    for (j, (start, sol)) in starts.iter().zip(&sols).enumerate() {
        rows.push(vec![
            j.to_string(),
            start.x.to_string(),
            start.y.to_string(),
            sol.terminal.x.to_string(),
            sol.terminal.y.to_string(),
            sol.epochs().to_string(),
            sol.converged.to_string(),
        ]);
        files.push((
            format!("trajectory_{j:0width$}.csv"),
            render(|b| export::write_game_trajectory(b, sol))?,
        ));
    }
    files.push((
        "terminals.csv".into(),
        csv_table(
            &["start", "x0", "y0", "x_end", "y_end", "epochs", "converged"],
            rows,
        ),
    ));
    Ok(files)
}

fn abm_run(s: &AbmSpec, seeds: &[u64]) -> Result<Files, CliError> {
    let per_epoch = (1.0 / s.step).round();
    if (per_epoch * s.step - 1.0).abs() > 1e-9 {
        return Err(CliError::Validation(format!(
            "step {} must divide one epoch evenly",
            s.step
        )));
    }
    let net = build_network(s.n_miners, s.k, s.graph_seed)?;
    let mut files = Files::new();
    let mut rows = Vec::new();
    for (tag, probs) in probability_series(&s.probs, &s.vary)? {
        let mechanism = s
            .mechanism
            .clone()
            .unwrap_or(Mechanism::Gossip { p: probs.p_f() });
        let traces = run_seeds(&net, &probs, &mechanism, s.epochs, seeds)?;
        for t in &traces {
            files.push((
                format!("trace_{tag}_seed{}.csv", t.seed),
                render(|b| export::write_sim_trace(b, t))?,
            ));
            files.push((
                format!("run_{tag}_seed{}.json", t.seed),
                render(|b| export::write_json(b, &RunManifest::of(t)))?,
            ));
        }
        let mean = mean_densities(&traces);
        files.push((
            format!("mean_{tag}.csv"),
            render(|b| export::write_mean_densities(b, &mean))?,
        ));
        let mut row = vec![
            tag.clone(),
            peak(&mean, 4).to_string(),
            mean.last().map_or(0.0, |d| d[3]).to_string(),
        ];
        if s.mean_field && s.epochs > 0 {
            let traj = integrate_sampled(
                initial_densities(s.n_miners)?,
                &probs,
                s.k,
                s.epochs as f64,
                s.step,
                per_epoch as usize,
            )?;
            let ode: Vec<[f64; 5]> = traj.states.iter().map(|d| d.to_array()).collect();
            let deviation = mean
                .iter()
                .zip(&ode)
                .flat_map(|(a, b)| (0..5).map(move |j| (a[j] - b[j]).abs()))
                .fold(0.0, f64::max);
            row.extend([
                peak(&ode, 4).to_string(),
                traj.last().r.to_string(),
                deviation.to_string(),
            ]);
            files.push((
                format!("mean_field_{tag}.csv"),
                render(|b| export::write_trajectory(b, &traj))?,
            ));
        }
        rows.push(row);
    }
    let mut header = vec!["series", "abm_peak_e", "abm_final_r"];
    if s.mean_field && s.epochs > 0 {
        header.extend([
            "mean_field_peak_e",
            "mean_field_final_r",
            "max_abs_deviation",
        ]);
    }
    files.push(("summary.csv".into(), csv_table(&header, rows)));
    Ok(files)
}

fn mechanism_compare(s: &CompareSpec, seeds: &[u64]) -> Result<Files, CliError> {
    let net = build_network(s.n_miners, s.k, s.graph_seed)?;
    let probs = s.probs.try_into()?;
    let mechanisms: Vec<Mechanism> = s.mechanisms.iter().map(|m| m.mechanism.clone()).collect();
    let series = compare_mechanisms(&net, &probs, &mechanisms, s.epochs, seeds)?;
    let mut files = Files::new();
    for (named, ser) in s.mechanisms.iter().zip(&series) {
        files.push((
            format!("mechanism_{}.csv", named.label),
            render(|b| export::write_mechanism_series(b, ser))?,
        ));
    }
    let mut header = vec!["epoch"];
    header.extend(s.mechanisms.iter().map(|m| m.label.as_str()));
    let rows = (0..=s.epochs)
        .map(|e| {
            let mut r = vec![e.to_string()];
            r.extend(series.iter().map(|ser| ser.forwarding[e].to_string()));
            r
        })
        .collect();
    files.push(("forwarding.csv".into(), csv_table(&header, rows)));
    Ok(files)
}
