use rayon::prelude::*;
use serde::Serialize;

use super::stats::Band;
use crate::error::{Error, Result};
use crate::integrator::{residual, simulate_path, MartingaleTerms, SimConfig, Trajectory};
use crate::model::{CrispModel, State};

/// Column names of the per-time quantities, in [`EnsembleSummary::bands`] order.
pub const QUANTITIES: [&str; 9] = [
    "S",
    "x",
    "y",
    "meanS",
    "meanx",
    "meany",
    "lnx_over_t",
    "lny_over_t",
    "phi",
];

#[derive(Debug, Clone, Default)]
pub struct EnsembleOptions {
    /// Worker threads; `None` uses the global rayon pool. Output does not
    /// depend on this.
    pub workers: Option<usize>,
}

/// What the harness keeps from one simulated path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSummary {
    pub path: u64,
    pub terminal: State,
    /// Running averages at every recorded time.
    pub means: Vec<[f64; 3]>,
    /// Flag-aware terminal `ln x/t` and `ln y/t`.
    pub lyapunov: [f64; 2],
    pub phi: f64,
    pub martingales: MartingaleTerms,
    pub extinct_at: [Option<f64>; 3],
    pub floored_at: [Option<f64>; 3],
    pub all_positive: bool,
    pub n_jumps: usize,
}

impl PathSummary {
    pub fn terminal_means(&self) -> [f64; 3] {
        self.means.last().copied().unwrap_or([f64::NAN; 3])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathFailure {
    pub path: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub n_paths: usize,
    pub horizon: f64,
    pub times: Vec<f64>,
    /// Per recorded time, one [`Band`] per entry of [`QUANTITIES`].
    pub bands: Vec<[Band; 9]>,
    /// Per recorded time, fraction of paths flagged extinct in x and in y.
    pub extinct_fraction: Vec<[f64; 2]>,
    pub paths: Vec<PathSummary>,
    pub failures: Vec<PathFailure>,
}

impl EnsembleSummary {
    pub fn terminal_band(&self, quantity: &str) -> Option<Band> {
        let q = QUANTITIES.iter().position(|&n| n == quantity)?;
        self.bands.last().map(|b| b[q])
    }

    pub fn terminal_extinct_fraction(&self) -> [f64; 2] {
        self.extinct_fraction.last().copied().unwrap_or([f64::NAN; 2])
    }

    pub fn martingale_terms(&self) -> Vec<MartingaleTerms> {
        self.paths.iter().map(|p| p.martingales).collect()
    }
}

struct PathRecord {
    times: Vec<f64>,
    rows: Vec<[f64; 9]>,
    summary: PathSummary,
}

fn run_path(model: &CrispModel, config: &SimConfig, path: u64) -> std::result::Result<PathRecord, PathFailure> {
    let traj = simulate_path(model, config, path).map_err(|e| PathFailure {
        path,
        message: e.to_string(),
    })?;
    Ok(reduce(model, &traj, path))
}

fn reduce(model: &CrispModel, traj: &Trajectory, path: u64) -> PathRecord {
    let rows = (0..traj.len())
        .map(|k| {
            let s = traj.states[k];
            let m = traj.means[k];
            let r = traj.log_ratios[k];
            [s.s, s.x, s.y, m[0], m[1], m[2], r[0], r[1], residual(model, &m)]
        })
        .collect::<Vec<_>>();
    let phi = rows.last().map_or(f64::NAN, |r| r[8]);
    let summary = PathSummary {
        path,
        terminal: traj.terminal_state(),
        means: traj.means.clone(),
        lyapunov: [traj.lyapunov_statistic(0), traj.lyapunov_statistic(1)],
        phi,
        martingales: traj.martingales,
        extinct_at: traj.extinct_at,
        floored_at: traj.floored_at,
        all_positive: traj.states.iter().all(State::is_strictly_positive),
        n_jumps: traj.jumps.len(),
    };
    PathRecord {
        times: traj.times.clone(),
        rows,
        summary,
    }
}

/// Runs `n_paths` independent paths (streams `0..n_paths` of `config.seed`)
/// and aggregates them in path order.
pub fn ensemble(model: &CrispModel, config: &SimConfig, n_paths: usize) -> Result<EnsembleSummary> {
    ensemble_with(model, config, n_paths, &EnsembleOptions::default())
}

pub fn ensemble_with(
    model: &CrispModel,
    config: &SimConfig,
    n_paths: usize,
    options: &EnsembleOptions,
) -> Result<EnsembleSummary> {
    if n_paths == 0 {
        return Err(Error::InvalidConfig("an ensemble needs at least one path".into()));
    }
    config.check()?;
    model.check()?;

    let run = || {
        (0..n_paths as u64)
            .into_par_iter()
            .map(|p| run_path(model, config, p))
            .collect::<Vec<_>>()
    };
    let results = match options.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };

    let mut records = Vec::with_capacity(n_paths);
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(f) => failures.push(f),
        }
    }
    if failures.len() * 10 >= n_paths {
        return Err(Error::TooManyAborts {
            aborted: failures.len(),
            total: n_paths,
        });
    }
    Ok(aggregate(records, failures, n_paths))
}

fn aggregate(records: Vec<PathRecord>, failures: Vec<PathFailure>, n_paths: usize) -> EnsembleSummary {
    let n_times = records[0].rows.len();
    let mut times = Vec::with_capacity(n_times);
    let mut bands = Vec::with_capacity(n_times);
    let mut extinct_fraction = Vec::with_capacity(n_times);
    let mut column = vec![0.0; records.len()];

    for k in 0..n_times {
        let t = records[0].times[k];
        times.push(t);
        let band: [Band; 9] = std::array::from_fn(|q| {
            for (slot, rec) in column.iter_mut().zip(&records) {
                *slot = rec.rows[k][q];
            }
            Band::of(&column)
        });
        bands.push(band);
        let n = records.len() as f64;
        let frac = |c: usize| {
            records
                .iter()
                .filter(|r| r.summary.extinct_at[c].is_some_and(|at| at <= t))
                .count() as f64
                / n
        };
        extinct_fraction.push([frac(1), frac(2)]);
    }

    EnsembleSummary {
        n_paths,
        horizon: times.last().copied().unwrap_or(0.0),
        times,
        bands,
        extinct_fraction,
        paths: records.into_iter().map(|r| r.summary).collect(),
        failures,
    }
}
