//! Seeded Monte Carlo estimates of time to discovery.
//!
//! The scheduler never sees the target, so its timeline is computed once
//! and every trial only samples a target cell and flips detection coins on
//! the passes over that cell.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pod::{PodGrid, Scheduler, SchedulerConfig};

/// Pass times of every cell under the deterministic scheduler.
#[derive(Debug, Clone)]
pub struct Timeline {
    pub passes: Vec<Vec<u64>>,
    pub steps: u64,
    pub robots: u32,
}

impl Timeline {
    pub fn compute(grid: &PodGrid, config: &SchedulerConfig) -> Result<Self> {
        let mut s = Scheduler::new(grid.clone(), config)?;
        let mut passes = vec![Vec::new(); grid.cell_prob.len()];
        while let Some(ev) = s.step() {
            for c in ev.passes {
                passes[c].push(ev.t);
            }
        }
        Ok(Timeline { passes, steps: s.time, robots: config.robots })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discovery {
    pub trial: u64,
    /// Step at which the target was detected; `None` if never.
    pub time: Option<u64>,
    /// Passes over the target cell up to and including the detecting one.
    pub passes: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub seed: u64,
    pub robots: u32,
    pub discovery_times: Vec<Discovery>,
    /// Mean over found trials only.
    pub mean_time_to_discovery: Option<f64>,
    pub mean_passes: Option<f64>,
    pub found_fraction: f64,
    /// Fraction of all trials found by each observed discovery time.
    pub prob_found_by: BTreeMap<u64, f64>,
    /// Robot-steps spent over all trials (each trial stops at discovery).
    pub total_effort: u64,
}

/// Runs `trials` independent trials; trial `i` draws from its own stream of
/// a generator seeded with `seed`, so results do not depend on `threads`.
pub fn run_trials(
    grid: &PodGrid,
    config: &SchedulerConfig,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<SimulationReport> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be positive".into()));
    }
    let timeline = Timeline::compute(grid, config)?;
    let run = || -> Vec<Discovery> {
        (0..trials)
            .into_par_iter()
            .map(|trial| run_one(grid, &timeline, seed, trial))
            .collect()
    };
    let found = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Invalid(e.to_string()))?
            .install(run),
        None => run(),
    };
    Ok(summarize(found, &timeline, trials, seed))
}

fn run_one(grid: &PodGrid, timeline: &Timeline, seed: u64, trial: u64) -> Discovery {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut target = grid.cell_prob.len() - 1;
    for (i, &q) in grid.cell_prob.iter().enumerate() {
        acc += q;
        if u < acc && q > 0.0 {
            target = i;
            break;
        }
    }
    for (n, &t) in timeline.passes[target].iter().enumerate() {
        if rng.gen::<f64>() < grid.pod[target] {
            return Discovery { trial, time: Some(t), passes: Some(n as u64 + 1) };
        }
    }
    Discovery { trial, time: None, passes: None }
}

fn summarize(found: Vec<Discovery>, timeline: &Timeline, trials: u64, seed: u64) -> SimulationReport {
    let times: Vec<u64> = found.iter().filter_map(|d| d.time).collect();
    let hits = times.len() as f64;
    let mean = |v: &mut dyn Iterator<Item = u64>| if hits > 0.0 { Some(v.sum::<u64>() as f64 / hits) } else { None };
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for &t in &times {
        *counts.entry(t).or_insert(0) += 1;
    }
    let mut cum = 0;
    let prob_found_by = counts
        .into_iter()
        .map(|(t, c)| {
            cum += c;
            (t, cum as f64 / trials as f64)
        })
        .collect();
    let total_effort = found
        .iter()
        .map(|d| d.time.unwrap_or(timeline.steps) * timeline.robots as u64)
        .sum();
    SimulationReport {
        trials,
        seed,
        robots: timeline.robots,
        mean_time_to_discovery: mean(&mut times.iter().copied()),
        mean_passes: mean(&mut found.iter().filter_map(|d| d.passes)),
        found_fraction: hits / trials as f64,
        prob_found_by,
        total_effort,
        discovery_times: found,
    }
}
