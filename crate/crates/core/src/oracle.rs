//! Independent oracles for the closed-form evaluators.
//!
//! [`mc_estimate`] and [`mc_curve`] simulate component lifetimes and read
//! the gate logic directly; [`enumerate_exact`] sums the probability of
//! every failing combination of leaf states. Neither goes through the
//! product formulas in [`eval`](crate::eval).
//!
//! Monte Carlo trials are split into chunks of [`CHUNK_TRIALS`]; chunk `i`
//! draws from [`random_stream(seed, i)`](crate::dist::random_stream) and
//! chunk results are merged by integer addition, so an estimate depends only
//! on `(seed, trials)` and not on how many threads ran it.

use rand::Rng;
use rayon::prelude::*;

use crate::dist::random_stream;
use crate::error::{Error, Result};
use crate::eval::{check_grid, wsp_fail_prob};
use crate::model::{FailureLogic, Formalism, Model, Shape, StructureTree};

/// Trials simulated from one random stream.
pub const CHUNK_TRIALS: u64 = 4096;

/// Largest number of leaves [`enumerate_exact`] accepts (2^20 states).
pub const MAX_ENUMERATION_LEAVES: usize = 20;

/// Monte Carlo point estimate. For a DFT `p_hat` estimates the failure
/// probability, for a DRBD the reliability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_count(hits: u64, trials: u64, seed: u64) -> Self {
        let p_hat = hits as f64 / trials as f64;
        Self {
            p_hat,
            stderr: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
            trials,
            seed,
        }
    }

    /// Whether `value` lies within `k` standard errors of the estimate.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        (value - self.p_hat).abs() <= k * self.stderr
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn mc_estimate(model: &Model, t: f64, trials: u64, seed: u64) -> Result<McEstimate> {
    mc_estimate_with_workers(model, t, trials, seed, default_workers())
}

pub fn mc_estimate_with_workers(model: &Model, t: f64, trials: u64, seed: u64, workers: usize) -> Result<McEstimate> {
    Ok(mc_curve_with_workers(model, &[t], trials, seed, workers)?[0])
}

/// Estimates at every grid point from a single set of simulated lifetimes.
pub fn mc_curve(model: &Model, grid: &[f64], trials: u64, seed: u64) -> Result<Vec<McEstimate>> {
    mc_curve_with_workers(model, grid, trials, seed, default_workers())
}

pub fn mc_curve_with_workers(
    model: &Model,
    grid: &[f64],
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<McEstimate>> {
    check_grid(grid)?;
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    model.validate().into_result()?;

    let chunks = trials.div_ceil(CHUNK_TRIALS);
    let run_chunk = |chunk: u64| -> Vec<u64> {
        let n = CHUNK_TRIALS.min(trials - chunk * CHUNK_TRIALS);
        match model {
            Model::Dft(root) => simulate_chunk(root, grid, seed, chunk, n),
            Model::Drbd(root) => simulate_chunk(root, grid, seed, chunk, n),
        }
    };
    let merge = |mut a: Vec<u64>, b: Vec<u64>| {
        a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        a
    };

    let failures = if workers <= 1 {
        (0..chunks).map(run_chunk).fold(vec![0; grid.len()], merge)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
        pool.install(|| {
            (0..chunks)
                .into_par_iter()
                .map(run_chunk)
                .reduce(|| vec![0; grid.len()], merge)
        })
    };

    Ok(failures
        .into_iter()
        .map(|failed| {
            let hits = match model.formalism() {
                Formalism::Dft => failed,
                Formalism::Drbd => trials - failed,
            };
            McEstimate::from_count(hits, trials, seed)
        })
        .collect())
}

/// Number of failed systems at each grid instant over one chunk of trials.
fn simulate_chunk<N: StructureTree>(root: &N, grid: &[f64], seed: u64, chunk: u64, trials: u64) -> Vec<u64> {
    let mut rng = random_stream(seed, chunk);
    // first_failed[i]: trials whose system is first seen failed at grid[i]
    let mut first_failed = vec![0u64; grid.len() + 1];
    for _ in 0..trials {
        let life = system_lifetime(root, &mut rng);
        first_failed[grid.partition_point(|&t| t < life)] += 1;
    }
    first_failed.pop();
    let mut running = 0;
    first_failed
        .into_iter()
        .map(|c| {
            running += c;
            running
        })
        .collect()
}

/// Samples every leaf lifetime (in tree order, warm spares as main, dormant,
/// active) and returns the instant at which the system fails.
pub(crate) fn system_lifetime<N: StructureTree, R: Rng + ?Sized>(node: &N, rng: &mut R) -> f64 {
    match node.shape() {
        Shape::Basic(_, dist) => dist.sample_lifetime(rng),
        Shape::Spare(_, p) => {
            let main = p.main().sample_lifetime(rng);
            let dormant = p.dormant().sample_lifetime(rng);
            let active = p.active().sample_lifetime(rng);
            if dormant <= main {
                main
            } else {
                main + active
            }
        }
        // every child is sampled, so streams stay aligned across formalisms
        Shape::Gate(FailureLogic::Any, children) => children
            .iter()
            .map(|c| system_lifetime(c, rng))
            .fold(f64::INFINITY, f64::min),
        Shape::Gate(FailureLogic::All, children) => children
            .iter()
            .map(|c| system_lifetime(c, rng))
            .fold(0.0, f64::max),
    }
}

/// Exact failure probability (DFT) or reliability (DRBD) by summing over all
/// 2^m combinations of leaf states. A warm spare is one leaf whose failure
/// probability is [`wsp_fail_prob`].
pub fn enumerate_exact(model: &Model, t: f64) -> Result<f64> {
    model.validate().into_result()?;
    let failed = match model {
        Model::Dft(root) => enumerate_failure(root, t)?,
        Model::Drbd(root) => enumerate_failure(root, t)?,
    };
    Ok(match model.formalism() {
        Formalism::Dft => failed,
        Formalism::Drbd => 1.0 - failed,
    })
}

fn enumerate_failure<N: StructureTree>(root: &N, t: f64) -> Result<f64> {
    let mut probs = Vec::new();
    leaf_probabilities(root, t, &mut probs)?;
    if probs.len() > MAX_ENUMERATION_LEAVES {
        return Err(Error::Capacity {
            leaves: probs.len(),
            max: MAX_ENUMERATION_LEAVES,
        });
    }
    let mut total = 0.0;
    for state in 0u32..(1 << probs.len()) {
        let mut next = 0;
        if !structure_fails(root, state, &mut next) {
            continue;
        }
        let weight: f64 = probs
            .iter()
            .enumerate()
            .map(|(i, &p)| if state >> i & 1 == 1 { p } else { 1.0 - p })
            .product();
        total += weight;
    }
    Ok(total)
}

fn leaf_probabilities<N: StructureTree>(node: &N, t: f64, out: &mut Vec<f64>) -> Result<()> {
    match node.shape() {
        Shape::Basic(_, dist) => out.push(dist.cdf(t)?),
        Shape::Spare(_, params) => out.push(wsp_fail_prob(params, t)?),
        Shape::Gate(_, children) => {
            for c in children {
                leaf_probabilities(c, t, out)?;
            }
        }
    }
    Ok(())
}

/// Structure function: bit `i` of `state` tells whether leaf `i` (tree
/// order) has failed.
fn structure_fails<N: StructureTree>(node: &N, state: u32, next: &mut usize) -> bool {
    match node.shape() {
        Shape::Basic(..) | Shape::Spare(..) => {
            let failed = state >> *next & 1 == 1;
            *next += 1;
            failed
        }
        Shape::Gate(logic, children) => {
            let mut any = false;
            let mut all = true;
            for c in children {
                let f = structure_fails(c, state, next);
                any |= f;
                all &= f;
            }
            match logic {
                FailureLogic::Any => any,
                FailureLogic::All => all,
            }
        }
    }
}
