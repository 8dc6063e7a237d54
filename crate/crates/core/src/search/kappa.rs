use std::time::{Duration, Instant};

use super::exhaustive::estimate_nodes;
use super::{search, Mode, SearchConfig, SearchError, Status};
use crate::blocks::BlockSystem;

#[derive(Clone, Debug, PartialEq)]
pub struct KappaConfig {
    pub q: u64,
    pub time_budget: Duration,
    pub seed: u64,
    pub workers: usize,
    pub max_restarts: u64,
    pub max_steps_per_restart: u64,
    pub node_cap: u64,
}

impl KappaConfig {
    pub fn new(q: u64, time_budget: Duration) -> Self {
        let base = SearchConfig::new(q, 1);
        KappaConfig {
            q,
            time_budget,
            seed: 0,
            workers: 1,
            max_restarts: base.max_restarts,
            max_steps_per_restart: base.max_steps_per_restart,
            node_cap: base.node_cap,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KappaResult {
    pub q: u64,
    pub best_k: usize,
    /// `witnesses[i]` is a `(q, i + 1)` system.
    pub witnesses: Vec<BlockSystem>,
    /// Set when `best_k + 1` was ruled out by a complete search, making
    /// `best_k` equal to κ(q).
    pub exact: bool,
}

/// Tries `k = 1, 2, ...` until one fails, using the exhaustive engine when
/// its tree fits under the node cap and local search otherwise. Each `k`
/// gets whatever remains of the time budget.
pub fn kappa_lower_bound(config: &KappaConfig) -> Result<KappaResult, SearchError> {
    let start = Instant::now();
    let mut witnesses = Vec::new();
    let mut exact = false;
    for k in 1..=config.q as usize {
        let Some(remaining) = config
            .time_budget
            .checked_sub(start.elapsed())
            .filter(|d| !d.is_zero())
        else {
            break;
        };
        let mut cfg = SearchConfig::new(config.q, k)
            .with_seed(config.seed.wrapping_add(k as u64))
            .with_workers(config.workers)
            .with_budget(config.max_restarts, config.max_steps_per_restart)
            .with_time_budget(remaining)
            .with_node_cap(config.node_cap);
        let exhaustive_fits = estimate_nodes(&cfg)?.best() <= config.node_cap as f64;
        cfg.mode = if exhaustive_fits {
            Mode::Exhaustive
        } else {
            Mode::Local
        };
        let result = match search(&cfg) {
            Err(SearchError::CapExceeded { .. }) => search(&cfg.clone().with_mode(Mode::Local))?,
            other => other?,
        };
        match result.status {
            Status::Found => witnesses.push(result.witness.expect("found implies witness")),
            Status::Exhausted => {
                exact = true;
                break;
            }
            Status::BudgetSpent => break,
        }
    }
    Ok(KappaResult {
        q: config.q,
        best_k: witnesses.len(),
        witnesses,
        exact,
    })
}
