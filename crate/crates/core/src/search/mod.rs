//! Search for uniform `(q,k)` and `(q,k,t)` product-block systems.
//!
//! Two engines share one configuration and result type:
//! [`exhaustive_search`] is a complete depth-first search with forward
//! checking that certifies nonexistence for small instances, and
//! [`local_search`] is a seeded min-conflicts search with restarts for
//! larger ones. [`kappa_lower_bound`] drives both over `k = 1, 2, ...`.

mod exhaustive;
mod kappa;
mod local;
mod par;
mod subsets;

use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;

use crate::blocks::{stats, verify, BlockSystem};
use crate::gf::{Field, FieldError};

pub use exhaustive::{estimate_nodes, exhaustive_search, NodeEstimate};
pub use kappa::{kappa_lower_bound, KappaConfig, KappaResult};
pub use local::{local_search, LocalState};
pub use par::parallel_enabled;
pub use subsets::{binomial, canonical_universes, k_subsets};

/// Default cap on exhaustive search nodes.
pub const DEFAULT_NODE_CAP: u64 = 1_000_000_000;

/// Environment variable overriding [`DEFAULT_NODE_CAP`].
pub const NODE_CAP_ENV: &str = "PBFORGE_NODE_CAP";

/// Probability of accepting a move that leaves the conflict count unchanged.
pub const DEFAULT_SIDEWAYS_PROBABILITY: f64 = 0.25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("exhaustive search refused: estimated {estimate:.3e} nodes exceeds cap {cap}")]
    CapExceeded { estimate: f64, cap: u64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Local,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub q: u64,
    pub k: usize,
    /// Exact number of distinct symbols, if constrained.
    pub t: Option<usize>,
    /// Fixed symbol universe; implies `t = symbols.len()`.
    pub symbols: Option<Vec<u32>>,
    pub mode: Mode,
    pub seed: u64,
    pub max_restarts: u64,
    pub max_steps_per_restart: u64,
    pub time_budget: Option<Duration>,
    pub workers: usize,
    /// Run every worker to completion so results do not depend on scheduling.
    pub deterministic: bool,
    pub sideways_probability: f64,
    pub node_cap: u64,
}

impl SearchConfig {
    pub fn new(q: u64, k: usize) -> Self {
        SearchConfig {
            q,
            k,
            t: None,
            symbols: None,
            mode: Mode::Local,
            seed: 0,
            max_restarts: 1_000,
            max_steps_per_restart: 100_000,
            time_budget: None,
            workers: 1,
            deterministic: true,
            sideways_probability: DEFAULT_SIDEWAYS_PROBABILITY,
            node_cap: node_cap_from_env(),
        }
    }

    pub fn with_t(mut self, t: usize) -> Self {
        self.t = Some(t);
        self
    }

    pub fn with_symbols(mut self, symbols: Vec<u32>) -> Self {
        self.t = Some(symbols.len());
        self.symbols = Some(symbols);
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_budget(mut self, max_restarts: u64, max_steps_per_restart: u64) -> Self {
        self.max_restarts = max_restarts;
        self.max_steps_per_restart = max_steps_per_restart;
        self
    }

    pub fn with_time_budget(mut self, budget: Duration) -> Self {
        self.time_budget = Some(budget);
        self
    }

    pub fn with_deterministic(mut self, deterministic: bool) -> Self {
        self.deterministic = deterministic;
        self
    }

    pub fn with_node_cap(mut self, cap: u64) -> Self {
        self.node_cap = cap;
        self
    }

    /// Checks the invariants and returns the field and explicit universe, if any.
    fn prepare(&self) -> Result<(Arc<Field>, Option<Vec<u32>>), SearchError> {
        let field = Arc::new(Field::new(self.q)?);
        let q = field.order() as usize;
        let bad = |msg: String| Err(SearchError::InvalidConfig(msg));
        if self.k < 1 || self.k > q {
            return bad(format!("k = {} must be in [1, {q}]", self.k));
        }
        if let Some(t) = self.t {
            if t < self.k || t > q {
                return bad(format!("t = {t} must be in [k, q] = [{}, {q}]", self.k));
            }
        }
        if self.workers == 0 {
            return bad("worker count must be positive".into());
        }
        if self.max_restarts == 0 || self.max_steps_per_restart == 0 || self.node_cap == 0 {
            return bad("budgets must be positive".into());
        }
        if self.time_budget.is_some_and(|d| d.is_zero()) {
            return bad("time budget must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.sideways_probability) {
            return bad("sideways probability must lie in [0, 1]".into());
        }
        let symbols = match &self.symbols {
            None => None,
            Some(list) => {
                let mut sorted = list.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != list.len() || sorted.iter().any(|&x| x as usize >= q) {
                    return bad("symbols must be distinct field elements".into());
                }
                if self.t.is_some_and(|t| t != sorted.len()) {
                    return bad("t disagrees with the symbol list".into());
                }
                if sorted.len() < self.k {
                    return bad("fewer symbols than k".into());
                }
                Some(sorted)
            }
        };
        Ok((field, symbols))
    }
}

/// Exhaustive node cap from [`NODE_CAP_ENV`], falling back to the default.
pub fn node_cap_from_env() -> u64 {
    std::env::var(NODE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().replace('_', "").parse::<u64>().ok())
        .filter(|&cap| cap > 0)
        .unwrap_or(DEFAULT_NODE_CAP)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Found,
    Exhausted,
    BudgetSpent,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Found => "found",
            Status::Exhausted => "exhausted",
            Status::BudgetSpent => "budget_spent",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub restarts: u64,
    pub steps: u64,
    /// Candidate-block evaluations (local) or forward checks (exhaustive).
    pub evaluations: u64,
    /// Assignments tried by the exhaustive engine.
    pub nodes: u64,
}

impl std::ops::AddAssign for Counters {
    fn add_assign(&mut self, rhs: Self) {
        self.restarts += rhs.restarts;
        self.steps += rhs.steps;
        self.evaluations += rhs.evaluations;
        self.nodes += rhs.nodes;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub status: Status,
    pub witness: Option<BlockSystem>,
    /// True only when an exhaustive run covered its whole tree.
    pub proof_of_exhaustion: bool,
    pub counters: Counters,
}

impl SearchResult {
    pub fn found(&self) -> bool {
        self.status == Status::Found
    }
}

/// Runs whichever engine `config.mode` selects.
pub fn search(config: &SearchConfig) -> Result<SearchResult, SearchError> {
    match config.mode {
        Mode::Exhaustive => exhaustive_search(config),
        Mode::Local => local_search(config),
    }
}

/// A witness must be conflict-free, uniform of size `k`, and use exactly the
/// requested number of symbols.
pub fn witness_matches(system: &BlockSystem, k: usize, t: Option<usize>) -> bool {
    let st = stats(system);
    verify(system).is_empty() && st.uniform_k == Some(k) && t.is_none_or(|t| st.t == t)
}

fn finish(
    config: &SearchConfig,
    status: Status,
    witness: Option<BlockSystem>,
    counters: Counters,
) -> SearchResult {
    if let Some(w) = &witness {
        assert!(
            witness_matches(w, config.k, config.t),
            "search produced an invalid witness: {w:?}"
        );
    }
    SearchResult {
        status,
        proof_of_exhaustion: status == Status::Exhausted,
        witness,
        counters,
    }
}
