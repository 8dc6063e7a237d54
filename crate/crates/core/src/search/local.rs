//! Min-conflicts local search with random restarts.
//!
//! A state assigns a `k`-subset of the symbol universe to every label. The
//! objective is the number of conflicting cross-block pairs. Each step picks
//! one of the most conflicted blocks, proposes a fresh uniformly sampled
//! `k`-subset for it, and accepts strict improvements always and sideways
//! moves with a fixed probability.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::par::map_tasks;
use super::{finish, Counters, SearchConfig, SearchError, SearchResult, Status};
use crate::blocks::BlockSystem;
use crate::gf::{Field, FieldElement};

const ADD_TABLE_LIMIT: usize = 1024;
const CLOCK_INTERVAL: u64 = 1 << 10;

/// Seed of worker `w`'s random stream.
pub fn worker_seed(seed: u64, worker: usize) -> u64 {
    splitmix64(seed ^ splitmix64(worker as u64 ^ 0x5851_f42d_4c95_7f2d))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Incrementally maintained conflict counts for one assignment of blocks.
#[derive(Clone)]
pub struct LocalState {
    field: Arc<Field>,
    q: usize,
    blocks: Vec<Vec<u32>>,
    member: Vec<bool>,
    /// `offset[r * q + s]` is the member difference `b - a` that conflicts
    /// between labels `r` and `s`.
    offset: Vec<u32>,
    add: Option<Vec<u32>>,
    conf: Vec<u64>,
    total: u64,
    cover: Vec<u32>,
}

impl LocalState {
    /// Builds the state and scores it from scratch.
    pub fn new(field: Arc<Field>, blocks: Vec<Vec<u32>>) -> Self {
        let q = field.order() as usize;
        assert_eq!(blocks.len(), q);
        let mut offset = vec![0u32; q * q];
        for r in field.elements() {
            for s in field.elements() {
                if r != s {
                    let inv = field.inv(field.sub(s, r)).expect("distinct labels");
                    offset[r.index() * q + s.index()] = inv.code();
                }
            }
        }
        let add = (q <= ADD_TABLE_LIMIT).then(|| {
            let mut t = vec![0u32; q * q];
            for a in field.elements() {
                for b in field.elements() {
                    t[a.index() * q + b.index()] = field.add(a, b).code();
                }
            }
            t
        });
        let mut member = vec![false; q * q];
        let mut cover = vec![0u32; q];
        for (s, block) in blocks.iter().enumerate() {
            for &e in block {
                member[s * q + e as usize] = true;
                cover[e as usize] += 1;
            }
        }
        let mut state = LocalState {
            field,
            q,
            blocks,
            member,
            offset,
            add,
            conf: vec![0; q],
            total: 0,
            cover,
        };
        state.rescore();
        state
    }

    fn rescore(&mut self) {
        let mut sum = 0;
        for r in 0..self.q {
            let c = self.block_conflicts(r, &self.blocks[r]);
            self.conf[r] = c;
            sum += c;
        }
        self.total = sum / 2;
    }

    #[inline]
    fn add(&self, a: u32, b: u32) -> usize {
        match &self.add {
            Some(t) => t[a as usize * self.q + b as usize] as usize,
            None => self
                .field
                .add(FieldElement::from_code(a), FieldElement::from_code(b))
                .index(),
        }
    }

    /// Conflicts between `members` placed at label `r` and the current block at `s`.
    #[inline]
    fn pair_conflicts(&self, r: usize, members: &[u32], s: usize) -> u64 {
        let off = self.offset[r * self.q + s];
        let row = s * self.q;
        members
            .iter()
            .filter(|&&a| self.member[row + self.add(a, off)])
            .count() as u64
    }

    /// Conflicts `members` would have at label `r` against every other block.
    pub fn block_conflicts(&self, r: usize, members: &[u32]) -> u64 {
        (0..self.q)
            .filter(|&s| s != r)
            .map(|s| self.pair_conflicts(r, members, s))
            .sum()
    }

    /// Number of conflicting unordered pairs.
    pub fn conflicts(&self) -> u64 {
        self.total
    }

    /// Conflicting pairs that involve block `r`.
    pub fn block_score(&self, r: usize) -> u64 {
        self.conf[r]
    }

    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    /// Universe symbols not used by any block.
    fn missing_among(&self, universe: &[u32]) -> usize {
        universe
            .iter()
            .filter(|&&e| self.cover[e as usize] == 0)
            .count()
    }

    /// Replaces block `r`, updating every affected count.
    pub fn replace(&mut self, r: usize, members: Vec<u32>) {
        let q = self.q;
        let mut new_r = 0;
        for s in 0..q {
            if s == r {
                continue;
            }
            let old = self.pair_conflicts(r, &self.blocks[r], s);
            let new = self.pair_conflicts(r, &members, s);
            self.conf[s] = self.conf[s] + new - old;
            new_r += new;
        }
        let old_r = self.conf[r];
        for &e in &self.blocks[r] {
            self.member[r * q + e as usize] = false;
            self.cover[e as usize] -= 1;
        }
        for &e in &members {
            self.member[r * q + e as usize] = true;
            self.cover[e as usize] += 1;
        }
        self.blocks[r] = members;
        self.conf[r] = new_r;
        self.total = self.total + new_r - old_r;
    }

    pub fn to_system(&self) -> BlockSystem {
        BlockSystem::from_codes(self.field.clone(), self.blocks.clone())
            .expect("state holds valid blocks")
    }
}

fn random_subset(universe: &[u32], k: usize, rng: &mut impl Rng) -> Vec<u32> {
    let mut out: Vec<u32> = sample(rng, universe.len(), k)
        .into_iter()
        .map(|i| universe[i])
        .collect();
    out.sort_unstable();
    out
}

struct Run<'a> {
    config: &'a SearchConfig,
    field: &'a Arc<Field>,
    symbols: Option<&'a [u32]>,
    deadline: Option<Instant>,
    stop: Option<&'a AtomicBool>,
}

enum RestartEnd {
    Found(BlockSystem),
    Steps,
    Halt,
}

impl Run<'_> {
    fn universe(&self, rng: &mut impl Rng) -> Vec<u32> {
        let q = self.field.order();
        match (self.symbols, self.config.t) {
            (Some(s), _) => s.to_vec(),
            (None, Some(t)) => {
                let all: Vec<u32> = (0..q).collect();
                random_subset(&all, t, rng)
            }
            (None, None) => (0..q).collect(),
        }
    }

    fn halted(&self) -> bool {
        self.stop.is_some_and(|s| s.load(Ordering::Relaxed))
            || self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn restart(&self, rng: &mut ChaCha8Rng, counters: &mut Counters) -> RestartEnd {
        let q = self.field.order() as usize;
        let k = self.config.k;
        let exact = self.config.t.is_some();
        let universe = self.universe(rng);
        let blocks = (0..q).map(|_| random_subset(&universe, k, rng)).collect();
        let mut state = LocalState::new(self.field.clone(), blocks);
        let mut targets = Vec::with_capacity(q);
        for step in 0..self.config.max_steps_per_restart {
            if step % CLOCK_INTERVAL == 0 && self.halted() {
                return RestartEnd::Halt;
            }
            let missing = if exact {
                state.missing_among(&universe)
            } else {
                0
            };
            if state.total == 0 && missing == 0 {
                return RestartEnd::Found(state.to_system());
            }
            counters.steps += 1;
            let r = if state.total == 0 {
                rng.gen_range(0..q)
            } else {
                let top = *state.conf.iter().max().expect("q >= 2");
                targets.clear();
                targets.extend((0..q).filter(|&s| state.conf[s] == top));
                targets[rng.gen_range(0..targets.len())]
            };
            let proposal = random_subset(&universe, k, rng);
            counters.evaluations += 1;
            let new = state.block_conflicts(r, &proposal);
            let old = state.conf[r];
            let accept = match new.cmp(&old) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Equal => {
                    if state.total == 0 {
                        let mut trial = state.clone();
                        trial.replace(r, proposal.clone());
                        trial.missing_among(&universe) < missing
                            || rng.gen_bool(self.config.sideways_probability)
                    } else {
                        rng.gen_bool(self.config.sideways_probability)
                    }
                }
                std::cmp::Ordering::Greater => false,
            };
            if accept {
                state.replace(r, proposal);
            }
        }
        let missing = if exact {
            state.missing_among(&universe)
        } else {
            0
        };
        if state.total == 0 && missing == 0 {
            return RestartEnd::Found(state.to_system());
        }
        RestartEnd::Steps
    }

    fn worker(&self, w: usize) -> (Option<BlockSystem>, Counters) {
        let workers = self.config.workers as u64;
        let share = self.config.max_restarts / workers
            + u64::from((w as u64) < self.config.max_restarts % workers);
        let mut rng = ChaCha8Rng::seed_from_u64(worker_seed(self.config.seed, w));
        let mut counters = Counters::default();
        for _ in 0..share {
            if self.halted() {
                break;
            }
            counters.restarts += 1;
            match self.restart(&mut rng, &mut counters) {
                RestartEnd::Found(system) => {
                    if let Some(stop) = self.stop {
                        stop.store(true, Ordering::Relaxed);
                    }
                    return (Some(system), counters);
                }
                RestartEnd::Steps => {}
                RestartEnd::Halt => break,
            }
        }
        (None, counters)
    }
}

/// Seeded restart search over `config.workers` independent random streams.
///
/// Worker `w` draws from a stream seeded by [`worker_seed`]`(seed, w)` and
/// runs its share of `max_restarts`. In deterministic mode every worker runs
/// to its own end and the lowest-indexed success wins, so the result depends
/// only on the configuration (as long as the time budget does not expire).
/// Otherwise the first success stops the others.
pub fn local_search(config: &SearchConfig) -> Result<SearchResult, SearchError> {
    let (field, symbols) = config.prepare()?;
    let stop = AtomicBool::new(false);
    let run = Run {
        config,
        field: &field,
        symbols: symbols.as_deref(),
        deadline: config.time_budget.map(|d| Instant::now() + d),
        stop: (!config.deterministic).then_some(&stop),
    };
    let outcomes = map_tasks(config.workers, |w| run.worker(w));
    let mut counters = Counters::default();
    let mut witness = None;
    for (found, c) in outcomes {
        counters += c;
        if witness.is_none() {
            witness = found;
        }
    }
    let status = if witness.is_some() {
        Status::Found
    } else {
        Status::BudgetSpent
    };
    Ok(finish(config, status, witness, counters))
}
