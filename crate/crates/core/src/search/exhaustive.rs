//! Complete depth-first search over block assignments `B_0, B_1, ..., B_{q-1}`.
//!
//! Every label keeps a domain of still-compatible candidate blocks as a
//! bitset. Assigning a block to label `i` intersects the domain of each later
//! label `j` with a precomputed compatibility row for the label difference
//! `j - i`; an empty domain prunes the branch.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::par::map_tasks;
use super::subsets::{binomial, canonical_universes, k_subsets};
use super::{finish, Counters, SearchConfig, SearchError, SearchResult, Status};
use crate::blocks::BlockSystem;
use crate::gf::{Field, FieldElement};

/// Largest compatibility table (in bits) worth building.
const MAX_COMPAT_BITS: u128 = 1 << 31;
/// Largest number of universe candidates scanned for canonical forms.
const MAX_UNIVERSE_SCAN: u128 = 2_000_000;
const PROBES_PER_UNIVERSE: usize = 256;
const FLUSH_INTERVAL: u64 = 1 << 12;

/// Size of the search tree, counted in attempted assignments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeEstimate {
    /// Tree size with no pruning at all.
    pub unpruned: f64,
    /// Random-probe estimate of the pruned tree, when it was computed.
    pub sampled: Option<f64>,
    pub universes: usize,
}

impl NodeEstimate {
    pub fn best(&self) -> f64 {
        self.sampled.unwrap_or(self.unpruned).min(self.unpruned)
    }
}

struct Instance {
    field: Arc<Field>,
    q: usize,
    k: usize,
    universe: Vec<u32>,
    exact: bool,
    cands: Vec<Vec<u32>>,
    words: usize,
    /// Row `(d * C + x)` holds the candidates `y` that may sit at label
    /// `r + d` when `x` sits at label `r`.
    compat: Vec<u64>,
    /// `diff[i * q + j]` is the code of `j - i`.
    diff: Vec<u32>,
    root: Vec<u64>,
    full: Vec<u64>,
}

impl Instance {
    fn build(field: Arc<Field>, k: usize, universe: Vec<u32>, exact: bool, fix_root: bool) -> Self {
        let q = field.order() as usize;
        let cands = k_subsets(&universe, k);
        let c = cands.len();
        let words = c.div_ceil(64);
        let mut full = vec![0u64; words];
        for x in 0..c {
            full[x / 64] |= 1 << (x % 64);
        }
        // candidates containing each element
        let mut with = vec![0u64; q * words];
        for (x, cand) in cands.iter().enumerate() {
            for &e in cand {
                with[e as usize * words + x / 64] |= 1 << (x % 64);
            }
        }
        let mut compat = vec![0u64; q * c * words];
        let mut row = vec![0u64; words];
        for d in field.nonzero_elements() {
            let f = field.inv(d).expect("nonzero");
            for (x, cand) in cands.iter().enumerate() {
                row.iter_mut().for_each(|w| *w = 0);
                for &a in cand {
                    let b = field.add(FieldElement::from_code(a), f).index();
                    for w in 0..words {
                        row[w] |= with[b * words + w];
                    }
                }
                let base = (d.index() * c + x) * words;
                for w in 0..words {
                    compat[base + w] = full[w] & !row[w];
                }
            }
        }
        let mut diff = vec![0u32; q * q];
        for i in field.elements() {
            for j in field.elements() {
                diff[i.index() * q + j.index()] = field.sub(j, i).code();
            }
        }
        let root = if fix_root {
            let mut root = vec![0u64; words];
            for (x, cand) in cands.iter().enumerate() {
                if cand.contains(&0) {
                    root[x / 64] |= 1 << (x % 64);
                }
            }
            root
        } else {
            full.clone()
        };
        Instance {
            field,
            q,
            k,
            universe,
            exact,
            cands,
            words,
            compat,
            diff,
            root,
            full,
        }
    }

    fn initial_domains(&self, root: &[u64]) -> Vec<u64> {
        let mut dom = vec![0u64; (self.q + 1) * self.q * self.words];
        dom[..self.words].copy_from_slice(root);
        for j in 1..self.q {
            dom[j * self.words..(j + 1) * self.words].copy_from_slice(&self.full);
        }
        dom
    }

    /// Forward-checks candidate `x` at label `depth`, writing the next level.
    /// Returns false if some later label loses every candidate.
    #[inline]
    fn propagate(&self, dom: &mut [u64], depth: usize, x: usize) -> bool {
        let (q, w, c) = (self.q, self.words, self.cands.len());
        let level = q * w;
        let (cur, next) = dom.split_at_mut((depth + 1) * level);
        let cur = &cur[depth * level..];
        for j in depth + 1..q {
            let d = self.diff[depth * q + j] as usize;
            let row = &self.compat[(d * c + x) * w..(d * c + x + 1) * w];
            let src = &cur[j * w..(j + 1) * w];
            let dst = &mut next[j * w..(j + 1) * w];
            let mut any = 0u64;
            for i in 0..w {
                dst[i] = src[i] & row[i];
                any |= dst[i];
            }
            if any == 0 {
                return false;
            }
        }
        true
    }

    fn witness(&self, assign: &[usize]) -> BlockSystem {
        let blocks = assign.iter().map(|&x| self.cands[x].clone()).collect();
        BlockSystem::from_codes(self.field.clone(), blocks).expect("candidates are valid blocks")
    }
}

fn bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let b = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(wi * 64 + b)
        })
    })
}

enum Flow {
    Found,
    Exhausted,
    Cap,
    Time,
    Cancelled,
}

struct Shared<'a> {
    nodes: &'a AtomicU64,
    cap: u64,
    deadline: Option<Instant>,
    best: &'a AtomicUsize,
    cancel_later: bool,
    timed_out: &'a AtomicBool,
}

struct Walker<'a> {
    inst: &'a Instance,
    shared: &'a Shared<'a>,
    task: usize,
    dom: Vec<u64>,
    assign: Vec<usize>,
    cover: Vec<u32>,
    missing: usize,
    local_nodes: u64,
    pending: u64,
    evaluations: u64,
}

impl<'a> Walker<'a> {
    fn new(inst: &'a Instance, shared: &'a Shared<'a>, task: usize, root: &[u64]) -> Self {
        Walker {
            inst,
            shared,
            task,
            dom: inst.initial_domains(root),
            assign: vec![0; inst.q],
            cover: vec![0; inst.q],
            missing: inst.universe.len(),
            local_nodes: 0,
            pending: 0,
            evaluations: 0,
        }
    }

    fn checkpoint(&mut self) -> Option<Flow> {
        let total = self.shared.nodes.fetch_add(self.pending, Ordering::Relaxed) + self.pending;
        self.pending = 0;
        if total > self.shared.cap {
            return Some(Flow::Cap);
        }
        if self.shared.cancel_later && self.shared.best.load(Ordering::Relaxed) < self.task {
            return Some(Flow::Cancelled);
        }
        if self.shared.timed_out.load(Ordering::Relaxed)
            || self.shared.deadline.is_some_and(|d| Instant::now() >= d)
        {
            self.shared.timed_out.store(true, Ordering::Relaxed);
            return Some(Flow::Time);
        }
        None
    }

    fn cover_add(&mut self, x: usize) {
        for &e in &self.inst.cands[x] {
            let slot = &mut self.cover[e as usize];
            if *slot == 0 {
                self.missing -= 1;
            }
            *slot += 1;
        }
    }

    fn cover_remove(&mut self, x: usize) {
        for &e in &self.inst.cands[x] {
            let slot = &mut self.cover[e as usize];
            *slot -= 1;
            if *slot == 0 {
                self.missing += 1;
            }
        }
    }

    fn dfs(&mut self, depth: usize) -> Flow {
        let inst = self.inst;
        let (q, w) = (inst.q, inst.words);
        if depth == q {
            return if !inst.exact || self.missing == 0 {
                Flow::Found
            } else {
                Flow::Exhausted
            };
        }
        let start = (depth * q + depth) * w;
        for wi in 0..w {
            let mut word = self.dom[start + wi];
            while word != 0 {
                let x = wi * 64 + word.trailing_zeros() as usize;
                word &= word - 1;
                self.local_nodes += 1;
                self.pending += 1;
                if self.pending >= FLUSH_INTERVAL {
                    if let Some(flow) = self.checkpoint() {
                        return flow;
                    }
                }
                self.evaluations += (q - depth - 1) as u64;
                if !inst.propagate(&mut self.dom, depth, x) {
                    continue;
                }
                if inst.exact {
                    self.cover_add(x);
                    if self.missing > (q - depth - 1) * inst.k {
                        self.cover_remove(x);
                        continue;
                    }
                }
                self.assign[depth] = x;
                match self.dfs(depth + 1) {
                    Flow::Exhausted => {}
                    other => return other,
                }
                if inst.exact {
                    self.cover_remove(x);
                }
            }
        }
        Flow::Exhausted
    }
}

struct Plan {
    instances: Vec<Instance>,
    estimate: NodeEstimate,
}

fn plan(config: &SearchConfig) -> Result<Plan, SearchError> {
    let (field, symbols) = config.prepare()?;
    let q = field.order() as usize;
    let k = config.k;
    let (universes, exact, fix_root): (Vec<Vec<u32>>, bool, bool) = match (symbols, config.t) {
        (Some(s), _) => (vec![s], true, false),
        (None, Some(t)) => {
            let scan = binomial(q as u64 - 1, t as u64 - 1);
            if scan > MAX_UNIVERSE_SCAN {
                let unpruned = scan as f64 * (binomial(t as u64, k as u64) as f64).powi(q as i32);
                return Err(SearchError::CapExceeded {
                    estimate: unpruned,
                    cap: config.node_cap,
                });
            }
            (canonical_universes(&field, t), true, false)
        }
        (None, None) => (vec![(0..q as u32).collect()], false, true),
    };
    let c = binomial(universes[0].len() as u64, k as u64);
    let root = if fix_root {
        binomial(q as u64 - 1, k as u64 - 1)
    } else {
        c
    } as f64;
    let c = c as f64;
    let per_universe = root * (0..q).map(|i| c.powi(i as i32)).sum::<f64>();
    let unpruned = per_universe * universes.len() as f64;
    let mut estimate = NodeEstimate {
        unpruned,
        sampled: None,
        universes: universes.len(),
    };
    let cap = config.node_cap as f64;
    let compat_bits = (q as u128) * (c as u128) * (c as u128);
    if unpruned > cap && compat_bits > MAX_COMPAT_BITS {
        return Err(SearchError::CapExceeded {
            estimate: unpruned,
            cap: config.node_cap,
        });
    }
    let instances: Vec<Instance> = universes
        .into_iter()
        .map(|u| Instance::build(field.clone(), k, u, exact, fix_root))
        .collect();
    if unpruned > cap {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let sampled = instances
            .iter()
            .map(|inst| {
                (0..PROBES_PER_UNIVERSE)
                    .map(|_| probe(inst, &mut rng))
                    .sum::<f64>()
                    / PROBES_PER_UNIVERSE as f64
            })
            .sum::<f64>();
        estimate.sampled = Some(sampled);
    }
    Ok(Plan {
        instances,
        estimate,
    })
}

/// One random root-to-leaf probe (Knuth's estimator) of the pruned tree.
fn probe(inst: &Instance, rng: &mut impl Rng) -> f64 {
    let (q, w) = (inst.q, inst.words);
    let mut dom = inst.initial_domains(&inst.root);
    let mut cover = vec![0u32; q];
    let mut missing = inst.universe.len();
    let mut weight = 1.0f64;
    let mut total = 0.0f64;
    let mut viable = Vec::new();
    for depth in 0..q {
        let start = (depth * q + depth) * w;
        let here: Vec<usize> = bits(&dom[start..start + w]).collect();
        total += weight * here.len() as f64;
        viable.clear();
        for &x in &here {
            if !inst.propagate(&mut dom, depth, x) {
                continue;
            }
            if inst.exact {
                let newly = inst.cands[x]
                    .iter()
                    .filter(|&&e| cover[e as usize] == 0)
                    .count();
                if missing - newly > (q - depth - 1) * inst.k {
                    continue;
                }
            }
            viable.push(x);
        }
        if viable.is_empty() {
            break;
        }
        weight *= viable.len() as f64;
        let x = viable[rng.gen_range(0..viable.len())];
        inst.propagate(&mut dom, depth, x);
        for &e in &inst.cands[x] {
            if cover[e as usize] == 0 {
                missing -= 1;
            }
            cover[e as usize] += 1;
        }
    }
    total
}

/// Tree-size estimate used by the node-cap guard.
pub fn estimate_nodes(config: &SearchConfig) -> Result<NodeEstimate, SearchError> {
    let mut config = config.clone();
    // compute the sampled figure even when the unpruned tree is small
    config.node_cap = 1;
    match plan(&config) {
        Ok(p) => Ok(p.estimate),
        Err(SearchError::CapExceeded { estimate, .. }) => Ok(NodeEstimate {
            unpruned: estimate,
            sampled: None,
            universes: 0,
        }),
        Err(e) => Err(e),
    }
}

/// Complete search for a uniform `(q,k)` or `(q,k,t)` system.
///
/// With `t` unconstrained, `B_0` is required to contain 0 (any witness can be
/// translated so that it does). With `t` given and no fixed symbols, one
/// universe per affine orbit is searched and the union of the blocks must be
/// exactly that universe. Refuses instances whose estimated tree exceeds the
/// node cap.
pub fn exhaustive_search(config: &SearchConfig) -> Result<SearchResult, SearchError> {
    let Plan {
        instances,
        estimate,
    } = plan(config)?;
    let cap = config.node_cap;
    if estimate.best() > cap as f64 {
        return Err(SearchError::CapExceeded {
            estimate: estimate.best(),
            cap,
        });
    }
    let tasks: Vec<(usize, usize)> = instances
        .iter()
        .enumerate()
        .flat_map(|(u, inst)| bits(&inst.root).map(move |x| (u, x)).collect::<Vec<_>>())
        .collect();
    let nodes = AtomicU64::new(0);
    let best = AtomicUsize::new(usize::MAX);
    let timed_out = AtomicBool::new(false);
    let shared = Shared {
        nodes: &nodes,
        cap,
        deadline: config.time_budget.map(|d| Instant::now() + d),
        best: &best,
        cancel_later: !config.deterministic,
        timed_out: &timed_out,
    };
    let outcomes = map_tasks(tasks.len(), |i| {
        let (u, x) = tasks[i];
        let inst = &instances[u];
        let mut root = vec![0u64; inst.words];
        root[x / 64] |= 1 << (x % 64);
        let mut walker = Walker::new(inst, &shared, i, &root);
        let flow = walker.dfs(0);
        if matches!(flow, Flow::Found) {
            best.fetch_min(i, Ordering::Relaxed);
        }
        nodes.fetch_add(walker.pending, Ordering::Relaxed);
        let witness = matches!(flow, Flow::Found).then(|| inst.witness(&walker.assign));
        let counters = Counters {
            nodes: walker.local_nodes,
            evaluations: walker.evaluations,
            ..Counters::default()
        };
        (flow, witness, counters)
    });
    let mut counters = Counters::default();
    let mut witness = None;
    let mut hit_cap = false;
    let mut hit_time = false;
    for (flow, w, c) in outcomes {
        counters += c;
        match flow {
            Flow::Found if witness.is_none() => witness = w,
            Flow::Cap => hit_cap = true,
            Flow::Time => hit_time = true,
            _ => {}
        }
    }
    counters.steps = counters.nodes;
    if let Some(w) = witness {
        return Ok(finish(config, Status::Found, Some(w), counters));
    }
    if hit_cap {
        return Err(SearchError::CapExceeded {
            estimate: counters.nodes as f64,
            cap,
        });
    }
    let status = if hit_time {
        Status::BudgetSpent
    } else {
        Status::Exhausted
    };
    Ok(finish(config, status, None, counters))
}
