//! Population/archive search over crosstalk rates.
//!
//! Rates are processed from the largest score down. Every population member
//! is checked against the current rate: safe members are kept (and, when the
//! rate spans several users, also branched into single-user variants); unsafe
//! members are archived with the rate that broke them and replaced by repaired
//! candidates. The search stops when the population empties.

mod connect;
mod repair;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::completion::DEFAULT_COMPLETION_BUDGET;
use crate::model::{sort_rates, Allocation, CanonicalKey, ConnectivityGraph, CrosstalkRate, RateError, SizeRequests};
use crate::safety::{involved_parties, is_safe};

pub use connect::{connect, connector_sets, new_alloc, remain};
pub use repair::{alloc_impacted, alloc_trusted, alloc_unallocated, improve_alloc};

/// Allocations keyed (and deduplicated) by structure, in canonical order.
pub type Candidates = BTreeMap<CanonicalKey, Allocation>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Keep at most this many population members after each admission round.
    pub max_population: Option<usize>,
    pub max_paths_per_connect: usize,
    /// Node budget for each completability check.
    pub completion_budget: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_population: None,
            max_paths_per_connect: 64,
            completion_budget: DEFAULT_COMPLETION_BUDGET,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AllocError {
    #[error("not enough qubits: {requested} requested, {available} available")]
    InsufficientQubits { requested: usize, available: usize },
    #[error("request sizes must be positive")]
    ZeroSizeRequest,
    #[error("rate {index}: {source}")]
    InvalidRate { index: usize, source: RateError },
}

/// Read-only inputs shared by the candidate generators.
#[derive(Debug, Clone, Copy)]
pub struct SearchContext<'a> {
    pub graph: &'a ConnectivityGraph,
    pub sizes: &'a SizeRequests,
    pub config: &'a SearchConfig,
}

#[derive(Debug, Clone, Default)]
pub struct SearchState {
    pub population: Candidates,
    pub archive: Candidates,
    pub processed: Vec<CrosstalkRate>,
}

impl SearchState {
    fn contains(&self, key: &CanonicalKey) -> bool {
        self.population.contains_key(key) || self.archive.contains_key(key)
    }
}

/// Population after one rate was processed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSnapshot {
    pub rate: CrosstalkRate,
    pub population: Vec<Allocation>,
    pub archived: Vec<CanonicalKey>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchRun {
    /// Population and archive, in canonical order.
    pub results: Vec<Allocation>,
    pub sizes: SizeRequests,
    pub sorted_rates: Vec<CrosstalkRate>,
    pub snapshots: Vec<RateSnapshot>,
}

/// Appends an idle untrusted request for any qubits nobody asked for.
pub fn update_sizes(vertex_count: usize, sizes: &SizeRequests) -> SizeRequests {
    let mut out = sizes.clone();
    out.idle = None;
    let total = out.total();
    if total < vertex_count {
        out.idle = Some(vertex_count - total);
    }
    out
}

/// Score given to the all-unallocated starting point: above every rate.
pub fn initial_score(rates: &[CrosstalkRate]) -> f64 {
    rates.iter().map(|r| r.score).fold(0.0, f64::max) + 1.0
}

/// Records the evaluation of a safe allocation against `r`.
pub fn eval_alloc(a: &mut Allocation, r: &CrosstalkRate) {
    a.score = r.score;
    if involved_parties(a, r) >= 2 {
        a.penalty += r.score;
        a.incidental.push(r.clone());
    }
}

/// Moves a population member to the archive with `r` as its first unsafe rate.
pub fn archive_alloc(key: &CanonicalKey, state: &mut SearchState, r: &CrosstalkRate) {
    if let Some(mut a) = state.population.remove(key) {
        a.last_rate = Some(r.clone());
        state.archive.insert(key.clone(), a);
    }
}

/// Admits new candidates that are safe for every processed rate. Attributes
/// are recomputed from the candidate's own structure over the processed rates.
pub fn update_population(candidates: Candidates, state: &mut SearchState, cfg: &SearchConfig) {
    for (key, cand) in candidates {
        if state.contains(&key) {
            continue;
        }
        if !state.processed.iter().all(|r| is_safe(&cand, r).safe) {
            log::debug!("rejected {key}: unsafe for an earlier rate");
            continue;
        }
        let mut fresh = cand.structure_only();
        for r in &state.processed {
            eval_alloc(&mut fresh, r);
        }
        state.population.insert(key, fresh);
    }
    if let Some(limit) = cfg.max_population {
        prune(&mut state.population, limit);
    }
}

fn prune(population: &mut Candidates, limit: usize) {
    if population.len() <= limit {
        return;
    }
    let mut ranked: Vec<(CanonicalKey, f64, f64)> =
        population.iter().map(|(k, a)| (k.clone(), a.score, a.penalty)).collect();
    ranked.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.2.total_cmp(&y.2)).then_with(|| x.0.cmp(&y.0)));
    for (key, _, _) in ranked.into_iter().skip(limit) {
        population.remove(&key);
    }
}

fn check_inputs(g: &ConnectivityGraph, sizes: &SizeRequests, rates: &[CrosstalkRate]) -> Result<(), AllocError> {
    let requested = sizes.trusted.iter().chain(&sizes.untrusted).sum::<usize>();
    if requested > g.vertex_count() {
        return Err(AllocError::InsufficientQubits {
            requested,
            available: g.vertex_count(),
        });
    }
    if sizes.trusted.iter().chain(&sizes.untrusted).any(|s| *s == 0) {
        return Err(AllocError::ZeroSizeRequest);
    }
    for (index, r) in rates.iter().enumerate() {
        r.validate(g).map_err(|source| AllocError::InvalidRate { index, source })?;
    }
    Ok(())
}

pub fn allocate(
    g: &ConnectivityGraph,
    sizes: &SizeRequests,
    rates: &[CrosstalkRate],
    cfg: &SearchConfig,
) -> Result<Vec<Allocation>, AllocError> {
    allocate_traced(g, sizes, rates, cfg).map(|run| run.results)
}

/// Runs the search and keeps a population snapshot per processed rate.
pub fn allocate_traced(
    g: &ConnectivityGraph,
    sizes: &SizeRequests,
    rates: &[CrosstalkRate],
    cfg: &SearchConfig,
) -> Result<SearchRun, AllocError> {
    check_inputs(g, sizes, rates)?;
    let sizes = update_sizes(g.vertex_count(), sizes);
    let sorted = sort_rates(rates);
    let ctx = SearchContext {
        graph: g,
        sizes: &sizes,
        config: cfg,
    };

    let start = Allocation::empty(g.vertex_count(), initial_score(&sorted));
    let mut state = SearchState::default();
    state.population.insert(start.key(), start);
    let mut snapshots = Vec::new();

    for rate in &sorted {
        state.processed.push(rate.clone());
        let current: Vec<CanonicalKey> = state.population.keys().cloned().collect();
        let mut archived = Vec::new();
        for key in current {
            let Some(member) = state.population.get(&key).cloned() else {
                continue;
            };
            let candidates = if is_safe(&member, rate).safe {
                let branches = if involved_parties(&member, rate) >= 2 {
                    improve_alloc(&member, rate, &ctx)
                } else {
                    Candidates::new()
                };
                if let Some(m) = state.population.get_mut(&key) {
                    eval_alloc(m, rate);
                }
                branches
            } else {
                let mut c = alloc_unallocated(&member, &rate.impacted, &ctx);
                c = alloc_impacted(c, rate, &ctx);
                c.extend(improve_alloc(&member, rate, &ctx));
                c.extend(alloc_trusted(&member, &rate.impacting, &ctx));
                archive_alloc(&key, &mut state, rate);
                archived.push(key.clone());
                c
            };
            update_population(candidates, &mut state, cfg);
        }
        log::debug!(
            "rate {rate}: population {}, archived {}",
            state.population.len(),
            archived.len()
        );
        snapshots.push(RateSnapshot {
            rate: rate.clone(),
            population: state.population.values().cloned().collect(),
            archived,
        });
        if state.population.is_empty() {
            break;
        }
    }

    let mut all = state.archive;
    all.extend(state.population);
    Ok(SearchRun {
        results: all.into_values().collect(),
        sizes,
        sorted_rates: sorted,
        snapshots,
    })
}
