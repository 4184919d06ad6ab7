//! Brute-force checks for small platforms: every complete allocation, the
//! longest safe prefix of the sorted rates, attribute replay, and a naive
//! index-order baseline.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocator::{allocate, eval_alloc, initial_score, update_sizes, AllocError, SearchConfig};
use crate::ingest::synth_rates;
use crate::model::{
    sort_rates, Allocation, CanonicalKey, ConnectivityGraph, CrosstalkRate, QubitId, QubitSet, SizeRequests, Trust,
    UserComponent,
};
use crate::safety::is_safe;
use crate::selection::{select, SelectionError};

pub const DEFAULT_ENUMERATION_CAP: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("platform has {qubits} qubits; exhaustive enumeration is capped at {cap}")]
    InstanceTooLarge { qubits: usize, cap: usize },
    #[error(transparent)]
    Alloc(#[from] AllocError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("naive allocation cannot place a request of {size} qubits")]
pub struct BaselineInfeasible {
    pub size: usize,
}

/// Every partition of the platform into connected components that matches
/// the requests (idle included) exactly, in canonical order.
pub fn enumerate_complete(g: &ConnectivityGraph, sizes: &SizeRequests, cap: usize) -> Result<Vec<Allocation>, OracleError> {
    let n = g.vertex_count();
    if n > cap {
        return Err(OracleError::InstanceTooLarge { qubits: n, cap });
    }
    let sizes = update_sizes(n, sizes);
    let requests = sizes.requests();
    let mut out: BTreeMap<CanonicalKey, Allocation> = BTreeMap::new();
    if sizes.total() != n {
        return Ok(Vec::new());
    }
    let mut chosen: Vec<UserComponent> = Vec::new();
    let free: QubitSet = g.vertices().collect();
    place(g, &requests, 0, &free, &mut chosen, &mut out);
    Ok(out.into_values().collect())
}

fn place(
    g: &ConnectivityGraph,
    requests: &[(crate::model::RequestId, usize)],
    next: usize,
    free: &QubitSet,
    chosen: &mut Vec<UserComponent>,
    out: &mut BTreeMap<CanonicalKey, Allocation>,
) {
    if next == requests.len() {
        if free.is_empty() {
            let a = Allocation::from_components(g.vertex_count(), chosen.clone());
            out.insert(a.key(), a);
        }
        return;
    }
    let (id, size) = requests[next];
    let members: Vec<QubitId> = free.iter().copied().collect();
    for set in subsets_of_size(&members, size) {
        if !g.is_connected_subset(&set) {
            continue;
        }
        let rest: QubitSet = free.difference(&set).copied().collect();
        chosen.push(UserComponent::new(id.trust(), set));
        place(g, requests, next + 1, &rest, chosen, out);
        chosen.pop();
    }
}

fn subsets_of_size(items: &[QubitId], k: usize) -> Vec<QubitSet> {
    let mut out = Vec::new();
    let n = items.len();
    if k > n {
        return out;
    }
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize == k {
            out.push((0..n).filter(|i| mask & (1 << i) != 0).map(|i| items[i]).collect());
        }
    }
    out
}

/// Number of complete allocations, counted independently of
/// [`enumerate_complete`]: connected set partitions (block holding the lowest
/// free qubit first), each weighted by the ways of labelling its blocks with
/// trust classes so that the (trust, size) multiset matches the requests.
pub fn count_complete(g: &ConnectivityGraph, sizes: &SizeRequests) -> u64 {
    let n = g.vertex_count();
    let sizes = update_sizes(n, sizes);
    if sizes.total() != n {
        return 0;
    }
    let mut want: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (id, s) in sizes.requests() {
        let e = want.entry(s).or_default();
        match id.trust() {
            Trust::Trusted => e.0 += 1,
            Trust::Untrusted => e.1 += 1,
        }
    }
    let all: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut blocks = Vec::new();
    partitions(g, all, &mut blocks, &want)
}

fn mask_set(mask: u32) -> QubitSet {
    (0..32).filter(|i| mask & (1 << i) != 0).map(QubitId).collect()
}

fn partitions(g: &ConnectivityGraph, free: u32, blocks: &mut Vec<usize>, want: &BTreeMap<usize, (usize, usize)>) -> u64 {
    if free == 0 {
        let mut have: BTreeMap<usize, usize> = BTreeMap::new();
        for b in blocks.iter() {
            *have.entry(*b).or_default() += 1;
        }
        if have.len() != want.len() {
            return 0;
        }
        let mut ways = 1u64;
        for (s, (t, u)) in want {
            if have.get(s) != Some(&(t + u)) {
                return 0;
            }
            ways *= binomial(t + u, *t);
        }
        return ways;
    }
    let low = free.trailing_zeros();
    let rest = free & !(1 << low);
    let mut total = 0;
    // Every subset of the remaining free qubits, joined with the lowest one.
    let mut sub = rest;
    loop {
        let block = sub | (1 << low);
        let size = block.count_ones() as usize;
        if want.contains_key(&size) && g.is_connected_subset(&mask_set(block)) {
            blocks.push(size);
            total += partitions(g, free & !block, blocks, want);
            blocks.pop();
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & rest;
    }
    total
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Length of the longest prefix of `rates` (processing order) for which `a`
/// is safe.
pub fn safe_prefix(a: &Allocation, rates: &[CrosstalkRate]) -> usize {
    rates.iter().take_while(|r| is_safe(a, r).safe).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Mismatch {
    Score { stored: f64, replayed: f64 },
    Penalty { stored: f64, replayed: f64 },
    Incidental { stored: usize, replayed: usize },
    LastRate { stored: Option<CrosstalkRate>, replayed: Option<CrosstalkRate> },
}

/// Attributes obtained by evaluating `rates` in order against the structure
/// of `a`, stopping at the first unsafe rate.
pub fn replay(a: &Allocation, rates: &[CrosstalkRate]) -> Allocation {
    let mut fresh = a.structure_only();
    fresh.score = initial_score(rates);
    for r in rates {
        if !is_safe(&fresh, r).safe {
            fresh.last_rate = Some(r.clone());
            break;
        }
        eval_alloc(&mut fresh, r);
    }
    fresh
}

/// Compares stored attributes with a replay over the final structure.
pub fn replay_check(a: &Allocation, rates: &[CrosstalkRate]) -> Result<(), Vec<Mismatch>> {
    let r = replay(a, rates);
    let mut bad = Vec::new();
    if a.score.to_bits() != r.score.to_bits() {
        bad.push(Mismatch::Score {
            stored: a.score,
            replayed: r.score,
        });
    }
    if (a.penalty - r.penalty).abs() > 1e-12 {
        bad.push(Mismatch::Penalty {
            stored: a.penalty,
            replayed: r.penalty,
        });
    }
    let same_list = a.incidental.len() == r.incidental.len()
        && a.incidental.iter().zip(&r.incidental).all(|(x, y)| x.same_as(y));
    if !same_list {
        bad.push(Mismatch::Incidental {
            stored: a.incidental.len(),
            replayed: r.incidental.len(),
        });
    }
    let same_last = match (&a.last_rate, &r.last_rate) {
        (None, None) => true,
        (Some(x), Some(y)) => x.same_as(y),
        _ => false,
    };
    if !same_last {
        bad.push(Mismatch::LastRate {
            stored: a.last_rate.clone(),
            replayed: r.last_rate.clone(),
        });
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(bad)
    }
}

/// Fills requests in order (trusted, untrusted, idle), each with the first
/// qubits of a breadth-first walk from the lowest free qubit.
pub fn baseline_naive(g: &ConnectivityGraph, sizes: &SizeRequests) -> Result<Allocation, BaselineInfeasible> {
    let sizes = update_sizes(g.vertex_count(), sizes);
    let mut free: QubitSet = g.vertices().collect();
    let mut comps = Vec::new();
    for (id, size) in sizes.requests() {
        let Some(&start) = free.iter().next() else {
            return Err(BaselineInfeasible { size });
        };
        let mut taken = QubitSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(q) = queue.pop_front() {
            if taken.len() == size {
                break;
            }
            for &w in g.neighbors(q) {
                if taken.len() < size && free.contains(&w) && taken.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        if taken.len() < size {
            return Err(BaselineInfeasible { size });
        }
        free.retain(|q| !taken.contains(q));
        comps.push(UserComponent::new(id.trust(), taken));
    }
    Ok(Allocation::from_components(g.vertex_count(), comps))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub complete_allocations: usize,
    pub optimum_safe_prefix: usize,
    pub optimum_allocations: Vec<CanonicalKey>,
    pub selected: CanonicalKey,
    pub algorithm_safe_prefix: usize,
    /// Optimum minus algorithm.
    pub gap: i64,
    pub baseline: Option<CanonicalKey>,
    pub baseline_safe_prefix: Option<usize>,
}

/// Runs the allocator and selection, then compares against exhaustive search.
pub fn oracle_report(
    g: &ConnectivityGraph,
    sizes: &SizeRequests,
    rates: &[CrosstalkRate],
    cfg: &SearchConfig,
    cap: usize,
) -> Result<OracleReport, OracleError> {
    if g.vertex_count() > cap {
        return Err(OracleError::InstanceTooLarge {
            qubits: g.vertex_count(),
            cap,
        });
    }
    let sorted = sort_rates(rates);
    let results = allocate(g, sizes, rates, cfg)?;
    let chosen = select(&results, g, sizes, &sorted, cfg.completion_budget)?;
    let all = enumerate_complete(g, sizes, cap)?;
    let prefixes: Vec<usize> = all.iter().map(|a| safe_prefix(a, &sorted)).collect();
    let optimum = prefixes.iter().copied().max().unwrap_or(0);
    let algorithm = safe_prefix(&chosen.allocation, &sorted);
    let baseline = baseline_naive(g, sizes).ok();
    Ok(OracleReport {
        complete_allocations: all.len(),
        optimum_safe_prefix: optimum,
        optimum_allocations: all
            .iter()
            .zip(&prefixes)
            .filter(|(_, p)| **p == optimum)
            .map(|(a, _)| a.key())
            .collect(),
        selected: chosen.allocation.key(),
        algorithm_safe_prefix: algorithm,
        gap: optimum as i64 - algorithm as i64,
        baseline_safe_prefix: baseline.as_ref().map(|b| safe_prefix(b, &sorted)),
        baseline: baseline.map(|b| b.key()),
    })
}

/// A small seeded test instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub seed: u64,
    pub graph: ConnectivityGraph,
    pub sizes: SizeRequests,
    pub rates: Vec<CrosstalkRate>,
}

/// Connected graph on 5 to 7 qubits (random tree plus extra edges), one to
/// three users whose sizes sum below the qubit count, and up to ten synthetic
/// rates.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n: usize = rng.gen_range(5..=7);
    let mut edges = Vec::new();
    for v in 1..n as u32 {
        edges.push((rng.gen_range(0..v), v));
    }
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            if !edges.contains(&(a, b)) && rng.gen_bool(0.2) {
                edges.push((a, b));
            }
        }
    }
    let graph = ConnectivityGraph::new(n, &edges).expect("generated edges are valid");
    // Redraw until some complete allocation exists; a single one-qubit user
    // always fits (drop a leaf of the tree, the rest stays connected).
    let mut sizes = SizeRequests::new(vec![], vec![1]);
    for _ in 0..32 {
        let drawn = random_requests(&mut rng, n);
        if count_complete(&graph, &drawn) > 0 {
            sizes = drawn;
            break;
        }
    }
    let max_rates = rng.gen_range(4..=10usize);
    let rates = synth_rates(&graph, seed, Some(max_rates));
    Instance {
        seed,
        graph,
        sizes,
        rates,
    }
}

fn random_requests(rng: &mut ChaCha8Rng, n: usize) -> SizeRequests {
    let users = rng.gen_range(1..=3usize);
    let mut budget = n - 1;
    let mut sizes = SizeRequests::default();
    for _ in 0..users {
        if budget == 0 {
            break;
        }
        let size = rng.gen_range(1..=budget.min(3));
        budget -= size;
        if rng.gen_bool(0.3) {
            sizes.trusted.push(size);
        } else {
            sizes.untrusted.push(size);
        }
    }
    sizes
}

/// `count` instances with consecutive seeds from `base`.
pub fn instance_family(base: u64, count: usize) -> Vec<Instance> {
    (0..count as u64).map(|i| random_instance(base + i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::{qubits, validate_allocation};
    use proptest::prelude::*;

    fn example_sizes() -> SizeRequests {
        SizeRequests::new(vec![], vec![2, 3])
    }

    fn keys(v: &[Allocation]) -> Vec<String> {
        v.iter().map(|a| a.key().to_string()).collect()
    }

    #[test]
    fn running_example_partitions() {
        let all = enumerate_complete(&bowtie(), &example_sizes(), DEFAULT_ENUMERATION_CAP).unwrap();
        // By hand: the pair must be an edge whose removal leaves a connected triple.
        assert_eq!(keys(&all), vec!["{U:{q0,q1}, U:{q2,q3,q4}}", "{U:{q0,q1,q2}, U:{q3,q4}}"]);
        assert!(all.iter().all(|a| !a.components.iter().any(|c| c.qubits == qubits([1, 4]))));
        assert_eq!(count_complete(&bowtie(), &example_sizes()), 2);
    }

    #[test]
    fn path_of_three_has_one_partition() {
        let g = ConnectivityGraph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let all = enumerate_complete(&g, &SizeRequests::new(vec![], vec![3]), 8).unwrap();
        assert_eq!(keys(&all), vec!["{U:{q0,q1,q2}}"]);
    }

    #[test]
    fn cap_is_enforced() {
        let g = ConnectivityGraph::new(9, &[(0, 1)]).unwrap();
        assert_eq!(
            enumerate_complete(&g, &SizeRequests::new(vec![], vec![1]), DEFAULT_ENUMERATION_CAP),
            Err(OracleError::InstanceTooLarge { qubits: 9, cap: 8 })
        );
    }

    #[test]
    fn prefixes_on_running_example() {
        let rates = sort_rates(&example_rates());
        assert_eq!(safe_prefix(&Allocation::untrusted(5, &[&[0, 1], &[2, 3, 4]]), &rates), 2);
        assert_eq!(safe_prefix(&Allocation::untrusted(5, &[&[0, 1, 2], &[3, 4]]), &rates), 0);
        assert_eq!(safe_prefix(&Allocation::untrusted(5, &[&[0, 1, 2], &[3, 4]]), &[]), 0);
    }

    #[test]
    fn running_example_report() {
        let rep = oracle_report(
            &bowtie(),
            &example_sizes(),
            &example_rates(),
            &SearchConfig::default(),
            DEFAULT_ENUMERATION_CAP,
        )
        .unwrap();
        assert_eq!(rep.optimum_safe_prefix, 2);
        assert_eq!(rep.algorithm_safe_prefix, 2);
        assert_eq!(rep.gap, 0);
        assert_eq!(rep.complete_allocations, 2);
    }

    #[test]
    fn no_rates_means_every_allocation_is_optimal() {
        let rep = oracle_report(&bowtie(), &example_sizes(), &[], &SearchConfig::default(), 8).unwrap();
        assert_eq!((rep.optimum_safe_prefix, rep.gap), (0, 0));
        assert_eq!(rep.optimum_allocations.len(), 2);
    }

    #[test]
    fn replay_matches_running_example() {
        let rates = sort_rates(&example_rates());
        let results = allocate(&bowtie(), &example_sizes(), &example_rates(), &SearchConfig::default()).unwrap();
        for a in &results {
            assert_eq!(replay_check(a, &rates), Ok(()), "{a}");
        }
        let pair = results.iter().find(|a| a.key().to_string() == "{U:{q2,q3}}").unwrap();
        assert_eq!(pair.penalty, 0.0027);
        let mut tampered = pair.clone();
        tampered.penalty = 0.0;
        assert!(matches!(replay_check(&tampered, &rates).unwrap_err()[..], [Mismatch::Penalty { .. }]));
    }

    #[test]
    fn baseline_traces() {
        let g = bowtie();
        let a = baseline_naive(&g, &SizeRequests::new(vec![], vec![3, 2])).unwrap();
        assert_eq!(a.key().to_string(), "{U:{q0,q1,q2}, U:{q3,q4}}");
        let a = baseline_naive(&g, &SizeRequests::new(vec![], vec![2, 3])).unwrap();
        assert_eq!(a.key().to_string(), "{U:{q0,q1}, U:{q2,q3,q4}}");
        let a = baseline_naive(&g, &SizeRequests::new(vec![], vec![2])).unwrap();
        assert_eq!(a.key().to_string(), "{U:{q0,q1}, U:{q2,q3,q4}}");
        let a = baseline_naive(&g, &SizeRequests::new(vec![], vec![5])).unwrap();
        assert_eq!(a.components.len(), 1);
        let split = ConnectivityGraph::new(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(
            baseline_naive(&split, &SizeRequests::new(vec![], vec![3])),
            Err(BaselineInfeasible { size: 3 })
        );
    }

    #[test]
    fn family_is_deterministic_and_well_formed() {
        let fam = instance_family(100, 20);
        assert_eq!(fam, instance_family(100, 20));
        for inst in &fam {
            let n = inst.graph.vertex_count();
            assert!((5..=7).contains(&n));
            assert!(inst.graph.is_connected());
            assert!(inst.sizes.total() < n);
            assert!(!inst.rates.is_empty());
            assert!(count_complete(&inst.graph, &inst.sizes) > 0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn enumeration_agrees_with_partition_count(seed in 0u64..10_000) {
            let inst = random_instance(seed);
            let all = enumerate_complete(&inst.graph, &inst.sizes, 8).unwrap();
            prop_assert_eq!(all.len() as u64, count_complete(&inst.graph, &inst.sizes));
            for a in &all {
                prop_assert!(validate_allocation(a, &inst.graph).is_ok());
                prop_assert!(a.is_complete());
            }
        }
    }
}
