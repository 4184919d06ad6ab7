//! Cross-module properties over seeded random instances.

use std::collections::BTreeSet;

use proptest::prelude::*;

use qaiccc::model::{sort_rates, validate_allocation, SizeRequests};
use qaiccc::oracle::{baseline_naive, random_instance, replay_check, safe_prefix, Instance};
use qaiccc::safety::is_safe;
use qaiccc::selection::{select, SelectionResult};
use qaiccc::{allocate, CrosstalkRate, SearchConfig};

fn selected(inst: &Instance) -> (SelectionResult, Vec<CrosstalkRate>) {
    let cfg = SearchConfig::default();
    let results = allocate(&inst.graph, &inst.sizes, &inst.rates, &cfg).unwrap();
    let sorted = sort_rates(&inst.rates);
    let sel = select(&results, &inst.graph, &inst.sizes, &sorted, cfg.completion_budget).unwrap();
    (sel, sorted)
}

/// Safe prefix of the selected allocation, and the best baseline prefix over
/// both untrusted request orders.
fn prefixes(inst: &Instance) -> (usize, usize) {
    let (sel, sorted) = selected(inst);
    let mut untrusted = inst.sizes.untrusted.clone();
    untrusted.reverse();
    let best = [inst.sizes.clone(), SizeRequests::new(inst.sizes.trusted.clone(), untrusted)]
        .iter()
        .filter_map(|order| baseline_naive(&inst.graph, order).ok())
        .map(|base| safe_prefix(&base, &sorted))
        .max()
        .unwrap_or(0);
    (safe_prefix(&sel.allocation, &sorted), best)
}

#[test]
fn baseline_counterexample() {
    let inst = random_instance(85408);
    let (sel, _) = selected(&inst);
    assert_eq!(sel.allocation.key().to_string(), "{T:{q0,q3,q4}, U:{q1,q2}, U:{q5}}");
    assert_eq!(prefixes(&inst), (5, 8));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn results_are_valid_unique_and_replay(seed in 1000u64..100_000) {
        let inst = random_instance(seed);
        let results = allocate(&inst.graph, &inst.sizes, &inst.rates, &SearchConfig::default()).unwrap();
        let sorted = sort_rates(&inst.rates);
        let keys: BTreeSet<_> = results.iter().map(|a| a.key()).collect();
        prop_assert_eq!(keys.len(), results.len());
        for a in &results {
            prop_assert!(validate_allocation(a, &inst.graph).is_ok());
            let sum: f64 = a.incidental.iter().map(|r| r.score).sum();
            prop_assert!((a.penalty - sum).abs() <= 1e-12);
            prop_assert_eq!(replay_check(a, &sorted), Ok(()));
            let end = a.last_rate.as_ref().map_or(sorted.len(), |l| sorted.iter().position(|r| r.same_as(l)).unwrap());
            prop_assert!(sorted[..end].iter().all(|r| is_safe(a, r).safe));
        }
    }

    #[test]
    fn selection_covers_all_qubits(seed in 1000u64..100_000) {
        let inst = random_instance(seed);
        let (sel, _) = selected(&inst);
        prop_assert!(sel.allocation.is_complete());
        prop_assert!(validate_allocation(&sel.allocation, &inst.graph).is_ok());
        let covered: usize = sel.assignment.iter().map(|(_, qs)| qs.len()).sum();
        prop_assert_eq!(covered, inst.graph.vertex_count());
    }

    // Fails on roughly 2% of seeds: when only a fresh trusted owner of the
    // impacting qubits makes a rate safe, the search never builds it.
    // Run with `--ignored` to see a counterexample.
    #[test]
    #[ignore = "known greedy counterexamples, see baseline_counterexample"]
    fn never_loses_to_baseline(seed in 1000u64..100_000) {
        let inst = random_instance(seed);
        let (ours, best_baseline) = prefixes(&inst);
        prop_assert!(ours >= best_baseline, "seed {}", seed);
    }

    #[test]
    fn allocation_is_deterministic(seed in 1000u64..100_000) {
        let inst = random_instance(seed);
        let a = allocate(&inst.graph, &inst.sizes, &inst.rates, &SearchConfig::default()).unwrap();
        let b = allocate(&inst.graph, &inst.sizes, &inst.rates, &SearchConfig::default()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn pruned_search_stays_valid(seed in 1000u64..100_000, limit in 1usize..4) {
        let inst = random_instance(seed);
        let cfg = SearchConfig { max_population: Some(limit), ..SearchConfig::default() };
        let results = allocate(&inst.graph, &inst.sizes, &inst.rates, &cfg).unwrap();
        let sorted = sort_rates(&inst.rates);
        for a in &results {
            prop_assert!(validate_allocation(a, &inst.graph).is_ok());
            prop_assert_eq!(replay_check(a, &sorted), Ok(()));
        }
    }
}
