use std::path::{Path, PathBuf};

use qaiccc::allocator::allocate_traced;
use qaiccc::ingest::{load_platform, load_rates, load_requests};
use qaiccc::model::{qubits, sort_rates, Allocation, RequestId, SizeRequests};
use qaiccc::oracle::{baseline_naive, enumerate_complete, oracle_report, replay_check, safe_prefix};
use qaiccc::safety::{involved_parties, is_safe, SafetyReason};
use qaiccc::selection::{rank, select};
use qaiccc::{ConnectivityGraph, CrosstalkRate, SearchConfig};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/running_example").join(name)
}

fn inputs() -> (ConnectivityGraph, SizeRequests, Vec<CrosstalkRate>) {
    let g = load_platform(&data("platform.json")).unwrap();
    let s = load_requests(&data("requests.json")).unwrap();
    let r = load_rates(&data("rates.json"), &g).unwrap();
    (g, s, r)
}

fn find<'a>(allocs: &'a [Allocation], key: &str) -> &'a Allocation {
    allocs.iter().find(|a| a.key().to_string() == key).unwrap_or_else(|| panic!("{key} missing"))
}

#[test]
fn composite_record_resolves_to_first_rate() {
    let (_, _, rates) = inputs();
    assert_eq!(rates[0].score, 0.0027);
    assert_eq!(rates[0].impacting, qubits([3, 4]));
}

#[test]
fn q1_and_q4_cannot_share_a_user() {
    let (g, s, _) = inputs();
    let bad = Allocation::untrusted(5, &[&[0, 2, 3], &[1, 4]]);
    assert!(qaiccc::model::validate_allocation(&bad, &g).is_err());
    let all = enumerate_complete(&g, &s, 8).unwrap();
    assert!(all.iter().all(|a| a.key() != bad.key()));
}

#[test]
fn search_trace() {
    let (g, s, r) = inputs();
    let run = allocate_traced(&g, &s, &r, &SearchConfig::default()).unwrap();
    assert_eq!(run.sizes.idle, None);

    let first = &run.snapshots[0];
    assert_eq!(first.archived.len(), 1);
    assert!(first.archived[0].components.is_empty());
    for a in &first.population {
        assert!(is_safe(a, &run.sorted_rates[0]).safe);
    }
    let pair = find(&first.population, "{U:{q2,q3}}");
    assert_eq!(is_safe(pair, &run.sorted_rates[0]).reason, SafetyReason::AllImpactedOwnersControlImpacting);
    assert_eq!(involved_parties(pair, &run.sorted_rates[0]), 2);

    let second = &run.snapshots[1];
    assert_eq!(second.archived.len(), 3);
    let merged = find(&second.population, "{U:{q0,q1}, U:{q2,q3,q4}}");
    assert_eq!((merged.score, merged.penalty), (0.0017, 0.0017));
    let split = find(&second.population, "{U:{q0,q1}, U:{q2,q3}}");
    assert_eq!(split.penalty, 0.0027 + 0.0017);

    assert!(run.snapshots[2].population.is_empty());
    assert_eq!(run.results.len(), 7);
}

#[test]
fn selection_and_worklist() {
    let (g, s, r) = inputs();
    let cfg = SearchConfig::default();
    let run = allocate_traced(&g, &s, &r, &cfg).unwrap();
    let ranked = rank(&run.results);
    assert_eq!(ranked[0].key().to_string(), "{U:{q0,q1}, U:{q2,q3,q4}}");
    assert!(ranked.last().unwrap().components.is_empty());

    let sel = select(&run.results, &g, &s, &run.sorted_rates, cfg.completion_budget).unwrap();
    assert_eq!(sel.allocation.score, 0.0017);
    assert_eq!(
        sel.assignment,
        vec![
            (RequestId::Untrusted(0), qubits([0, 1])),
            (RequestId::Untrusted(1), qubits([2, 3, 4])),
        ]
    );
    let expected: Vec<&CrosstalkRate> = vec![&run.sorted_rates[1], &run.sorted_rates[2]];
    assert_eq!(sel.worklist.len(), expected.len());
    for (got, want) in sel.worklist.iter().zip(expected) {
        assert!(got.same_as(want));
    }
}

#[test]
fn every_result_replays() {
    let (g, s, r) = inputs();
    let run = allocate_traced(&g, &s, &r, &SearchConfig::default()).unwrap();
    for a in &run.results {
        assert_eq!(replay_check(a, &run.sorted_rates), Ok(()), "{a}");
    }
}

#[test]
fn oracle_agrees() {
    let (g, s, r) = inputs();
    let rep = oracle_report(&g, &s, &r, &SearchConfig::default(), 8).unwrap();
    assert_eq!((rep.optimum_safe_prefix, rep.algorithm_safe_prefix, rep.gap), (2, 2, 0));
    assert_eq!(rep.optimum_allocations.len(), 1);

    let sorted = sort_rates(&r);
    let attacked = baseline_naive(&g, &SizeRequests::new(vec![], vec![3, 2])).unwrap();
    assert_eq!(attacked.key().to_string(), "{U:{q0,q1,q2}, U:{q3,q4}}");
    assert_eq!(safe_prefix(&attacked, &sorted), 0);
}
