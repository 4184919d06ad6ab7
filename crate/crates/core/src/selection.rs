//! Ranking of search results, completion to exact request sizes, and the
//! list of rates left for intra-user noise reduction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocator::update_sizes;
use crate::completion::{complete, CompletionError};
use crate::model::{Allocation, ConnectivityGraph, CrosstalkRate, QubitSet, RequestId, SizeRequests};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SelectionError {
    #[error("no allocation could be completed ({tried} candidates tried)")]
    NoFeasibleAllocation { tried: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Completed allocation with the attributes of the ranked candidate.
    pub allocation: Allocation,
    pub assignment: Vec<(RequestId, QubitSet)>,
    pub worklist: Vec<CrosstalkRate>,
    /// Position of the chosen candidate in the ranking.
    pub rank: usize,
}

/// Ascending score, then penalty, then canonical key.
pub fn rank(results: &[Allocation]) -> Vec<Allocation> {
    let mut keyed: Vec<_> = results.iter().map(|a| (a.key(), a)).collect();
    keyed.sort_by(|(ka, a), (kb, b)| {
        a.score
            .total_cmp(&b.score)
            .then(a.penalty.total_cmp(&b.penalty))
            .then_with(|| ka.cmp(kb))
    });
    keyed.into_iter().map(|(_, a)| a.clone()).collect()
}

/// First ranked allocation that completes. `rates` must be in processing order.
pub fn select(
    results: &[Allocation],
    g: &ConnectivityGraph,
    sizes: &SizeRequests,
    rates: &[CrosstalkRate],
    completion_budget: usize,
) -> Result<SelectionResult, SelectionError> {
    let sizes = update_sizes(g.vertex_count(), sizes);
    let ranked = rank(results);
    for (i, cand) in ranked.iter().enumerate() {
        match complete(cand, g, &sizes, completion_budget) {
            Ok(done) => {
                let worklist = noise_worklist(&done.allocation, rates);
                return Ok(SelectionResult {
                    allocation: done.allocation,
                    assignment: done.assignment,
                    worklist,
                    rank: i,
                });
            }
            Err(CompletionError::Infeasible) => log::debug!("rank {i} {cand}: cannot be completed"),
            Err(CompletionError::BudgetExhausted) => {
                log::warn!("rank {i} {cand}: completion budget exhausted, skipping")
            }
        }
    }
    Err(SelectionError::NoFeasibleAllocation { tried: ranked.len() })
}

/// Incidental rates, then every rate from the last (unsafe) rate onwards,
/// without repeats.
pub fn noise_worklist(selected: &Allocation, rates: &[CrosstalkRate]) -> Vec<CrosstalkRate> {
    let mut out: Vec<CrosstalkRate> = Vec::new();
    let push = |out: &mut Vec<CrosstalkRate>, r: &CrosstalkRate| {
        if !out.iter().any(|x| x.same_as(r)) {
            out.push(r.clone());
        }
    };
    for r in &selected.incidental {
        push(&mut out, r);
    }
    if let Some(last) = &selected.last_rate {
        if let Some(start) = rates.iter().position(|r| r.same_as(last)) {
            for r in &rates[start..] {
                push(&mut out, r);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocator::{allocate, SearchConfig};
    use crate::completion::DEFAULT_COMPLETION_BUDGET;
    use crate::model::fixtures::*;
    use crate::model::{qubits, sort_rates, validate_allocation};

    fn example_results() -> Vec<Allocation> {
        allocate(
            &bowtie(),
            &SizeRequests::new(vec![], vec![2, 3]),
            &example_rates(),
            &SearchConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn running_example_ranking() {
        let ranked = rank(&example_results());
        assert_eq!(ranked[0].key().to_string(), "{U:{q0,q1}, U:{q2,q3,q4}}");
        let last = ranked.last().unwrap();
        assert!(last.components.is_empty(), "initial allocation sorts last");
    }

    #[test]
    fn equal_attributes_fall_back_to_key() {
        let mut a = Allocation::untrusted(5, &[&[2, 4]]);
        let mut b = Allocation::untrusted(5, &[&[2, 3]]);
        a.score = 0.1;
        b.score = 0.1;
        let ranked = rank(&[a.clone(), b.clone()]);
        assert_eq!(ranked, vec![b.clone(), a.clone()]);
        assert_eq!(rank(&[b, a.clone()])[1], a);
    }

    #[test]
    fn running_example_selection() {
        let rates = sort_rates(&example_rates());
        let sel = select(
            &example_results(),
            &bowtie(),
            &SizeRequests::new(vec![], vec![2, 3]),
            &rates,
            DEFAULT_COMPLETION_BUDGET,
        )
        .unwrap();
        assert_eq!(sel.allocation.key().to_string(), "{U:{q0,q1}, U:{q2,q3,q4}}");
        assert_eq!(sel.rank, 0);
        assert_eq!(sel.allocation.score, 0.0017);
        assert!(sel.allocation.last_rate.as_ref().unwrap().same_as(&rates[2]));
        assert_eq!(
            sel.assignment,
            vec![
                (RequestId::Untrusted(0), qubits([0, 1])),
                (RequestId::Untrusted(1), qubits([2, 3, 4]))
            ]
        );
        assert!(validate_allocation(&sel.allocation, &bowtie()).is_ok());
        // The second rate spans both users, so it is incidental.
        assert_eq!(sel.worklist.len(), 2);
        assert!(sel.worklist[0].same_as(&rates[1]));
        assert!(sel.worklist[1].same_as(&rates[2]));
    }

    #[test]
    fn initial_allocation_is_last_resort() {
        let g = bowtie();
        let only = vec![Allocation::empty(5, 1.0)];
        let sel = select(&only, &g, &SizeRequests::new(vec![], vec![2, 3]), &[], DEFAULT_COMPLETION_BUDGET).unwrap();
        assert!(sel.allocation.is_complete());
        assert!(sel.worklist.is_empty());
    }

    #[test]
    fn disconnected_pairs_cannot_host_three() {
        let g = ConnectivityGraph::new(4, &[(0, 1), (2, 3)]).unwrap();
        let err = select(
            &[Allocation::empty(4, 1.0)],
            &g,
            &SizeRequests::new(vec![], vec![3]),
            &[],
            DEFAULT_COMPLETION_BUDGET,
        )
        .unwrap_err();
        assert_eq!(err, SelectionError::NoFeasibleAllocation { tried: 1 });
    }

    #[test]
    fn worklist_concatenates_and_dedups() {
        let rs: Vec<CrosstalkRate> = (0..6).map(|i| rate(0.6 - 0.1 * i as f64, &[3], &[2])).collect();
        let mut a = Allocation::untrusted(5, &[&[2, 3]]);
        assert!(noise_worklist(&a, &rs).is_empty());
        a.incidental = vec![rs[2].clone()];
        a.last_rate = Some(rs[4].clone());
        let got = noise_worklist(&a, &rs);
        assert_eq!(got.len(), 3);
        assert!(got[0].same_as(&rs[2]) && got[1].same_as(&rs[4]) && got[2].same_as(&rs[5]));
        a.incidental = vec![rs[5].clone()];
        let got = noise_worklist(&a, &rs);
        assert_eq!(got.len(), 2);
        assert!(got[0].same_as(&rs[5]) && got[1].same_as(&rs[4]));
    }
}
