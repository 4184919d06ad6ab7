//! Exact completion of a partial allocation.
//!
//! Every component is bound to a same-class request at least as large, grown
//! through unallocated qubits to exactly that size, and the remaining requests
//! are carved out of what is left as fresh connected components. The search is
//! a deterministic backtracking over bindings and connected extensions, with
//! the lowest-index frontier qubit tried first.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{Allocation, ConnectivityGraph, QubitSet, RequestId, SizeRequests, UserComponent};

/// Default cap on search nodes per completion attempt.
pub const DEFAULT_COMPLETION_BUDGET: usize = 200_000;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum CompletionError {
    #[error("no exact-size connected completion exists")]
    Infeasible,
    #[error("completion search exceeded its budget")]
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    /// Complete allocation; attributes are carried over from the input.
    pub allocation: Allocation,
    /// Qubits bound to each request, ordered by request id.
    pub assignment: Vec<(RequestId, QubitSet)>,
}

pub fn complete(
    a: &Allocation,
    g: &ConnectivityGraph,
    sizes: &SizeRequests,
    budget: usize,
) -> Result<Completion, CompletionError> {
    let requests = sizes.requests();
    let mut search = Search {
        g,
        requests: &requests,
        comps: &a.components,
        binding: vec![usize::MAX; a.components.len()],
        used: vec![false; requests.len()],
        groups: a.components.iter().map(|c| c.qubits.clone()).collect(),
        fresh: Vec::new(),
        free: a.unallocated.clone(),
        nodes: 0,
        budget,
        exhausted: false,
    };
    if search.bind(0) {
        let mut assignment: Vec<(RequestId, QubitSet)> = Vec::with_capacity(requests.len());
        let mut components = Vec::with_capacity(requests.len());
        for (i, comp) in a.components.iter().enumerate() {
            let id = requests[search.binding[i]].0;
            assignment.push((id, search.groups[i].clone()));
            components.push(UserComponent::new(comp.trust, search.groups[i].clone()));
        }
        for (j, qs) in &search.fresh {
            let id = requests[*j].0;
            assignment.push((id, qs.clone()));
            components.push(UserComponent::new(id.trust(), qs.clone()));
        }
        assignment.sort_by_key(|(id, _)| *id);
        let mut allocation = a.clone();
        allocation.unallocated.clear();
        allocation.components = components;
        allocation.normalize();
        Ok(Completion { allocation, assignment })
    } else if search.exhausted {
        Err(CompletionError::BudgetExhausted)
    } else {
        Err(CompletionError::Infeasible)
    }
}

/// Feasibility only. Budget exhaustion is reported as `None`.
pub fn completable(a: &Allocation, g: &ConnectivityGraph, sizes: &SizeRequests, budget: usize) -> Option<bool> {
    match complete(a, g, sizes, budget) {
        Ok(_) => Some(true),
        Err(CompletionError::Infeasible) => Some(false),
        Err(CompletionError::BudgetExhausted) => None,
    }
}

#[derive(Clone, Copy)]
enum Phase {
    /// Growing existing component `i`.
    Grow(usize),
    /// Building a fresh component for request `j`.
    Fresh(usize),
}

struct Search<'a> {
    g: &'a ConnectivityGraph,
    requests: &'a [(RequestId, usize)],
    comps: &'a [UserComponent],
    binding: Vec<usize>,
    used: Vec<bool>,
    groups: Vec<QubitSet>,
    fresh: Vec<(usize, QubitSet)>,
    free: QubitSet,
    nodes: usize,
    budget: usize,
    exhausted: bool,
}

impl Search<'_> {
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
        }
        !self.exhausted
    }

    fn bind(&mut self, ci: usize) -> bool {
        if ci == self.comps.len() {
            return self.prune_ok(0) && self.grow(0);
        }
        let comp = &self.comps[ci];
        let mut tried = BTreeSet::new();
        for j in 0..self.requests.len() {
            let (id, size) = self.requests[j];
            if self.used[j] || id.trust() != comp.trust || size < comp.len() || !tried.insert(size) {
                continue;
            }
            if !self.tick() {
                return false;
            }
            self.used[j] = true;
            self.binding[ci] = j;
            if self.bind(ci + 1) {
                return true;
            }
            self.used[j] = false;
            if self.exhausted {
                return false;
            }
        }
        false
    }

    fn target(&self, ci: usize) -> usize {
        self.requests[self.binding[ci]].1
    }

    fn grow(&mut self, ci: usize) -> bool {
        if ci == self.comps.len() {
            return self.fill();
        }
        let current = self.groups[ci].clone();
        if current.len() == self.target(ci) {
            return self.grow(ci + 1);
        }
        self.expand(Phase::Grow(ci), current, QubitSet::new())
    }

    fn fill(&mut self) -> bool {
        let Some(&start) = self.free.iter().next() else {
            return self.used.iter().all(|u| *u);
        };
        let mut tried = BTreeSet::new();
        for j in 0..self.requests.len() {
            let size = self.requests[j].1;
            if self.used[j] || !tried.insert(size) {
                continue;
            }
            self.used[j] = true;
            self.free.remove(&start);
            let found = self.expand(Phase::Fresh(j), QubitSet::from([start]), QubitSet::new());
            self.free.insert(start);
            if found {
                return true;
            }
            self.used[j] = false;
            if self.exhausted {
                return false;
            }
        }
        false
    }

    fn phase_target(&self, phase: Phase) -> usize {
        match phase {
            Phase::Grow(ci) => self.target(ci),
            Phase::Fresh(j) => self.requests[j].1,
        }
    }

    /// Enumerates connected supersets of `current` of the phase's target size,
    /// each exactly once (include/exclude on the smallest frontier qubit).
    /// Qubits taken into `current` are already removed from `free`.
    fn expand(&mut self, phase: Phase, current: QubitSet, banned: QubitSet) -> bool {
        if !self.tick() {
            return false;
        }
        if current.len() == self.phase_target(phase) {
            return self.commit(phase, current);
        }
        let next = current
            .iter()
            .flat_map(|&q| self.g.neighbors(q).iter().copied())
            .filter(|w| self.free.contains(w) && !banned.contains(w))
            .min();
        let Some(v) = next else {
            return false;
        };
        let mut with = current.clone();
        with.insert(v);
        self.free.remove(&v);
        let found = self.expand(phase, with, banned.clone());
        self.free.insert(v);
        if found || self.exhausted {
            return found;
        }
        let mut banned = banned;
        banned.insert(v);
        self.expand(phase, current, banned)
    }

    fn commit(&mut self, phase: Phase, group: QubitSet) -> bool {
        match phase {
            Phase::Grow(ci) => {
                let before = std::mem::replace(&mut self.groups[ci], group);
                let found = self.prune_ok(ci + 1) && self.grow(ci + 1);
                if !found {
                    self.groups[ci] = before;
                }
                found
            }
            Phase::Fresh(j) => {
                self.fresh.push((j, group));
                let found = self.prune_ok(self.comps.len()) && self.fill();
                if !found {
                    self.fresh.pop();
                }
                found
            }
        }
    }

    /// Every free region that no still-growing component touches must be
    /// exactly fillable by unused requests.
    fn prune_ok(&self, growing_from: usize) -> bool {
        let unused: Vec<usize> = (0..self.requests.len())
            .filter(|&j| !self.used[j])
            .map(|j| self.requests[j].1)
            .collect();
        let growing: Vec<&QubitSet> = (growing_from..self.comps.len())
            .filter(|&ci| self.groups[ci].len() < self.target(ci))
            .map(|ci| &self.groups[ci])
            .collect();
        let reachable = subset_sums(&unused, self.free.len());
        for piece in self.g.pieces(&self.free) {
            let touched = growing.iter().any(|grp| {
                grp.iter()
                    .any(|q| self.g.neighbors(*q).iter().any(|w| piece.contains(w)))
            });
            if !touched && !reachable[piece.len()] {
                return false;
            }
        }
        true
    }
}

fn subset_sums(values: &[usize], limit: usize) -> Vec<bool> {
    let mut ok = vec![false; limit + 1];
    ok[0] = true;
    for &v in values {
        for s in (v..=limit).rev() {
            if ok[s - v] {
                ok[s] = true;
            }
        }
    }
    ok
}
