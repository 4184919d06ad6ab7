//! Growing and merging user components: capacity (`remain`), bounded connector
//! search (`connector_sets`), `connect` and `new_alloc`.

use std::collections::BTreeSet;

use crate::completion;
use crate::matching;
use crate::model::{Allocation, ConnectivityGraph, QubitId, QubitSet, SizeRequests, Trust, UserComponent};

use super::{Candidates, SearchContext};

fn shape(a: &Allocation) -> Vec<(Trust, usize)> {
    a.components.iter().map(|c| (c.trust, c.len())).collect()
}

/// How many qubits `user` can still take while every component keeps a
/// feasible request assignment. For the empty user this is the largest fresh
/// component any trust class can still host. `-1` when nothing fits.
pub fn remain(user: &QubitSet, a: &Allocation, sizes: &SizeRequests) -> i64 {
    let mut comps = shape(a);
    if user.is_empty() {
        let mut best = -1i64;
        for trust in Trust::ALL {
            comps.push((trust, 0));
            let last = comps.len() - 1;
            for m in 1..=sizes.max_size(trust) {
                comps[last].1 = m;
                if !matching::feasible(&comps, sizes) {
                    break;
                }
                best = best.max(m as i64);
            }
            comps.pop();
        }
        return best;
    }
    let Some(idx) = user.iter().next().and_then(|q| a.owner_index(*q)) else {
        return -1;
    };
    let (trust, base) = comps[idx];
    let mut best = -1i64;
    for k in 0..=sizes.max_size(trust).saturating_sub(base) {
        comps[idx] = (trust, base + k);
        if !matching::feasible(&comps, sizes) {
            break;
        }
        best = k as i64;
    }
    best
}

/// Sets `P` of free qubits such that `user ∪ s ∪ P` becomes connected, built
/// from simple paths through free qubits that join one missing piece at a
/// time. At most `max_len` connector qubits, at most `cap` results.
pub fn connector_sets(
    g: &ConnectivityGraph,
    user: &QubitSet,
    s: &QubitSet,
    free: &QubitSet,
    max_len: usize,
    cap: usize,
) -> Vec<QubitSet> {
    let terminals: QubitSet = user.union(s).copied().collect();
    let Some(&anchor) = user.iter().next().or_else(|| s.iter().next()) else {
        return Vec::new();
    };
    let free: QubitSet = free.difference(&terminals).copied().collect();
    let mut finder = PathFinder {
        g,
        terminals: &terminals,
        free: &free,
        anchor,
        cap: cap.max(1),
        steps: 0,
        step_limit: cap.max(1).saturating_mul(4096),
        visited: BTreeSet::new(),
        out: Vec::new(),
    };
    finder.extend(QubitSet::new(), max_len);
    finder.out
}

struct PathFinder<'a> {
    g: &'a ConnectivityGraph,
    terminals: &'a QubitSet,
    free: &'a QubitSet,
    anchor: QubitId,
    cap: usize,
    steps: usize,
    step_limit: usize,
    visited: BTreeSet<QubitSet>,
    out: Vec<QubitSet>,
}

impl PathFinder<'_> {
    fn done(&self) -> bool {
        self.out.len() >= self.cap || self.steps >= self.step_limit
    }

    fn extend(&mut self, connectors: QubitSet, budget: usize) {
        if self.done() || !self.visited.insert(connectors.clone()) {
            return;
        }
        let covered: QubitSet = self.terminals.union(&connectors).copied().collect();
        let grown = self.g.reachable_within(self.anchor, &covered);
        if self.terminals.is_subset(&grown) {
            self.out.push(connectors);
            return;
        }
        let mut interiors: Vec<QubitSet> = Vec::new();
        let mut seen: BTreeSet<QubitSet> = BTreeSet::new();
        for &x in &grown {
            for &w in self.g.neighbors(x) {
                if budget == 0 || !self.free.contains(&w) || covered.contains(&w) {
                    continue;
                }
                let mut path = vec![w];
                self.walk(&mut path, &grown, &covered, budget, &mut interiors, &mut seen);
            }
        }
        for interior in interiors {
            if self.done() {
                return;
            }
            let next: QubitSet = connectors.union(&interior).copied().collect();
            self.extend(next, budget - interior.len());
        }
    }

    /// Depth-first simple paths from the grown piece, ending at the first
    /// terminal outside it.
    fn walk(
        &mut self,
        path: &mut Vec<QubitId>,
        grown: &QubitSet,
        covered: &QubitSet,
        budget: usize,
        interiors: &mut Vec<QubitSet>,
        seen: &mut BTreeSet<QubitSet>,
    ) {
        self.steps += 1;
        if self.steps >= self.step_limit {
            return;
        }
        let last = *path.last().expect("non-empty path");
        for &w in self.g.neighbors(last) {
            if self.terminals.contains(&w) && !grown.contains(&w) {
                let interior: QubitSet = path.iter().copied().collect();
                if seen.insert(interior.clone()) {
                    interiors.push(interior);
                }
            } else if path.len() < budget
                && self.free.contains(&w)
                && !covered.contains(&w)
                && !path.contains(&w)
            {
                path.push(w);
                self.walk(path, grown, covered, budget, interiors, seen);
                path.pop();
            }
        }
    }
}

/// Joins `s` to `user` (or builds a fresh component around `s` when `user`
/// is empty) through unallocated connector qubits, within the size budget
/// `remain(user) - |s \ user|`.
pub fn connect(a: &Allocation, user: &QubitSet, s: &QubitSet, ctx: &SearchContext<'_>) -> Candidates {
    let mut out = Candidates::new();
    let added = s.difference(user).count() as i64;
    let max_len = remain(user, a, ctx.sizes) - added;
    if max_len < 0 || s.is_empty() {
        return out;
    }
    let free = &a.unallocated;
    for connectors in connector_sets(ctx.graph, user, s, free, max_len as usize, ctx.config.max_paths_per_connect) {
        let mut members: QubitSet = user.union(s).copied().collect();
        members.extend(connectors);
        out.extend(new_alloc(a, &members, ctx));
    }
    out
}

/// Gives every qubit of `user` to one component, absorbing the components it
/// touches. Kept only when the new component is connected, the size
/// assignment is feasible, and the whole allocation can still be completed.
/// A fresh component is tried once per trust class.
pub fn new_alloc(a: &Allocation, user: &QubitSet, ctx: &SearchContext<'_>) -> Candidates {
    let mut out = Candidates::new();
    if user.is_empty() {
        return out;
    }
    let touched = a.owners_of(user);
    let trusts: BTreeSet<Trust> = touched.iter().map(|&i| a.components[i].trust).collect();
    if trusts.len() > 1 {
        return out;
    }
    let mut members = user.clone();
    for &i in &touched {
        members.extend(a.components[i].qubits.iter().copied());
    }
    let stray = user
        .iter()
        .any(|q| !a.is_unallocated(*q) && !touched.iter().any(|&i| a.components[i].qubits.contains(q)));
    if stray || !ctx.graph.is_connected_subset(&members) {
        return out;
    }
    let options: Vec<Trust> = match trusts.into_iter().next() {
        Some(t) => vec![t],
        None => Trust::ALL.to_vec(),
    };
    for trust in options {
        let mut next = a.clone();
        next.components = a
            .components
            .iter()
            .enumerate()
            .filter(|(i, _)| !touched.contains(i))
            .map(|(_, c)| c.clone())
            .collect();
        next.components.push(UserComponent::new(trust, members.clone()));
        next.unallocated.retain(|q| !members.contains(q));
        next.last_rate = None;
        next.normalize();
        if !matching::feasible(&shape(&next), ctx.sizes) {
            continue;
        }
        // An exhausted completion budget is not proof of infeasibility.
        if completion::completable(&next, ctx.graph, ctx.sizes, ctx.config.completion_budget) == Some(false) {
            continue;
        }
        out.insert(next.key(), next);
    }
    out
}
