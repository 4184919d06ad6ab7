//! Candidate generators applied to a population member for the current rate.

use crate::model::{Allocation, CrosstalkRate, QubitSet, Trust};

use super::connect::{connect, new_alloc};
use super::{Candidates, SearchContext};

fn single(a: &Allocation) -> Candidates {
    Candidates::from([(a.key(), a.clone())])
}

/// Allocates each unallocated impacted qubit, either to an existing user or to
/// a fresh user of any class with a request left.
pub fn alloc_unallocated(a: &Allocation, impacted: &QubitSet, ctx: &SearchContext<'_>) -> Candidates {
    let mut current = single(a);
    for &q in impacted {
        let target = QubitSet::from([q]);
        let mut next = Candidates::new();
        for alloc in current.values() {
            if !alloc.is_unallocated(q) {
                next.insert(alloc.key(), alloc.clone());
                continue;
            }
            for comp in &alloc.components {
                next.extend(connect(alloc, &comp.qubits, &target, ctx));
            }
            next.extend(connect(alloc, &QubitSet::new(), &target, ctx));
        }
        current = next;
    }
    current
}

/// Makes every impacted owner control an impacting qubit, by taking a free
/// impacting qubit or merging with the impacting qubit's owner.
pub fn alloc_impacted(candidates: Candidates, r: &CrosstalkRate, ctx: &SearchContext<'_>) -> Candidates {
    let mut current = candidates;
    for &victim in &r.impacted {
        let mut next = Candidates::new();
        for alloc in current.values() {
            let Some(owner) = alloc.owner(victim) else {
                continue;
            };
            for &q in &r.impacting {
                let target = match alloc.owner(q) {
                    None => QubitSet::from([q]),
                    Some(other) => other.qubits.clone(),
                };
                next.extend(connect(alloc, &owner.qubits, &target, ctx));
            }
        }
        current = next;
    }
    current
}

/// Puts every qubit of the rate under a single user.
pub fn improve_alloc(a: &Allocation, r: &CrosstalkRate, ctx: &SearchContext<'_>) -> Candidates {
    let involved = r.involved();
    let mut merge = QubitSet::new();
    for i in a.owners_of(&involved) {
        merge.extend(a.components[i].qubits.iter().copied());
    }
    if !merge.is_empty() {
        merge.extend(involved);
        return new_alloc(a, &merge, ctx);
    }
    let fresh = new_alloc(a, &involved, ctx);
    if !fresh.is_empty() {
        return fresh;
    }
    let mut out = Candidates::new();
    for comp in &a.components {
        out.extend(connect(a, &comp.qubits, &involved, ctx));
    }
    out
}

/// Hands free impacting qubits to trusted users.
pub fn alloc_trusted(a: &Allocation, impacting: &QubitSet, ctx: &SearchContext<'_>) -> Candidates {
    let free: Vec<_> = impacting.iter().copied().filter(|q| a.is_unallocated(*q)).collect();
    let mut out = Candidates::new();
    for mask in 1u32..(1 << free.len()) {
        let subset: QubitSet = free
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, q)| *q)
            .collect();
        for comp in a.components.iter().filter(|c| c.trust == Trust::Trusted) {
            let reaches = comp.qubits.union(&subset).any(|q| impacting.contains(q));
            if reaches {
                out.extend(connect(a, &comp.qubits, &subset, ctx));
            }
        }
    }
    out
}
