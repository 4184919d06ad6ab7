//! Component-to-request assignment.
//!
//! A component of size `c` may serve a request of size `r` of the same trust
//! class when `c <= r`. An allocation is size-feasible when every component can
//! be matched to a distinct request, checked with augmenting paths (Kuhn).

use crate::model::{RequestId, SizeRequests, Trust};

/// Maximum bipartite matching; `adj[l]` lists right vertices compatible with `l`.
/// Returns `match_of_left`.
pub fn max_matching(adj: &[Vec<usize>], right_count: usize) -> Vec<Option<usize>> {
    let mut match_right: Vec<Option<usize>> = vec![None; right_count];
    for left in 0..adj.len() {
        let mut visited = vec![false; right_count];
        augment(left, adj, &mut match_right, &mut visited);
    }
    let mut match_left = vec![None; adj.len()];
    for (r, l) in match_right.iter().enumerate() {
        if let Some(l) = l {
            match_left[*l] = Some(r);
        }
    }
    match_left
}

fn augment(left: usize, adj: &[Vec<usize>], match_right: &mut [Option<usize>], visited: &mut [bool]) -> bool {
    for &r in &adj[left] {
        if visited[r] {
            continue;
        }
        visited[r] = true;
        let free = match match_right[r] {
            None => true,
            Some(other) => augment(other, adj, match_right, visited),
        };
        if free {
            match_right[r] = Some(left);
            return true;
        }
    }
    false
}

/// Assigns components `(trust, size)` to requests. Returns the request per
/// component, or `None` when no injective assignment exists.
pub fn assign(components: &[(Trust, usize)], sizes: &SizeRequests) -> Option<Vec<RequestId>> {
    let requests = sizes.requests();
    let adj: Vec<Vec<usize>> = components
        .iter()
        .map(|&(trust, size)| {
            requests
                .iter()
                .enumerate()
                .filter(|(_, (id, cap))| id.trust() == trust && size <= *cap)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let matched = max_matching(&adj, requests.len());
    matched.into_iter().map(|m| m.map(|j| requests[j].0)).collect()
}

pub fn feasible(components: &[(Trust, usize)], sizes: &SizeRequests) -> bool {
    assign(components, sizes).is_some()
}
