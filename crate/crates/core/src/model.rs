//! Domain types shared by every stage of the pipeline: the platform graph,
//! crosstalk rates, size requests and allocations with their canonical keys.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a physical qubit on the platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitId(pub u32);

impl QubitId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

impl From<u32> for QubitId {
    fn from(v: u32) -> Self {
        QubitId(v)
    }
}

pub type QubitSet = BTreeSet<QubitId>;

/// Builds a qubit set from raw indices.
pub fn qubits<I: IntoIterator<Item = u32>>(ids: I) -> QubitSet {
    ids.into_iter().map(QubitId).collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("platform must have at least one qubit")]
    Empty,
    #[error("edge ({0}, {1}) references a qubit outside the platform")]
    InvalidEndpoint(u32, u32),
    #[error("self-loop on qubit {0}")]
    SelfLoop(u32),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(u32, u32),
}

/// Undirected coupling map of the platform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityGraph {
    adjacency: Vec<Vec<QubitId>>,
    edge_count: usize,
}

impl ConnectivityGraph {
    pub fn new(vertex_count: usize, edges: &[(u32, u32)]) -> Result<Self, GraphError> {
        if vertex_count == 0 {
            return Err(GraphError::Empty);
        }
        let mut adjacency: Vec<BTreeSet<QubitId>> = vec![BTreeSet::new(); vertex_count];
        for &(a, b) in edges {
            if a as usize >= vertex_count || b as usize >= vertex_count {
                return Err(GraphError::InvalidEndpoint(a, b));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if !adjacency[a as usize].insert(QubitId(b)) {
                return Err(GraphError::DuplicateEdge(a, b));
            }
            adjacency[b as usize].insert(QubitId(a));
        }
        Ok(Self {
            adjacency: adjacency.into_iter().map(|s| s.into_iter().collect()).collect(),
            edge_count: edges.len(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn vertices(&self) -> impl Iterator<Item = QubitId> + '_ {
        (0..self.adjacency.len() as u32).map(QubitId)
    }

    pub fn contains(&self, q: QubitId) -> bool {
        q.index() < self.adjacency.len()
    }

    /// Neighbours in ascending index order.
    pub fn neighbors(&self, q: QubitId) -> &[QubitId] {
        &self.adjacency[q.index()]
    }

    pub fn has_edge(&self, a: QubitId, b: QubitId) -> bool {
        self.adjacency[a.index()].binary_search(&b).is_ok()
    }

    /// Edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (a, ns) in self.adjacency.iter().enumerate() {
            for b in ns {
                if (a as u32) < b.0 {
                    out.push((a as u32, b.0));
                }
            }
        }
        out
    }

    /// Whether `set` induces a connected subgraph. The empty set is not connected.
    pub fn is_connected_subset(&self, set: &QubitSet) -> bool {
        match set.iter().next() {
            None => false,
            Some(&start) => self.reachable_within(start, set).len() == set.len(),
        }
    }

    /// Vertices of `within` reachable from `start` using only vertices of `within`.
    pub fn reachable_within(&self, start: QubitId, within: &QubitSet) -> QubitSet {
        let mut seen = QubitSet::new();
        if !within.contains(&start) {
            return seen;
        }
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(v) = queue.pop_front() {
            for &w in self.neighbors(v) {
                if within.contains(&w) && seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Connected pieces of the subgraph induced by `set`, ordered by smallest member.
    pub fn pieces(&self, set: &QubitSet) -> Vec<QubitSet> {
        let mut left = set.clone();
        let mut out = Vec::new();
        while let Some(&start) = left.iter().next() {
            let piece = self.reachable_within(start, &left);
            for q in &piece {
                left.remove(q);
            }
            out.push(piece);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let all: QubitSet = self.vertices().collect();
        self.is_connected_subset(&all)
    }
}

/// Crosstalk triple: activity on `impacting` perturbs `impacted`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosstalkRate {
    pub score: f64,
    pub impacting: QubitSet,
    pub impacted: QubitSet,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("score {0} is negative or not finite")]
    BadScore(f64),
    #[error("unsupported crosstalk shape {0}->{1}; expected 1->1, 2->1 or 2->2")]
    BadShape(usize, usize),
    #[error("impacting and impacted qubits overlap")]
    Overlap,
    #[error("qubit {0} is not on the platform")]
    UnknownQubit(QubitId),
    #[error("qubit group {0:?} is not connected on the platform")]
    Disconnected(Vec<u32>),
}

impl CrosstalkRate {
    pub fn new(score: f64, impacting: QubitSet, impacted: QubitSet) -> Self {
        Self {
            score,
            impacting,
            impacted,
        }
    }

    /// `Q→ ∪ Q←`.
    pub fn involved(&self) -> QubitSet {
        self.impacting.union(&self.impacted).copied().collect()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.impacting.len(), self.impacted.len())
    }

    /// Checks all structural invariants against `graph`.
    pub fn validate(&self, graph: &ConnectivityGraph) -> Result<(), RateError> {
        if !self.score.is_finite() || self.score < 0.0 {
            return Err(RateError::BadScore(self.score));
        }
        let shape = self.shape();
        if !matches!(shape, (1, 1) | (2, 1) | (2, 2)) {
            return Err(RateError::BadShape(shape.0, shape.1));
        }
        if let Some(&q) = self.involved().iter().find(|q| !graph.contains(**q)) {
            return Err(RateError::UnknownQubit(q));
        }
        if !self.impacting.is_disjoint(&self.impacted) {
            return Err(RateError::Overlap);
        }
        let group = self.involved();
        if !graph.is_connected_subset(&group) {
            return Err(RateError::Disconnected(group.iter().map(|q| q.0).collect()));
        }
        Ok(())
    }

    /// Processing order: decreasing score, ties by (impacting, impacted) ascending.
    pub fn processing_order(a: &Self, b: &Self) -> Ordering {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.impacting.cmp(&b.impacting))
            .then_with(|| a.impacted.cmp(&b.impacted))
    }

    /// Same structure and bit-identical score.
    pub fn same_as(&self, other: &Self) -> bool {
        self.score.to_bits() == other.score.to_bits()
            && self.impacting == other.impacting
            && self.impacted == other.impacted
    }
}

impl fmt::Display for CrosstalkRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "<{}, {}, {}>",
            self.score,
            fmt_set(&self.impacting),
            fmt_set(&self.impacted)
        )
    }
}

/// Sorts rates in processing order.
pub fn sort_rates(rates: &[CrosstalkRate]) -> Vec<CrosstalkRate> {
    let mut sorted = rates.to_vec();
    sorted.sort_by(CrosstalkRate::processing_order);
    sorted
}

pub(crate) fn fmt_set(set: &QubitSet) -> String {
    let inner: Vec<String> = set.iter().map(|q| q.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trust {
    Trusted,
    Untrusted,
}

impl Trust {
    pub const ALL: [Trust; 2] = [Trust::Trusted, Trust::Untrusted];

    pub fn tag(self) -> char {
        match self {
            Trust::Trusted => 'T',
            Trust::Untrusted => 'U',
        }
    }
}

/// Identifies one circuit-size request. The idle request counts as untrusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "class", content = "index", rename_all = "lowercase")]
pub enum RequestId {
    Trusted(usize),
    Untrusted(usize),
    Idle,
}

impl RequestId {
    pub fn trust(self) -> Trust {
        match self {
            RequestId::Trusted(_) => Trust::Trusted,
            RequestId::Untrusted(_) | RequestId::Idle => Trust::Untrusted,
        }
    }
}

impl fmt::Display for RequestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RequestId::Trusted(i) => write!(f, "trusted[{i}]"),
            RequestId::Untrusted(i) => write!(f, "untrusted[{i}]"),
            RequestId::Idle => f.write_str("idle"),
        }
    }
}

/// Circuit sizes requested by trusted and untrusted users, plus the idle filler.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeRequests {
    #[serde(default)]
    pub trusted: Vec<usize>,
    #[serde(default)]
    pub untrusted: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idle: Option<usize>,
}

impl SizeRequests {
    pub fn new(trusted: Vec<usize>, untrusted: Vec<usize>) -> Self {
        Self {
            trusted,
            untrusted,
            idle: None,
        }
    }

    pub fn total(&self) -> usize {
        self.trusted.iter().sum::<usize>() + self.untrusted.iter().sum::<usize>() + self.idle.unwrap_or(0)
    }

    /// Every request with its id, trusted first, idle last.
    pub fn requests(&self) -> Vec<(RequestId, usize)> {
        let mut out: Vec<(RequestId, usize)> = self
            .trusted
            .iter()
            .enumerate()
            .map(|(i, &s)| (RequestId::Trusted(i), s))
            .collect();
        out.extend(self.untrusted.iter().enumerate().map(|(i, &s)| (RequestId::Untrusted(i), s)));
        if let Some(s) = self.idle {
            out.push((RequestId::Idle, s));
        }
        out
    }

    /// Requests of one trust class, idle included with the untrusted ones.
    pub fn class(&self, trust: Trust) -> Vec<(RequestId, usize)> {
        self.requests().into_iter().filter(|(id, _)| id.trust() == trust).collect()
    }

    pub fn size_of(&self, id: RequestId) -> Option<usize> {
        match id {
            RequestId::Trusted(i) => self.trusted.get(i).copied(),
            RequestId::Untrusted(i) => self.untrusted.get(i).copied(),
            RequestId::Idle => self.idle,
        }
    }

    pub fn max_size(&self, trust: Trust) -> usize {
        self.class(trust).iter().map(|&(_, s)| s).max().unwrap_or(0)
    }
}

/// Qubits controlled by one user.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UserComponent {
    pub trust: Trust,
    pub qubits: QubitSet,
}

impl UserComponent {
    pub fn new(trust: Trust, qubits: QubitSet) -> Self {
        Self { trust, qubits }
    }

    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }
}

impl fmt::Display for UserComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.trust.tag(), fmt_set(&self.qubits))
    }
}

/// Normal form of an allocation's structure; attributes are excluded.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalKey {
    pub components: Vec<(Trust, Vec<QubitId>)>,
    pub unallocated: Vec<QubitId>,
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|(t, qs)| {
                let ids: Vec<String> = qs.iter().map(|q| q.to_string()).collect();
                format!("{}:{{{}}}", t.tag(), ids.join(","))
            })
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// One individual of the search: who controls which qubit, plus ranking attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub unallocated: QubitSet,
    /// Kept sorted by (trust, qubits).
    pub components: Vec<UserComponent>,
    pub score: f64,
    pub penalty: f64,
    pub incidental: Vec<CrosstalkRate>,
    pub last_rate: Option<CrosstalkRate>,
}

impl Allocation {
    /// Every qubit unallocated.
    pub fn empty(vertex_count: usize, score: f64) -> Self {
        Self {
            unallocated: (0..vertex_count as u32).map(QubitId).collect(),
            components: Vec::new(),
            score,
            penalty: 0.0,
            incidental: Vec::new(),
            last_rate: None,
        }
    }

    /// Builds an allocation from explicit components; the rest is unallocated.
    pub fn from_components(vertex_count: usize, components: Vec<UserComponent>) -> Self {
        let mut alloc = Self::empty(vertex_count, 0.0);
        for c in &components {
            for q in &c.qubits {
                alloc.unallocated.remove(q);
            }
        }
        alloc.components = components;
        alloc.components.sort();
        alloc
    }

    /// Convenience for untrusted-only allocations, e.g. `untrusted(5, &[&[0, 1], &[2, 3, 4]])`.
    pub fn untrusted(vertex_count: usize, groups: &[&[u32]]) -> Self {
        let comps = groups
            .iter()
            .map(|g| UserComponent::new(Trust::Untrusted, qubits(g.iter().copied())))
            .collect();
        Self::from_components(vertex_count, comps)
    }

    pub fn vertex_count(&self) -> usize {
        self.unallocated.len() + self.components.iter().map(UserComponent::len).sum::<usize>()
    }

    pub fn key(&self) -> CanonicalKey {
        let mut components: Vec<(Trust, Vec<QubitId>)> = self
            .components
            .iter()
            .map(|c| (c.trust, c.qubits.iter().copied().collect()))
            .collect();
        components.sort();
        CanonicalKey {
            unallocated: self.unallocated.iter().copied().collect(),
            components,
        }
    }

    pub fn is_unallocated(&self, q: QubitId) -> bool {
        self.unallocated.contains(&q)
    }

    /// Index of the component controlling `q`.
    pub fn owner_index(&self, q: QubitId) -> Option<usize> {
        self.components.iter().position(|c| c.qubits.contains(&q))
    }

    pub fn owner(&self, q: QubitId) -> Option<&UserComponent> {
        self.owner_index(q).map(|i| &self.components[i])
    }

    /// Indices of components intersecting `set`, ascending.
    pub fn owners_of(&self, set: &QubitSet) -> Vec<usize> {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.qubits.is_disjoint(set))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.unallocated.is_empty()
    }

    /// Copy with attributes reset: score/penalty zero, no incidental, no last rate.
    pub fn structure_only(&self) -> Self {
        Self {
            unallocated: self.unallocated.clone(),
            components: self.components.clone(),
            score: 0.0,
            penalty: 0.0,
            incidental: Vec::new(),
            last_rate: None,
        }
    }

    pub(crate) fn normalize(&mut self) {
        self.components.sort();
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.key(), f)
    }
}

pub fn canonicalize(a: &Allocation) -> CanonicalKey {
    a.key()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnknownQubit(QubitId),
    EmptyComponent(usize),
    /// A qubit appears in more than one place.
    Overlap(QubitId),
    /// A platform qubit is neither unallocated nor owned.
    Uncovered(QubitId),
    Disconnected(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownQubit(q) => write!(f, "{q} is not on the platform"),
            Violation::EmptyComponent(i) => write!(f, "component {i} is empty"),
            Violation::Overlap(q) => write!(f, "{q} is assigned more than once"),
            Violation::Uncovered(q) => write!(f, "{q} is neither allocated nor unallocated"),
            Violation::Disconnected(i) => write!(f, "component {i} is not connected"),
        }
    }
}

/// Reports every violated structural invariant (disjointness, coverage, connectivity).
pub fn validate_allocation(a: &Allocation, g: &ConnectivityGraph) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    let mut seen: BTreeMap<QubitId, usize> = BTreeMap::new();
    let all = a
        .unallocated
        .iter()
        .chain(a.components.iter().flat_map(|c| c.qubits.iter()));
    for &q in all {
        *seen.entry(q).or_default() += 1;
    }
    for (&q, &n) in &seen {
        if !g.contains(q) {
            violations.push(Violation::UnknownQubit(q));
        } else if n > 1 {
            violations.push(Violation::Overlap(q));
        }
    }
    for q in g.vertices() {
        if !seen.contains_key(&q) {
            violations.push(Violation::Uncovered(q));
        }
    }
    for (i, c) in a.components.iter().enumerate() {
        if c.qubits.is_empty() {
            violations.push(Violation::EmptyComponent(i));
        } else if c.qubits.iter().all(|q| g.contains(*q)) && !g.is_connected_subset(&c.qubits) {
            violations.push(Violation::Disconnected(i));
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Five-qubit bow-tie coupling map used as the running example.
    pub fn bowtie() -> ConnectivityGraph {
        ConnectivityGraph::new(5, &[(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)]).unwrap()
    }

    pub fn rate(score: f64, impacting: &[u32], impacted: &[u32]) -> CrosstalkRate {
        CrosstalkRate::new(
            score,
            qubits(impacting.iter().copied()),
            qubits(impacted.iter().copied()),
        )
    }

    pub fn example_rates() -> Vec<CrosstalkRate> {
        vec![
            rate(0.0027, &[3, 4], &[2]),
            rate(0.0017, &[1, 2], &[0]),
            rate(0.0013, &[2, 4], &[0]),
        ]
    }
}
