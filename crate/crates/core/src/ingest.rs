//! JSON input files and the synthetic rate generator.
//!
//! Platform: `{"qubits": 5, "edges": [[0, 1], [0, 2]]}`.
//! Requests: `{"trusted": [2], "untrusted": [2, 3]}` (either list may be omitted).
//! Rates: an array of `{"score": 0.0027, "impacting": [3, 4], "impacted": [2]}`;
//! `score` may be replaced by `stochastic` and `hamiltonian`, which are summed.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{qubits, ConnectivityGraph, CrosstalkRate, GraphError, QubitId, QubitSet, RateError, SizeRequests};

pub const SYNTH_SCORE_MIN: f64 = 1e-4;
pub const SYNTH_SCORE_MAX: f64 = 1e-2;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: {source}")]
    Syntax {
        origin: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{origin}: {source}")]
    Platform {
        origin: String,
        #[source]
        source: GraphError,
    },
    #[error("{origin}: {reason}")]
    Requests { origin: String, reason: String },
    #[error("{origin}: record {index}: {source}")]
    Record {
        origin: String,
        index: usize,
        #[source]
        source: RecordError,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecordError {
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error("invalid qubit id {0}")]
    InvalidQubit(u32),
    #[error("unsupported shape {0}->{1}; expected 1->1, 2->1 or 2->2")]
    Shape(usize, usize),
    #[error("qubit group {0:?} is not connected")]
    Disconnected(Vec<u32>),
    #[error("duplicate of record {0}")]
    Duplicate(usize),
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("error rates must be finite and non-negative (got {stochastic}, {hamiltonian})")]
pub struct ScoreError {
    pub stochastic: f64,
    pub hamiltonian: f64,
}

/// Sum of the stochastic and Hamiltonian error rates.
pub fn composite_score(stochastic: f64, hamiltonian: f64) -> Result<f64, ScoreError> {
    let ok = |x: f64| x.is_finite() && x >= 0.0;
    if ok(stochastic) && ok(hamiltonian) {
        Ok(stochastic + hamiltonian)
    } else {
        Err(ScoreError { stochastic, hamiltonian })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformFile {
    pub qubits: usize,
    #[serde(default)]
    pub edges: Vec<[u32; 2]>,
}

impl PlatformFile {
    pub fn from_graph(g: &ConnectivityGraph) -> Self {
        Self {
            qubits: g.vertex_count(),
            edges: g.edges().into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }

    pub fn to_graph(&self) -> Result<ConnectivityGraph, GraphError> {
        let edges: Vec<(u32, u32)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        ConnectivityGraph::new(self.qubits, &edges)
    }
}

/// One rate as written in a rates file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRateRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stochastic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<f64>,
    pub impacting: Vec<u32>,
    pub impacted: Vec<u32>,
}

impl RawRateRecord {
    pub fn from_rate(r: &CrosstalkRate) -> Self {
        Self {
            score: Some(r.score),
            impacting: r.impacting.iter().map(|q| q.0).collect(),
            impacted: r.impacted.iter().map(|q| q.0).collect(),
            ..Self::default()
        }
    }

    fn resolve_score(&self) -> Result<f64, RecordError> {
        match (self.score, self.stochastic, self.hamiltonian) {
            (Some(s), None, None) => {
                if s.is_finite() && s >= 0.0 {
                    Ok(s)
                } else {
                    Err(RecordError::Malformed(format!("score {s} must be finite and non-negative")))
                }
            }
            (None, Some(st), Some(h)) => composite_score(st, h).map_err(|e| RecordError::Malformed(e.to_string())),
            (Some(_), _, _) => Err(RecordError::Malformed(
                "give either score or stochastic+hamiltonian, not both".into(),
            )),
            _ => Err(RecordError::Malformed(
                "missing score (or stochastic and hamiltonian)".into(),
            )),
        }
    }

    /// Converts and validates against `g`.
    pub fn to_rate(&self, g: &ConnectivityGraph) -> Result<CrosstalkRate, RecordError> {
        let score = self.resolve_score()?;
        for &q in self.impacting.iter().chain(&self.impacted) {
            if !g.contains(QubitId(q)) {
                return Err(RecordError::InvalidQubit(q));
            }
        }
        let impacting = qubits(self.impacting.iter().copied());
        let impacted = qubits(self.impacted.iter().copied());
        if impacting.len() != self.impacting.len() || impacted.len() != self.impacted.len() {
            return Err(RecordError::Malformed("repeated qubit id".into()));
        }
        let rate = CrosstalkRate::new(score, impacting, impacted);
        rate.validate(g).map_err(|e| match e {
            RateError::BadShape(a, b) => RecordError::Shape(a, b),
            RateError::Disconnected(group) => RecordError::Disconnected(group),
            RateError::UnknownQubit(q) => RecordError::InvalidQubit(q.0),
            other => RecordError::Malformed(other.to_string()),
        })?;
        Ok(rate)
    }
}

fn read(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), IngestError> {
    fs::write(path, text).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn origin(path: &Path) -> String {
    path.display().to_string()
}

pub fn parse_platform(text: &str, origin: &str) -> Result<ConnectivityGraph, IngestError> {
    let file: PlatformFile = serde_json::from_str(text).map_err(|source| IngestError::Syntax {
        origin: origin.into(),
        source,
    })?;
    file.to_graph().map_err(|source| IngestError::Platform {
        origin: origin.into(),
        source,
    })
}

pub fn load_platform(path: &Path) -> Result<ConnectivityGraph, IngestError> {
    parse_platform(&read(path)?, &origin(path))
}

pub fn save_platform(path: &Path, g: &ConnectivityGraph) -> Result<(), IngestError> {
    let text = serde_json::to_string_pretty(&PlatformFile::from_graph(g)).expect("platform serializes");
    write(path, &(text + "\n"))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RequestsFile {
    #[serde(default)]
    trusted: Vec<usize>,
    #[serde(default)]
    untrusted: Vec<usize>,
}

pub fn parse_requests(text: &str, origin: &str) -> Result<SizeRequests, IngestError> {
    let file: RequestsFile = serde_json::from_str(text).map_err(|source| IngestError::Syntax {
        origin: origin.into(),
        source,
    })?;
    if file.trusted.iter().chain(&file.untrusted).any(|s| *s == 0) {
        return Err(IngestError::Requests {
            origin: origin.into(),
            reason: "request sizes must be positive".into(),
        });
    }
    Ok(SizeRequests::new(file.trusted, file.untrusted))
}

pub fn load_requests(path: &Path) -> Result<SizeRequests, IngestError> {
    parse_requests(&read(path)?, &origin(path))
}

/// Parses a rates document, keeping file order.
pub fn parse_rates(text: &str, g: &ConnectivityGraph, origin: &str) -> Result<Vec<CrosstalkRate>, IngestError> {
    let values: Vec<serde_json::Value> = serde_json::from_str(text).map_err(|source| IngestError::Syntax {
        origin: origin.into(),
        source,
    })?;
    let record_err = |index, source| IngestError::Record {
        origin: origin.into(),
        index,
        source,
    };
    let mut seen: BTreeMap<(QubitSet, QubitSet), usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(values.len());
    for (index, value) in values.into_iter().enumerate() {
        let raw: RawRateRecord =
            serde_json::from_value(value).map_err(|e| record_err(index, RecordError::Malformed(e.to_string())))?;
        let rate = raw.to_rate(g).map_err(|e| record_err(index, e))?;
        let pair = (rate.impacting.clone(), rate.impacted.clone());
        if let Some(&first) = seen.get(&pair) {
            return Err(record_err(index, RecordError::Duplicate(first)));
        }
        seen.insert(pair, index);
        out.push(rate);
    }
    Ok(out)
}

pub fn load_rates(path: &Path, g: &ConnectivityGraph) -> Result<Vec<CrosstalkRate>, IngestError> {
    parse_rates(&read(path)?, g, &origin(path))
}

pub fn rates_to_json(rates: &[CrosstalkRate]) -> String {
    let records: Vec<RawRateRecord> = rates.iter().map(RawRateRecord::from_rate).collect();
    serde_json::to_string_pretty(&records).expect("rates serialize") + "\n"
}

pub fn save_rates(path: &Path, rates: &[CrosstalkRate]) -> Result<(), IngestError> {
    write(path, &rates_to_json(rates))
}

/// Connected vertex subsets of exactly `size` qubits, ascending.
pub fn connected_groups(g: &ConnectivityGraph, size: usize) -> Vec<QubitSet> {
    if size == 0 {
        return Vec::new();
    }
    let mut layer: BTreeSet<QubitSet> = g.vertices().map(|q| QubitSet::from([q])).collect();
    for _ in 1..size {
        let mut next = BTreeSet::new();
        for set in &layer {
            for &q in set {
                for &w in g.neighbors(q) {
                    if !set.contains(&w) {
                        let mut grown = set.clone();
                        grown.insert(w);
                        next.insert(grown);
                    }
                }
            }
        }
        layer = next;
    }
    layer.into_iter().collect()
}

/// Deterministic synthetic rates: one per connected group for each of the
/// shapes 1->1, 2->1 and 2->2, with the split and the score drawn from a
/// seeded stream. `max_rates` keeps a seeded subset in generation order.
pub fn synth_rates(g: &ConnectivityGraph, seed: u64, max_rates: Option<usize>) -> Vec<CrosstalkRate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (m, n) in [(1usize, 1usize), (2, 1), (2, 2)] {
        for group in connected_groups(g, m + n) {
            let members: Vec<QubitId> = group.iter().copied().collect();
            let picks = sample(&mut rng, members.len(), m);
            let impacting: QubitSet = picks.iter().map(|i| members[i]).collect();
            let impacted: QubitSet = group.difference(&impacting).copied().collect();
            let score = rng.gen_range(SYNTH_SCORE_MIN..=SYNTH_SCORE_MAX);
            out.push(CrosstalkRate::new(score, impacting, impacted));
        }
    }
    match max_rates {
        Some(cap) if cap < out.len() => {
            let mut keep = sample(&mut rng, out.len(), cap).into_vec();
            keep.sort_unstable();
            keep.into_iter().map(|i| out[i].clone()).collect()
        }
        _ => out,
    }
}
