//! End-to-end run (search, then selection) and its serializable report.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::allocator::{allocate_traced, RateSnapshot, SearchConfig};
use crate::error::Error;
use crate::model::{fmt_set, CanonicalKey, ConnectivityGraph, CrosstalkRate, SizeRequests};
use crate::oracle::OracleReport;
use crate::selection::{rank, select, SelectionResult};

pub const RUN_SCHEMA: &str = "qaiccc.run/v1";
pub const ORACLE_SCHEMA: &str = "qaiccc.oracle/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub key: CanonicalKey,
    pub score: f64,
    pub penalty: f64,
    pub last_rate: Option<CrosstalkRate>,
}

/// Wall-clock milliseconds per stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub allocate_ms: f64,
    pub select_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub config: SearchConfig,
    /// Requests including the idle filler.
    pub requests: SizeRequests,
    /// Rates in processing order.
    pub rates: Vec<CrosstalkRate>,
    pub selected: SelectionResult,
    pub ranked: Vec<RankedEntry>,
    pub worklist: Vec<CrosstalkRate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<RateSnapshot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub snapshots: bool,
    pub timings: bool,
}

pub fn run(
    g: &ConnectivityGraph,
    sizes: &SizeRequests,
    rates: &[CrosstalkRate],
    cfg: &SearchConfig,
    opts: RunOptions,
) -> Result<RunReport, Error> {
    let t0 = Instant::now();
    let search = allocate_traced(g, sizes, rates, cfg)?;
    let t1 = Instant::now();
    let selected = select(&search.results, g, sizes, &search.sorted_rates, cfg.completion_budget)?;
    let t2 = Instant::now();
    let ranked = rank(&search.results)
        .into_iter()
        .map(|a| RankedEntry {
            key: a.key(),
            score: a.score,
            penalty: a.penalty,
            last_rate: a.last_rate,
        })
        .collect();
    Ok(RunReport {
        schema: RUN_SCHEMA.into(),
        config: cfg.clone(),
        requests: search.sizes,
        rates: search.sorted_rates,
        worklist: selected.worklist.clone(),
        selected,
        ranked,
        snapshots: if opts.snapshots { search.snapshots } else { Vec::new() },
        timings: opts.timings.then(|| Timings {
            allocate_ms: (t1 - t0).as_secs_f64() * 1e3,
            select_ms: (t2 - t1).as_secs_f64() * 1e3,
        }),
    })
}

fn rate_line(r: &CrosstalkRate) -> String {
    format!("<{}, {}, {}>", r.score, fmt_set(&r.impacting), fmt_set(&r.impacted))
}

fn last_rate(r: &Option<CrosstalkRate>) -> String {
    r.as_ref().map_or_else(|| "-".to_string(), rate_line)
}

impl RunReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "requests: trusted {:?}, untrusted {:?}{}",
            self.requests.trusted,
            self.requests.untrusted,
            self.requests.idle.map_or(String::new(), |i| format!(", idle {i}"))
        );
        let _ = writeln!(s, "rates:");
        for (i, r) in self.rates.iter().enumerate() {
            let _ = writeln!(s, "  {}. {}", i + 1, rate_line(r));
        }
        for snap in &self.snapshots {
            let _ = writeln!(s, "after {}:", rate_line(&snap.rate));
            for k in &snap.archived {
                let _ = writeln!(s, "  archived {k}");
            }
            if snap.population.is_empty() {
                let _ = writeln!(s, "  population empty");
            }
            for a in &snap.population {
                let _ = writeln!(s, "  {} score {} penalty {}", a.key(), a.score, a.penalty);
            }
        }
        let a = &self.selected.allocation;
        let _ = writeln!(
            s,
            "selected: {} (rank {}) score {} penalty {} last rate {}",
            a.key(),
            self.selected.rank + 1,
            a.score,
            a.penalty,
            last_rate(&a.last_rate)
        );
        for (id, qs) in &self.selected.assignment {
            let _ = writeln!(s, "  {id} -> {}", fmt_set(qs));
        }
        let _ = writeln!(s, "worklist:");
        for r in &self.worklist {
            let _ = writeln!(s, "  {}", rate_line(r));
        }
        let _ = writeln!(s, "ranked:");
        for (i, e) in self.ranked.iter().enumerate() {
            let _ = writeln!(
                s,
                "  {}. {} score {} penalty {} last rate {}",
                i + 1,
                e.key,
                e.score,
                e.penalty,
                last_rate(&e.last_rate)
            );
        }
        if let Some(t) = &self.timings {
            let _ = writeln!(s, "timings: allocate {:.3} ms, select {:.3} ms", t.allocate_ms, t.select_ms);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleDocument {
    pub schema: String,
    #[serde(flatten)]
    pub report: OracleReport,
}

impl OracleDocument {
    pub fn new(report: OracleReport) -> Self {
        Self {
            schema: ORACLE_SCHEMA.into(),
            report,
        }
    }

    pub fn to_text(&self) -> String {
        let r = &self.report;
        let mut s = String::new();
        let _ = writeln!(s, "complete allocations: {}", r.complete_allocations);
        let _ = writeln!(s, "optimum safe prefix: {}", r.optimum_safe_prefix);
        for k in &r.optimum_allocations {
            let _ = writeln!(s, "  {k}");
        }
        let _ = writeln!(s, "selected: {}", r.selected);
        let _ = writeln!(s, "algorithm safe prefix: {}", r.algorithm_safe_prefix);
        let _ = writeln!(s, "gap: {}", r.gap);
        match (&r.baseline, r.baseline_safe_prefix) {
            (Some(k), Some(p)) => {
                let _ = writeln!(s, "baseline: {k} safe prefix {p}");
            }
            _ => {
                let _ = writeln!(s, "baseline: infeasible");
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;

    fn example(opts: RunOptions) -> RunReport {
        run(
            &bowtie(),
            &SizeRequests::new(vec![], vec![2, 3]),
            &example_rates(),
            &SearchConfig::default(),
            opts,
        )
        .unwrap()
    }

    #[test]
    fn json_round_trip() {
        let rep = example(RunOptions {
            snapshots: true,
            timings: true,
        });
        let text = serde_json::to_string(&rep).unwrap();
        let back: RunReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rep);
        assert!(text.contains(RUN_SCHEMA));
    }

    #[test]
    fn text_mentions_selection_and_snapshots() {
        let text = example(RunOptions {
            snapshots: true,
            timings: false,
        })
        .to_text();
        assert!(text.contains("selected: {U:{q0,q1}, U:{q2,q3,q4}} (rank 1)"));
        assert!(text.contains("after <0.0027, {q3,q4}, {q2}>:"));
        assert!(text.contains("  {U:{q2,q3}} score 0.0027 penalty 0.0027"));
        assert!(!text.contains("timings"));
    }

    #[test]
    fn identical_without_timings() {
        let a = serde_json::to_string(&example(RunOptions::default())).unwrap();
        let b = serde_json::to_string(&example(RunOptions::default())).unwrap();
        assert_eq!(a, b);
    }
}
