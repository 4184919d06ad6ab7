//! Crosstalk-aware qubit allocation for multi-tenant quantum platforms.
//!
//! Users request connected groups of qubits. The allocator searches for
//! allocations where no untrusted tenant can drive crosstalk into another
//! tenant's qubits, preferring allocations whose worst unsafe crosstalk rate
//! is as small as possible.
//!
//! ```
//! use qaiccc::{allocate, ConnectivityGraph, CrosstalkRate, SearchConfig, SizeRequests};
//! use qaiccc::model::qubits;
//! use qaiccc::selection::select;
//!
//! let g = ConnectivityGraph::new(5, &[(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)]).unwrap();
//! let sizes = SizeRequests::new(vec![], vec![2, 3]);
//! let rates = vec![CrosstalkRate::new(0.0027, qubits([3, 4]), qubits([2]))];
//! let cfg = SearchConfig::default();
//! let results = allocate(&g, &sizes, &rates, &cfg).unwrap();
//! let chosen = select(&results, &g, &sizes, &rates, cfg.completion_budget).unwrap();
//! assert_eq!(chosen.allocation.key().to_string(), "{U:{q0,q1}, U:{q2,q3,q4}}");
//! ```

pub mod allocator;
pub mod cli;
pub mod completion;
pub mod error;
pub mod ingest;
pub mod matching;
pub mod model;
pub mod oracle;
pub mod report;
pub mod safety;
pub mod selection;

pub use allocator::{allocate, allocate_traced, AllocError, SearchConfig, SearchRun};
pub use error::Error;
pub use model::{Allocation, CanonicalKey, ConnectivityGraph, CrosstalkRate, QubitId, QubitSet, SizeRequests, Trust};
