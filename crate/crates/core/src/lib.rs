//! Header classes (atoms) of a rule set, overlap metrics, and per-atom
//! forwarding-loop detection for wildcard and multi-range predicates.

pub mod atoms;
pub mod cli;
pub mod generators;
pub mod instance;
pub mod metrics;
pub mod network;
pub mod oracle;
pub mod par;
pub mod report;
pub mod setrep;
pub mod store;

pub use atoms::{compute_uc, weak_completeness_check, Algorithm, AtomEngine, AtomsError};
pub use metrics::{metrics, OverlapMetrics, Rational};
pub use network::{detect_loops, LoopOptions, LoopReport, NetworkInstance};
pub use par::Exec;
pub use setrep::{Cardinal, Geometry, RuleSet};
