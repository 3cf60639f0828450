//! Multi-goal test-suite minimization for simulation-based testing.
//!
//! Test cases are scored on five effectiveness measures (execution time and
//! four output-signal anti-pattern scores). Selection is done either by
//! sampling goal vectors, keeping the continuous-domination best, and
//! inverting each through box-constrained least squares ([`doless`]), or by
//! running NSGA-II over pairs and triples of goals ([`moea`]).

pub mod data_io;
pub mod doless;
pub mod domination;
pub mod error;
pub mod evaluation;
pub mod lsq;
pub mod moea;
pub mod objective_model;
pub mod rng;
pub mod selection;
pub mod signal_metrics;

pub use error::{Error, Result};
pub use objective_model::{EffectivenessMatrix, Goal, ObjectiveVector};
pub use selection::{pareto_front, Selection};
