//! Multi-period selection and sequencing of interdependent IT projects.
//!
//! A portfolio [`Instance`] lists projects with per-period present values of
//! cost and return, dependency edges carrying a dependency level and an
//! option value, and per-period budgets and cardinality bounds. A
//! [`Schedule`] funds every project in exactly one period. Its value is the
//! discounted cash flow of every project (returns reduced when a partial
//! dependency is funded later than its dependent) plus the option value of
//! every edge whose predecessor is funded strictly before its dependent.
//!
//! Two solvers are provided: a seeded genetic algorithm ([`run_ga`]) and an
//! exhaustive enumerator ([`enumerate_optimal`]) used to certify it on small
//! instances. Both spread their inner loops over rayon when the `parallel`
//! feature is enabled, without affecting results.
//!
//! ```
//! use portfolio_core::{evaluate, fixture::case_study, Schedule};
//!
//! let inst = case_study();
//! let s = Schedule::for_instance(vec![1, 2, 1, 2, 2, 3, 3], &inst).unwrap();
//! let b = evaluate(&s, &inst);
//! assert!(b.feasible);
//! assert_eq!(b.total_value, 203.0);
//! ```

pub mod document;
pub mod fixture;
pub mod ga;
pub mod generator;
pub mod model;
pub mod oracle;
pub mod par;
pub mod valuation;

pub use document::{instance_to_json, parse_instance, DocumentError, InstanceDocument};
pub use ga::{run_ga, run_ga_with, GaConfig, GaError, SolveResult, Termination, TraceRow};
pub use generator::{generate_instance, GenParams};
pub use model::{
    decode_chromosome, encode_schedule, validate_instance, Chromosome, DependencyEdge,
    DependencyMode, Instance, Project, Schedule,
};
pub use oracle::{count_feasible, enumerate_optimal, enumerate_optimal_with, ExactResult};
pub use par::Execution;
pub use valuation::{compare_candidates, evaluate, EvaluationBreakdown};
