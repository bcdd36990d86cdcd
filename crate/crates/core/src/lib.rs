//! Unique-solvability analysis for structured recursion equations
//! `f = β ∘ F f ∘ α` over polynomial functors.
//!
//! The finite engines work on explicit tables: a coalgebra `α : A → F A` and an
//! algebra `β : F B → B` over finite carriers. The inductive side computes the
//! domain-of-definedness predicate and the inductive graph as least fixpoints;
//! the coinductive side computes bisimilarity, the coinductive graph and the
//! induced quotient as greatest fixpoints. Every verdict can be cross-checked
//! against the brute-force [`oracle`].
//!
//! Productive definitions over infinite streams live in [`codata`], which
//! evaluates observation rewrite rules under a fuel budget.

pub mod codata;
pub mod coinductive;
pub mod container;
pub mod inductive;
pub mod instance;
pub mod oracle;
pub mod relation;
pub mod report;

pub use coinductive::{BisimResult, CoGraphResult, Quotient, Verdict};
pub use container::{ContainerError, ContainerSpec, FStructure, Shape};
pub use inductive::{PredResult, RelResult, SolutionTable};
pub use instance::{Carrier, EquationInstance, InstanceError, Limits};
pub use relation::{ElementSet, Partition, Relation};

/// Internal errors raised when two independent constructions disagree, or a
/// caller hands an engine a table over the wrong domain.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("engine inconsistency: {0}")]
    Inconsistency(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
}
