//! Symbolic graph transformation for extended feature models (EFMs).
//!
//! EFMs are represented as symbolic graphs: typed object graphs whose attribute
//! slots hold variables, paired with a first-order formula over those variables.
//! Edit operations are symbolic graph transformation rules. Pairs of rules are
//! classified as conflicting or non-conflicting by enumerating minimal
//! application contexts, filtering them structurally, searching for direct
//! confluence and checking formula equivalence with an external SMT solver.
//!
//! Module map:
//!
//! - [`sort`], [`formula`], [`graph`]: sorts, formulas, typed symbolic graphs,
//!   morphisms, matching, isomorphism and gluing.
//! - [`efm`]: the EFM metamodel, well-formedness constraints and configuration
//!   semantics.
//! - [`rule`]: rules, admissibility and rule application.
//! - [`conflict`]: overlap enumeration, CPA filter, direct confluence and
//!   pairwise/ruleset analysis.
//! - [`smt`]: SMT-LIB2 emission and the solver subprocess bridge.
//! - [`io`]: model/rule/assignment documents and conflict reports.

pub mod conflict;
pub mod efm;
pub mod fixtures;
pub mod formula;
pub mod graph;
pub mod io;
pub mod rule;
pub mod smt;
pub mod sort;

pub use formula::{Formula, Substitution, VarId, Variable};
pub use graph::{
    find_isomorphisms, find_matches, glue, validate_graph, Identification, LinkId, Morphism, ObjId,
    SymbolicGraph, TypeGraph,
};
pub use rule::SymbolicRule;
pub use sort::{EnumSort, Sort, Value};
