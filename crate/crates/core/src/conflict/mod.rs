//! Pairwise conflict detection: overlap enumeration, well-formedness and
//! structural filtering, then a direct-confluence search whose results are
//! compared by an SMT equivalence check.

mod confluence;
mod cpa;
mod overlap;
mod pair;

pub use confluence::{
    auxiliary_vars, check_direct_confluence, check_result_equivalence, replay, ConflictReason,
    ContextTrace, ContextVerdict, Equivalence, EquivalenceCheck, EquivalenceError, Outcome,
    ReplayError, Witness,
};
pub use cpa::{cpa_filter, Actor, CpaReason, CpaVerdict};
pub use overlap::{context_for, enumerate_overlaps, filter_wellformed, OverlapContext};
pub use pair::{
    analyze_pair, analyze_ruleset, lower_triangle, AnalysisOptions, ConflictMatrix, PairStats,
    PairVerdict, Verdict,
};
