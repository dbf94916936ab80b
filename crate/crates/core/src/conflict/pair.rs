use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    check_direct_confluence, cpa_filter, enumerate_overlaps, ContextTrace, ContextVerdict,
};
use crate::efm::check_wellformed;
use crate::graph::GraphError;
use crate::rule::SymbolicRule;
use crate::smt::SatSolver;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NonConflicting,
    Conflicting,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairStats {
    pub enumerated: usize,
    pub ill_formed: usize,
    pub independent: usize,
    pub invalid_application: usize,
    /// Contexts where both orders were joined.
    pub proven: usize,
    pub conflicts: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub first: String,
    pub second: String,
    pub verdict: Verdict,
    pub stats: PairStats,
    pub traces: Vec<ContextTrace>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AnalysisOptions {
    /// Stop after the structural filter; every potential conflict counts as
    /// a conflict.
    pub cpa_only: bool,
}

/// Classifies a rule pair by checking every overlap context.
pub fn analyze_pair(
    r1: &SymbolicRule,
    r2: &SymbolicRule,
    solver: &dyn SatSolver,
    opts: AnalysisOptions,
) -> Result<PairVerdict, GraphError> {
    let contexts = enumerate_overlaps(&r1.lhs, &r2.lhs)?;
    let mut traces: Vec<Option<ContextTrace>> = vec![None; contexts.len()];
    let mut kept = Vec::new();
    for (i, ctx) in contexts.into_iter().enumerate() {
        let violations = check_wellformed(&ctx.ac)?;
        if violations.is_empty() {
            kept.push((i, ctx));
        } else {
            let constraints: BTreeSet<String> =
                violations.into_iter().map(|v| v.constraint).collect();
            traces[i] = Some(ContextTrace::new(
                i,
                &ctx,
                ContextVerdict::FilteredIllFormed {
                    constraints: constraints.into_iter().collect(),
                },
            ));
        }
    }

    let checked: Vec<(usize, ContextTrace)> = kept
        .par_iter()
        .map(|(i, ctx)| {
            let cpa = cpa_filter(r1, r2, ctx);
            let mut trace = if !cpa.is_potential_conflict() {
                ContextTrace::new(*i, ctx, ContextVerdict::FilteredIndependent)
            } else if opts.cpa_only {
                ContextTrace::new(*i, ctx, ContextVerdict::PotentialConflict)
            } else {
                let mut t = check_direct_confluence(r1, r2, ctx, solver);
                t.index = *i;
                t
            };
            trace.cpa = Some(cpa);
            (*i, trace)
        })
        .collect();
    for (i, t) in checked {
        traces[i] = Some(t);
    }
    let traces: Vec<ContextTrace> = traces
        .into_iter()
        .map(|t| t.expect("every context traced"))
        .collect();

    let mut stats = PairStats {
        enumerated: traces.len(),
        ..PairStats::default()
    };
    for t in &traces {
        match t.verdict {
            ContextVerdict::NoConflictHere => stats.proven += 1,
            ContextVerdict::ConflictHere { .. } | ContextVerdict::PotentialConflict => {
                stats.conflicts += 1
            }
            ContextVerdict::FilteredIllFormed { .. } => stats.ill_formed += 1,
            ContextVerdict::FilteredInvalidApplication => stats.invalid_application += 1,
            ContextVerdict::FilteredIndependent => stats.independent += 1,
        }
    }
    let verdict = if stats.conflicts == 0 {
        Verdict::NonConflicting
    } else {
        Verdict::Conflicting
    };
    Ok(PairVerdict {
        first: r1.name.clone(),
        second: r2.name.clone(),
        verdict,
        stats,
        traces,
    })
}

/// Verdicts for all pairs `(j, i)` with `j <= i`, stored row by row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictMatrix {
    pub rules: Vec<String>,
    pub entries: Vec<PairVerdict>,
}

impl ConflictMatrix {
    fn offset(row: usize, col: usize) -> usize {
        row * (row + 1) / 2 + col
    }

    /// Verdict for rules `a` and `b` in either order.
    pub fn get(&self, a: usize, b: usize) -> Option<&PairVerdict> {
        let (row, col) = if a >= b { (a, b) } else { (b, a) };
        if row >= self.rules.len() {
            return None;
        }
        self.entries.get(Self::offset(row, col))
    }

    pub fn non_conflicting(&self) -> impl Iterator<Item = &PairVerdict> {
        self.entries
            .iter()
            .filter(|p| p.verdict == Verdict::NonConflicting)
    }
}

/// The pairs `(j, i)`, `j <= i`, in matrix order.
pub fn lower_triangle(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (0..=i).map(move |j| (j, i))).collect()
}

pub fn analyze_ruleset(
    rules: &[SymbolicRule],
    solver: &dyn SatSolver,
    opts: AnalysisOptions,
) -> Result<ConflictMatrix, GraphError> {
    let entries = lower_triangle(rules.len())
        .par_iter()
        .map(|&(j, i)| analyze_pair(&rules[j], &rules[i], solver, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ConflictMatrix {
        rules: rules.iter().map(|r| r.name.clone()).collect(),
        entries,
    })
}
