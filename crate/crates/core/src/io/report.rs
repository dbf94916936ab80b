//! Conflict reports: a JSON document for machines and a lower-triangular
//! text matrix for people.

use std::collections::BTreeSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::to_json;
use crate::conflict::{
    ConflictMatrix, ContextTrace, ContextVerdict, PairStats, PairVerdict, Verdict,
};
use crate::smt::SolverConfig;

pub const TOOL: &str = "efmct";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairReport {
    pub first: String,
    pub second: String,
    pub verdict: Verdict,
    /// Distinct reason codes of conflicting contexts.
    pub reasons: Vec<String>,
    pub stats: PairStats,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub traces: Option<Vec<ContextTrace>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub pairs: usize,
    pub non_conflicting: usize,
    pub conflicting: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictReport {
    pub tool: String,
    pub version: String,
    pub solver: SolverConfig,
    /// `dc` for the full analysis, `cpa-only` for the structural filter.
    pub mode: String,
    pub rules: Vec<String>,
    pub totals: Totals,
    pub pairs: Vec<PairReport>,
}

/// Short code for why a context conflicts.
pub fn reason_code(v: &ContextVerdict) -> Option<&'static str> {
    match v {
        ContextVerdict::ConflictHere { reason } => Some(reason.code()),
        ContextVerdict::PotentialConflict => Some("potential-conflict"),
        _ => None,
    }
}

impl ConflictReport {
    pub fn new(
        matrix: &ConflictMatrix,
        solver: &SolverConfig,
        cpa_only: bool,
        with_traces: bool,
    ) -> Self {
        Self::from_pairs(
            &matrix.rules,
            &matrix.entries,
            solver,
            cpa_only,
            with_traces,
        )
    }

    /// Report over an arbitrary selection of analyzed pairs.
    pub fn from_pairs(
        rules: &[String],
        entries: &[PairVerdict],
        solver: &SolverConfig,
        cpa_only: bool,
        with_traces: bool,
    ) -> Self {
        let pairs: Vec<PairReport> = entries
            .iter()
            .map(|p| {
                let reasons: BTreeSet<&str> = p
                    .traces
                    .iter()
                    .filter_map(|t| reason_code(&t.verdict))
                    .collect();
                PairReport {
                    first: p.first.clone(),
                    second: p.second.clone(),
                    verdict: p.verdict,
                    reasons: reasons.into_iter().map(str::to_owned).collect(),
                    stats: p.stats,
                    traces: with_traces.then(|| p.traces.clone()),
                }
            })
            .collect();
        let non_conflicting = pairs
            .iter()
            .filter(|p| p.verdict == Verdict::NonConflicting)
            .count();
        ConflictReport {
            tool: TOOL.to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            solver: solver.clone(),
            mode: if cpa_only { "cpa-only" } else { "dc" }.to_owned(),
            rules: rules.to_vec(),
            totals: Totals {
                pairs: pairs.len(),
                non_conflicting,
                conflicting: pairs.len() - non_conflicting,
            },
            pairs,
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

/// Lower-triangular matrix: `✓` non-conflicting, `✗` conflicting, followed by
/// the reason codes of every conflicting pair.
pub fn render_matrix(m: &ConflictMatrix) -> String {
    let width = m
        .rules
        .iter()
        .map(|r| r.chars().count())
        .max()
        .unwrap_or(0)
        .max(1);
    let mut out = String::new();
    let _ = write!(out, "{:width$}", "");
    for r in &m.rules {
        let _ = write!(out, "  {r:width$}");
    }
    out.truncate(out.trim_end().len());
    out.push('\n');
    for (i, row) in m.rules.iter().enumerate() {
        let _ = write!(out, "{row:width$}");
        for j in 0..=i {
            let mark = match m.get(i, j).map(|p| p.verdict) {
                Some(Verdict::NonConflicting) => "✓",
                _ => "✗",
            };
            let _ = write!(out, "  {mark:width$}");
        }
        out.truncate(out.trim_end().len());
        out.push('\n');
    }
    let mut notes = Vec::new();
    for p in &m.entries {
        if p.verdict == Verdict::Conflicting {
            let codes: BTreeSet<&str> = p
                .traces
                .iter()
                .filter_map(|t| reason_code(&t.verdict))
                .collect();
            notes.push(format!(
                "{} × {}: {}",
                p.first,
                p.second,
                codes.into_iter().collect::<Vec<_>>().join(", ")
            ));
        }
    }
    if !notes.is_empty() {
        out.push('\n');
        for n in notes {
            out.push_str(&n);
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conflict::ConflictReason;
    use crate::graph::Identification;

    fn pair(a: &str, b: &str, verdict: Verdict) -> PairVerdict {
        let traces = match verdict {
            Verdict::NonConflicting => vec![],
            Verdict::Conflicting => vec![ContextTrace {
                index: 0,
                identification: Identification::default(),
                m1: Default::default(),
                m2: Default::default(),
                cpa: None,
                first: None,
                candidates: 0,
                witness: None,
                verdict: ContextVerdict::ConflictHere {
                    reason: ConflictReason::NoSecondMatch,
                },
            }],
        };
        PairVerdict {
            first: a.into(),
            second: b.into(),
            verdict,
            stats: PairStats {
                enumerated: traces.len(),
                conflicts: traces.len(),
                ..PairStats::default()
            },
            traces,
        }
    }

    #[test]
    fn matrix_is_lower_triangular() {
        let m = ConflictMatrix {
            rules: vec!["x".into(), "yy".into()],
            entries: vec![
                pair("x", "x", Verdict::Conflicting),
                pair("x", "yy", Verdict::NonConflicting),
                pair("yy", "yy", Verdict::NonConflicting),
            ],
        };
        assert_eq!(
            render_matrix(&m),
            "    x   yy\nx   ✗\nyy  ✓   ✓\n\nx × x: no-second-match\n"
        );
        let r = ConflictReport::new(&m, &SolverConfig::default(), false, false);
        assert_eq!(r.totals.non_conflicting, 2);
        assert_eq!(r.pairs[0].reasons, vec!["no-second-match".to_owned()]);
        assert!(!r.to_json().contains("traces"));
    }
}
