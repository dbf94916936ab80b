use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{CpaVerdict, OverlapContext};
use crate::formula::print::{render, Style};
use crate::formula::{Formula, VarId, Variable};
use crate::graph::{find_isomorphisms, Identification, LinkId, Morphism, SymbolicGraph};
use crate::rule::{apply, find_rule_matches, ApplicationResult, ApplicationStatus, SymbolicRule};
use crate::smt::{check_validity_folding, SatResult, SatSolver, Validity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConflictReason {
    NoSecondMatch,
    NoIsomorphicResult,
    FormulasNotEquivalent,
    SolverUnknown,
    SolverTimeout,
}

impl ConflictReason {
    pub fn code(self) -> &'static str {
        match self {
            ConflictReason::NoSecondMatch => "no-second-match",
            ConflictReason::NoIsomorphicResult => "no-isomorphic-result",
            ConflictReason::FormulasNotEquivalent => "formulas-not-equivalent",
            ConflictReason::SolverUnknown => "solver-unknown",
            ConflictReason::SolverTimeout => "solver-timeout",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ContextVerdict {
    NoConflictHere,
    ConflictHere {
        reason: ConflictReason,
    },
    FilteredIllFormed {
        constraints: Vec<String>,
    },
    FilteredInvalidApplication,
    FilteredIndependent,
    /// Structural interference found; only reported when the confluence
    /// check is skipped.
    PotentialConflict,
}

impl ContextVerdict {
    pub fn is_conflict(&self) -> bool {
        matches!(
            self,
            ContextVerdict::ConflictHere { .. } | ContextVerdict::PotentialConflict
        )
    }

    pub fn is_filtered(&self) -> bool {
        matches!(
            self,
            ContextVerdict::FilteredIllFormed { .. }
                | ContextVerdict::FilteredInvalidApplication
                | ContextVerdict::FilteredIndependent
        )
    }
}

/// Serializable summary of one rule application.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Applied,
    InvalidDangling { links: Vec<LinkId> },
    InvalidUnsat,
    UnknownSat { solver: SatResult },
}

impl From<&ApplicationStatus> for Outcome {
    fn from(s: &ApplicationStatus) -> Self {
        match s {
            ApplicationStatus::Applied => Outcome::Applied,
            ApplicationStatus::InvalidDangling(l) => Outcome::InvalidDangling { links: l.clone() },
            ApplicationStatus::InvalidUnsat => Outcome::InvalidUnsat,
            ApplicationStatus::UnknownSat(r) => Outcome::UnknownSat { solver: r.clone() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equivalence {
    Equivalent,
    NotEquivalent,
    Unknown,
}

/// The formula comparison of two isomorphic results.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceCheck {
    pub verdict: Equivalence,
    pub aux12: BTreeSet<VarId>,
    pub aux21: BTreeSet<VarId>,
    /// Variables of the first result to variables of the second.
    pub sigma: BTreeMap<VarId, VarId>,
    /// `σ(∃aux12 Φ12) ⇔ ∃aux21 Φ21`, when it had to be built.
    pub query: Option<String>,
    pub validity: Option<Validity>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EquivalenceError {
    #[error("variable `{0}` of the first result has no image")]
    Unmapped(VarId),
    #[error("the morphism is not an isomorphism between the results")]
    NotAnIsomorphism,
}

/// Variables of `result` held by no slot and absent from `base`.
pub fn auxiliary_vars(result: &SymbolicGraph, base: &SymbolicGraph) -> BTreeSet<Variable> {
    let slotted = result.slot_vars();
    result
        .variables()
        .iter()
        .filter(|(v, _)| !slotted.contains(*v) && !base.variables().contains_key(*v))
        .map(|(v, s)| Variable::new(v.clone(), s.clone()))
        .collect()
}

/// Compares the formulas of two results related by `iso`, binding the
/// auxiliary variables of each side existentially.
pub fn check_result_equivalence(
    res12: &SymbolicGraph,
    res21: &SymbolicGraph,
    base: &SymbolicGraph,
    iso: &Morphism,
    solver: &dyn SatSolver,
) -> Result<EquivalenceCheck, EquivalenceError> {
    if !iso.is_valid(res12, res21)
        || res12.object_count() != res21.object_count()
        || res12.link_count() != res21.link_count()
    {
        return Err(EquivalenceError::NotAnIsomorphism);
    }
    let aux12 = auxiliary_vars(res12, base);
    let aux21 = auxiliary_vars(res21, base);
    let f12 = Formula::exists(aux12.iter().cloned().collect(), res12.formula().clone());
    let f21 = Formula::exists(aux21.iter().cloned().collect(), res21.formula().clone());
    let ids = |s: &BTreeSet<Variable>| s.iter().map(|v| v.id.clone()).collect();
    let mut check = EquivalenceCheck {
        verdict: Equivalence::NotEquivalent,
        aux12: ids(&aux12),
        aux21: ids(&aux21),
        sigma: BTreeMap::new(),
        query: None,
        validity: None,
        note: None,
    };

    let mut sigma = match iso.induced_substitution(res12, res21) {
        Ok(s) => s,
        Err(e) => {
            check.note = Some(e.to_string());
            return Ok(check);
        }
    };
    for v in f12.free_vars() {
        if sigma.contains(&v.id) {
            continue;
        }
        if !base.variables().contains_key(&v.id) {
            return Err(EquivalenceError::Unmapped(v.id));
        }
        sigma
            .insert(v.clone(), v)
            .expect("identity is sort-preserving");
    }
    check.sigma = sigma.iter().map(|(k, v)| (k.id, v.id.clone())).collect();
    if !sigma.is_injective() {
        check.note = Some("variable map is not injective".into());
        return Ok(check);
    }

    let lhs = f12.substitute(&sigma);
    if lhs == f21 {
        check.verdict = Equivalence::Equivalent;
        return Ok(check);
    }
    let query = Formula::iff(lhs, f21);
    let validity = check_validity_folding(solver, &query).validity;
    check.verdict = match &validity {
        Validity::Valid => Equivalence::Equivalent,
        Validity::Invalid { .. } => Equivalence::NotEquivalent,
        _ => Equivalence::Unknown,
    };
    check.query = Some(render(&query, Style::Document));
    check.validity = Some(validity);
    Ok(check)
}

/// Second matches and isomorphism that join the two orders of a context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// Match of the second rule after applying the first.
    pub m2_prime: Morphism,
    /// Match of the first rule after applying the second.
    pub m1_prime: Morphism,
    /// Isomorphism from the result of first-then-second to the other.
    pub iso: Morphism,
    pub check: EquivalenceCheck,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextTrace {
    pub index: usize,
    pub identification: Identification,
    pub m1: Morphism,
    pub m2: Morphism,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cpa: Option<CpaVerdict>,
    /// First application of each rule.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub first: Option<(Outcome, Outcome)>,
    /// Pairs of valid second applications compared.
    pub candidates: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
    pub verdict: ContextVerdict,
}

impl ContextTrace {
    pub fn new(index: usize, ctx: &OverlapContext, verdict: ContextVerdict) -> Self {
        ContextTrace {
            index,
            identification: ctx.identification.clone(),
            m1: ctx.m1.clone(),
            m2: ctx.m2.clone(),
            cpa: None,
            first: None,
            candidates: 0,
            witness: None,
            verdict,
        }
    }
}

fn undecided_reason(r: &SatResult) -> ConflictReason {
    match r {
        SatResult::Timeout => ConflictReason::SolverTimeout,
        _ => ConflictReason::SolverUnknown,
    }
}

fn validity_reason(v: &Option<Validity>) -> ConflictReason {
    match v {
        Some(Validity::Timeout) => ConflictReason::SolverTimeout,
        _ => ConflictReason::SolverUnknown,
    }
}

/// Tracks why the search for a joining pair failed; solver indecision wins
/// over a refuted equivalence, which wins over missing isomorphisms.
#[derive(Default)]
struct Failure {
    undecided: Option<ConflictReason>,
    not_equivalent: bool,
    no_iso: bool,
}

impl Failure {
    fn undecided(&mut self, r: ConflictReason) {
        self.undecided.get_or_insert(r);
    }

    fn reason(&self) -> ConflictReason {
        if let Some(r) = self.undecided {
            r
        } else if self.not_equivalent {
            ConflictReason::FormulasNotEquivalent
        } else if self.no_iso {
            ConflictReason::NoIsomorphicResult
        } else {
            ConflictReason::NoSecondMatch
        }
    }
}

/// Valid applications of `r` to every match in `host`.
fn second_applications(
    r: &SymbolicRule,
    host: &SymbolicGraph,
    solver: &dyn SatSolver,
    failure: &mut Failure,
) -> Vec<(Morphism, ApplicationResult)> {
    let matches = find_rule_matches(r, host).expect("results share the rule's type graph");
    let mut out = Vec::new();
    for m in matches {
        let res = apply(r, &m, host, solver).expect("matches are valid");
        match &res.status {
            ApplicationStatus::Applied => out.push((m, res)),
            ApplicationStatus::UnknownSat(s) => failure.undecided(undecided_reason(s)),
            _ => {}
        }
    }
    out
}

/// Applies both rules to the context in both orders and searches for second
/// matches whose results are isomorphic with equivalent formulas.
pub fn check_direct_confluence(
    r1: &SymbolicRule,
    r2: &SymbolicRule,
    ctx: &OverlapContext,
    solver: &dyn SatSolver,
) -> ContextTrace {
    let mut trace = ContextTrace::new(0, ctx, ContextVerdict::FilteredInvalidApplication);
    let mut base = ctx.ac.clone();
    base.set_formula(Formula::tt());
    let a1 = apply(r1, &ctx.m1, &base, solver).expect("context embeddings are matches");
    let a2 = apply(r2, &ctx.m2, &base, solver).expect("context embeddings are matches");
    trace.first = Some(((&a1.status).into(), (&a2.status).into()));
    for a in [&a1, &a2] {
        match &a.status {
            ApplicationStatus::InvalidDangling(_) | ApplicationStatus::InvalidUnsat => {
                return trace;
            }
            ApplicationStatus::UnknownSat(s) => {
                trace.verdict = ContextVerdict::ConflictHere {
                    reason: undecided_reason(s),
                };
                return trace;
            }
            ApplicationStatus::Applied => {}
        }
    }
    let (g1, g2) = (a1.applied().unwrap(), a2.applied().unwrap());

    let mut failure = Failure::default();
    let seconds12 = second_applications(r2, g1, solver, &mut failure);
    let seconds21 = second_applications(r1, g2, solver, &mut failure);
    for (m2p, res12) in &seconds12 {
        for (m1p, res21) in &seconds21 {
            trace.candidates += 1;
            let (g12, g21) = (res12.applied().unwrap(), res21.applied().unwrap());
            let isos = find_isomorphisms(g12, g21);
            if isos.is_empty() {
                failure.no_iso = true;
            }
            for iso in isos {
                let check = match check_result_equivalence(g12, g21, &base, &iso, solver) {
                    Ok(c) => c,
                    Err(e) => {
                        log::error!("equivalence check failed: {e}");
                        failure.undecided(ConflictReason::SolverUnknown);
                        continue;
                    }
                };
                match check.verdict {
                    Equivalence::Equivalent => {
                        trace.witness = Some(Witness {
                            m2_prime: m2p.clone(),
                            m1_prime: m1p.clone(),
                            iso,
                            check,
                        });
                        trace.verdict = ContextVerdict::NoConflictHere;
                        return trace;
                    }
                    Equivalence::NotEquivalent => failure.not_equivalent = true,
                    Equivalence::Unknown => failure.undecided(validity_reason(&check.validity)),
                }
            }
        }
    }
    trace.verdict = ContextVerdict::ConflictHere {
        reason: failure.reason(),
    };
    trace
}

/// Re-runs the recorded witness of a trace and returns the equivalence it
/// yields now.
pub fn replay(
    r1: &SymbolicRule,
    r2: &SymbolicRule,
    trace: &ContextTrace,
    solver: &dyn SatSolver,
) -> Result<Equivalence, ReplayError> {
    let w = trace.witness.as_ref().ok_or(ReplayError::NoWitness)?;
    let ctx = super::context_for(&r1.lhs, &r2.lhs, trace.identification.clone())
        .map_err(|e| ReplayError::Context(e.to_string()))?;
    let mut base = ctx.ac.clone();
    base.set_formula(Formula::tt());
    let step = |r: &SymbolicRule, m: &Morphism, host: &SymbolicGraph| {
        apply(r, m, host, solver)
            .map_err(|e| ReplayError::Application(e.to_string()))?
            .applied()
            .cloned()
            .ok_or_else(|| ReplayError::Application(format!("`{}` no longer applies", r.name)))
    };
    let g12 = step(r2, &w.m2_prime, &step(r1, &ctx.m1, &base)?)?;
    let g21 = step(r1, &w.m1_prime, &step(r2, &ctx.m2, &base)?)?;
    let check = check_result_equivalence(&g12, &g21, &base, &w.iso, solver)
        .map_err(|e| ReplayError::Application(e.to_string()))?;
    Ok(check.verdict)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("the trace has no witness to replay")]
    NoWitness,
    #[error("cannot rebuild the context: {0}")]
    Context(String),
    #[error("cannot replay: {0}")]
    Application(String),
}
