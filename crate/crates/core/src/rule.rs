//! Symbolic graph transformation rules: validation, admissibility and
//! application.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::Duration;

use thiserror::Error;

use crate::formula::{Formula, Substitution, VarId, Variable};
use crate::graph::{
    find_matches, formula_violations, validate_graph, GraphError, Link, LinkId, Morphism,
    MorphismError, ObjId, Object, SymbolicGraph, Violation,
};
use crate::smt::{check_sat_folding, check_validity_folding, SatResult, SatSolver, Validity};
use crate::sort::Sort;

/// A rule `(LHS, RHS, Φ)`. `preserve` is a partial injective map from LHS to
/// RHS elements; the variables of both sides share one namespace, so an RHS
/// slot holding an LHS variable keeps that value and an RHS slot holding a
/// variable absent from the LHS receives a fresh one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicRule {
    pub name: String,
    pub lhs: SymbolicGraph,
    pub rhs: SymbolicGraph,
    pub preserve: Morphism,
    pub phi: Formula,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    Lhs,
    Rhs,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Lhs => "LHS",
            Side::Rhs => "RHS",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum RuleViolation {
    Graph(Side, Violation),
    FormulaNotTrue(Side),
    TypeGraphMismatch,
    UnknownPreserved { side: Side, id: String },
    PreserveTypeClash { lhs: String, rhs: String },
    PreserveNotInjective { rhs: String },
    PreserveIncidence { lhs: LinkId, rhs: LinkId },
    VariableSortConflict { var: VarId, lhs: Sort, rhs: Sort },
    UnslottedLhsVariable(VarId),
    UnhousedVariable(VarId),
    Phi(Violation),
}

impl fmt::Display for RuleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleViolation::Graph(side, v) => write!(f, "{side}: {v}"),
            RuleViolation::FormulaNotTrue(side) => write!(f, "{side} formula must be true"),
            RuleViolation::TypeGraphMismatch => {
                f.write_str("LHS and RHS use different type graphs")
            }
            RuleViolation::UnknownPreserved { side, id } => {
                write!(f, "preserve mentions `{id}`, which is not in the {side}")
            }
            RuleViolation::PreserveTypeClash { lhs, rhs } => {
                write!(f, "preserve maps `{lhs}` to `{rhs}` of a different type")
            }
            RuleViolation::PreserveNotInjective { rhs } => {
                write!(f, "preserve maps two LHS elements to `{rhs}`")
            }
            RuleViolation::PreserveIncidence { lhs, rhs } => write!(
                f,
                "preserved link `{lhs}` -> `{rhs}` does not connect the preserved endpoints"
            ),
            RuleViolation::VariableSortConflict { var, lhs, rhs } => {
                write!(
                    f,
                    "variable `{var}` is {lhs} in the LHS and {rhs} in the RHS"
                )
            }
            RuleViolation::UnslottedLhsVariable(v) => {
                write!(f, "LHS variable `{v}` is not held by any slot")
            }
            RuleViolation::UnhousedVariable(v) => {
                write!(f, "phi mentions `{v}`, which occurs on neither side")
            }
            RuleViolation::Phi(v) => write!(f, "phi: {v}"),
        }
    }
}

impl SymbolicRule {
    pub fn lhs_vars(&self) -> BTreeSet<VarId> {
        self.lhs.variables().keys().cloned().collect()
    }

    /// RHS variables that do not occur in the LHS.
    pub fn fresh_vars(&self) -> BTreeSet<Variable> {
        self.rhs
            .variables()
            .iter()
            .filter(|(v, _)| !self.lhs.variables().contains_key(*v))
            .map(|(v, s)| Variable::new(v.clone(), s.clone()))
            .collect()
    }

    /// Sorts of all rule variables.
    pub fn variables(&self) -> BTreeMap<VarId, Sort> {
        let mut out = self.lhs.variables().clone();
        for (v, s) in self.rhs.variables() {
            out.entry(v.clone()).or_insert_with(|| s.clone());
        }
        out
    }

    pub fn deleted_objects(&self) -> impl Iterator<Item = &Object> {
        self.lhs
            .objects()
            .filter(|o| !self.preserve.objects.contains_key(&o.id))
    }

    pub fn deleted_links(&self) -> impl Iterator<Item = &Link> {
        self.lhs
            .links()
            .filter(|l| !self.preserve.links.contains_key(&l.id))
    }

    /// Slots of preserved LHS objects whose RHS counterpart holds a different
    /// variable.
    pub fn reassigned_slots(&self) -> Vec<(ObjId, String)> {
        let mut out = Vec::new();
        for (l, r) in &self.preserve.objects {
            let (Some(lo), Some(ro)) = (self.lhs.object(l), self.rhs.object(r)) else {
                continue;
            };
            for (attr, rv) in &ro.slots {
                if lo.slots.get(attr) != Some(rv) {
                    out.push((l.clone(), attr.clone()));
                }
            }
        }
        out
    }

    /// Whether the rule neither deletes nor reassigns anything.
    pub fn is_non_deleting(&self) -> bool {
        self.deleted_objects().next().is_none()
            && self.deleted_links().next().is_none()
            && self.reassigned_slots().is_empty()
    }
}

/// Checks the rule invariants; an empty list means the rule is valid.
pub fn validate_rule(r: &SymbolicRule) -> Vec<RuleViolation> {
    let mut out = Vec::new();
    if !r.lhs.same_type_graph(&r.rhs) {
        out.push(RuleViolation::TypeGraphMismatch);
    }
    for (side, g) in [(Side::Lhs, &r.lhs), (Side::Rhs, &r.rhs)] {
        out.extend(
            validate_graph(g, g.type_graph())
                .into_iter()
                .map(|v| RuleViolation::Graph(side, v)),
        );
        if !g.formula().is_true() {
            out.push(RuleViolation::FormulaNotTrue(side));
        }
    }
    let mut images = BTreeSet::new();
    for (l, rr) in &r.preserve.objects {
        let lo = r.lhs.object(l);
        let ro = r.rhs.object(rr);
        if lo.is_none() {
            out.push(RuleViolation::UnknownPreserved {
                side: Side::Lhs,
                id: l.0.clone(),
            });
        }
        if ro.is_none() {
            out.push(RuleViolation::UnknownPreserved {
                side: Side::Rhs,
                id: rr.0.clone(),
            });
        }
        if let (Some(a), Some(b)) = (lo, ro) {
            if a.ty != b.ty {
                out.push(RuleViolation::PreserveTypeClash {
                    lhs: l.0.clone(),
                    rhs: rr.0.clone(),
                });
            }
        }
        if !images.insert(rr) {
            out.push(RuleViolation::PreserveNotInjective { rhs: rr.0.clone() });
        }
    }
    let mut images = BTreeSet::new();
    for (l, rr) in &r.preserve.links {
        match (r.lhs.link(l), r.rhs.link(rr)) {
            (Some(a), Some(b)) => {
                if a.ty != b.ty {
                    out.push(RuleViolation::PreserveTypeClash {
                        lhs: l.0.clone(),
                        rhs: rr.0.clone(),
                    });
                } else if r.preserve.objects.get(&a.source) != Some(&b.source)
                    || r.preserve.objects.get(&a.target) != Some(&b.target)
                {
                    out.push(RuleViolation::PreserveIncidence {
                        lhs: l.clone(),
                        rhs: rr.clone(),
                    });
                }
            }
            (a, b) => {
                if a.is_none() {
                    out.push(RuleViolation::UnknownPreserved {
                        side: Side::Lhs,
                        id: l.0.clone(),
                    });
                }
                if b.is_none() {
                    out.push(RuleViolation::UnknownPreserved {
                        side: Side::Rhs,
                        id: rr.0.clone(),
                    });
                }
            }
        }
        if !images.insert(rr) {
            out.push(RuleViolation::PreserveNotInjective { rhs: rr.0.clone() });
        }
    }
    for (v, s) in r.rhs.variables() {
        if let Some(ls) = r.lhs.variables().get(v) {
            if ls != s {
                out.push(RuleViolation::VariableSortConflict {
                    var: v.clone(),
                    lhs: ls.clone(),
                    rhs: s.clone(),
                });
            }
        }
    }
    let slotted = r.lhs.slot_vars();
    for v in r.lhs.variables().keys() {
        if !slotted.contains(v) {
            out.push(RuleViolation::UnslottedLhsVariable(v.clone()));
        }
    }
    for v in formula_violations(&r.phi, &r.variables()) {
        out.push(match v {
            Violation::UndeclaredFormulaVariable { var } => RuleViolation::UnhousedVariable(var),
            other => RuleViolation::Phi(other),
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissibility {
    Admissible,
    Inadmissible,
    Unknown,
}

/// Outcome of the admissibility check with the split of `Φ` into conjuncts
/// over LHS variables only (`phi_app`) and the rest (`phi_eff`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibilityReport {
    pub verdict: Admissibility,
    pub phi_app: Vec<Formula>,
    pub phi_eff: Vec<Formula>,
    /// `∀ lhs ∃ fresh : phi_eff`, absent when `phi_eff` is empty.
    pub query: Option<Formula>,
    pub validity: Option<Validity>,
}

/// Splits `Φ` and checks that `phi_eff` can be met for every valuation of the
/// LHS variables.
pub fn check_admissibility(r: &SymbolicRule, solver: &dyn SatSolver) -> AdmissibilityReport {
    let lhs_vars = r.lhs_vars();
    let (phi_app, phi_eff): (Vec<Formula>, Vec<Formula>) = r
        .phi
        .conjuncts()
        .into_iter()
        .cloned()
        .partition(|c| c.free_vars().iter().all(|v| lhs_vars.contains(&v.id)));
    if phi_eff.is_empty() {
        return AdmissibilityReport {
            verdict: Admissibility::Admissible,
            phi_app,
            phi_eff,
            query: None,
            validity: None,
        };
    }
    let body = Formula::and(phi_eff.clone());
    let (universal, existential): (Vec<Variable>, Vec<Variable>) = body
        .free_vars()
        .into_iter()
        .partition(|v| lhs_vars.contains(&v.id));
    let query = Formula::forall(universal, Formula::exists(existential, body));
    let validity = check_validity_folding(solver, &query).validity;
    let verdict = match &validity {
        Validity::Valid => Admissibility::Admissible,
        Validity::Invalid { .. } => Admissibility::Inadmissible,
        _ => Admissibility::Unknown,
    };
    AdmissibilityReport {
        verdict,
        phi_app,
        phi_eff,
        query: Some(query),
        validity: Some(validity),
    }
}

pub fn find_rule_matches(
    r: &SymbolicRule,
    host: &SymbolicGraph,
) -> Result<Vec<Morphism>, GraphError> {
    find_matches(&r.lhs, host)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ApplicationStatus {
    Applied,
    /// Host links that would lose an endpoint.
    InvalidDangling(Vec<LinkId>),
    InvalidUnsat,
    /// The solver could not decide satisfiability.
    UnknownSat(SatResult),
}

impl ApplicationStatus {
    pub fn is_applied(&self) -> bool {
        matches!(self, ApplicationStatus::Applied)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApplicationResult {
    pub status: ApplicationStatus,
    /// The result graph; present unless the application dangles.
    pub graph: Option<SymbolicGraph>,
    /// RHS objects and links to result elements.
    pub comatch: Morphism,
    /// Maps rule variables to host or fresh variables.
    pub sigma: Substitution,
    pub solver_time: Duration,
}

impl ApplicationResult {
    /// The result graph, when the application is valid.
    pub fn applied(&self) -> Option<&SymbolicGraph> {
        if self.status.is_applied() {
            self.graph.as_ref()
        } else {
            None
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApplyError {
    #[error("the morphism is not a match of the rule's LHS into the host")]
    NotAMatch,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
}

/// Smallest `n >= 1` such that no host identifier starts with `{rule}.{n}.`.
fn fresh_prefix(rule: &str, host: &SymbolicGraph) -> String {
    let used: BTreeSet<&str> = host
        .objects()
        .map(|o| o.id.as_str())
        .chain(host.links().map(|l| l.id.as_str()))
        .chain(host.variables().keys().map(|v| v.as_str()))
        .collect();
    (1..)
        .map(|n| format!("{rule}.{n}."))
        .find(|p| !used.iter().any(|u| u.starts_with(p.as_str())))
        .expect("some prefix is unused")
}

/// Applies `r` at match `m`: deletes the images of unpreserved LHS elements,
/// adds unpreserved RHS elements with fresh identifiers, installs RHS slot
/// variables on preserved objects and conjoins `σ'(Φ)` to the host formula.
pub fn apply(
    r: &SymbolicRule,
    m: &Morphism,
    host: &SymbolicGraph,
    solver: &dyn SatSolver,
) -> Result<ApplicationResult, ApplyError> {
    if !r.lhs.same_type_graph(host) {
        return Err(GraphError::TypeGraphMismatch.into());
    }
    if !m.is_valid(&r.lhs, host) {
        return Err(ApplyError::NotAMatch);
    }
    let deleted_objects: BTreeSet<&ObjId> =
        r.deleted_objects().map(|o| &m.objects[&o.id]).collect();
    let deleted_links: BTreeSet<&LinkId> = r.deleted_links().map(|l| &m.links[&l.id]).collect();
    let dangling: Vec<LinkId> = host
        .links()
        .filter(|l| !deleted_links.contains(&l.id))
        .filter(|l| deleted_objects.contains(&l.source) || deleted_objects.contains(&l.target))
        .map(|l| l.id.clone())
        .collect();
    let mut sigma = m.induced_substitution(&r.lhs, host)?;
    if !dangling.is_empty() {
        return Ok(ApplicationResult {
            status: ApplicationStatus::InvalidDangling(dangling),
            graph: None,
            comatch: Morphism::default(),
            sigma,
            solver_time: Duration::ZERO,
        });
    }

    let prefix = fresh_prefix(&r.name, host);
    let mut out = host.clone();
    for l in &deleted_links {
        out.remove_link(l);
    }
    for o in &deleted_objects {
        out.remove_object(o);
    }
    let lhs_vars = r.lhs.variables();
    for (v, s) in r.variables() {
        if lhs_vars.contains_key(&v) && sigma.contains(&v) {
            continue;
        }
        let fresh = Variable::new(format!("{prefix}{v}"), s.clone());
        out.add_variable(fresh.clone())?;
        sigma
            .insert(Variable::new(v, s), fresh)
            .expect("fresh variables keep their sort");
    }
    let all_vars = r.variables();
    let var_image = |v: &VarId| -> VarId {
        let sort = all_vars[v].clone();
        sigma.apply_var(&Variable::new(v.clone(), sort)).id
    };

    let mut comatch = Morphism::default();
    for (l, rr) in &r.preserve.objects {
        let target = m.objects[l].clone();
        for (attr, w) in &r.rhs.object(rr).expect("validated rule").slots {
            let img = var_image(w);
            if out.object(&target).and_then(|o| o.slots.get(attr)) != Some(&img) {
                out.set_slot(&target, attr, img)?;
            }
        }
        comatch.objects.insert(rr.clone(), target);
    }
    let preserved_rhs: BTreeSet<&ObjId> = r.preserve.objects.values().collect();
    for o in r.rhs.objects().filter(|o| !preserved_rhs.contains(&o.id)) {
        let id = ObjId(format!("{prefix}{}", o.id));
        out.add_object(Object {
            id: id.clone(),
            ty: o.ty.clone(),
            slots: o
                .slots
                .iter()
                .map(|(a, w)| (a.clone(), var_image(w)))
                .collect(),
        })?;
        comatch.objects.insert(o.id.clone(), id);
    }
    for (l, rr) in &r.preserve.links {
        comatch.links.insert(rr.clone(), m.links[l].clone());
    }
    let preserved_rhs_links: BTreeSet<&LinkId> = r.preserve.links.values().collect();
    for l in r
        .rhs
        .links()
        .filter(|l| !preserved_rhs_links.contains(&l.id))
    {
        let id = LinkId(format!("{prefix}{}", l.id));
        out.add_link(Link {
            id: id.clone(),
            ty: l.ty.clone(),
            source: comatch.objects[&l.source].clone(),
            target: comatch.objects[&l.target].clone(),
        })?;
        comatch.links.insert(l.id.clone(), id);
    }
    out.set_formula(host.formula().conjoin(&r.phi.substitute(&sigma)));

    let verdict = check_sat_folding(solver, out.formula());
    let status = match verdict.result {
        SatResult::Sat { .. } => ApplicationStatus::Applied,
        SatResult::Unsat => ApplicationStatus::InvalidUnsat,
        other => {
            log::warn!(
                "satisfiability of applying `{}` is undecided ({other:?}); treating as invalid",
                r.name
            );
            ApplicationStatus::UnknownSat(other)
        }
    };
    Ok(ApplicationResult {
        status,
        graph: Some(out),
        comatch,
        sigma,
        solver_time: verdict.wall_time,
    })
}

/// Identity rule over `pattern`: both sides equal, everything preserved,
/// `Φ = true`.
pub fn identity_rule(name: &str, pattern: &SymbolicGraph) -> SymbolicRule {
    let mut preserve = Morphism::default();
    for o in pattern.objects() {
        preserve.objects.insert(o.id.clone(), o.id.clone());
    }
    for l in pattern.links() {
        preserve.links.insert(l.id.clone(), l.id.clone());
    }
    let mut side = pattern.clone();
    side.set_formula(Formula::tt());
    SymbolicRule {
        name: name.to_owned(),
        lhs: side.clone(),
        rhs: side,
        preserve,
        phi: Formula::tt(),
    }
}
