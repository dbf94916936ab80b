//! The EFM metamodel, its well-formedness constraints and the configuration
//! semantics of feature groups and cross-tree relations.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, LazyLock};

use thiserror::Error;

use crate::formula::{CmpOp, Env, Formula, VarId, Variable};
use crate::graph::{
    find_matches, EdgeType, GraphError, Morphism, NodeType, ObjId, SymbolicGraph, TypeGraph,
};
use crate::smt::{check_sat_folding, SatResult, SatSolver};
use crate::sort::{EnumSort, Sort, Value};

pub const FEATURE: &str = "Feature";
pub const GROUP: &str = "Group";
pub const REAL_ATTRIBUTE: &str = "RealFeatureAttribute";
pub const NAT_ATTRIBUTE: &str = "NatFeatureAttribute";
pub const EXCLUDE: &str = "ExcludeRelation";

pub const SEL: &str = "sel";
pub const TYPE: &str = "type";
pub const VAL: &str = "val";

pub const GROUPS: &str = "groups";
pub const FEATURES: &str = "features";
pub const ATTRIBUTES: &str = "attributes";
pub const REQ: &str = "req";
pub const EX: &str = "ex";

pub const GROUP_TYPES: [&str; 4] = ["ALT", "OR", "OPT", "MAN"];

static GROUP_TYPE: LazyLock<Arc<EnumSort>> = LazyLock::new(|| {
    Arc::new(EnumSort::new("GroupType", GROUP_TYPES).expect("literals are distinct"))
});

static TYPE_GRAPH: LazyLock<Arc<TypeGraph>> = LazyLock::new(|| {
    let nodes = vec![
        NodeType::new(FEATURE, vec![(SEL, Sort::Bool)]),
        NodeType::new(GROUP, vec![(TYPE, Sort::Enum(group_type()))]),
        NodeType::new(REAL_ATTRIBUTE, vec![(VAL, Sort::Real)]),
        NodeType::new(NAT_ATTRIBUTE, vec![(VAL, Sort::Nat)]),
        NodeType::new(EXCLUDE, vec![]),
    ];
    let edges = vec![
        EdgeType::new(GROUPS, FEATURE, GROUP),
        EdgeType::new(FEATURES, GROUP, FEATURE),
        EdgeType::new(ATTRIBUTES, FEATURE, REAL_ATTRIBUTE),
        EdgeType::new(ATTRIBUTES, FEATURE, NAT_ATTRIBUTE),
        EdgeType::new(REQ, FEATURE, FEATURE),
        EdgeType::new(EX, EXCLUDE, FEATURE),
    ];
    Arc::new(TypeGraph::new("efm", nodes, edges).expect("the EFM metamodel is well-formed"))
});

static CONSTRAINTS: LazyLock<Vec<WellFormednessConstraint>> = LazyLock::new(|| {
    let shared = |name: &str, container: &str, edge: &str, contained: &str| {
        let mut p = SymbolicGraph::new(efm_type_graph());
        let slots = |ty: &str, suffix: &str| -> Vec<(String, String)> {
            TYPE_GRAPH
                .node(ty)
                .unwrap()
                .attributes
                .iter()
                .map(|(a, _)| (a.clone(), format!("{a}_{suffix}")))
                .collect()
        };
        for (id, ty) in [("c1", container), ("c2", container), ("x", contained)] {
            let s = slots(ty, id);
            let s: Vec<(&str, &str)> = s.iter().map(|(a, v)| (a.as_str(), v.as_str())).collect();
            p.add_typed_object(id, ty, &s).unwrap();
        }
        p.add_named_link("l1", edge, "c1", "x").unwrap();
        p.add_named_link("l2", edge, "c2", "x").unwrap();
        WellFormednessConstraint {
            name: name.to_owned(),
            pattern: p,
        }
    };
    vec![
        shared("C-1", GROUP, FEATURES, FEATURE),
        shared("C-2", FEATURE, ATTRIBUTES, NAT_ATTRIBUTE),
        shared("C-3", FEATURE, ATTRIBUTES, REAL_ATTRIBUTE),
    ]
});

pub fn group_type() -> Arc<EnumSort> {
    GROUP_TYPE.clone()
}

pub fn efm_type_graph() -> Arc<TypeGraph> {
    TYPE_GRAPH.clone()
}

/// A forbidden pattern: a graph satisfies the constraint iff the pattern has
/// no match in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WellFormednessConstraint {
    pub name: String,
    pub pattern: SymbolicGraph,
}

/// C-1 (feature in two groups), C-2 (nat attribute under two features) and
/// C-3 (real attribute under two features).
pub fn builtin_constraints() -> Vec<WellFormednessConstraint> {
    CONSTRAINTS.clone()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WfViolation {
    pub constraint: String,
    pub morphism: Morphism,
}

/// Violations of C-1..C-3, one per violating match up to swapping the two
/// container roles.
pub fn check_wellformed(g: &SymbolicGraph) -> Result<Vec<WfViolation>, GraphError> {
    let mut out = Vec::new();
    for c in CONSTRAINTS.iter() {
        let mut seen = BTreeSet::new();
        for m in find_matches(&c.pattern, g)? {
            let image: BTreeSet<ObjId> = m.objects.values().cloned().collect();
            if seen.insert(image) {
                out.push(WfViolation {
                    constraint: c.name.clone(),
                    morphism: m,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("group `{0}` has no parent feature")]
    NoParent(ObjId),
    #[error("group `{0}` has more than one parent feature")]
    SeveralParents(ObjId),
    #[error("group `{group}` is fixed to {kind} but has {children} children")]
    SingleChildGroup {
        group: ObjId,
        kind: String,
        children: usize,
    },
    #[error("object `{object}` lacks its `{attribute}` slot")]
    MissingSlot { object: ObjId, attribute: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn sel(g: &SymbolicGraph, f: &ObjId) -> Result<Formula, EncodeError> {
    g.slot(f, SEL)
        .map(|v| Formula::var(&v))
        .ok_or_else(|| EncodeError::MissingSlot {
            object: f.clone(),
            attribute: SEL.into(),
        })
}

/// Group type literal fixed by a top-level conjunct `(= t LIT)` of `Φ`.
fn fixed_type(phi: &Formula, t: &Variable) -> Option<String> {
    phi.conjuncts().into_iter().find_map(|c| match c {
        Formula::Cmp(CmpOp::Eq, a, b) => match (a.as_ref(), b.as_ref()) {
            (Formula::Var(v), Formula::EnumLit(_, lit))
            | (Formula::EnumLit(_, lit), Formula::Var(v))
                if v.id == t.id =>
            {
                Some(lit.clone())
            }
            _ => None,
        },
        _ => None,
    })
}

fn exactly_one(cs: &[Formula]) -> Formula {
    let mut parts = vec![Formula::or(cs.to_vec())];
    for i in 0..cs.len() {
        for j in i + 1..cs.len() {
            parts.push(Formula::not(Formula::and(vec![
                cs[i].clone(),
                cs[j].clone(),
            ])));
        }
    }
    Formula::and(parts)
}

/// Group, parent-child, require and exclude semantics as a formula over the
/// graph's slot variables. The graph's own formula is not included.
pub fn encode_config_semantics(g: &SymbolicGraph) -> Result<Formula, EncodeError> {
    let gt = group_type();
    let lit = |l: &str| Formula::enum_lit(&gt, l);
    let mut clauses = Vec::new();
    let mut child_parent = Vec::new();
    for group in g.objects().filter(|o| o.ty == GROUP) {
        let parents: Vec<&ObjId> = g
            .links()
            .filter(|l| l.ty.name == GROUPS && l.target == group.id)
            .map(|l| &l.source)
            .collect();
        let parent = match parents.as_slice() {
            [] => return Err(EncodeError::NoParent(group.id.clone())),
            [p] => *p,
            _ => return Err(EncodeError::SeveralParents(group.id.clone())),
        };
        let children: Vec<&ObjId> = g
            .links()
            .filter(|l| l.ty.name == FEATURES && l.source == group.id)
            .map(|l| &l.target)
            .collect();
        let t = g
            .slot(&group.id, TYPE)
            .ok_or_else(|| EncodeError::MissingSlot {
                object: group.id.clone(),
                attribute: TYPE.into(),
            })?;
        if let Some(kind) = fixed_type(g.formula(), &t) {
            if (kind == "OPT" || kind == "MAN") && children.len() != 1 {
                return Err(EncodeError::SingleChildGroup {
                    group: group.id.clone(),
                    kind,
                    children: children.len(),
                });
            }
        }
        let p = sel(g, parent)?;
        let cs = children
            .iter()
            .map(|c| sel(g, c))
            .collect::<Result<Vec<_>, _>>()?;
        let is = |l: &str| Formula::eq(Formula::var(&t), lit(l));
        clauses.push(Formula::implies(
            is("ALT"),
            Formula::iff(p.clone(), exactly_one(&cs)),
        ));
        clauses.push(Formula::implies(
            is("OR"),
            Formula::iff(p.clone(), Formula::or(cs.clone())),
        ));
        clauses.push(Formula::implies(
            is("OPT"),
            Formula::and(
                cs.iter()
                    .map(|c| Formula::implies(c.clone(), p.clone()))
                    .collect(),
            ),
        ));
        clauses.push(Formula::implies(
            is("MAN"),
            Formula::and(
                cs.iter()
                    .map(|c| Formula::iff(p.clone(), c.clone()))
                    .collect(),
            ),
        ));
        for c in cs {
            child_parent.push(Formula::implies(c, p.clone()));
        }
    }
    clauses.extend(child_parent);
    for l in g.links().filter(|l| l.ty.name == REQ) {
        clauses.push(Formula::implies(sel(g, &l.source)?, sel(g, &l.target)?));
    }
    for x in g.objects().filter(|o| o.ty == EXCLUDE) {
        let targets = g
            .links()
            .filter(|l| l.ty.name == EX && l.source == x.id)
            .map(|l| sel(g, &l.target))
            .collect::<Result<Vec<_>, _>>()?;
        for i in 0..targets.len() {
            for j in i + 1..targets.len() {
                clauses.push(Formula::not(Formula::and(vec![
                    targets[i].clone(),
                    targets[j].clone(),
                ])));
            }
        }
    }
    Ok(Formula::and(clauses))
}

/// Values for a graph's variables; must cover every slot variable.
pub type Assignment = BTreeMap<VarId, Value>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("assignment misses slot variables: {}", join(.0))]
    PartialAssignment(Vec<VarId>),
    #[error("assignment gives `{var}` the value {value}, which is not of sort {sort}")]
    SortMismatch {
        var: VarId,
        value: Value,
        sort: Sort,
    },
    #[error("assignment mentions unknown variable `{0}`")]
    UnknownVariable(VarId),
    #[error("the configuration depends on unassigned variables and no solver is available")]
    NeedsSolver,
    #[error("the solver could not decide the configuration: {0:?}")]
    Undecided(SatResult),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

fn join(ids: &[VarId]) -> String {
    ids.iter()
        .map(|v| v.0.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Checks an assignment against a graph's variables.
pub fn validate_assignment(g: &SymbolicGraph, a: &Assignment) -> Result<(), ConfigError> {
    for (var, value) in a {
        let sort = g
            .variables()
            .get(var)
            .ok_or_else(|| ConfigError::UnknownVariable(var.clone()))?;
        if !sort.admits(value) {
            return Err(ConfigError::SortMismatch {
                var: var.clone(),
                value: value.clone(),
                sort: sort.clone(),
            });
        }
    }
    let missing: Vec<VarId> = g
        .slot_vars()
        .into_iter()
        .filter(|v| !a.contains_key(v))
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(ConfigError::PartialAssignment(missing))
    }
}

/// Whether `a` satisfies the group semantics and the graph formula. Variables
/// the assignment leaves open are existentially closed and handed to `solver`
/// when evaluation alone cannot decide.
pub fn check_configuration(
    g: &SymbolicGraph,
    a: &Assignment,
    solver: Option<&dyn SatSolver>,
) -> Result<bool, ConfigError> {
    validate_assignment(g, a)?;
    let f = encode_config_semantics(g)?.conjoin(g.formula());
    let env: Env = a.clone();
    if let Some(b) = f.eval_bool(&env) {
        return Ok(b);
    }
    let solver = solver.ok_or(ConfigError::NeedsSolver)?;
    let rest = f.instantiate(a);
    let closed = Formula::exists(rest.free_vars().into_iter().collect(), rest);
    match check_sat_folding(solver, &closed).result {
        SatResult::Sat { .. } => Ok(true),
        SatResult::Unsat => Ok(false),
        other => Err(ConfigError::Undecided(other)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

/// Satisfiability of the group semantics conjoined with the graph formula.
pub fn has_valid_configuration(
    g: &SymbolicGraph,
    solver: &dyn SatSolver,
) -> Result<Answer, EncodeError> {
    let f = encode_config_semantics(g)?.conjoin(g.formula());
    Ok(match check_sat_folding(solver, &f).result {
        SatResult::Sat { .. } => Answer::Yes,
        SatResult::Unsat => Answer::No,
        _ => Answer::Unknown,
    })
}
