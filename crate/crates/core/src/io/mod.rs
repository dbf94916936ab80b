//! JSON documents for models, rules, assignments and conflict reports.
//!
//! Formulas are carried as SMT-LIB2 term text. Serialization is canonical:
//! variables, objects and links sorted by id, pretty-printed with a trailing
//! newline.

mod assignment;
mod model;
pub mod report;
mod rule;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::efm::efm_type_graph;
use crate::formula::parse::{parse_formula, parse_sort};
use crate::formula::{Formula, VarId, Variable};
use crate::graph::{Link, ObjId, Object, SymbolicGraph, TypeGraph};
use crate::sort::Sort;

pub use assignment::{parse_assignment, serialize_assignment, AssignmentDocument};
pub use model::{parse_model, serialize_model, ModelDocument};
pub use rule::{parse_rule, serialize_rule, RuleDocument};

pub const MODEL_FORMAT: &str = "efmct-model/1";
pub const RULE_FORMAT: &str = "efmct-rule/1";

#[derive(Debug, Error)]
pub enum DocError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}: {message}")]
    At { field: String, message: String },
}

pub(crate) fn at(field: impl Into<String>, message: impl Into<String>) -> DocError {
    DocError::At {
        field: field.into(),
        message: message.into(),
    }
}

/// Type graph registered under a metamodel name.
pub fn metamodel(name: &str) -> Option<Arc<TypeGraph>> {
    (name == "efm").then(efm_type_graph)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableDecl {
    pub id: String,
    pub sort: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectDecl {
    pub id: String,
    #[serde(rename = "type")]
    pub ty: String,
    #[serde(default)]
    pub slots: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDecl {
    pub id: String,
    #[serde(rename = "type")]
    pub ty: String,
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDecl {
    #[serde(default)]
    pub objects: Vec<ObjectDecl>,
    #[serde(default)]
    pub links: Vec<LinkDecl>,
}

pub(crate) fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

pub(crate) fn declare_variables(
    decls: &[VariableDecl],
    tg: &TypeGraph,
) -> Result<BTreeMap<VarId, Sort>, DocError> {
    let mut out = BTreeMap::new();
    for (i, d) in decls.iter().enumerate() {
        let sort = parse_sort(&d.sort, tg.enums()).ok_or_else(|| {
            at(
                format!("variables[{i}].sort"),
                format!("unknown sort `{}`", d.sort),
            )
        })?;
        if out.insert(VarId(d.id.clone()), sort).is_some() {
            return Err(at(
                format!("variables[{i}].id"),
                format!("variable `{}` is declared twice", d.id),
            ));
        }
    }
    Ok(out)
}

/// Builds the graph part of a document section. Slot variables must be
/// declared in `vars`; only variables actually used are added unless
/// `all_vars` is set.
pub(crate) fn build_graph(
    prefix: &str,
    decl: &GraphDecl,
    vars: &BTreeMap<VarId, Sort>,
    tg: &Arc<TypeGraph>,
    all_vars: bool,
) -> Result<SymbolicGraph, DocError> {
    let mut g = SymbolicGraph::new(tg.clone());
    let declare = |g: &mut SymbolicGraph, id: &VarId, field: String| -> Result<(), DocError> {
        let sort = vars
            .get(id)
            .ok_or_else(|| at(&field, format!("undeclared variable `{id}`")))?;
        g.add_variable(Variable::new(id.clone(), sort.clone()))
            .map_err(|e| at(field, e.to_string()))
    };
    if all_vars {
        for id in vars.keys() {
            declare(&mut g, id, format!("{prefix}variables"))?;
        }
    }
    for (i, o) in decl.objects.iter().enumerate() {
        let field = format!("{prefix}objects[{i}]");
        let node = tg.node(&o.ty).ok_or_else(|| {
            at(
                format!("{field}.type"),
                format!("unknown node type `{}`", o.ty),
            )
        })?;
        let mut slots = BTreeMap::new();
        for (attr, var) in &o.slots {
            let sfield = format!("{field}.slots.{attr}");
            let expected = node
                .attribute(attr)
                .ok_or_else(|| at(&sfield, format!("`{}` has no attribute `{attr}`", o.ty)))?;
            let id = VarId(var.clone());
            declare(&mut g, &id, sfield.clone())?;
            if &vars[&id] != expected {
                return Err(at(
                    sfield,
                    format!(
                        "variable `{var}` has sort {}, expected {expected}",
                        vars[&id]
                    ),
                ));
            }
            slots.insert(attr.clone(), id);
        }
        for (attr, _) in &node.attributes {
            if !slots.contains_key(attr) {
                return Err(at(
                    format!("{field}.slots"),
                    format!("missing slot `{attr}`"),
                ));
            }
        }
        g.add_object(Object {
            id: ObjId(o.id.clone()),
            ty: o.ty.clone(),
            slots,
        })
        .map_err(|e| at(format!("{field}.id"), e.to_string()))?;
    }
    for (i, l) in decl.links.iter().enumerate() {
        let field = format!("{prefix}links[{i}]");
        g.add_named_link(&l.id, &l.ty, &l.source, &l.target)
            .map_err(|e| at(field, e.to_string()))?;
    }
    let mut seen = BTreeSet::new();
    for l in g.links() {
        if !seen.insert((&l.ty, &l.source, &l.target)) {
            return Err(at(
                format!("{prefix}links"),
                format!(
                    "link `{}` is parallel to another link of the same type",
                    l.id
                ),
            ));
        }
    }
    Ok(g)
}

pub(crate) fn graph_decl(g: &SymbolicGraph) -> GraphDecl {
    GraphDecl {
        objects: g
            .objects()
            .map(|o| ObjectDecl {
                id: o.id.0.clone(),
                ty: o.ty.clone(),
                slots: o
                    .slots
                    .iter()
                    .map(|(a, v)| (a.clone(), v.0.clone()))
                    .collect(),
            })
            .collect(),
        links: g.links().map(link_decl).collect(),
    }
}

fn link_decl(l: &Link) -> LinkDecl {
    LinkDecl {
        id: l.id.0.clone(),
        ty: l.ty.name.clone(),
        source: l.source.0.clone(),
        target: l.target.0.clone(),
    }
}

pub(crate) fn variable_decls<'a>(
    vars: impl IntoIterator<Item = (&'a VarId, &'a Sort)>,
) -> Vec<VariableDecl> {
    vars.into_iter()
        .map(|(v, s)| VariableDecl {
            id: v.0.clone(),
            sort: s.name().to_owned(),
        })
        .collect()
}

pub(crate) fn parse_formula_field(
    field: &str,
    text: &str,
    vars: &BTreeMap<VarId, Sort>,
    tg: &TypeGraph,
) -> Result<Formula, DocError> {
    parse_formula(text, vars, tg.enums()).map_err(|e| at(field, e.to_string()))
}
