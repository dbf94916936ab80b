use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::type_graph::{EdgeType, TypeGraph};
use crate::formula::{Formula, VarId, Variable};
use crate::sort::Sort;

macro_rules! id_newtype {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }

        impl std::borrow::Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

id_newtype!(ObjId);
id_newtype!(LinkId);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Object {
    pub id: ObjId,
    pub ty: String,
    /// Attribute name to the variable held in that slot.
    pub slots: BTreeMap<String, VarId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Link {
    pub id: LinkId,
    pub ty: EdgeType,
    pub source: ObjId,
    pub target: ObjId,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("object `{0}` already exists")]
    DuplicateObject(ObjId),
    #[error("link `{0}` already exists")]
    DuplicateLink(LinkId),
    #[error("variable `{var}` is declared as {existing} and as {new}")]
    VariableSortConflict {
        var: VarId,
        existing: Sort,
        new: Sort,
    },
    #[error("no object `{0}`")]
    UnknownObject(ObjId),
    #[error("no node type `{0}`")]
    UnknownNodeType(String),
    #[error("node type `{ty}` has no attribute `{attribute}`")]
    UnknownAttribute { ty: String, attribute: String },
    #[error("no edge type `{name}` from {from} to {to}")]
    UnknownEdgeType {
        name: String,
        from: String,
        to: String,
    },
    #[error("graphs are typed over different type graphs")]
    TypeGraphMismatch,
}

/// A violated graph invariant, naming the offending element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Violation {
    UnknownNodeType {
        object: ObjId,
        ty: String,
    },
    MissingSlot {
        object: ObjId,
        attribute: String,
    },
    UnexpectedSlot {
        object: ObjId,
        attribute: String,
    },
    UndeclaredSlotVariable {
        object: ObjId,
        attribute: String,
        var: VarId,
    },
    SlotSortMismatch {
        object: ObjId,
        attribute: String,
        expected: Sort,
        found: Sort,
    },
    DanglingEndpoint {
        link: LinkId,
        object: ObjId,
    },
    UnknownEdgeType {
        link: LinkId,
        ty: EdgeType,
    },
    EndpointTypeMismatch {
        link: LinkId,
        object: ObjId,
        expected: String,
        found: String,
    },
    ParallelLinks {
        first: LinkId,
        second: LinkId,
    },
    UndeclaredFormulaVariable {
        var: VarId,
    },
    FormulaVariableSortMismatch {
        var: VarId,
        declared: Sort,
        used: Sort,
    },
    IllSortedFormula {
        message: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownNodeType { object, ty } => {
                write!(f, "object `{object}` has unknown node type `{ty}`")
            }
            Violation::MissingSlot { object, attribute } => {
                write!(
                    f,
                    "object `{object}` has no slot for attribute `{attribute}`"
                )
            }
            Violation::UnexpectedSlot { object, attribute } => {
                write!(
                    f,
                    "object `{object}` has a slot `{attribute}` its type does not declare"
                )
            }
            Violation::UndeclaredSlotVariable {
                object,
                attribute,
                var,
            } => write!(
                f,
                "slot `{object}.{attribute}` holds undeclared variable `{var}`"
            ),
            Violation::SlotSortMismatch {
                object,
                attribute,
                expected,
                found,
            } => write!(
                f,
                "slot `{object}.{attribute}` expects sort {expected} but holds a {found} variable"
            ),
            Violation::DanglingEndpoint { link, object } => {
                write!(f, "link `{link}` has dangling endpoint `{object}`")
            }
            Violation::UnknownEdgeType { link, ty } => {
                write!(f, "link `{link}` has unknown edge type {ty}")
            }
            Violation::EndpointTypeMismatch {
                link,
                object,
                expected,
                found,
            } => write!(
                f,
                "link `{link}` endpoint `{object}` has type `{found}`, expected `{expected}`"
            ),
            Violation::ParallelLinks { first, second } => {
                write!(
                    f,
                    "links `{first}` and `{second}` are parallel links of one type"
                )
            }
            Violation::UndeclaredFormulaVariable { var } => {
                write!(f, "formula mentions undeclared variable `{var}`")
            }
            Violation::FormulaVariableSortMismatch {
                var,
                declared,
                used,
            } => write!(
                f,
                "formula uses `{var}` as {used} but it is declared as {declared}"
            ),
            Violation::IllSortedFormula { message } => write!(f, "ill-sorted formula: {message}"),
        }
    }
}

/// A typed graph whose attribute slots hold variables, with a formula over
/// those variables. The variable set may contain variables held by no slot.
#[derive(Debug, Clone)]
pub struct SymbolicGraph {
    type_graph: Arc<TypeGraph>,
    objects: BTreeMap<ObjId, Object>,
    links: BTreeMap<LinkId, Link>,
    variables: BTreeMap<VarId, Sort>,
    formula: Formula,
}

impl PartialEq for SymbolicGraph {
    fn eq(&self, other: &Self) -> bool {
        self.same_type_graph(other)
            && self.objects == other.objects
            && self.links == other.links
            && self.variables == other.variables
            && self.formula == other.formula
    }
}

impl Eq for SymbolicGraph {}

impl SymbolicGraph {
    pub fn new(type_graph: Arc<TypeGraph>) -> Self {
        Self {
            type_graph,
            objects: BTreeMap::new(),
            links: BTreeMap::new(),
            variables: BTreeMap::new(),
            formula: Formula::tt(),
        }
    }

    pub fn type_graph(&self) -> &Arc<TypeGraph> {
        &self.type_graph
    }

    pub fn same_type_graph(&self, other: &SymbolicGraph) -> bool {
        Arc::ptr_eq(&self.type_graph, &other.type_graph) || self.type_graph == other.type_graph
    }

    pub fn objects(&self) -> impl Iterator<Item = &Object> {
        self.objects.values()
    }

    pub fn object(&self, id: &ObjId) -> Option<&Object> {
        self.objects.get(id)
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn links(&self) -> impl Iterator<Item = &Link> {
        self.links.values()
    }

    pub fn link(&self, id: &LinkId) -> Option<&Link> {
        self.links.get(id)
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn variables(&self) -> &BTreeMap<VarId, Sort> {
        &self.variables
    }

    pub fn variable(&self, id: &VarId) -> Option<Variable> {
        self.variables
            .get(id)
            .map(|s| Variable::new(id.clone(), s.clone()))
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    /// Variables held by at least one slot.
    pub fn slot_vars(&self) -> BTreeSet<VarId> {
        self.objects
            .values()
            .flat_map(|o| o.slots.values().cloned())
            .collect()
    }

    /// The variable in slot `attribute` of `object`, if both exist.
    pub fn slot(&self, object: &ObjId, attribute: &str) -> Option<Variable> {
        let var = self.objects.get(object)?.slots.get(attribute)?;
        self.variable(var)
    }

    /// Links whose source or target is `object`.
    pub fn incident_links<'a>(&'a self, object: &'a ObjId) -> impl Iterator<Item = &'a Link> {
        self.links
            .values()
            .filter(move |l| &l.source == object || &l.target == object)
    }

    /// Declares a variable; redeclaring with the same sort is a no-op.
    pub fn add_variable(&mut self, v: Variable) -> Result<(), GraphError> {
        match self.variables.get(&v.id) {
            Some(s) if *s != v.sort => Err(GraphError::VariableSortConflict {
                var: v.id,
                existing: s.clone(),
                new: v.sort,
            }),
            Some(_) => Ok(()),
            None => {
                self.variables.insert(v.id, v.sort);
                Ok(())
            }
        }
    }

    pub fn add_object(&mut self, o: Object) -> Result<(), GraphError> {
        if self.objects.contains_key(&o.id) {
            return Err(GraphError::DuplicateObject(o.id));
        }
        self.objects.insert(o.id.clone(), o);
        Ok(())
    }

    pub fn add_link(&mut self, l: Link) -> Result<(), GraphError> {
        if self.links.contains_key(&l.id) {
            return Err(GraphError::DuplicateLink(l.id));
        }
        self.links.insert(l.id.clone(), l);
        Ok(())
    }

    /// Removes an object without touching incident links or variables.
    pub fn remove_object(&mut self, id: &ObjId) -> Option<Object> {
        self.objects.remove(id)
    }

    pub fn remove_link(&mut self, id: &LinkId) -> Option<Link> {
        self.links.remove(id)
    }

    pub fn set_slot(
        &mut self,
        object: &ObjId,
        attribute: &str,
        var: VarId,
    ) -> Result<(), GraphError> {
        let o = self
            .objects
            .get_mut(object)
            .ok_or_else(|| GraphError::UnknownObject(object.clone()))?;
        o.slots.insert(attribute.to_owned(), var);
        Ok(())
    }

    pub fn set_formula(&mut self, f: Formula) {
        self.formula = f;
    }

    /// Adds an object of type `ty`, declaring each slot variable with the
    /// sort the type graph gives its attribute.
    pub fn add_typed_object(
        &mut self,
        id: &str,
        ty: &str,
        slots: &[(&str, &str)],
    ) -> Result<(), GraphError> {
        let tg = self.type_graph.clone();
        let node = tg
            .node(ty)
            .ok_or_else(|| GraphError::UnknownNodeType(ty.to_owned()))?;
        let mut slot_map = BTreeMap::new();
        for (attr, var) in slots {
            let sort = node
                .attribute(attr)
                .ok_or_else(|| GraphError::UnknownAttribute {
                    ty: ty.to_owned(),
                    attribute: (*attr).to_owned(),
                })?;
            self.add_variable(Variable::new(*var, sort.clone()))?;
            slot_map.insert((*attr).to_owned(), VarId::from(*var));
        }
        self.add_object(Object {
            id: id.into(),
            ty: ty.to_owned(),
            slots: slot_map,
        })
    }

    /// Adds a link named `name`, resolving its edge type from the endpoint
    /// object types.
    pub fn add_named_link(
        &mut self,
        id: &str,
        name: &str,
        source: &str,
        target: &str,
    ) -> Result<(), GraphError> {
        let ty_of = |o: &str| {
            self.objects
                .get(o)
                .map(|o| o.ty.clone())
                .ok_or_else(|| GraphError::UnknownObject(o.into()))
        };
        let (st, tt) = (ty_of(source)?, ty_of(target)?);
        let ty =
            self.type_graph
                .edge(name, &st, &tt)
                .cloned()
                .ok_or(GraphError::UnknownEdgeType {
                    name: name.to_owned(),
                    from: st,
                    to: tt,
                })?;
        self.add_link(Link {
            id: id.into(),
            ty,
            source: source.into(),
            target: target.into(),
        })
    }

    /// Number of objects per node type and links per edge type.
    pub fn type_census(&self) -> (BTreeMap<&str, usize>, BTreeMap<&EdgeType, usize>) {
        let mut nodes = BTreeMap::new();
        for o in self.objects.values() {
            *nodes.entry(o.ty.as_str()).or_insert(0) += 1;
        }
        let mut edges = BTreeMap::new();
        for l in self.links.values() {
            *edges.entry(&l.ty).or_insert(0) += 1;
        }
        (nodes, edges)
    }
}

/// Checks every graph invariant against `tg`; an empty list means valid.
pub fn validate_graph(g: &SymbolicGraph, tg: &TypeGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    for o in g.objects.values() {
        let Some(node) = tg.node(&o.ty) else {
            out.push(Violation::UnknownNodeType {
                object: o.id.clone(),
                ty: o.ty.clone(),
            });
            continue;
        };
        for (attr, sort) in &node.attributes {
            let Some(var) = o.slots.get(attr) else {
                out.push(Violation::MissingSlot {
                    object: o.id.clone(),
                    attribute: attr.clone(),
                });
                continue;
            };
            match g.variables.get(var) {
                None => out.push(Violation::UndeclaredSlotVariable {
                    object: o.id.clone(),
                    attribute: attr.clone(),
                    var: var.clone(),
                }),
                Some(found) if found != sort => out.push(Violation::SlotSortMismatch {
                    object: o.id.clone(),
                    attribute: attr.clone(),
                    expected: sort.clone(),
                    found: found.clone(),
                }),
                Some(_) => {}
            }
        }
        for attr in o.slots.keys() {
            if node.attribute(attr).is_none() {
                out.push(Violation::UnexpectedSlot {
                    object: o.id.clone(),
                    attribute: attr.clone(),
                });
            }
        }
    }
    let mut seen: BTreeMap<(&EdgeType, &ObjId, &ObjId), &LinkId> = BTreeMap::new();
    for l in g.links.values() {
        if !tg.has_edge(&l.ty) {
            out.push(Violation::UnknownEdgeType {
                link: l.id.clone(),
                ty: l.ty.clone(),
            });
        }
        for (end, expected) in [(&l.source, &l.ty.source), (&l.target, &l.ty.target)] {
            match g.objects.get(end) {
                None => out.push(Violation::DanglingEndpoint {
                    link: l.id.clone(),
                    object: end.clone(),
                }),
                Some(o) if &o.ty != expected => out.push(Violation::EndpointTypeMismatch {
                    link: l.id.clone(),
                    object: end.clone(),
                    expected: expected.clone(),
                    found: o.ty.clone(),
                }),
                Some(_) => {}
            }
        }
        if let Some(first) = seen.insert((&l.ty, &l.source, &l.target), &l.id) {
            out.push(Violation::ParallelLinks {
                first: first.clone(),
                second: l.id.clone(),
            });
        }
    }
    out.extend(formula_violations(&g.formula, &g.variables));
    out
}

/// Free variables of `f` must be declared in `vars` with the same sort, and
/// `f` must be a well-sorted Boolean formula.
pub(crate) fn formula_violations(f: &Formula, vars: &BTreeMap<VarId, Sort>) -> Vec<Violation> {
    let mut out = Vec::new();
    for v in f.free_vars() {
        match vars.get(&v.id) {
            None => out.push(Violation::UndeclaredFormulaVariable { var: v.id }),
            Some(s) if *s != v.sort => out.push(Violation::FormulaVariableSortMismatch {
                var: v.id,
                declared: s.clone(),
                used: v.sort,
            }),
            Some(_) => {}
        }
    }
    if let Err(e) = f.check_formula() {
        out.push(Violation::IllSortedFormula {
            message: e.to_string(),
        });
    }
    out
}
