use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::morphism::Morphism;
use super::symbolic::{GraphError, Link, LinkId, ObjId, Object, SymbolicGraph};
use crate::formula::{Substitution, VarId, Variable};

/// Partial injective identification of elements of the second graph with
/// elements of the first (keys in g2, values in g1).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Identification {
    pub objects: BTreeMap<ObjId, ObjId>,
    pub links: BTreeMap<LinkId, LinkId>,
}

impl Identification {
    pub fn is_empty(&self) -> bool {
        self.objects.is_empty() && self.links.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GlueError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("identification mentions unknown object `{0}`")]
    UnknownObject(ObjId),
    #[error("identification mentions unknown link `{0}`")]
    UnknownLink(LinkId),
    #[error("cannot identify `{left}` and `{right}`: different types")]
    TypeClash { left: String, right: String },
    #[error("cannot identify links `{left}` and `{right}`: endpoints are not identified")]
    IncidenceClash { left: LinkId, right: LinkId },
    #[error("identification is not injective at `{0}`")]
    NotInjective(String),
    #[error("identified slots `{object}.{attribute}` hold variables of different sorts")]
    SlotSortClash { object: ObjId, attribute: String },
}

/// Result of gluing: the glued graph and the embeddings of both inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gluing {
    pub graph: SymbolicGraph,
    pub from_g1: Morphism,
    pub from_g2: Morphism,
}

fn unique(base: String, taken: &BTreeSet<String>) -> String {
    let mut name = base;
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

/// Pushout of `g1 ← overlap → g2`.
///
/// Identified elements appear once (named `a` if both ids agree, `a~b`
/// otherwise); unidentified elements of `g2` keep their ids unless these clash
/// with `g1`. Identified slots take the variable of `g1`; other variables of
/// `g2` are renamed on collision. The formula is `Φ1 ∧ ρ(Φ2)` for the
/// variable renaming ρ of `g2`.
pub fn glue(
    g1: &SymbolicGraph,
    g2: &SymbolicGraph,
    id: &Identification,
) -> Result<Gluing, GlueError> {
    if !g1.same_type_graph(g2) {
        return Err(GraphError::TypeGraphMismatch.into());
    }
    check_identification(g1, g2, id)?;
    let merged_of: BTreeMap<&ObjId, &ObjId> = id.objects.iter().map(|(a, b)| (b, a)).collect();
    let merged_link_of: BTreeMap<&LinkId, &LinkId> = id.links.iter().map(|(a, b)| (b, a)).collect();

    // Object names.
    let mut taken: BTreeSet<String> = g1
        .objects()
        .filter(|o| !merged_of.contains_key(&o.id))
        .map(|o| o.id.0.clone())
        .collect();
    let mut from_g1 = Morphism::default();
    let mut from_g2 = Morphism::default();
    for o in g1.objects() {
        let name = match merged_of.get(&o.id) {
            None => o.id.0.clone(),
            Some(o2) if *o2 == &o.id => unique(o.id.0.clone(), &taken),
            Some(o2) => unique(format!("{}~{}", o.id, o2), &taken),
        };
        taken.insert(name.clone());
        from_g1.objects.insert(o.id.clone(), ObjId(name.clone()));
        if let Some(o2) = merged_of.get(&o.id) {
            from_g2.objects.insert((*o2).clone(), ObjId(name));
        }
    }
    for o in g2.objects() {
        if !id.objects.contains_key(&o.id) {
            let name = unique(o.id.0.clone(), &taken);
            taken.insert(name.clone());
            from_g2.objects.insert(o.id.clone(), ObjId(name));
        }
    }

    // Link names.
    let mut taken: BTreeSet<String> = g1
        .links()
        .filter(|l| !merged_link_of.contains_key(&l.id))
        .map(|l| l.id.0.clone())
        .collect();
    for l in g1.links() {
        let name = match merged_link_of.get(&l.id) {
            None => l.id.0.clone(),
            Some(l2) if *l2 == &l.id => unique(l.id.0.clone(), &taken),
            Some(l2) => unique(format!("{}~{}", l.id, l2), &taken),
        };
        taken.insert(name.clone());
        from_g1.links.insert(l.id.clone(), LinkId(name.clone()));
        if let Some(l2) = merged_link_of.get(&l.id) {
            from_g2.links.insert((*l2).clone(), LinkId(name));
        }
    }
    for l in g2.links() {
        if !id.links.contains_key(&l.id) {
            let name = unique(l.id.0.clone(), &taken);
            taken.insert(name.clone());
            from_g2.links.insert(l.id.clone(), LinkId(name));
        }
    }

    // Variable renaming of g2.
    let mut rho = Substitution::new();
    for (o2, o1) in &id.objects {
        let (obj1, obj2) = (g1.object(o1).unwrap(), g2.object(o2).unwrap());
        for attr in obj2.slots.keys() {
            if !obj1.slots.contains_key(attr) {
                continue;
            }
            let (Some(v2), Some(v1)) = (g2.slot(o2, attr), g1.slot(o1, attr)) else {
                continue;
            };
            if v1.sort != v2.sort {
                return Err(GlueError::SlotSortClash {
                    object: o2.clone(),
                    attribute: attr.clone(),
                });
            }
            // A g2 variable shared by two merged slots keeps its first image.
            let _ = rho.insert(v2, v1);
        }
    }
    let mut var_taken: BTreeSet<String> = g1.variables().keys().map(|v| v.0.clone()).collect();
    var_taken.extend(g2.variables().keys().map(|v| v.0.clone()));
    for (v, sort) in g2.variables() {
        if rho.contains(v) {
            continue;
        }
        let target = match g1.variables().get(v) {
            None => v.clone(),
            Some(_) => {
                let fresh = unique(v.0.clone(), &var_taken);
                var_taken.insert(fresh.clone());
                VarId(fresh)
            }
        };
        rho.insert(
            Variable::new(v.clone(), sort.clone()),
            Variable::new(target, sort.clone()),
        )
        .expect("fresh targets are sort-preserving");
    }

    let mut out = SymbolicGraph::new(g1.type_graph().clone());
    for (v, s) in g1.variables() {
        out.add_variable(Variable::new(v.clone(), s.clone()))?;
    }
    for (v, s) in g2.variables() {
        let target = rho.apply_var(&Variable::new(v.clone(), s.clone()));
        out.add_variable(target)?;
    }
    for o in g1.objects() {
        let mut slots = o.slots.clone();
        if let Some(o2) = merged_of.get(&o.id) {
            // Slots only g2 declares (ill-typed inputs) are carried over.
            for (attr, v) in &g2.object(o2).unwrap().slots {
                slots
                    .entry(attr.clone())
                    .or_insert_with(|| rename(&rho, g2, v));
            }
        }
        out.add_object(Object {
            id: from_g1.objects[&o.id].clone(),
            ty: o.ty.clone(),
            slots,
        })?;
    }
    for o in g2.objects().filter(|o| !id.objects.contains_key(&o.id)) {
        out.add_object(Object {
            id: from_g2.objects[&o.id].clone(),
            ty: o.ty.clone(),
            slots: o
                .slots
                .iter()
                .map(|(a, v)| (a.clone(), rename(&rho, g2, v)))
                .collect(),
        })?;
    }
    let map_end = |m: &Morphism, o: &ObjId| m.objects.get(o).cloned().unwrap_or_else(|| o.clone());
    for l in g1.links() {
        out.add_link(Link {
            id: from_g1.links[&l.id].clone(),
            ty: l.ty.clone(),
            source: map_end(&from_g1, &l.source),
            target: map_end(&from_g1, &l.target),
        })?;
    }
    for l in g2.links().filter(|l| !id.links.contains_key(&l.id)) {
        out.add_link(Link {
            id: from_g2.links[&l.id].clone(),
            ty: l.ty.clone(),
            source: map_end(&from_g2, &l.source),
            target: map_end(&from_g2, &l.target),
        })?;
    }
    out.set_formula(g1.formula().conjoin(&g2.formula().substitute(&rho)));
    Ok(Gluing {
        graph: out,
        from_g1,
        from_g2,
    })
}

fn rename(rho: &Substitution, g2: &SymbolicGraph, v: &VarId) -> VarId {
    match g2.variable(v) {
        Some(var) => rho.apply_var(&var).id,
        None => v.clone(),
    }
}

fn check_identification(
    g1: &SymbolicGraph,
    g2: &SymbolicGraph,
    id: &Identification,
) -> Result<(), GlueError> {
    let mut images = BTreeSet::new();
    for (o2, o1) in &id.objects {
        let a = g2
            .object(o2)
            .ok_or_else(|| GlueError::UnknownObject(o2.clone()))?;
        let b = g1
            .object(o1)
            .ok_or_else(|| GlueError::UnknownObject(o1.clone()))?;
        if a.ty != b.ty {
            return Err(GlueError::TypeClash {
                left: o1.0.clone(),
                right: o2.0.clone(),
            });
        }
        if !images.insert(o1) {
            return Err(GlueError::NotInjective(o1.0.clone()));
        }
    }
    let mut images = BTreeSet::new();
    for (l2, l1) in &id.links {
        let a = g2
            .link(l2)
            .ok_or_else(|| GlueError::UnknownLink(l2.clone()))?;
        let b = g1
            .link(l1)
            .ok_or_else(|| GlueError::UnknownLink(l1.clone()))?;
        if a.ty != b.ty {
            return Err(GlueError::TypeClash {
                left: l1.0.clone(),
                right: l2.0.clone(),
            });
        }
        if id.objects.get(&a.source) != Some(&b.source)
            || id.objects.get(&a.target) != Some(&b.target)
        {
            return Err(GlueError::IncidenceClash {
                left: l1.clone(),
                right: l2.clone(),
            });
        }
        if !images.insert(l1) {
            return Err(GlueError::NotInjective(l1.0.clone()));
        }
    }
    Ok(())
}
