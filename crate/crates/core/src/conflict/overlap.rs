use std::collections::BTreeSet;

use crate::efm::{check_wellformed, WfViolation};
use crate::graph::{glue, GraphError, Identification, Morphism, ObjId, SymbolicGraph};

/// A minimal application context: the gluing of two LHS patterns together
/// with the embeddings of both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapContext {
    pub ac: SymbolicGraph,
    pub m1: Morphism,
    pub m2: Morphism,
    /// Elements of the second LHS identified with elements of the first.
    pub identification: Identification,
}

/// Gluing of `lhs1` and `lhs2` along `identification`, which must be
/// type-consistent.
pub fn context_for(
    lhs1: &SymbolicGraph,
    lhs2: &SymbolicGraph,
    identification: Identification,
) -> Result<OverlapContext, crate::graph::GlueError> {
    let g = glue(lhs1, lhs2, &identification)?;
    Ok(OverlapContext {
        ac: g.graph,
        m1: g.from_g1,
        m2: g.from_g2,
        identification,
    })
}

/// Completes an object identification with the links it forces: two links of
/// the same type between identified endpoints must be identified, since
/// parallel links are not allowed.
fn close_links(
    lhs1: &SymbolicGraph,
    lhs2: &SymbolicGraph,
    objects: &[(ObjId, ObjId)],
) -> Identification {
    let mut id = Identification {
        objects: objects.iter().cloned().collect(),
        ..Identification::default()
    };
    for l2 in lhs2.links() {
        let (Some(s), Some(t)) = (id.objects.get(&l2.source), id.objects.get(&l2.target)) else {
            continue;
        };
        if let Some(l1) = lhs1
            .links()
            .find(|l1| l1.ty == l2.ty && &l1.source == s && &l1.target == t)
        {
            id.links.insert(l2.id.clone(), l1.id.clone());
        }
    }
    id
}

fn identifications(
    lhs1: &SymbolicGraph,
    lhs2: &SymbolicGraph,
    todo: &[(&ObjId, &str)],
    used: &mut BTreeSet<ObjId>,
    current: &mut Vec<(ObjId, ObjId)>,
    out: &mut Vec<Identification>,
) {
    let Some(((o2, ty), rest)) = todo.split_first() else {
        if !current.is_empty() {
            out.push(close_links(lhs1, lhs2, current));
        }
        return;
    };
    identifications(lhs1, lhs2, rest, used, current, out);
    for o1 in lhs1.objects().filter(|o| o.ty == *ty) {
        if used.insert(o1.id.clone()) {
            current.push(((*o2).clone(), o1.id.clone()));
            identifications(lhs1, lhs2, rest, used, current, out);
            current.pop();
            used.remove(&o1.id);
        }
    }
}

/// All non-empty overlaps of two LHS patterns, largest first.
///
/// Every partial injective type-preserving object map from `lhs2` to `lhs1`
/// yields exactly one context; distinct maps yield distinct `(ac, m1, m2)`
/// triples up to isomorphism.
pub fn enumerate_overlaps(
    lhs1: &SymbolicGraph,
    lhs2: &SymbolicGraph,
) -> Result<Vec<OverlapContext>, GraphError> {
    if !lhs1.same_type_graph(lhs2) {
        return Err(GraphError::TypeGraphMismatch);
    }
    let todo: Vec<(&ObjId, &str)> = lhs2.objects().map(|o| (&o.id, o.ty.as_str())).collect();
    let mut ids = Vec::new();
    identifications(
        lhs1,
        lhs2,
        &todo,
        &mut BTreeSet::new(),
        &mut Vec::new(),
        &mut ids,
    );
    ids.sort_by(|a, b| {
        (b.objects.len(), b.links.len())
            .cmp(&(a.objects.len(), a.links.len()))
            .then_with(|| a.cmp(b))
    });
    Ok(ids
        .into_iter()
        .map(|id| context_for(lhs1, lhs2, id).expect("type-consistent identifications glue"))
        .collect())
}

/// Splits contexts into well-formed ones and those violating a constraint.
pub fn filter_wellformed(
    contexts: Vec<OverlapContext>,
) -> Result<(Vec<OverlapContext>, Vec<(OverlapContext, Vec<WfViolation>)>), GraphError> {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for ctx in contexts {
        let v = check_wellformed(&ctx.ac)?;
        if v.is_empty() {
            kept.push(ctx);
        } else {
            dropped.push((ctx, v));
        }
    }
    Ok((kept, dropped))
}
