use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::OverlapContext;
use crate::graph::{Morphism, ObjId};
use crate::rule::SymbolicRule;

/// Which rule of the pair performs the interfering change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actor {
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CpaReason {
    /// `by` deletes an element the other rule matches.
    DeleteUse { by: Actor, element: String },
    /// `by` gives a slot the other rule reads a new variable.
    ReassignUse {
        by: Actor,
        object: ObjId,
        attribute: String,
    },
}

impl fmt::Display for CpaReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let who = |a: &Actor| match a {
            Actor::First => "first",
            Actor::Second => "second",
        };
        match self {
            CpaReason::DeleteUse { by, element } => {
                write!(f, "{} rule deletes `{element}`, used by the other", who(by))
            }
            CpaReason::ReassignUse {
                by,
                object,
                attribute,
            } => write!(
                f,
                "{} rule reassigns `{object}.{attribute}`, used by the other",
                who(by)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "reasons", rename_all = "snake_case")]
pub enum CpaVerdict {
    PotentialConflict(Vec<CpaReason>),
    Independent,
}

impl CpaVerdict {
    pub fn is_potential_conflict(&self) -> bool {
        matches!(self, CpaVerdict::PotentialConflict(_))
    }
}

fn interference(
    by: Actor,
    r: &SymbolicRule,
    m: &Morphism,
    other: &Morphism,
    out: &mut Vec<CpaReason>,
) {
    let used_objects: BTreeSet<&ObjId> = other.object_image();
    let used_links = other.link_image();
    for o in r.deleted_objects() {
        let img = &m.objects[&o.id];
        if used_objects.contains(img) {
            out.push(CpaReason::DeleteUse {
                by,
                element: img.0.clone(),
            });
        }
    }
    for l in r.deleted_links() {
        let img = &m.links[&l.id];
        if used_links.contains(img) {
            out.push(CpaReason::DeleteUse {
                by,
                element: img.0.clone(),
            });
        }
    }
    for (o, attribute) in r.reassigned_slots() {
        let img = &m.objects[&o];
        if used_objects.contains(img) {
            out.push(CpaReason::ReassignUse {
                by,
                object: img.clone(),
                attribute,
            });
        }
    }
}

/// Structural delete-use and reassign-use check of both applications in a
/// context.
pub fn cpa_filter(r1: &SymbolicRule, r2: &SymbolicRule, ctx: &OverlapContext) -> CpaVerdict {
    let mut reasons = Vec::new();
    interference(Actor::First, r1, &ctx.m1, &ctx.m2, &mut reasons);
    interference(Actor::Second, r2, &ctx.m2, &ctx.m1, &mut reasons);
    if reasons.is_empty() {
        CpaVerdict::Independent
    } else {
        CpaVerdict::PotentialConflict(reasons)
    }
}
