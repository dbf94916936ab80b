use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::symbolic::{LinkId, ObjId, SymbolicGraph};
use crate::formula::{Substitution, SubstitutionError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorphismError {
    #[error("object `{0}` is not mapped or maps to a missing object")]
    UnmappedObject(ObjId),
    #[error("slot `{object}.{attribute}` has no counterpart in the target")]
    MissingSlot { object: ObjId, attribute: String },
    #[error("induced variable map is inconsistent: {0}")]
    Substitution(#[from] SubstitutionError),
}

/// Object and link maps between two graphs. The graphs themselves are not
/// stored; validity is checked against a given source and target.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Morphism {
    pub objects: BTreeMap<ObjId, ObjId>,
    pub links: BTreeMap<LinkId, LinkId>,
}

impl Morphism {
    pub fn obj(&self, id: &ObjId) -> Option<&ObjId> {
        self.objects.get(id)
    }

    pub fn link(&self, id: &LinkId) -> Option<&LinkId> {
        self.links.get(id)
    }

    pub fn object_image(&self) -> BTreeSet<&ObjId> {
        self.objects.values().collect()
    }

    pub fn link_image(&self) -> BTreeSet<&LinkId> {
        self.links.values().collect()
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Morphism) -> Morphism {
        Morphism {
            objects: self
                .objects
                .iter()
                .filter_map(|(k, v)| Some((k.clone(), other.objects.get(v)?.clone())))
                .collect(),
            links: self
                .links
                .iter()
                .filter_map(|(k, v)| Some((k.clone(), other.links.get(v)?.clone())))
                .collect(),
        }
    }

    /// Inverse map; only meaningful for injective morphisms.
    pub fn inverse(&self) -> Morphism {
        Morphism {
            objects: self
                .objects
                .iter()
                .map(|(k, v)| (v.clone(), k.clone()))
                .collect(),
            links: self
                .links
                .iter()
                .map(|(k, v)| (v.clone(), k.clone()))
                .collect(),
        }
    }

    /// Total on `src`, injective, type-preserving and incidence-preserving.
    pub fn is_valid(&self, src: &SymbolicGraph, tgt: &SymbolicGraph) -> bool {
        if self.objects.len() != src.object_count() || self.links.len() != src.link_count() {
            return false;
        }
        if self.object_image().len() != self.objects.len()
            || self.link_image().len() != self.links.len()
        {
            return false;
        }
        for o in src.objects() {
            match self.objects.get(&o.id).and_then(|t| tgt.object(t)) {
                Some(t) if t.ty == o.ty => {}
                _ => return false,
            }
        }
        for l in src.links() {
            let Some(t) = self.links.get(&l.id).and_then(|t| tgt.link(t)) else {
                return false;
            };
            if t.ty != l.ty
                || self.objects.get(&l.source) != Some(&t.source)
                || self.objects.get(&l.target) != Some(&t.target)
            {
                return false;
            }
        }
        true
    }

    /// Variable map induced on slots: the variable of each source slot maps to
    /// the variable of the corresponding target slot.
    pub fn induced_substitution(
        &self,
        src: &SymbolicGraph,
        tgt: &SymbolicGraph,
    ) -> Result<Substitution, MorphismError> {
        let mut s = Substitution::new();
        for o in src.objects() {
            let t = self
                .objects
                .get(&o.id)
                .ok_or_else(|| MorphismError::UnmappedObject(o.id.clone()))?;
            for attr in o.slots.keys() {
                let (Some(from), Some(to)) = (src.slot(&o.id, attr), tgt.slot(t, attr)) else {
                    return Err(MorphismError::MissingSlot {
                        object: o.id.clone(),
                        attribute: attr.clone(),
                    });
                };
                s.insert(from, to)?;
            }
        }
        Ok(s)
    }
}

impl fmt::Display for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.objects.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}->{v}")?;
        }
        f.write_str("}")
    }
}
