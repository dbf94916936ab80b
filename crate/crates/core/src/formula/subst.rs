use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::{Formula, VarId, Variable};
use crate::sort::{Sort, Value};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubstitutionError {
    #[error("substitution maps {from} to {to}, which has a different sort")]
    SortMismatch { from: Variable, to: Variable },
    #[error("variable {0} is already mapped to a different variable")]
    Conflict(VarId),
}

/// Finite, sort-preserving map from variables to variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution {
    map: BTreeMap<VarId, Variable>,
    sorts: BTreeMap<VarId, Sort>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (Variable, Variable)>,
    ) -> Result<Self, SubstitutionError> {
        let mut s = Self::new();
        for (from, to) in pairs {
            s.insert(from, to)?;
        }
        Ok(s)
    }

    /// Adds `from ↦ to`. Re-inserting the same pair is a no-op; mapping a
    /// variable twice to different targets is an error.
    pub fn insert(&mut self, from: Variable, to: Variable) -> Result<(), SubstitutionError> {
        if from.sort != to.sort {
            return Err(SubstitutionError::SortMismatch { from, to });
        }
        match self.map.get(&from.id) {
            Some(existing) if *existing != to => Err(SubstitutionError::Conflict(from.id)),
            Some(_) => Ok(()),
            None => {
                self.sorts.insert(from.id.clone(), from.sort);
                self.map.insert(from.id, to);
                Ok(())
            }
        }
    }

    pub fn get(&self, id: &VarId) -> Option<&Variable> {
        self.map.get(id)
    }

    pub fn contains(&self, id: &VarId) -> bool {
        self.map.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Variable, &Variable)> + '_ {
        self.map
            .iter()
            .map(|(id, to)| (Variable::new(id.clone(), self.sorts[id].clone()), to))
    }

    /// Image of `v`, or `v` itself outside the domain.
    pub fn apply_var(&self, v: &Variable) -> Variable {
        self.map.get(&v.id).cloned().unwrap_or_else(|| v.clone())
    }

    /// `other ∘ self`: first `self`, then `other`. Variables outside the
    /// domain of `self` are mapped by `other`.
    pub fn then(&self, other: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (from, to) in self.iter() {
            out.insert(from, other.apply_var(to))
                .expect("sorts are preserved");
        }
        for (from, to) in other.iter() {
            if !out.contains(&from.id) {
                out.insert(from, to.clone()).expect("sorts are preserved");
            }
        }
        out
    }

    pub fn is_injective(&self) -> bool {
        let images: BTreeSet<&VarId> = self.map.values().map(|v| &v.id).collect();
        images.len() == self.map.len()
    }

    /// Capture-avoiding application to the free variables of `f`.
    pub fn apply(&self, f: &Formula) -> Formula {
        let images: BTreeMap<VarId, Formula> = self
            .map
            .iter()
            .map(|(k, v)| (k.clone(), Formula::Var(v.clone())))
            .collect();
        replace_free(f, &images)
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (from, to)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{from} -> {}", to.id)?;
        }
        f.write_str("}")
    }
}

impl Formula {
    /// Capture-avoiding renaming of free variables.
    pub fn substitute(&self, s: &Substitution) -> Formula {
        s.apply(self)
    }

    /// Replaces free variables by constants.
    pub fn instantiate(&self, values: &BTreeMap<VarId, Value>) -> Formula {
        let images: BTreeMap<VarId, Formula> = values
            .iter()
            .map(|(id, v)| (id.clone(), value_term(v, self.var_sort(id))))
            .collect();
        replace_free(self, &images)
    }

    fn var_sort(&self, id: &VarId) -> Option<Sort> {
        self.free_vars()
            .into_iter()
            .find(|v| &v.id == id)
            .map(|v| v.sort)
    }
}

fn value_term(v: &Value, sort: Option<Sort>) -> Formula {
    match (v, sort) {
        (Value::Bool(b), _) => Formula::Bool(*b),
        (Value::Num(n), Some(Sort::Nat)) => Formula::Num(n.clone(), Sort::Nat),
        (Value::Num(n), _) => Formula::Num(n.clone(), Sort::Real),
        (Value::Enum(lit), Some(Sort::Enum(e))) => Formula::EnumLit(e, lit.clone()),
        // Not free in the formula, so the image is never used.
        (Value::Enum(_), _) => Formula::tt(),
    }
}

fn replace_free(f: &Formula, images: &BTreeMap<VarId, Formula>) -> Formula {
    if images.is_empty() {
        return f.clone();
    }
    match f {
        Formula::Var(v) => images.get(&v.id).cloned().unwrap_or_else(|| f.clone()),
        Formula::Quant(q, vars, body) => {
            let mut inner: BTreeMap<VarId, Formula> = images
                .iter()
                .filter(|(k, _)| !vars.iter().any(|b| &b.id == *k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            let body_free = body.free_vars();
            // Free names the images introduce into this scope.
            let incoming: BTreeSet<VarId> = body_free
                .iter()
                .filter_map(|v| inner.get(&v.id))
                .flat_map(|img| img.free_vars().into_iter().map(|v| v.id))
                .collect();
            let mut taken: BTreeSet<VarId> = body.all_var_ids();
            taken.extend(incoming.iter().cloned());
            taken.extend(inner.values().flat_map(|img| img.all_var_ids()));
            let mut new_vars = Vec::with_capacity(vars.len());
            for b in vars {
                if incoming.contains(&b.id) {
                    let fresh = fresh_name(&b.id, &taken);
                    taken.insert(fresh.clone());
                    let renamed = Variable::new(fresh, b.sort.clone());
                    inner.insert(b.id.clone(), Formula::Var(renamed.clone()));
                    new_vars.push(renamed);
                } else {
                    new_vars.push(b.clone());
                }
            }
            Formula::Quant(*q, new_vars, Box::new(replace_free(body, &inner)))
        }
        _ => f.map_children(|c| replace_free(c, images)),
    }
}

fn fresh_name(base: &VarId, taken: &BTreeSet<VarId>) -> VarId {
    let mut candidate = format!("{}'", base.0);
    while taken.contains(candidate.as_str()) {
        candidate.push('\'');
    }
    VarId(candidate)
}
