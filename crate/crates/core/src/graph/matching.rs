use std::collections::{BTreeMap, BTreeSet};

use super::morphism::Morphism;
use super::symbolic::{GraphError, Link, LinkId, ObjId, SymbolicGraph};
use super::type_graph::EdgeType;

type HostIndex<'h> = BTreeMap<(&'h EdgeType, &'h ObjId, &'h ObjId), Vec<&'h LinkId>>;

struct Search<'p, 'h> {
    pattern_objs: Vec<(&'p ObjId, &'p str)>,
    /// Pattern links whose later endpoint (in assignment order) is index i.
    closing: Vec<Vec<&'p Link>>,
    pattern_links: Vec<&'p Link>,
    candidates: BTreeMap<&'h str, Vec<&'h ObjId>>,
    host_links: HostIndex<'h>,
    assigned: Vec<&'h ObjId>,
    used: BTreeSet<&'h ObjId>,
    out: Vec<Morphism>,
}

/// All injective, type- and incidence-preserving morphisms from `pattern` to
/// `host`, ordered lexicographically by the object assignment (pattern objects
/// taken in id order). Formulas are ignored.
pub fn find_matches(
    pattern: &SymbolicGraph,
    host: &SymbolicGraph,
) -> Result<Vec<Morphism>, GraphError> {
    if !pattern.same_type_graph(host) {
        return Err(GraphError::TypeGraphMismatch);
    }
    let pattern_objs: Vec<(&ObjId, &str)> =
        pattern.objects().map(|o| (&o.id, o.ty.as_str())).collect();
    let position: BTreeMap<&ObjId, usize> = pattern_objs
        .iter()
        .enumerate()
        .map(|(i, (id, _))| (*id, i))
        .collect();
    let mut closing = vec![Vec::new(); pattern_objs.len()];
    for l in pattern.links() {
        let (Some(&s), Some(&t)) = (position.get(&l.source), position.get(&l.target)) else {
            // A dangling pattern link can never be matched.
            return Ok(Vec::new());
        };
        closing[s.max(t)].push(l);
    }
    let mut candidates: BTreeMap<&str, Vec<&ObjId>> = BTreeMap::new();
    for o in host.objects() {
        candidates.entry(o.ty.as_str()).or_default().push(&o.id);
    }
    let mut host_links: HostIndex = BTreeMap::new();
    for l in host.links() {
        host_links
            .entry((&l.ty, &l.source, &l.target))
            .or_default()
            .push(&l.id);
    }
    let mut search = Search {
        pattern_objs,
        closing,
        pattern_links: pattern.links().collect(),
        candidates,
        host_links,
        assigned: Vec::new(),
        used: BTreeSet::new(),
        out: Vec::new(),
    };
    search.assign(0, &position);
    Ok(search.out)
}

impl<'p, 'h> Search<'p, 'h> {
    fn image(&self, id: &ObjId, position: &BTreeMap<&ObjId, usize>) -> &'h ObjId {
        self.assigned[position[id]]
    }

    fn assign(&mut self, i: usize, position: &BTreeMap<&'p ObjId, usize>) {
        if i == self.pattern_objs.len() {
            self.emit_links(position);
            return;
        }
        let ty = self.pattern_objs[i].1;
        let Some(cands) = self.candidates.get(ty).cloned() else {
            return;
        };
        for h in cands {
            if self.used.contains(h) {
                continue;
            }
            self.assigned.push(h);
            let consistent = self.closing[i].iter().all(|l| {
                let key = (
                    &l.ty,
                    self.image(&l.source, position),
                    self.image(&l.target, position),
                );
                self.host_links.contains_key(&key)
            });
            if consistent {
                self.used.insert(h);
                self.assign(i + 1, position);
                self.used.remove(h);
            }
            self.assigned.pop();
        }
    }

    fn emit_links(&mut self, position: &BTreeMap<&'p ObjId, usize>) {
        let options: Vec<Vec<&'h LinkId>> = self
            .pattern_links
            .iter()
            .map(|l| {
                let key = (
                    &l.ty,
                    self.image(&l.source, position),
                    self.image(&l.target, position),
                );
                self.host_links.get(&key).cloned().unwrap_or_default()
            })
            .collect();
        let objects: BTreeMap<ObjId, ObjId> = self
            .pattern_objs
            .iter()
            .zip(&self.assigned)
            .map(|((p, _), h)| ((*p).clone(), (*h).clone()))
            .collect();
        let mut chosen = Vec::new();
        let mut used = BTreeSet::new();
        self.choose_links(0, &options, &mut chosen, &mut used, &objects);
    }

    fn choose_links(
        &mut self,
        k: usize,
        options: &[Vec<&'h LinkId>],
        chosen: &mut Vec<&'h LinkId>,
        used: &mut BTreeSet<&'h LinkId>,
        objects: &BTreeMap<ObjId, ObjId>,
    ) {
        if k == options.len() {
            self.out.push(Morphism {
                objects: objects.clone(),
                links: self
                    .pattern_links
                    .iter()
                    .zip(chosen.iter())
                    .map(|(p, h)| (p.id.clone(), (*h).clone()))
                    .collect(),
            });
            return;
        }
        for &h in &options[k] {
            if used.insert(h) {
                chosen.push(h);
                self.choose_links(k + 1, options, chosen, used, objects);
                chosen.pop();
                used.remove(h);
            }
        }
    }
}

/// All bijective morphisms from `g1` to `g2`; empty iff not isomorphic.
pub fn find_isomorphisms(g1: &SymbolicGraph, g2: &SymbolicGraph) -> Vec<Morphism> {
    if !g1.same_type_graph(g2) || g1.type_census() != g2.type_census() {
        return Vec::new();
    }
    // Equal census plus injectivity makes every match bijective.
    find_matches(g1, g2).unwrap_or_default()
}
