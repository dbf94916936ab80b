//! Independent reference implementations and the property checks built on
//! them.

use std::collections::{BTreeMap, BTreeSet};

use efmct_core::conflict::enumerate_overlaps;
use efmct_core::efm::{check_configuration, efm_type_graph, group_type, Assignment};
use efmct_core::formula::CmpOp;
use efmct_core::graph::{
    find_matches, glue, validate_graph, Identification, LinkId, Morphism, ObjId, SymbolicGraph,
};
use efmct_core::rule::{apply, find_rule_matches, ApplicationStatus};
use efmct_core::{fixtures, Formula, Sort, SymbolicRule, Value, VarId, Variable};
use itertools::Itertools;
use proptest::prelude::*;
use proptest::sample::Index;
use proptest::test_runner::TestCaseError;

use super::{always_sat, build, Shape};

type Check = Result<(), TestCaseError>;

/// Every injective object map, kept when types agree and each pattern link
/// has a same-typed host link between the images.
pub fn brute_force_matches(pattern: &SymbolicGraph, host: &SymbolicGraph) -> Vec<Morphism> {
    let pobjs: Vec<_> = pattern.objects().collect();
    let hobjs: Vec<_> = host.objects().collect();
    let mut out = Vec::new();
    for images in hobjs.iter().permutations(pobjs.len()) {
        if pobjs.iter().zip(&images).any(|(p, h)| p.ty != h.ty) {
            continue;
        }
        let objects: BTreeMap<ObjId, ObjId> = pobjs
            .iter()
            .zip(&images)
            .map(|(p, h)| (p.id.clone(), h.id.clone()))
            .collect();
        let mut links: BTreeMap<LinkId, LinkId> = BTreeMap::new();
        let complete = pattern.links().all(|l| {
            let hit = host.links().find(|h| {
                h.ty == l.ty && h.source == objects[&l.source] && h.target == objects[&l.target]
            });
            if let Some(h) = hit {
                links.insert(l.id.clone(), h.id.clone());
            }
            hit.is_some()
        });
        if complete {
            out.push(Morphism { objects, links });
        }
    }
    out.sort();
    out
}

pub fn check_matches(p: &Shape, h: &Shape) -> Check {
    let pattern = build(p, "p");
    let host = build(h, "h");
    let found = find_matches(&pattern, &host).unwrap();
    prop_assert_eq!(&found, &brute_force_matches(&pattern, &host));
    for m in &found {
        prop_assert!(m.is_valid(&pattern, &host));
    }
    Ok(())
}

/// All non-empty partial injective type-preserving object maps from `g2`
/// into `g1`.
pub fn object_maps(g1: &SymbolicGraph, g2: &SymbolicGraph) -> BTreeSet<BTreeMap<ObjId, ObjId>> {
    let choices: Vec<Vec<Option<ObjId>>> = g2
        .objects()
        .map(|o2| {
            std::iter::once(None)
                .chain(
                    g1.objects()
                        .filter(|o1| o1.ty == o2.ty)
                        .map(|o1| Some(o1.id.clone())),
                )
                .collect()
        })
        .collect();
    let ids: Vec<ObjId> = g2.objects().map(|o| o.id.clone()).collect();
    let mut out = BTreeSet::new();
    if ids.is_empty() {
        return out;
    }
    for pick in choices.into_iter().multi_cartesian_product() {
        let targets: Vec<&ObjId> = pick.iter().flatten().collect();
        if targets.is_empty() || targets.iter().unique().count() != targets.len() {
            continue;
        }
        out.insert(
            ids.iter()
                .zip(&pick)
                .filter_map(|(k, v)| Some((k.clone(), v.clone()?)))
                .collect(),
        );
    }
    out
}

/// Link pairs whose endpoints are identified and whose types agree.
pub fn forced_links(
    g1: &SymbolicGraph,
    g2: &SymbolicGraph,
    objects: &BTreeMap<ObjId, ObjId>,
) -> BTreeMap<LinkId, LinkId> {
    let mut out = BTreeMap::new();
    for l2 in g2.links() {
        for l1 in g1.links() {
            if l1.ty == l2.ty
                && objects.get(&l2.source) == Some(&l1.source)
                && objects.get(&l2.target) == Some(&l1.target)
            {
                out.insert(l2.id.clone(), l1.id.clone());
            }
        }
    }
    out
}

pub fn check_overlaps(a: &Shape, b: &Shape) -> Check {
    let g1 = build(a, "a");
    let g2 = build(b, "b");
    let contexts = enumerate_overlaps(&g1, &g2).unwrap();
    let expected = object_maps(&g1, &g2);
    prop_assert_eq!(contexts.len(), expected.len());

    let mut seen = BTreeSet::new();
    let mut prev: Option<(usize, usize)> = None;
    for ctx in &contexts {
        let id = &ctx.identification;
        prop_assert!(expected.contains(&id.objects));
        prop_assert!(seen.insert(id.objects.clone()));
        prop_assert_eq!(&id.links, &forced_links(&g1, &g2, &id.objects));
        let size = (id.objects.len(), id.links.len());
        if let Some(p) = prev {
            prop_assert!(p >= size, "contexts are not sorted by size");
        }
        prev = Some(size);

        prop_assert!(ctx.m1.is_valid(&g1, &ctx.ac));
        prop_assert!(ctx.m2.is_valid(&g2, &ctx.ac));
        prop_assert_eq!(
            ctx.ac.object_count(),
            g1.object_count() + g2.object_count() - id.objects.len()
        );
        prop_assert_eq!(
            ctx.ac.link_count(),
            g1.link_count() + g2.link_count() - id.links.len()
        );
        // The identification is recoverable from the two embeddings, so
        // distinct identifications give non-isomorphic contexts.
        let recovered: BTreeMap<ObjId, ObjId> = ctx
            .m2
            .objects
            .iter()
            .filter_map(|(o2, img)| {
                ctx.m1
                    .objects
                    .iter()
                    .find(|(_, i1)| *i1 == img)
                    .map(|(o1, _)| (o2.clone(), o1.clone()))
            })
            .collect();
        prop_assert_eq!(&recovered, &id.objects);
        let covered: BTreeSet<&ObjId> = ctx
            .m1
            .object_image()
            .union(&ctx.m2.object_image())
            .copied()
            .collect();
        prop_assert_eq!(covered.len(), ctx.ac.object_count());
    }
    Ok(())
}

pub fn rules() -> Vec<SymbolicRule> {
    vec![
        fixtures::r_a(),
        fixtures::r_b(),
        fixtures::r_c(),
        fixtures::identity(),
    ]
}

/// Random graph plus a disjoint copy of the rule's LHS, so at least one
/// match exists. The formula constrains a few slot variables.
pub fn host_with_match(s: &Shape, lhs: &SymbolicGraph, constrain: &[bool]) -> SymbolicGraph {
    let random = build(s, "h");
    let mut g = glue(&random, lhs, &Identification::default())
        .unwrap()
        .graph;
    let vars: Vec<Variable> = g.slot_vars().iter().filter_map(|v| g.variable(v)).collect();
    let atoms: Vec<Formula> = vars
        .iter()
        .zip(constrain)
        .filter(|(_, on)| **on)
        .filter_map(|(v, _)| match v.sort {
            Sort::Bool => Some(Formula::var(v)),
            Sort::Real => Some(Formula::cmp(CmpOp::Ge, Formula::var(v), Formula::real(0))),
            _ => None,
        })
        .collect();
    g.set_formula(Formula::and(atoms));
    g
}

pub fn check_application(s: &Shape, which: usize, constrain: &[bool], pick: Index) -> Check {
    let r = &rules()[which];
    let g = host_with_match(s, &r.lhs, constrain);
    let ms = find_rule_matches(r, &g).unwrap();
    prop_assert!(!ms.is_empty());
    let m = &ms[pick.index(ms.len())];
    let res = apply(r, m, &g, &always_sat()).unwrap();
    let again = apply(r, m, &g, &always_sat()).unwrap();
    prop_assert_eq!(&res.graph, &again.graph);

    let Some(out) = res.applied() else {
        prop_assert!(matches!(res.status, ApplicationStatus::InvalidDangling(_)));
        return Ok(());
    };
    prop_assert!(validate_graph(out, out.type_graph()).is_empty());
    for (v, sort) in g.variables() {
        prop_assert_eq!(out.variables().get(v), Some(sort));
    }
    let before = g.formula().conjuncts();
    let after = out.formula().conjuncts();
    prop_assert!(after.len() >= before.len());
    prop_assert_eq!(&after[..before.len()], &before[..]);

    let deleted: BTreeSet<_> = r
        .deleted_objects()
        .map(|o| m.objects[&o.id].clone())
        .collect();
    let added = r.rhs.object_count() - (r.lhs.object_count() - deleted.len());
    prop_assert_eq!(out.object_count(), g.object_count() - deleted.len() + added);
    for o in g.objects() {
        prop_assert_eq!(out.object(&o.id).is_some(), !deleted.contains(&o.id));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Alt,
    Or,
    Opt,
    Man,
}

impl Kind {
    pub fn literal(self) -> &'static str {
        match self {
            Kind::Alt => "ALT",
            Kind::Or => "OR",
            Kind::Opt => "OPT",
            Kind::Man => "MAN",
        }
    }
}

/// A Boolean feature model as plain data: groups are
/// `(parent, kind, children)`.
#[derive(Debug, Clone)]
pub struct FeatureModel {
    pub features: usize,
    pub groups: Vec<(usize, Kind, Vec<usize>)>,
    pub requires: Vec<(usize, usize)>,
    pub excludes: Vec<(usize, usize)>,
}

pub fn feature_model(max: usize) -> impl Strategy<Value = FeatureModel> {
    (2usize..=max).prop_flat_map(|n| {
        let parents: Vec<_> = (1..n).map(|i| (0..i, 0usize..2)).collect();
        (
            parents,
            prop::collection::vec(0usize..4, 2 * n),
            prop::collection::vec((0..n, 0..n), 0..3),
            prop::collection::vec((0..n, 0..n), 0..3),
        )
            .prop_map(move |(parents, kinds, requires, excludes)| {
                let mut slots: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
                for (i, (p, slot)) in parents.into_iter().enumerate() {
                    slots.entry((p, slot)).or_default().push(i + 1);
                }
                let groups = slots
                    .into_iter()
                    .enumerate()
                    .map(|(gi, ((p, _), cs))| {
                        let kind = match (kinds[gi], cs.len()) {
                            (0, _) => Kind::Alt,
                            (1, _) => Kind::Or,
                            (2, 1) => Kind::Opt,
                            (3, 1) => Kind::Man,
                            (2, _) => Kind::Alt,
                            _ => Kind::Or,
                        };
                        (p, kind, cs)
                    })
                    .collect();
                FeatureModel {
                    features: n,
                    groups,
                    requires: requires
                        .into_iter()
                        .filter(|(a, b)| a != b)
                        .unique()
                        .collect(),
                    excludes: excludes.into_iter().filter(|(a, b)| a != b).collect(),
                }
            })
    })
}

pub fn feature_graph(m: &FeatureModel) -> SymbolicGraph {
    let mut g = SymbolicGraph::new(efm_type_graph());
    for f in 0..m.features {
        g.add_typed_object(&format!("f{f}"), "Feature", &[("sel", &format!("s{f}"))])
            .unwrap();
    }
    let gt = group_type();
    let mut fixed = Vec::new();
    for (i, (p, kind, cs)) in m.groups.iter().enumerate() {
        let (gid, t) = (format!("g{i}"), format!("t{i}"));
        g.add_typed_object(&gid, "Group", &[("type", &t)]).unwrap();
        g.add_named_link(&format!("f{p}-{gid}"), "groups", &format!("f{p}"), &gid)
            .unwrap();
        for c in cs {
            g.add_named_link(&format!("{gid}-f{c}"), "features", &gid, &format!("f{c}"))
                .unwrap();
        }
        let tv = g.variable(&VarId::from(t.as_str())).unwrap();
        fixed.push(Formula::eq(
            Formula::var(&tv),
            Formula::enum_lit(&gt, kind.literal()),
        ));
    }
    for (a, b) in &m.requires {
        g.add_named_link(
            &format!("f{a}-req-f{b}"),
            "req",
            &format!("f{a}"),
            &format!("f{b}"),
        )
        .unwrap();
    }
    for (i, (a, b)) in m.excludes.iter().enumerate() {
        let x = format!("x{i}");
        g.add_typed_object(&x, "ExcludeRelation", &[]).unwrap();
        g.add_named_link(&format!("{x}-f{a}"), "ex", &x, &format!("f{a}"))
            .unwrap();
        g.add_named_link(&format!("{x}-f{b}"), "ex", &x, &format!("f{b}"))
            .unwrap();
    }
    g.set_formula(Formula::and(fixed));
    g
}

/// Group semantics evaluated directly on a selection.
pub fn valid_selection(m: &FeatureModel, sel: &[bool]) -> bool {
    for (p, kind, cs) in &m.groups {
        let p = sel[*p];
        let n = cs.iter().filter(|c| sel[**c]).count();
        if cs.iter().any(|c| sel[*c] && !p) {
            return false;
        }
        let ok = match kind {
            Kind::Alt => p == (n == 1),
            Kind::Or => p == (n >= 1),
            Kind::Opt => true,
            Kind::Man => p == (n == cs.len()),
        };
        if !ok {
            return false;
        }
    }
    m.requires.iter().all(|(a, b)| !sel[*a] || sel[*b])
        && m.excludes.iter().all(|(a, b)| !(sel[*a] && sel[*b]))
}

/// Compares the checker with [`valid_selection`] on every selection. With
/// `spoil`, one group type is assigned against its fixed value, which must
/// reject everything.
pub fn check_configurations(m: &FeatureModel, spoil: Option<Index>) -> Check {
    let g = feature_graph(m);
    let mut base = Assignment::new();
    for (i, (_, kind, _)) in m.groups.iter().enumerate() {
        base.insert(
            VarId::from(format!("t{i}").as_str()),
            Value::Enum(kind.literal().into()),
        );
    }
    let spoiled = match spoil {
        Some(ix) if !m.groups.is_empty() => {
            let i = ix.index(m.groups.len());
            let other = if m.groups[i].1 == Kind::Or {
                "ALT"
            } else {
                "OR"
            };
            base.insert(
                VarId::from(format!("t{i}").as_str()),
                Value::Enum(other.into()),
            );
            true
        }
        _ => false,
    };
    for bits in 0u32..(1 << m.features) {
        let sel: Vec<bool> = (0..m.features).map(|f| bits & (1 << f) != 0).collect();
        let mut a = base.clone();
        for (f, s) in sel.iter().enumerate() {
            a.insert(VarId::from(format!("s{f}").as_str()), Value::Bool(*s));
        }
        let expected = !spoiled && valid_selection(m, &sel);
        prop_assert_eq!(
            check_configuration(&g, &a, None).unwrap(),
            expected,
            "selection {:?}",
            sel
        );
    }
    Ok(())
}
