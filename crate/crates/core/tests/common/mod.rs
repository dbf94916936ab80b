//! Random EFM-typed graphs for the property suites.

#![allow(dead_code)]

pub mod oracle;

use efmct_core::efm::{efm_type_graph, EXCLUDE, FEATURE, GROUP, NAT_ATTRIBUTE, REAL_ATTRIBUTE};
use efmct_core::graph::SymbolicGraph;
use efmct_core::smt::{SatResult, SatSolver, SmtVerdict};
use efmct_core::Formula;
use proptest::prelude::*;

pub const TYPES: [&str; 5] = [FEATURE, GROUP, REAL_ATTRIBUTE, NAT_ATTRIBUTE, EXCLUDE];

/// Edge name for a pair of node types, if the metamodel has one.
pub fn edge_name(src: &str, tgt: &str) -> Option<&'static str> {
    match (src, tgt) {
        (FEATURE, GROUP) => Some("groups"),
        (GROUP, FEATURE) => Some("features"),
        (FEATURE, REAL_ATTRIBUTE) | (FEATURE, NAT_ATTRIBUTE) => Some("attributes"),
        (FEATURE, FEATURE) => Some("req"),
        (EXCLUDE, FEATURE) => Some("ex"),
        _ => None,
    }
}

fn slot_attr(ty: &str) -> Option<&'static str> {
    match ty {
        FEATURE => Some("sel"),
        GROUP => Some("type"),
        REAL_ATTRIBUTE | NAT_ATTRIBUTE => Some("val"),
        _ => None,
    }
}

/// Shape of a random graph: node type indices and a link mask over ordered
/// object pairs.
#[derive(Debug, Clone)]
pub struct Shape {
    pub types: Vec<usize>,
    pub links: Vec<bool>,
}

/// Types are biased towards features, which carry most edges.
pub fn shape(min: usize, max: usize, density: f64) -> impl Strategy<Value = Shape> {
    let ty = prop_oneof![4 => Just(0usize), 2 => Just(1usize), 2 => Just(2usize), 1 => Just(3usize), 1 => Just(4usize)];
    prop::collection::vec(ty, min..=max).prop_flat_map(move |types| {
        let n = types.len();
        prop::collection::vec(prop::bool::weighted(density), n * n).prop_map(move |links| Shape {
            types: types.clone(),
            links,
        })
    })
}

/// Builds the graph; objects are `{prefix}{i}` and slot variables
/// `{attr}_{prefix}{i}`.
pub fn build(s: &Shape, prefix: &str) -> SymbolicGraph {
    let mut g = SymbolicGraph::new(efm_type_graph());
    let id = |i: usize| format!("{prefix}{i}");
    for (i, &t) in s.types.iter().enumerate() {
        let ty = TYPES[t];
        let var = slot_attr(ty).map(|a| (a, format!("{a}_{}", id(i))));
        let slots: Vec<(&str, &str)> = var.iter().map(|(a, v)| (*a, v.as_str())).collect();
        g.add_typed_object(&id(i), ty, &slots).unwrap();
    }
    let n = s.types.len();
    for i in 0..n {
        for j in 0..n {
            if i == j || !s.links[i * n + j] {
                continue;
            }
            if let Some(e) = edge_name(TYPES[s.types[i]], TYPES[s.types[j]]) {
                g.add_named_link(&format!("{}-{}", id(i), id(j)), e, &id(i), &id(j))
                    .unwrap();
            }
        }
    }
    g
}

/// A solver that never looks at the query.
pub struct Fixed(pub SatResult);

impl SatSolver for Fixed {
    fn check_sat(&self, _: &Formula) -> SmtVerdict {
        SmtVerdict::instant(self.0.clone())
    }
}

pub fn always_sat() -> Fixed {
    Fixed(SatResult::Sat { model: None })
}
