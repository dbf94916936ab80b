//! Typed symbolic graphs, morphisms, matching and gluing.

mod glue;
mod matching;
mod morphism;
mod symbolic;
mod type_graph;

pub use glue::{glue, GlueError, Gluing, Identification};
pub use matching::{find_isomorphisms, find_matches};
pub use morphism::{Morphism, MorphismError};
pub(crate) use symbolic::formula_violations;
pub use symbolic::{
    validate_graph, GraphError, Link, LinkId, ObjId, Object, SymbolicGraph, Violation,
};
pub use type_graph::{EdgeType, NodeType, TypeGraph, TypeGraphError};

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::formula::{CmpOp, Formula, Variable};
    use crate::sort::Sort;

    fn tg() -> Arc<TypeGraph> {
        Arc::new(
            TypeGraph::new(
                "test",
                vec![
                    NodeType::new("A", vec![("x", Sort::Real)]),
                    NodeType::new("B", vec![]),
                ],
                vec![EdgeType::new("e", "A", "B"), EdgeType::new("f", "A", "A")],
            )
            .unwrap(),
        )
    }

    /// a1 -e-> b1, a2 -e-> b1, a1 -f-> a2
    fn host() -> SymbolicGraph {
        let mut g = SymbolicGraph::new(tg());
        g.add_typed_object("a1", "A", &[("x", "x1")]).unwrap();
        g.add_typed_object("a2", "A", &[("x", "x2")]).unwrap();
        g.add_typed_object("b1", "B", &[]).unwrap();
        g.add_named_link("l1", "e", "a1", "b1").unwrap();
        g.add_named_link("l2", "e", "a2", "b1").unwrap();
        g.add_named_link("l3", "f", "a1", "a2").unwrap();
        g
    }

    fn edge_pattern() -> SymbolicGraph {
        let mut p = SymbolicGraph::new(tg());
        p.add_typed_object("p", "A", &[("x", "v")]).unwrap();
        p.add_typed_object("q", "B", &[]).unwrap();
        p.add_named_link("k", "e", "p", "q").unwrap();
        p
    }

    #[test]
    fn empty_graph_is_valid() {
        assert!(validate_graph(&SymbolicGraph::new(tg()), &tg()).is_empty());
        assert!(validate_graph(&host(), &tg()).is_empty());
    }

    #[test]
    fn removed_target_is_reported_as_dangling() {
        let mut g = host();
        g.remove_object(&"a2".into());
        let v = validate_graph(&g, &tg());
        assert!(v.contains(&Violation::DanglingEndpoint {
            link: "l2".into(),
            object: "a2".into()
        }));
        assert!(v.contains(&Violation::DanglingEndpoint {
            link: "l3".into(),
            object: "a2".into()
        }));
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn formula_over_undeclared_variable_is_reported() {
        let mut g = host();
        let ghost = Variable::new("ghost", Sort::Real);
        g.set_formula(Formula::cmp(
            CmpOp::Gt,
            Formula::var(&ghost),
            Formula::real(0),
        ));
        assert_eq!(
            validate_graph(&g, &tg()),
            vec![Violation::UndeclaredFormulaVariable {
                var: "ghost".into()
            }]
        );
    }

    #[test]
    fn matches_are_ordered_and_valid() {
        let (p, h) = (edge_pattern(), host());
        let ms = find_matches(&p, &h).unwrap();
        assert_eq!(ms.len(), 2);
        assert_eq!(ms[0].objects[&ObjId::from("p")], ObjId::from("a1"));
        assert_eq!(ms[1].objects[&ObjId::from("p")], ObjId::from("a2"));
        assert!(ms.iter().all(|m| m.is_valid(&p, &h)));
        let s = ms[1].induced_substitution(&p, &h).unwrap();
        assert_eq!(s.get(&"v".into()).unwrap().id.as_str(), "x2");
    }

    #[test]
    fn isomorphisms_require_equal_census() {
        let h = host();
        let isos = find_isomorphisms(&h, &h);
        assert!(isos.iter().any(|m| m.objects.iter().all(|(a, b)| a == b)));
        assert!(find_isomorphisms(&h, &edge_pattern()).is_empty());
    }

    #[test]
    fn empty_overlap_is_disjoint_union() {
        let (g1, g2) = (host(), edge_pattern());
        let out = glue(&g1, &g2, &Identification::default()).unwrap();
        assert_eq!(
            out.graph.object_count(),
            g1.object_count() + g2.object_count()
        );
        assert!(out.from_g1.is_valid(&g1, &out.graph));
        assert!(out.from_g2.is_valid(&g2, &out.graph));
        assert!(validate_graph(&out.graph, &tg()).is_empty());
    }

    #[test]
    fn full_identification_of_a_subgraph_reproduces_the_host() {
        let (g1, g2) = (host(), edge_pattern());
        let m = &find_matches(&g2, &g1).unwrap()[0];
        let id = Identification {
            objects: m.objects.clone(),
            links: m.links.clone(),
        };
        let out = glue(&g1, &g2, &id).unwrap();
        assert!(!find_isomorphisms(&out.graph, &g1).is_empty());
        // The merged slot keeps the first graph's variable.
        let merged = &out.from_g2.objects[&ObjId::from("p")];
        assert_eq!(out.graph.slot(merged, "x").unwrap().id.as_str(), "x1");
    }

    #[test]
    fn colliding_names_are_renamed() {
        let g1 = edge_pattern();
        let out = glue(&g1, &g1, &Identification::default()).unwrap();
        let ids: Vec<_> = out.graph.objects().map(|o| o.id.0.clone()).collect();
        assert_eq!(ids, ["p", "p'", "q", "q'"]);
        assert_eq!(out.graph.variables().len(), 2);
    }

    #[test]
    fn identification_must_respect_types_and_incidence() {
        let (g1, g2) = (host(), edge_pattern());
        let clash = Identification {
            objects: [("q".into(), "a1".into())].into(),
            links: Default::default(),
        };
        assert!(matches!(
            glue(&g1, &g2, &clash),
            Err(GlueError::TypeClash { .. })
        ));
        let incidence = Identification {
            objects: [("p".into(), "a1".into())].into(),
            links: [("k".into(), "l1".into())].into(),
        };
        assert!(matches!(
            glue(&g1, &g2, &incidence),
            Err(GlueError::IncidenceClash { .. })
        ));
    }
}
