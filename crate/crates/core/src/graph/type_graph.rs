use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::sort::{EnumSort, Sort};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeGraphError {
    #[error("node type `{0}` is declared twice")]
    DuplicateNodeType(String),
    #[error("node type `{node}` declares attribute `{attribute}` twice")]
    DuplicateAttribute { node: String, attribute: String },
    #[error("edge type {0} refers to an undeclared node type")]
    UnknownEndpoint(EdgeType),
    #[error("edge type {0} is declared twice")]
    DuplicateEdgeType(EdgeType),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeType {
    pub name: String,
    /// Attribute name to sort, in declaration order.
    pub attributes: Vec<(String, Sort)>,
}

impl NodeType {
    pub fn new(name: impl Into<String>, attributes: Vec<(&str, Sort)>) -> Self {
        Self {
            name: name.into(),
            attributes: attributes
                .into_iter()
                .map(|(a, s)| (a.to_owned(), s))
                .collect(),
        }
    }

    pub fn attribute(&self, name: &str) -> Option<&Sort> {
        self.attributes
            .iter()
            .find(|(a, _)| a == name)
            .map(|(_, s)| s)
    }
}

/// An edge type; the name alone need not be unique, the triple is.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeType {
    pub name: String,
    pub source: String,
    pub target: String,
}

impl EdgeType {
    pub fn new(name: &str, source: &str, target: &str) -> Self {
        Self {
            name: name.to_owned(),
            source: source.to_owned(),
            target: target.to_owned(),
        }
    }
}

impl fmt::Display for EdgeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} -> {}", self.name, self.source, self.target)
    }
}

/// Metamodel: node types with attributes and edge types between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeGraph {
    name: String,
    nodes: BTreeMap<String, NodeType>,
    edges: BTreeSet<EdgeType>,
    enums: Vec<Arc<EnumSort>>,
}

impl TypeGraph {
    pub fn new(
        name: impl Into<String>,
        nodes: Vec<NodeType>,
        edges: Vec<EdgeType>,
    ) -> Result<Self, TypeGraphError> {
        let mut node_map = BTreeMap::new();
        let mut enums: Vec<Arc<EnumSort>> = Vec::new();
        for n in nodes {
            for (i, (a, s)) in n.attributes.iter().enumerate() {
                if n.attributes[..i].iter().any(|(b, _)| b == a) {
                    return Err(TypeGraphError::DuplicateAttribute {
                        node: n.name.clone(),
                        attribute: a.clone(),
                    });
                }
                if let Sort::Enum(e) = s {
                    if !enums.contains(e) {
                        enums.push(e.clone());
                    }
                }
            }
            let name = n.name.clone();
            if node_map.insert(name.clone(), n).is_some() {
                return Err(TypeGraphError::DuplicateNodeType(name));
            }
        }
        let mut edge_set = BTreeSet::new();
        for e in edges {
            if !node_map.contains_key(&e.source) || !node_map.contains_key(&e.target) {
                return Err(TypeGraphError::UnknownEndpoint(e));
            }
            if !edge_set.insert(e.clone()) {
                return Err(TypeGraphError::DuplicateEdgeType(e));
            }
        }
        Ok(Self {
            name: name.into(),
            nodes: node_map,
            edges: edge_set,
            enums,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn node(&self, name: &str) -> Option<&NodeType> {
        self.nodes.get(name)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeType> {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &EdgeType> {
        self.edges.iter()
    }

    pub fn has_edge(&self, e: &EdgeType) -> bool {
        self.edges.contains(e)
    }

    /// Resolves an edge name between two node types.
    pub fn edge(&self, name: &str, source: &str, target: &str) -> Option<&EdgeType> {
        self.edges
            .iter()
            .find(|e| e.name == name && e.source == source && e.target == target)
    }

    /// Enumeration sorts used by attributes, in first-use order.
    pub fn enums(&self) -> &[Arc<EnumSort>] {
        &self.enums
    }
}
