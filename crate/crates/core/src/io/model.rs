use serde::{Deserialize, Serialize};

use super::{
    at, build_graph, declare_variables, graph_decl, metamodel, parse_formula_field, to_json,
    variable_decls, DocError, GraphDecl, LinkDecl, ObjectDecl, VariableDecl, MODEL_FORMAT,
};
use crate::formula::print::{render, Style};
use crate::graph::{validate_graph, SymbolicGraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format: String,
    pub metamodel: String,
    #[serde(default)]
    pub variables: Vec<VariableDecl>,
    #[serde(default)]
    pub objects: Vec<ObjectDecl>,
    #[serde(default)]
    pub links: Vec<LinkDecl>,
    #[serde(default = "default_formula")]
    pub formula: String,
}

fn default_formula() -> String {
    "true".to_owned()
}

pub fn parse_model(text: &str) -> Result<SymbolicGraph, DocError> {
    let doc: ModelDocument = serde_json::from_str(text)?;
    if doc.format != MODEL_FORMAT {
        return Err(at(
            "format",
            format!("expected `{MODEL_FORMAT}`, found `{}`", doc.format),
        ));
    }
    let tg = metamodel(&doc.metamodel).ok_or_else(|| {
        at(
            "metamodel",
            format!("unknown metamodel `{}`", doc.metamodel),
        )
    })?;
    let vars = declare_variables(&doc.variables, &tg)?;
    let decl = GraphDecl {
        objects: doc.objects,
        links: doc.links,
    };
    let mut g = build_graph("", &decl, &vars, &tg, true)?;
    g.set_formula(parse_formula_field("formula", &doc.formula, &vars, &tg)?);
    if let Some(v) = validate_graph(&g, &tg).into_iter().next() {
        return Err(at("formula", v.to_string()));
    }
    Ok(g)
}

pub fn serialize_model(g: &SymbolicGraph) -> String {
    let GraphDecl { objects, links } = graph_decl(g);
    to_json(&ModelDocument {
        format: MODEL_FORMAT.to_owned(),
        metamodel: g.type_graph().name().to_owned(),
        variables: variable_decls(g.variables()),
        objects,
        links,
        formula: render(g.formula(), Style::Document),
    })
}
