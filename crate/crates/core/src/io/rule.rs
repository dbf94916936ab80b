use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{
    at, build_graph, declare_variables, graph_decl, metamodel, parse_formula_field, to_json,
    variable_decls, DocError, GraphDecl, VariableDecl, RULE_FORMAT,
};
use crate::formula::print::{render, Style};
use crate::formula::VarId;
use crate::graph::{LinkId, Morphism, ObjId};
use crate::rule::{validate_rule, SymbolicRule};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleDocument {
    pub format: String,
    pub name: String,
    pub metamodel: String,
    #[serde(default)]
    pub variables: Vec<VariableDecl>,
    pub lhs: GraphDecl,
    pub rhs: GraphDecl,
    #[serde(default)]
    pub preserve: Vec<(String, String)>,
    #[serde(default = "default_phi")]
    pub phi: String,
}

fn default_phi() -> String {
    "true".to_owned()
}

pub fn parse_rule(text: &str) -> Result<SymbolicRule, DocError> {
    let doc: RuleDocument = serde_json::from_str(text)?;
    if doc.format != RULE_FORMAT {
        return Err(at(
            "format",
            format!("expected `{RULE_FORMAT}`, found `{}`", doc.format),
        ));
    }
    if doc.name.is_empty() {
        return Err(at("name", "rule name is empty"));
    }
    let tg = metamodel(&doc.metamodel).ok_or_else(|| {
        at(
            "metamodel",
            format!("unknown metamodel `{}`", doc.metamodel),
        )
    })?;
    let vars = declare_variables(&doc.variables, &tg)?;
    let lhs = build_graph("lhs.", &doc.lhs, &vars, &tg, false)?;
    let rhs = build_graph("rhs.", &doc.rhs, &vars, &tg, false)?;
    for (i, d) in doc.variables.iter().enumerate() {
        let id = VarId::from(d.id.as_str());
        if !lhs.variables().contains_key(&id) && !rhs.variables().contains_key(&id) {
            return Err(at(
                format!("variables[{i}]"),
                format!("variable `{}` is held by no slot", d.id),
            ));
        }
    }

    let mut preserve = Morphism::default();
    for (i, (l, r)) in doc.preserve.iter().enumerate() {
        let field = format!("preserve[{i}]");
        let (lo, ll) = (ObjId::from(l.as_str()), LinkId::from(l.as_str()));
        let is_obj = lhs.object(&lo).is_some();
        let is_link = lhs.link(&ll).is_some();
        let dup = match (is_obj, is_link) {
            (true, true) => {
                return Err(at(field, format!("`{l}` names both an object and a link")))
            }
            (true, false) => preserve.objects.insert(lo, r.as_str().into()).is_some(),
            (false, true) => preserve.links.insert(ll, r.as_str().into()).is_some(),
            (false, false) => return Err(at(field, format!("`{l}` is not an LHS object or link"))),
        };
        if dup {
            return Err(at(field, format!("`{l}` is preserved twice")));
        }
    }

    let mut rule = SymbolicRule {
        name: doc.name,
        lhs,
        rhs,
        preserve,
        phi: crate::formula::Formula::tt(),
    };
    rule.phi = parse_formula_field("phi", &doc.phi, &rule.variables(), &tg)?;
    if let Some(v) = validate_rule(&rule).into_iter().next() {
        return Err(at("rule", v.to_string()));
    }
    Ok(rule)
}

pub fn serialize_rule(r: &SymbolicRule) -> String {
    let vars = r.variables();
    let mut preserve: BTreeSet<(String, String)> = r
        .preserve
        .objects
        .iter()
        .map(|(l, r)| (l.0.clone(), r.0.clone()))
        .collect();
    preserve.extend(
        r.preserve
            .links
            .iter()
            .map(|(l, r)| (l.0.clone(), r.0.clone())),
    );
    to_json(&RuleDocument {
        format: RULE_FORMAT.to_owned(),
        name: r.name.clone(),
        metamodel: r.lhs.type_graph().name().to_owned(),
        variables: variable_decls(&vars),
        lhs: graph_decl(&r.lhs),
        rhs: graph_decl(&r.rhs),
        preserve: preserve.into_iter().collect(),
        phi: render(&r.phi, Style::Document),
    })
}
