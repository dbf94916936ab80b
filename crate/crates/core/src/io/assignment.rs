use std::collections::BTreeMap;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed};
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use super::{at, to_json, DocError};
use crate::efm::Assignment;
use crate::graph::SymbolicGraph;
use crate::sort::{Sort, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentDocument {
    pub values: BTreeMap<String, Json>,
}

/// Parses `"3"`, `"-3/4"` or `"2.25"`.
fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let d = BigInt::from_str(d.trim()).ok()?;
        if d == BigInt::from(0) {
            return None;
        }
        return Some(BigRational::new(BigInt::from_str(n.trim()).ok()?, d));
    }
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty()
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let num = BigInt::from_str(&format!("0{int}{frac}")).ok()?;
    let den = num::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(num, den);
    Some(if neg { -r } else { r })
}

fn value_for(sort: &Sort, v: &Json) -> Option<Value> {
    match (sort, v) {
        (Sort::Bool, Json::Bool(b)) => Some(Value::Bool(*b)),
        (Sort::Enum(e), Json::String(s)) if e.contains(s) => Some(Value::Enum(s.clone())),
        (Sort::Real | Sort::Nat, Json::Number(n)) => parse_rational(&n.to_string()).map(Value::Num),
        (Sort::Real | Sort::Nat, Json::String(s)) => parse_rational(s).map(Value::Num),
        _ => None,
    }
    .filter(|value| sort.admits(value))
}

/// Reads an assignment; the graph supplies the sort of each variable.
pub fn parse_assignment(text: &str, g: &SymbolicGraph) -> Result<Assignment, DocError> {
    let doc: AssignmentDocument = serde_json::from_str(text)?;
    let mut out = Assignment::new();
    for (var, v) in &doc.values {
        let field = format!("values.{var}");
        let id = var.as_str().into();
        let sort = g
            .variables()
            .get(&id)
            .ok_or_else(|| at(&field, format!("the model has no variable `{var}`")))?;
        let value = value_for(sort, v)
            .ok_or_else(|| at(&field, format!("{v} is not a value of sort {sort}")))?;
        out.insert(id, value);
    }
    Ok(out)
}

fn json_value(v: &Value) -> Json {
    match v {
        Value::Bool(b) => Json::Bool(*b),
        Value::Enum(s) => Json::String(s.clone()),
        Value::Num(r) if r.denom().is_one() && r.numer().bits() < 63 => {
            let n: i64 = r.numer().try_into().expect("fits in 63 bits");
            Json::from(n)
        }
        Value::Num(r) if r.denom().is_one() => Json::String(r.numer().to_string()),
        Value::Num(r) => Json::String(format!(
            "{}{}/{}",
            if r.is_negative() { "-" } else { "" },
            r.numer().abs(),
            r.denom()
        )),
    }
}

pub fn serialize_assignment(a: &Assignment) -> String {
    to_json(&AssignmentDocument {
        values: a
            .iter()
            .map(|(k, v)| (k.0.clone(), json_value(v)))
            .collect(),
    })
}
