//! Attribute sorts and the concrete values inhabiting them.

use std::fmt;
use std::sync::Arc;

use num::{BigRational, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SortError {
    #[error("enumeration sort `{0}` has no values")]
    EmptyEnumeration(String),
    #[error("enumeration sort `{sort}` lists `{value}` twice")]
    DuplicateLiteral { sort: String, value: String },
}

/// A named enumeration sort with an ordered, duplicate-free list of literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EnumSort {
    name: String,
    values: Vec<String>,
}

impl EnumSort {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        values: impl IntoIterator<Item = S>,
    ) -> Result<Self, SortError> {
        let name = name.into();
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        if values.is_empty() {
            return Err(SortError::EmptyEnumeration(name));
        }
        for (i, v) in values.iter().enumerate() {
            if values[..i].contains(v) {
                return Err(SortError::DuplicateLiteral {
                    sort: name,
                    value: v.clone(),
                });
            }
        }
        Ok(Self { name, values })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn index_of(&self, literal: &str) -> Option<usize> {
        self.values.iter().position(|v| v == literal)
    }

    pub fn contains(&self, literal: &str) -> bool {
        self.index_of(literal).is_some()
    }
}

/// Sort of an attribute, a variable or a formula term.
///
/// Terms of sort `Nat` are integer-valued; only variables of sort `Nat` carry
/// the non-negativity guarantee.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Real,
    Nat,
    Enum(Arc<EnumSort>),
}

impl Sort {
    pub fn is_numeric(&self) -> bool {
        matches!(self, Sort::Real | Sort::Nat)
    }

    pub fn name(&self) -> &str {
        match self {
            Sort::Bool => "Bool",
            Sort::Real => "Real",
            Sort::Nat => "Nat",
            Sort::Enum(e) => e.name(),
        }
    }

    /// Whether `value` is an inhabitant of this sort.
    pub fn admits(&self, value: &Value) -> bool {
        match (self, value) {
            (Sort::Bool, Value::Bool(_)) => true,
            (Sort::Real, Value::Num(_)) => true,
            (Sort::Nat, Value::Num(n)) => n.is_integer() && !n.is_negative(),
            (Sort::Enum(e), Value::Enum(lit)) => e.contains(lit),
            _ => false,
        }
    }

    /// Finite domain enumeration, for `Bool` and enumeration sorts.
    pub fn finite_domain(&self) -> Option<Vec<Value>> {
        match self {
            Sort::Bool => Some(vec![Value::Bool(false), Value::Bool(true)]),
            Sort::Enum(e) => Some(e.values().iter().cloned().map(Value::Enum).collect()),
            _ => None,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A concrete value: Boolean, rational number or enumeration literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Num(BigRational),
    Enum(String),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_num(&self) -> Option<&BigRational> {
        match self {
            Value::Num(n) => Some(n),
            _ => None,
        }
    }

    pub fn int(n: i64) -> Self {
        Value::Num(BigRational::from_integer(n.into()))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Num(n) if n.is_integer() => write!(f, "{}", n.numer()),
            Value::Num(n) if n.is_zero() => f.write_str("0"),
            Value::Num(n) => write!(f, "{}/{}", n.numer(), n.denom()),
            Value::Enum(lit) => f.write_str(lit),
        }
    }
}
