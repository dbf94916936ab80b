//! Sorted first-order formulas over attribute variables.
//!
//! Terms and formulas share one AST; [`Formula::sort_of`] checks
//! well-sortedness. Formulas print as SMT-LIB2 terms (see [`print`]) and parse
//! back from that text (see [`parse`]).

mod eval;
pub mod parse;
pub mod print;
mod subst;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sort::{EnumSort, Sort};

pub use eval::Env;
pub use subst::{Substitution, SubstitutionError};

/// Identifier of a variable, unique within one symbolic graph or one rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarId(pub String);

impl VarId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VarId {
    fn from(s: &str) -> Self {
        VarId(s.to_owned())
    }
}

impl From<String> for VarId {
    fn from(s: String) -> Self {
        VarId(s)
    }
}

impl std::borrow::Borrow<str> for VarId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable {
    pub id: VarId,
    pub sort: Sort,
}

impl Variable {
    pub fn new(id: impl Into<VarId>, sort: Sort) -> Self {
        Self {
            id: id.into(),
            sort,
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.id, self.sort)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn is_ordering(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    Exists,
    Forall,
}

/// Formula / term AST.
///
/// Numeric constants carry their numeric sort (`Nat` for integer-class,
/// `Real` otherwise). Equality between Boolean terms is represented as `Iff`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Bool(bool),
    Num(BigRational, Sort),
    EnumLit(Arc<EnumSort>, String),
    Var(Variable),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Cmp(CmpOp, Box<Formula>, Box<Formula>),
    Arith(ArithOp, Vec<Formula>),
    /// Real division for `Real` operands, integer `div` for `Nat` operands.
    Div(Box<Formula>, Box<Formula>),
    Neg(Box<Formula>),
    Ite(Box<Formula>, Box<Formula>, Box<Formula>),
    Quant(Quantifier, Vec<Variable>, Box<Formula>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaSortError {
    #[error("expected a Boolean operand, found {found} in `{term}`")]
    ExpectedBool { found: Sort, term: String },
    #[error("expected a numeric operand, found {found} in `{term}`")]
    ExpectedNumeric { found: Sort, term: String },
    #[error("operands of `{term}` have different sorts ({left} vs {right})")]
    Mismatch {
        left: Sort,
        right: Sort,
        term: String,
    },
    #[error("literal `{literal}` is not a value of enumeration `{sort}`")]
    UnknownLiteral { sort: String, literal: String },
    #[error("numeric constant {value} is not an integer but has sort Nat")]
    FractionalNat { value: String },
    #[error("`{op}` needs at least {min} operands")]
    Arity { op: &'static str, min: usize },
}

impl Formula {
    pub fn tt() -> Self {
        Formula::Bool(true)
    }

    pub fn ff() -> Self {
        Formula::Bool(false)
    }

    pub fn var(v: &Variable) -> Self {
        Formula::Var(v.clone())
    }

    pub fn real(n: i64) -> Self {
        Formula::Num(BigRational::from_integer(n.into()), Sort::Real)
    }

    pub fn real_ratio(num: i64, den: i64) -> Self {
        Formula::Num(BigRational::new(num.into(), den.into()), Sort::Real)
    }

    pub fn nat(n: i64) -> Self {
        Formula::Num(BigRational::from_integer(n.into()), Sort::Nat)
    }

    pub fn enum_lit(sort: &Arc<EnumSort>, literal: &str) -> Self {
        Formula::EnumLit(sort.clone(), literal.to_owned())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    /// N-ary conjunction; empty is `true`, singleton is its operand.
    pub fn and(mut parts: Vec<Formula>) -> Self {
        match parts.len() {
            0 => Formula::tt(),
            1 => parts.pop().unwrap(),
            _ => Formula::And(parts),
        }
    }

    /// N-ary disjunction; empty is `false`, singleton is its operand.
    pub fn or(mut parts: Vec<Formula>) -> Self {
        match parts.len() {
            0 => Formula::ff(),
            1 => parts.pop().unwrap(),
            _ => Formula::Or(parts),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Equality; Boolean operands produce `Iff`.
    pub fn eq(a: Formula, b: Formula) -> Self {
        if matches!(a.sort_of(), Ok(Sort::Bool)) {
            Formula::iff(a, b)
        } else {
            Formula::cmp(CmpOp::Eq, a, b)
        }
    }

    pub fn cmp(op: CmpOp, a: Formula, b: Formula) -> Self {
        Formula::Cmp(op, Box::new(a), Box::new(b))
    }

    pub fn add(parts: Vec<Formula>) -> Self {
        Formula::Arith(ArithOp::Add, parts)
    }

    pub fn sub(a: Formula, b: Formula) -> Self {
        Formula::Arith(ArithOp::Sub, vec![a, b])
    }

    pub fn mul(parts: Vec<Formula>) -> Self {
        Formula::Arith(ArithOp::Mul, parts)
    }

    pub fn ite(c: Formula, a: Formula, b: Formula) -> Self {
        Formula::Ite(Box::new(c), Box::new(a), Box::new(b))
    }

    /// Existential closure over `vars`; no binder when `vars` is empty.
    pub fn exists(vars: Vec<Variable>, body: Formula) -> Self {
        if vars.is_empty() {
            body
        } else {
            Formula::Quant(Quantifier::Exists, vars, Box::new(body))
        }
    }

    pub fn forall(vars: Vec<Variable>, body: Formula) -> Self {
        if vars.is_empty() {
            body
        } else {
            Formula::Quant(Quantifier::Forall, vars, Box::new(body))
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Formula::Bool(true))
    }

    /// Top-level conjuncts (a non-conjunction is its own single conjunct;
    /// `true` has none).
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(parts) => parts.iter().flat_map(|p| p.conjuncts()).collect(),
            Formula::Bool(true) => Vec::new(),
            other => vec![other],
        }
    }

    /// Flattening conjunction of `self` and `other` that keeps every conjunct
    /// of `self` as a prefix and drops literal `true`s.
    pub fn conjoin(&self, other: &Formula) -> Formula {
        let parts: Vec<Formula> = self
            .conjuncts()
            .into_iter()
            .chain(other.conjuncts())
            .cloned()
            .collect();
        Formula::and(parts)
    }

    /// Free variables; bound occurrences are excluded.
    pub fn free_vars(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<VarId>, out: &mut BTreeSet<Variable>) {
        match self {
            Formula::Var(v) => {
                if !bound.contains(&v.id) {
                    out.insert(v.clone());
                }
            }
            Formula::Quant(_, vars, body) => {
                let depth = bound.len();
                bound.extend(vars.iter().map(|v| v.id.clone()));
                body.collect_free(bound, out);
                bound.truncate(depth);
            }
            _ => self.for_each_child(|c| c.collect_free(bound, out)),
        }
    }

    /// Every variable occurring anywhere, including binders.
    pub fn all_var_ids(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.collect_all(&mut out);
        out
    }

    fn collect_all(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Formula::Var(v) => {
                out.insert(v.id.clone());
            }
            Formula::Quant(_, vars, body) => {
                out.extend(vars.iter().map(|v| v.id.clone()));
                body.collect_all(out);
            }
            _ => self.for_each_child(|c| c.collect_all(out)),
        }
    }

    /// Enumeration sorts mentioned by literals, variables or binders.
    pub fn enum_sorts(&self) -> BTreeSet<Arc<EnumSort>> {
        let mut out = BTreeSet::new();
        self.collect_enums(&mut out);
        out
    }

    fn collect_enums(&self, out: &mut BTreeSet<Arc<EnumSort>>) {
        match self {
            Formula::EnumLit(e, _) => {
                out.insert(e.clone());
            }
            Formula::Var(Variable {
                sort: Sort::Enum(e),
                ..
            }) => {
                out.insert(e.clone());
            }
            Formula::Quant(_, vars, body) => {
                for v in vars {
                    if let Sort::Enum(e) = &v.sort {
                        out.insert(e.clone());
                    }
                }
                body.collect_enums(out);
            }
            _ => self.for_each_child(|c| c.collect_enums(out)),
        }
    }

    pub(crate) fn for_each_child(&self, mut f: impl FnMut(&Formula)) {
        match self {
            Formula::Bool(_) | Formula::Num(..) | Formula::EnumLit(..) | Formula::Var(_) => {}
            Formula::Not(a) | Formula::Neg(a) => f(a),
            Formula::And(ps) | Formula::Or(ps) | Formula::Arith(_, ps) => ps.iter().for_each(f),
            Formula::Implies(a, b)
            | Formula::Iff(a, b)
            | Formula::Cmp(_, a, b)
            | Formula::Div(a, b) => {
                f(a);
                f(b);
            }
            Formula::Ite(c, a, b) => {
                f(c);
                f(a);
                f(b);
            }
            Formula::Quant(_, _, body) => f(body),
        }
    }

    /// Rebuilds the node with `f` applied to every direct child. Binders are
    /// left untouched; callers handling scoping must match `Quant` first.
    pub(crate) fn map_children(&self, mut f: impl FnMut(&Formula) -> Formula) -> Formula {
        let mut b = |x: &Formula| Box::new(f(x));
        match self {
            Formula::Bool(_) | Formula::Num(..) | Formula::EnumLit(..) | Formula::Var(_) => {
                self.clone()
            }
            Formula::Not(a) => Formula::Not(b(a)),
            Formula::Neg(a) => Formula::Neg(b(a)),
            Formula::And(ps) => Formula::And(ps.iter().map(|p| *b(p)).collect()),
            Formula::Or(ps) => Formula::Or(ps.iter().map(|p| *b(p)).collect()),
            Formula::Arith(op, ps) => Formula::Arith(*op, ps.iter().map(|p| *b(p)).collect()),
            Formula::Implies(x, y) => Formula::Implies(b(x), b(y)),
            Formula::Iff(x, y) => Formula::Iff(b(x), b(y)),
            Formula::Cmp(op, x, y) => Formula::Cmp(*op, b(x), b(y)),
            Formula::Div(x, y) => Formula::Div(b(x), b(y)),
            Formula::Ite(c, x, y) => Formula::Ite(b(c), b(x), b(y)),
            Formula::Quant(q, vars, body) => Formula::Quant(*q, vars.clone(), b(body)),
        }
    }

    /// Computes the sort of the term, checking well-sortedness throughout.
    pub fn sort_of(&self) -> Result<Sort, FormulaSortError> {
        let expect_bool = |f: &Formula| -> Result<(), FormulaSortError> {
            match f.sort_of()? {
                Sort::Bool => Ok(()),
                found => Err(FormulaSortError::ExpectedBool {
                    found,
                    term: f.to_string(),
                }),
            }
        };
        match self {
            Formula::Bool(_) => Ok(Sort::Bool),
            Formula::Num(n, s) => match s {
                Sort::Nat if !n.is_integer() => Err(FormulaSortError::FractionalNat {
                    value: n.to_string(),
                }),
                Sort::Nat | Sort::Real => Ok(s.clone()),
                other => Err(FormulaSortError::ExpectedNumeric {
                    found: other.clone(),
                    term: self.to_string(),
                }),
            },
            Formula::EnumLit(e, lit) => {
                if e.contains(lit) {
                    Ok(Sort::Enum(e.clone()))
                } else {
                    Err(FormulaSortError::UnknownLiteral {
                        sort: e.name().to_owned(),
                        literal: lit.clone(),
                    })
                }
            }
            Formula::Var(v) => Ok(v.sort.clone()),
            Formula::Not(a) => {
                expect_bool(a)?;
                Ok(Sort::Bool)
            }
            Formula::And(ps) | Formula::Or(ps) => {
                for p in ps {
                    expect_bool(p)?;
                }
                Ok(Sort::Bool)
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                expect_bool(a)?;
                expect_bool(b)?;
                Ok(Sort::Bool)
            }
            Formula::Cmp(op, a, b) => {
                let (sa, sb) = (a.sort_of()?, b.sort_of()?);
                if sa != sb {
                    return Err(FormulaSortError::Mismatch {
                        left: sa,
                        right: sb,
                        term: self.to_string(),
                    });
                }
                if op.is_ordering() && !sa.is_numeric() {
                    return Err(FormulaSortError::ExpectedNumeric {
                        found: sa,
                        term: self.to_string(),
                    });
                }
                Ok(Sort::Bool)
            }
            Formula::Arith(op, ps) => {
                let min = if *op == ArithOp::Sub { 2 } else { 1 };
                if ps.len() < min {
                    return Err(FormulaSortError::Arity {
                        op: match op {
                            ArithOp::Add => "+",
                            ArithOp::Sub => "-",
                            ArithOp::Mul => "*",
                        },
                        min,
                    });
                }
                self.numeric_operands(ps.iter())
            }
            Formula::Div(a, b) => self.numeric_operands([a.as_ref(), b.as_ref()].into_iter()),
            Formula::Neg(a) => self.numeric_operands(std::iter::once(a.as_ref())),
            Formula::Ite(c, a, b) => {
                expect_bool(c)?;
                let (sa, sb) = (a.sort_of()?, b.sort_of()?);
                if sa != sb {
                    return Err(FormulaSortError::Mismatch {
                        left: sa,
                        right: sb,
                        term: self.to_string(),
                    });
                }
                Ok(sa)
            }
            Formula::Quant(_, _, body) => {
                expect_bool(body)?;
                Ok(Sort::Bool)
            }
        }
    }

    fn numeric_operands<'a>(
        &self,
        ops: impl Iterator<Item = &'a Formula>,
    ) -> Result<Sort, FormulaSortError> {
        let mut sort: Option<Sort> = None;
        for op in ops {
            let s = op.sort_of()?;
            if !s.is_numeric() {
                return Err(FormulaSortError::ExpectedNumeric {
                    found: s,
                    term: self.to_string(),
                });
            }
            match &sort {
                None => sort = Some(s),
                Some(prev) if *prev != s => {
                    return Err(FormulaSortError::Mismatch {
                        left: prev.clone(),
                        right: s,
                        term: self.to_string(),
                    })
                }
                _ => {}
            }
        }
        Ok(sort.unwrap_or(Sort::Real))
    }

    /// Well-sorted and Boolean.
    pub fn check_formula(&self) -> Result<(), FormulaSortError> {
        match self.sort_of()? {
            Sort::Bool => Ok(()),
            found => Err(FormulaSortError::ExpectedBool {
                found,
                term: self.to_string(),
            }),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_term(f, self, print::Style::Document)
    }
}
