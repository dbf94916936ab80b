//! SMT-LIB2 term parser.
//!
//! Free symbols resolve against a variable table; bound symbols shadow them.
//! Remaining symbols are looked up as enumeration literals. Integer numerals
//! have sort `Nat` unless they meet a `Real` operand, in which case closed
//! integer-valued subterms are promoted to `Real`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigInt, BigRational, Num, Zero};
use thiserror::Error;

use super::{ArithOp, CmpOp, Formula, FormulaSortError, Quantifier, VarId, Variable};
use crate::sort::{EnumSort, Sort};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("unexpected end of input")]
    UnexpectedEof,
    #[error("unexpected `)`")]
    UnexpectedClose,
    #[error("unterminated quoted symbol")]
    UnterminatedSymbol,
    #[error("trailing input after the term")]
    TrailingInput,
    #[error("undeclared symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("malformed numeral `{0}`")]
    BadNumeral(String),
    #[error("`{op}` expects {expected}")]
    Arity { op: String, expected: &'static str },
    #[error("malformed binder list")]
    BadBinder,
    #[error("{0}")]
    Sort(FormulaSortError),
}

#[derive(Debug, Clone)]
enum Sexp {
    Atom {
        text: String,
        quoted: bool,
        offset: usize,
    },
    List {
        items: Vec<Sexp>,
        offset: usize,
    },
}

impl Sexp {
    fn offset(&self) -> usize {
        match self {
            Sexp::Atom { offset, .. } | Sexp::List { offset, .. } => *offset,
        }
    }
}

fn err(offset: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { offset, kind }
}

struct Reader<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn skip_trivia(&mut self) {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() {
            match bytes[self.pos] {
                b' ' | b'\t' | b'\n' | b'\r' => self.pos += 1,
                b';' => {
                    while self.pos < bytes.len() && bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_trivia();
        self.pos >= self.src.len()
    }

    fn read(&mut self) -> Result<Sexp, ParseError> {
        self.skip_trivia();
        let start = self.pos;
        let rest = &self.src[self.pos..];
        let Some(c) = rest.chars().next() else {
            return Err(err(start, ParseErrorKind::UnexpectedEof));
        };
        match c {
            '(' => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.src[self.pos..].chars().next() {
                        None => return Err(err(self.pos, ParseErrorKind::UnexpectedEof)),
                        Some(')') => {
                            self.pos += 1;
                            return Ok(Sexp::List {
                                items,
                                offset: start,
                            });
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            ')' => Err(err(start, ParseErrorKind::UnexpectedClose)),
            '|' => {
                let Some(end) = rest[1..].find('|') else {
                    return Err(err(start, ParseErrorKind::UnterminatedSymbol));
                };
                self.pos += end + 2;
                Ok(Sexp::Atom {
                    text: rest[1..end + 1].to_owned(),
                    quoted: true,
                    offset: start,
                })
            }
            _ => {
                let len = rest
                    .find(|c: char| c.is_whitespace() || "()|;".contains(c))
                    .unwrap_or(rest.len());
                self.pos += len;
                Ok(Sexp::Atom {
                    text: rest[..len].to_owned(),
                    quoted: false,
                    offset: start,
                })
            }
        }
    }
}

/// Resolves a sort name as written in documents (`Nat`, not `Int`).
pub fn parse_sort(name: &str, enums: &[Arc<EnumSort>]) -> Option<Sort> {
    match name {
        "Bool" => Some(Sort::Bool),
        "Real" => Some(Sort::Real),
        "Nat" => Some(Sort::Nat),
        _ => enums
            .iter()
            .find(|e| e.name() == name)
            .map(|e| Sort::Enum(e.clone())),
    }
}

struct Builder<'a> {
    vars: &'a BTreeMap<VarId, Sort>,
    enums: &'a [Arc<EnumSort>],
    bound: Vec<Variable>,
}

/// Parses a Boolean formula.
pub fn parse_formula(
    text: &str,
    vars: &BTreeMap<VarId, Sort>,
    enums: &[Arc<EnumSort>],
) -> Result<Formula, ParseError> {
    let f = parse_term(text, vars, enums)?;
    f.check_formula()
        .map_err(|e| err(0, ParseErrorKind::Sort(e)))?;
    Ok(f)
}

/// Parses a term of any sort.
pub fn parse_term(
    text: &str,
    vars: &BTreeMap<VarId, Sort>,
    enums: &[Arc<EnumSort>],
) -> Result<Formula, ParseError> {
    let mut reader = Reader { src: text, pos: 0 };
    let sexp = reader.read()?;
    if !reader.at_end() {
        return Err(err(reader.pos, ParseErrorKind::TrailingInput));
    }
    let mut b = Builder {
        vars,
        enums,
        bound: Vec::new(),
    };
    b.term(&sexp)
}

fn parse_number(text: &str) -> Option<Formula> {
    if !text.starts_with(|c: char| c.is_ascii_digit()) {
        return None;
    }
    match text.split_once('.') {
        None => BigInt::from_str_radix(text, 10)
            .ok()
            .map(|n| Formula::Num(BigRational::from_integer(n), Sort::Nat)),
        Some((int, frac)) => {
            if int.is_empty()
                || frac.is_empty()
                || !int.bytes().all(|c| c.is_ascii_digit())
                || !frac.bytes().all(|c| c.is_ascii_digit())
            {
                return None;
            }
            let numer = BigInt::from_str_radix(&format!("{int}{frac}"), 10).ok()?;
            let denom = num::pow(BigInt::from(10), frac.len());
            Some(Formula::Num(BigRational::new(numer, denom), Sort::Real))
        }
    }
}

/// Promotes a closed, integer-literal-only term to `Real`.
fn promote(f: &Formula) -> Option<Formula> {
    match f {
        Formula::Num(n, Sort::Nat) => Some(Formula::Num(n.clone(), Sort::Real)),
        Formula::Num(_, Sort::Real) => Some(f.clone()),
        Formula::Arith(op, ps) => Some(Formula::Arith(
            *op,
            ps.iter().map(promote).collect::<Option<_>>()?,
        )),
        Formula::Neg(a) => Some(Formula::Neg(Box::new(promote(a)?))),
        Formula::Ite(c, a, b) if c.free_vars().is_empty() => {
            Some(Formula::ite((**c).clone(), promote(a)?, promote(b)?))
        }
        _ => None,
    }
}

fn unify_numeric(args: Vec<Formula>) -> Vec<Formula> {
    let any_real = args.iter().any(|a| matches!(a.sort_of(), Ok(Sort::Real)));
    if !any_real {
        return args;
    }
    args.into_iter()
        .map(|a| {
            if matches!(a.sort_of(), Ok(Sort::Nat)) {
                promote(&a).unwrap_or(a)
            } else {
                a
            }
        })
        .collect()
}

impl Builder<'_> {
    fn term(&mut self, s: &Sexp) -> Result<Formula, ParseError> {
        match s {
            Sexp::Atom {
                text,
                quoted,
                offset,
            } => self.atom(text, *quoted, *offset),
            Sexp::List { items, offset } => {
                let Some((head, args)) = items.split_first() else {
                    return Err(err(*offset, ParseErrorKind::UnknownOperator("()".into())));
                };
                let Sexp::Atom {
                    text: op,
                    quoted: false,
                    ..
                } = head
                else {
                    return Err(err(
                        head.offset(),
                        ParseErrorKind::UnknownOperator(describe(head)),
                    ));
                };
                let f = self.app(op, args, *offset)?;
                f.sort_of()
                    .map_err(|e| err(*offset, ParseErrorKind::Sort(e)))?;
                Ok(f)
            }
        }
    }

    fn atom(&self, text: &str, quoted: bool, offset: usize) -> Result<Formula, ParseError> {
        if !quoted {
            match text {
                "true" => return Ok(Formula::tt()),
                "false" => return Ok(Formula::ff()),
                _ => {}
            }
            if text.starts_with(|c: char| c.is_ascii_digit()) {
                return parse_number(text)
                    .ok_or_else(|| err(offset, ParseErrorKind::BadNumeral(text.to_owned())));
            }
        }
        if let Some(v) = self.bound.iter().rev().find(|v| v.id.as_str() == text) {
            return Ok(Formula::Var(v.clone()));
        }
        if let Some(sort) = self.vars.get(text) {
            return Ok(Formula::Var(Variable::new(text, sort.clone())));
        }
        if let Some(e) = self.enums.iter().find(|e| e.contains(text)) {
            return Ok(Formula::enum_lit(e, text));
        }
        Err(err(offset, ParseErrorKind::UnknownSymbol(text.to_owned())))
    }

    fn terms(&mut self, args: &[Sexp]) -> Result<Vec<Formula>, ParseError> {
        args.iter().map(|a| self.term(a)).collect()
    }

    fn app(&mut self, op: &str, args: &[Sexp], offset: usize) -> Result<Formula, ParseError> {
        let arity = |expected: &'static str| {
            err(
                offset,
                ParseErrorKind::Arity {
                    op: op.to_owned(),
                    expected,
                },
            )
        };
        match op {
            "exists" | "forall" => {
                let q = if op == "exists" {
                    Quantifier::Exists
                } else {
                    Quantifier::Forall
                };
                let [binders, body] = args else {
                    return Err(arity("a binder list and a body"));
                };
                let vars = self.binders(binders)?;
                let depth = self.bound.len();
                self.bound.extend(vars.iter().cloned());
                let body = self.term(body);
                self.bound.truncate(depth);
                Ok(Formula::Quant(q, vars, Box::new(body?)))
            }
            "not" => match self.terms(args)?.as_slice() {
                [a] => Ok(Formula::not(a.clone())),
                _ => Err(arity("one operand")),
            },
            "and" => Ok(Formula::and(self.terms(args)?)),
            "or" => Ok(Formula::or(self.terms(args)?)),
            "=>" => {
                let mut ts = self.terms(args)?;
                if ts.len() < 2 {
                    return Err(arity("at least two operands"));
                }
                let mut acc = ts.pop().unwrap();
                while let Some(prev) = ts.pop() {
                    acc = Formula::implies(prev, acc);
                }
                Ok(acc)
            }
            "ite" => {
                let ts = self.terms(args)?;
                let [c, a, b] =
                    <[Formula; 3]>::try_from(ts).map_err(|_| arity("three operands"))?;
                let mut branches = unify_numeric(vec![a, b]).into_iter();
                let (a, b) = (branches.next().unwrap(), branches.next().unwrap());
                Ok(Formula::ite(c, a, b))
            }
            "=" | "distinct" | "<" | "<=" | ">" | ">=" => {
                let ts = unify_numeric(self.terms(args)?);
                if ts.len() < 2 {
                    return Err(arity("at least two operands"));
                }
                let cmp = match op {
                    "=" => CmpOp::Eq,
                    "distinct" => CmpOp::Ne,
                    "<" => CmpOp::Lt,
                    "<=" => CmpOp::Le,
                    ">" => CmpOp::Gt,
                    _ => CmpOp::Ge,
                };
                let mk = |a: &Formula, b: &Formula| {
                    if cmp == CmpOp::Eq {
                        Formula::eq(a.clone(), b.clone())
                    } else {
                        Formula::cmp(cmp, a.clone(), b.clone())
                    }
                };
                if cmp == CmpOp::Ne {
                    let mut parts = Vec::new();
                    for i in 0..ts.len() {
                        for j in i + 1..ts.len() {
                            parts.push(mk(&ts[i], &ts[j]));
                        }
                    }
                    Ok(Formula::and(parts))
                } else {
                    Ok(Formula::and(
                        ts.windows(2).map(|w| mk(&w[0], &w[1])).collect(),
                    ))
                }
            }
            "+" | "*" => {
                let ts = unify_numeric(self.terms(args)?);
                if ts.is_empty() {
                    return Err(arity("at least one operand"));
                }
                let aop = if op == "+" {
                    ArithOp::Add
                } else {
                    ArithOp::Mul
                };
                Ok(Formula::Arith(aop, ts))
            }
            "-" => {
                let ts = unify_numeric(self.terms(args)?);
                match ts.as_slice() {
                    [] => Err(arity("at least one operand")),
                    [Formula::Num(n, s)] if !n.is_zero() => Ok(Formula::Num(-n.clone(), s.clone())),
                    [a] => Ok(Formula::Neg(Box::new(a.clone()))),
                    _ => Ok(Formula::Arith(ArithOp::Sub, ts)),
                }
            }
            "/" => {
                let ts = self.terms(args)?;
                let [a, b] = <[Formula; 2]>::try_from(ts).map_err(|_| arity("two operands"))?;
                let (a, b) = (promote(&a).unwrap_or(a), promote(&b).unwrap_or(b));
                if let (Formula::Num(x, _), Formula::Num(y, _)) = (&a, &b) {
                    if !y.is_zero() {
                        return Ok(Formula::Num(x / y, Sort::Real));
                    }
                }
                for t in [&a, &b] {
                    if let Ok(s) = t.sort_of() {
                        if s != Sort::Real {
                            return Err(err(
                                offset,
                                ParseErrorKind::Sort(FormulaSortError::Mismatch {
                                    left: Sort::Real,
                                    right: s,
                                    term: t.to_string(),
                                }),
                            ));
                        }
                    }
                }
                Ok(Formula::Div(Box::new(a), Box::new(b)))
            }
            "div" => {
                let ts = self.terms(args)?;
                let [a, b] = <[Formula; 2]>::try_from(ts).map_err(|_| arity("two operands"))?;
                for t in [&a, &b] {
                    if let Ok(s) = t.sort_of() {
                        if s != Sort::Nat {
                            return Err(err(
                                offset,
                                ParseErrorKind::Sort(FormulaSortError::Mismatch {
                                    left: Sort::Nat,
                                    right: s,
                                    term: t.to_string(),
                                }),
                            ));
                        }
                    }
                }
                Ok(Formula::Div(Box::new(a), Box::new(b)))
            }
            _ => Err(err(offset, ParseErrorKind::UnknownOperator(op.to_owned()))),
        }
    }

    fn binders(&self, s: &Sexp) -> Result<Vec<Variable>, ParseError> {
        let Sexp::List { items, offset } = s else {
            return Err(err(s.offset(), ParseErrorKind::BadBinder));
        };
        if items.is_empty() {
            return Err(err(*offset, ParseErrorKind::BadBinder));
        }
        items
            .iter()
            .map(|item| match item {
                Sexp::List { items, offset } => match items.as_slice() {
                    [Sexp::Atom { text: name, .. }, Sexp::Atom {
                        text: sort,
                        offset: sort_off,
                        ..
                    }] => {
                        let sort = parse_sort(sort, self.enums).ok_or_else(|| {
                            err(*sort_off, ParseErrorKind::UnknownSort(sort.clone()))
                        })?;
                        Ok(Variable::new(name.as_str(), sort))
                    }
                    _ => Err(err(*offset, ParseErrorKind::BadBinder)),
                },
                other => Err(err(other.offset(), ParseErrorKind::BadBinder)),
            })
            .collect()
    }
}

fn describe(s: &Sexp) -> String {
    match s {
        Sexp::Atom { text, .. } => text.clone(),
        Sexp::List { .. } => "(…)".into(),
    }
}
