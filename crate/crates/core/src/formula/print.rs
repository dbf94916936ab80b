//! SMT-LIB2 rendering of formulas.

use std::fmt::{self, Write};

use num::{BigRational, Signed};

use super::{ArithOp, CmpOp, Formula, Quantifier};
use crate::sort::Sort;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    /// Document form: `Nat` is written as `Nat`.
    Document,
    /// Solver form: `Nat` is written as `Int`.
    Solver,
}

const RESERVED: &[&str] = &[
    "true",
    "false",
    "not",
    "and",
    "or",
    "=>",
    "=",
    "distinct",
    "ite",
    "exists",
    "forall",
    "let",
    "par",
    "_",
    "!",
    "as",
    "div",
    "mod",
    "abs",
    "NUMERAL",
    "DECIMAL",
    "STRING",
    "BINARY",
    "HEXADECIMAL",
];

fn is_symbol_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c)
}

/// Whether `s` can be written without `|…|` quoting.
pub fn is_simple_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        None => false,
        Some(c) if c.is_ascii_digit() || !is_symbol_char(c) => false,
        Some(_) => chars.all(is_symbol_char) && !RESERVED.contains(&s),
    }
}

/// Whether `s` can be written at all (quoted symbols cannot hold `|` or `\`).
pub fn is_representable_symbol(s: &str) -> bool {
    !s.is_empty() && !s.contains(['|', '\\'])
}

pub fn symbol(s: &str) -> String {
    if is_simple_symbol(s) {
        s.to_owned()
    } else {
        format!("|{s}|")
    }
}

pub fn sort_name(sort: &Sort, style: Style) -> &str {
    match (sort, style) {
        (Sort::Nat, Style::Solver) => "Int",
        _ => sort.name(),
    }
}

fn write_number(out: &mut impl Write, n: &BigRational, sort: &Sort) -> fmt::Result {
    let abs = n.abs();
    let body = if *sort == Sort::Real {
        if abs.is_integer() {
            format!("{}.0", abs.numer())
        } else {
            format!("(/ {}.0 {}.0)", abs.numer(), abs.denom())
        }
    } else {
        format!("{}", abs.to_integer())
    };
    if n.is_negative() {
        write!(out, "(- {body})")
    } else {
        out.write_str(&body)
    }
}

fn write_app(out: &mut impl Write, op: &str, args: &[&Formula], style: Style) -> fmt::Result {
    write!(out, "({op}")?;
    for a in args {
        out.write_char(' ')?;
        write_term(out, a, style)?;
    }
    out.write_char(')')
}

pub fn write_term(out: &mut impl Write, f: &Formula, style: Style) -> fmt::Result {
    match f {
        Formula::Bool(b) => write!(out, "{b}"),
        Formula::Num(n, s) => write_number(out, n, s),
        Formula::EnumLit(_, lit) => out.write_str(&symbol(lit)),
        Formula::Var(v) => out.write_str(&symbol(v.id.as_str())),
        Formula::Not(a) => write_app(out, "not", &[a], style),
        Formula::And(ps) if ps.is_empty() => out.write_str("true"),
        Formula::Or(ps) if ps.is_empty() => out.write_str("false"),
        Formula::And(ps) => write_app(out, "and", &ps.iter().collect::<Vec<_>>(), style),
        Formula::Or(ps) => write_app(out, "or", &ps.iter().collect::<Vec<_>>(), style),
        Formula::Implies(a, b) => write_app(out, "=>", &[a, b], style),
        Formula::Iff(a, b) => write_app(out, "=", &[a, b], style),
        Formula::Cmp(op, a, b) => {
            let name = match op {
                CmpOp::Eq => "=",
                CmpOp::Ne => "distinct",
                CmpOp::Lt => "<",
                CmpOp::Le => "<=",
                CmpOp::Gt => ">",
                CmpOp::Ge => ">=",
            };
            write_app(out, name, &[a, b], style)
        }
        Formula::Arith(op, ps) => {
            let name = match op {
                ArithOp::Add => "+",
                ArithOp::Sub => "-",
                ArithOp::Mul => "*",
            };
            write_app(out, name, &ps.iter().collect::<Vec<_>>(), style)
        }
        Formula::Div(a, b) => {
            let name = if matches!(f.sort_of(), Ok(Sort::Nat)) {
                "div"
            } else {
                "/"
            };
            write_app(out, name, &[a, b], style)
        }
        Formula::Neg(a) => write_app(out, "-", &[a], style),
        Formula::Ite(c, a, b) => write_app(out, "ite", &[c, a, b], style),
        Formula::Quant(q, vars, body) => {
            let name = match q {
                Quantifier::Exists => "exists",
                Quantifier::Forall => "forall",
            };
            write!(out, "({name} (")?;
            for (i, v) in vars.iter().enumerate() {
                if i > 0 {
                    out.write_char(' ')?;
                }
                write!(
                    out,
                    "({} {})",
                    symbol(v.id.as_str()),
                    symbol(sort_name(&v.sort, style))
                )?;
            }
            out.write_str(") ")?;
            write_term(out, body, style)?;
            out.write_char(')')
        }
    }
}

/// Renders `f` in the given style.
pub fn render(f: &Formula, style: Style) -> String {
    let mut s = String::new();
    write_term(&mut s, f, style).expect("writing to a String cannot fail");
    s
}
