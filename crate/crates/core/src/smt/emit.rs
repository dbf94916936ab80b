use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::sync::Arc;

use thiserror::Error;

use super::{EnumEncoding, SolverConfig};
use crate::formula::print::{self, Style};
use crate::formula::{CmpOp, Formula, Quantifier, VarId, Variable};
use crate::sort::{EnumSort, Sort};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmitError {
    #[error("free variable `{0}` is not declared")]
    UndeclaredVariable(VarId),
    #[error("symbol `{0}` cannot be written in SMT-LIB2")]
    UnrepresentableSymbol(String),
}

/// Range guard for a solver-side variable: `n >= 0` for naturals and
/// `0 <= e < |E|` for integer-coded enumerations.
fn guard(v: &Variable, original: &Sort) -> Option<Formula> {
    let x = Formula::var(v);
    match original {
        Sort::Nat => Some(Formula::cmp(CmpOp::Ge, x, Formula::nat(0))),
        Sort::Enum(e) if v.sort == Sort::Nat => Some(Formula::and(vec![
            Formula::cmp(CmpOp::Ge, x.clone(), Formula::nat(0)),
            Formula::cmp(CmpOp::Lt, x, Formula::nat(e.values().len() as i64)),
        ])),
        _ => None,
    }
}

fn lower_var(v: &Variable, enc: EnumEncoding) -> Variable {
    match (&v.sort, enc) {
        (Sort::Enum(_), EnumEncoding::Integer) => Variable::new(v.id.clone(), Sort::Nat),
        _ => v.clone(),
    }
}

/// Rewrites `f` into the solver-side fragment: integer-coded enumerations when
/// requested, and range guards on bound naturals/enumerations.
fn lower(f: &Formula, enc: EnumEncoding) -> Formula {
    match f {
        Formula::EnumLit(e, lit) if enc == EnumEncoding::Integer => {
            Formula::nat(e.index_of(lit).unwrap_or(0) as i64)
        }
        Formula::Var(v) => Formula::Var(lower_var(v, enc)),
        Formula::Quant(q, vars, body) => {
            let lowered: Vec<Variable> = vars.iter().map(|v| lower_var(v, enc)).collect();
            let guards: Vec<Formula> = vars
                .iter()
                .zip(&lowered)
                .filter_map(|(orig, low)| guard(low, &orig.sort))
                .collect();
            let body = lower(body, enc);
            let body = if guards.is_empty() {
                body
            } else {
                let g = Formula::and(guards);
                match q {
                    Quantifier::Exists => Formula::and(vec![g, body]),
                    Quantifier::Forall => Formula::implies(g, body),
                }
            };
            Formula::Quant(*q, lowered, Box::new(body))
        }
        _ => f.map_children(|c| lower(c, enc)),
    }
}

fn check_symbols(f: &Formula, decls: &BTreeSet<Variable>) -> Result<(), EmitError> {
    let mut names: Vec<String> = f.all_var_ids().into_iter().map(|v| v.0).collect();
    names.extend(decls.iter().map(|v| v.id.0.clone()));
    for e in f.enum_sorts() {
        names.push(e.name().to_owned());
        names.extend(e.values().iter().cloned());
    }
    for n in names {
        if !print::is_representable_symbol(&n) {
            return Err(EmitError::UnrepresentableSymbol(n));
        }
    }
    Ok(())
}

/// Deterministic SMT-LIB2 script asserting `f`, declaring `decls`.
pub fn emit_smtlib(
    f: &Formula,
    decls: &BTreeSet<Variable>,
    cfg: &SolverConfig,
) -> Result<String, EmitError> {
    let declared: BTreeMap<&VarId, &Variable> = decls.iter().map(|v| (&v.id, v)).collect();
    for v in f.free_vars() {
        if !declared.contains_key(&v.id) {
            return Err(EmitError::UndeclaredVariable(v.id));
        }
    }
    check_symbols(f, decls)?;
    let enc = cfg.enum_encoding;
    let mut out = String::new();
    out.push_str("(set-option :produce-models true)\n");
    if let Some(seed) = cfg.random_seed {
        writeln!(out, "(set-option :random-seed {seed})").unwrap();
    }
    writeln!(out, "(set-logic {})", cfg.logic).unwrap();
    if enc == EnumEncoding::Datatype {
        let mut enums: BTreeSet<Arc<EnumSort>> = f.enum_sorts();
        for v in decls {
            if let Sort::Enum(e) = &v.sort {
                enums.insert(e.clone());
            }
        }
        for e in enums {
            let ctors: Vec<String> = e
                .values()
                .iter()
                .map(|l| format!("({})", print::symbol(l)))
                .collect();
            writeln!(
                out,
                "(declare-datatypes (({} 0)) (({})))",
                print::symbol(e.name()),
                ctors.join(" ")
            )
            .unwrap();
        }
    }
    let mut guards = Vec::new();
    for v in decls {
        let low = lower_var(v, enc);
        writeln!(
            out,
            "(declare-const {} {})",
            print::symbol(low.id.as_str()),
            print::symbol(print::sort_name(&low.sort, Style::Solver))
        )
        .unwrap();
        guards.extend(guard(&low, &v.sort));
    }
    for g in guards {
        writeln!(out, "(assert {})", print::render(&g, Style::Solver)).unwrap();
    }
    writeln!(
        out,
        "(assert {})",
        print::render(&lower(f, enc), Style::Solver)
    )
    .unwrap();
    out.push_str("(check-sat)\n(get-model)\n");
    Ok(out)
}
