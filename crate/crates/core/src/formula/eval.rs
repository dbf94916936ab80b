use std::collections::BTreeMap;

use num::{BigRational, Integer, Signed, Zero};

use super::{ArithOp, CmpOp, Formula, Quantifier, VarId};
use crate::sort::{Sort, Value};

pub type Env = BTreeMap<VarId, Value>;

impl Formula {
    /// Three-valued constant folding under `env`.
    ///
    /// Returns `None` when the value depends on an unassigned variable, on a
    /// quantifier over an infinite sort, or on a division by zero. Connectives
    /// short-circuit, so `false ∧ ?` still folds to `false`. Quantifiers over
    /// `Bool` and enumeration sorts are expanded.
    pub fn eval(&self, env: &Env) -> Option<Value> {
        match self {
            Formula::Bool(b) => Some(Value::Bool(*b)),
            Formula::Num(n, _) => Some(Value::Num(n.clone())),
            Formula::EnumLit(_, lit) => Some(Value::Enum(lit.clone())),
            Formula::Var(v) => env.get(&v.id).cloned(),
            Formula::Not(a) => a.eval_bool(env).map(|b| Value::Bool(!b)),
            Formula::And(ps) => {
                let mut unknown = false;
                for p in ps {
                    match p.eval_bool(env) {
                        Some(false) => return Some(Value::Bool(false)),
                        Some(true) => {}
                        None => unknown = true,
                    }
                }
                (!unknown).then_some(Value::Bool(true))
            }
            Formula::Or(ps) => {
                let mut unknown = false;
                for p in ps {
                    match p.eval_bool(env) {
                        Some(true) => return Some(Value::Bool(true)),
                        Some(false) => {}
                        None => unknown = true,
                    }
                }
                (!unknown).then_some(Value::Bool(false))
            }
            Formula::Implies(a, b) => match (a.eval_bool(env), b.eval_bool(env)) {
                (Some(false), _) | (_, Some(true)) => Some(Value::Bool(true)),
                (Some(true), Some(false)) => Some(Value::Bool(false)),
                _ => None,
            },
            Formula::Iff(a, b) => {
                let (x, y) = (a.eval_bool(env)?, b.eval_bool(env)?);
                Some(Value::Bool(x == y))
            }
            Formula::Cmp(op, a, b) => {
                let (x, y) = (a.eval(env)?, b.eval(env)?);
                let r = match op {
                    CmpOp::Eq => x == y,
                    CmpOp::Ne => x != y,
                    _ => {
                        let (x, y) = (x.as_num()?, y.as_num()?);
                        match op {
                            CmpOp::Lt => x < y,
                            CmpOp::Le => x <= y,
                            CmpOp::Gt => x > y,
                            CmpOp::Ge => x >= y,
                            CmpOp::Eq | CmpOp::Ne => unreachable!(),
                        }
                    }
                };
                Some(Value::Bool(r))
            }
            Formula::Arith(op, ps) => {
                let mut vals = Vec::with_capacity(ps.len());
                for p in ps {
                    vals.push(p.eval(env)?.as_num()?.clone());
                }
                let mut it = vals.into_iter();
                let first = it.next()?;
                let out = match op {
                    ArithOp::Add => it.fold(first, |acc, x| acc + x),
                    ArithOp::Mul => it.fold(first, |acc, x| acc * x),
                    ArithOp::Sub => it.fold(first, |acc, x| acc - x),
                };
                Some(Value::Num(out))
            }
            Formula::Div(a, b) => {
                let x = a.eval(env)?.as_num()?.clone();
                let y = b.eval(env)?.as_num()?.clone();
                if y.is_zero() {
                    return None;
                }
                if matches!(self.sort_of(), Ok(Sort::Nat)) {
                    Some(Value::Num(BigRational::from_integer(smt_int_div(
                        x.to_integer(),
                        y.to_integer(),
                    ))))
                } else {
                    Some(Value::Num(x / y))
                }
            }
            Formula::Neg(a) => Some(Value::Num(-a.eval(env)?.as_num()?.clone())),
            Formula::Ite(c, a, b) => match c.eval_bool(env) {
                Some(true) => a.eval(env),
                Some(false) => b.eval(env),
                None => {
                    let (x, y) = (a.eval(env)?, b.eval(env)?);
                    (x == y).then_some(x)
                }
            },
            Formula::Quant(q, vars, body) => eval_quant(*q, vars, body, env),
        }
    }

    pub fn eval_bool(&self, env: &Env) -> Option<bool> {
        self.eval(env)?.as_bool()
    }
}

fn eval_quant(q: Quantifier, vars: &[super::Variable], body: &Formula, env: &Env) -> Option<Value> {
    let Some((first, rest)) = vars.split_first() else {
        return body.eval(env);
    };
    let mut inner = env.clone();
    inner.remove(&first.id);
    let Some(domain) = first.sort.finite_domain() else {
        // Infinite domain: only decidable when the body does not depend on it.
        let mentions = body.free_vars().iter().any(|v| v.id == first.id);
        return if mentions {
            None
        } else {
            eval_quant(q, rest, body, &inner)
        };
    };
    let mut unknown = false;
    for value in domain {
        inner.insert(first.id.clone(), value);
        match eval_quant(q, rest, body, &inner).and_then(|v| v.as_bool()) {
            Some(true) if q == Quantifier::Exists => return Some(Value::Bool(true)),
            Some(false) if q == Quantifier::Forall => return Some(Value::Bool(false)),
            Some(_) => {}
            None => unknown = true,
        }
    }
    (!unknown).then_some(Value::Bool(q == Quantifier::Forall))
}

/// SMT-LIB integer division: `a = b*q + r` with `0 <= r < |b|`.
fn smt_int_div(a: num::BigInt, b: num::BigInt) -> num::BigInt {
    if b.is_negative() {
        -a.div_floor(&-b)
    } else {
        a.div_floor(&b)
    }
}
