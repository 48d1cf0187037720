use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::value::{fmt_rat, Rat, Value};
use super::{ArithExpr, CmpOp, Dir, Expectation, Pred, ProgState, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(Var),
    #[error("division by zero")]
    DivisionByZero,
    #[error("exponent {0} is not a non-negative integer")]
    NonIntegerExponent(String),
    #[error("modulus {0} is not positive")]
    BadModulus(String),
    #[error("undefined operation: {0}")]
    Undefined(&'static str),
}

fn floor(r: &Rat) -> Rat {
    r.floor()
}

fn rat_mod(a: &Rat, k: &Rat) -> Result<Rat, EvalError> {
    if !k.is_positive() {
        return Err(EvalError::BadModulus(fmt_rat(k)));
    }
    Ok(a - k * floor(&(a / k)))
}

impl ArithExpr {
    pub fn eval(&self, s: &ProgState) -> Result<Rat, EvalError> {
        Ok(match self {
            ArithExpr::Const(c) => c.clone(),
            ArithExpr::Var(v) => s.get(v).cloned().ok_or_else(|| EvalError::Unbound(v.clone()))?,
            ArithExpr::Add(a, b) => a.eval(s)? + b.eval(s)?,
            ArithExpr::Monus(a, b) => {
                let d = a.eval(s)? - b.eval(s)?;
                if d.is_negative() {
                    Rat::zero()
                } else {
                    d
                }
            }
            ArithExpr::Mul(a, b) => a.eval(s)? * b.eval(s)?,
            ArithExpr::Div(a, b) => {
                let d = b.eval(s)?;
                if d.is_zero() {
                    return Err(EvalError::DivisionByZero);
                }
                a.eval(s)? / d
            }
            ArithExpr::Mod(a, b) => rat_mod(&a.eval(s)?, &b.eval(s)?)?,
            ArithExpr::Floor(a) => a.eval(s)?.floor(),
            ArithExpr::Ceil(a) => a.eval(s)?.ceil(),
        })
    }
}

impl Pred {
    pub fn eval(&self, s: &ProgState) -> Result<bool, EvalError> {
        Ok(match self {
            Pred::True => true,
            Pred::False => false,
            Pred::Cmp(a, op, b) => {
                let (x, y) = (a.eval(s)?, b.eval(s)?);
                match op {
                    CmpOp::Eq => x == y,
                    CmpOp::Ne => x != y,
                    CmpOp::Lt => x < y,
                    CmpOp::Le => x <= y,
                    CmpOp::Gt => x > y,
                    CmpOp::Ge => x >= y,
                }
            }
            Pred::EqMod(a, b, k) => {
                let k = k.eval(s)?;
                if !k.is_positive() {
                    return Err(EvalError::BadModulus(fmt_rat(&k)));
                }
                ((a.eval(s)? - b.eval(s)?) / k).is_integer()
            }
            Pred::And(a, b) => a.eval(s)? && b.eval(s)?,
            Pred::Or(a, b) => a.eval(s)? || b.eval(s)?,
            Pred::Not(a) => !a.eval(s)?,
            Pred::Implies(a, b) => !a.eval(s)? || b.eval(s)?,
            Pred::ExpCmp(f, dir, g) => {
                let (x, y) = (f.eval(s)?, g.eval(s)?);
                match dir {
                    Dir::Le => x <= y,
                    Dir::Ge => x >= y,
                }
            }
        })
    }
}

fn pow(base: Value, exp: &Rat) -> Result<Value, EvalError> {
    if !exp.is_integer() || exp.is_negative() {
        return Err(EvalError::NonIntegerExponent(fmt_rat(exp)));
    }
    if exp.is_zero() {
        return Ok(Value::one());
    }
    match base {
        Value::Infinity => Ok(Value::Infinity),
        Value::Finite(b) => {
            let n = exp
                .to_integer()
                .to_i32()
                .ok_or_else(|| EvalError::NonIntegerExponent(fmt_rat(exp)))?;
            Ok(Value::Finite(num_traits::Pow::pow(&b, n)))
        }
    }
}

impl Expectation {
    pub fn eval(&self, s: &ProgState) -> Result<Value, EvalError> {
        use Expectation as E;
        use Value::{Finite, Infinity};
        Ok(match self {
            E::Const(c) => Finite(c.clone()),
            E::Infinity => Infinity,
            E::Var(v) => Finite(s.get(v).cloned().ok_or_else(|| EvalError::Unbound(v.clone()))?),
            E::Add(a, b) => a.eval(s)?.add(&b.eval(s)?),
            E::Monus(a, b) => match (a.eval(s)?, b.eval(s)?) {
                (Finite(x), Finite(y)) => {
                    let d = x - y;
                    Finite(if d.is_negative() { Rat::zero() } else { d })
                }
                (Infinity, Finite(_)) => Infinity,
                (Finite(_), Infinity) => Value::zero(),
                (Infinity, Infinity) => return Err(EvalError::Undefined("infinity - infinity")),
            },
            E::Mul(a, b) => {
                let x = a.eval(s)?;
                if x.is_zero() {
                    return Ok(x);
                }
                x.mul(&b.eval(s)?)
            }
            E::Div(a, b) => match (a.eval(s)?, b.eval(s)?) {
                (_, Finite(y)) if y.is_zero() => return Err(EvalError::DivisionByZero),
                (Finite(x), Finite(y)) => Finite(x / y),
                (Infinity, Finite(_)) => Infinity,
                (Finite(_), Infinity) => Value::zero(),
                (Infinity, Infinity) => return Err(EvalError::Undefined("infinity / infinity")),
            },
            E::Mod(a, b) => match (a.eval(s)?, b.eval(s)?) {
                (Finite(x), Finite(y)) => Finite(rat_mod(&x, &y)?),
                _ => return Err(EvalError::Undefined("mod with infinity")),
            },
            E::Floor(a) => match a.eval(s)? {
                Finite(x) => Finite(x.floor()),
                Infinity => Infinity,
            },
            E::Ceil(a) => match a.eval(s)? {
                Finite(x) => Finite(x.ceil()),
                Infinity => Infinity,
            },
            E::Min(a, b) => a.eval(s)?.minimum(&b.eval(s)?),
            E::Max(a, b) => a.eval(s)?.maximum(&b.eval(s)?),
            E::Iverson(p) => {
                if p.eval(s)? {
                    Value::one()
                } else {
                    Value::zero()
                }
            }
            E::Imp(p, g) => {
                if p.eval(s)? {
                    g.eval(s)?
                } else {
                    Infinity
                }
            }
            E::Pow(b, n) => pow(b.eval(s)?, &n.eval(s)?)?,
            E::AbsDiff(a, b) => a
                .eval(s)?
                .abs_diff(&b.eval(s)?)
                .ok_or(EvalError::Undefined("|infinity - infinity|"))?,
        })
    }
}
