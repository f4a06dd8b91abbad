use std::fmt;

use thiserror::Error;

use crate::store::BuiltinStore;
use crate::term::Term;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("arithmetic on unbound variable in {0}")]
    NonGround(Term),
    #[error("not an integer expression: {0}")]
    NotInteger(Term),
    #[error("integer overflow in {0}")]
    Overflow(Term),
}

/// Evaluate `+`, `-`, `*` over checked 64-bit integers.
pub fn eval_arith(expr: &Term, store: &BuiltinStore) -> Result<i64, ArithError> {
    let t = store.walk(expr);
    match &t {
        Term::Int(n) => Ok(*n),
        Term::Var(_) => Err(ArithError::NonGround(expr.clone())),
        Term::App(f, args) => {
            let overflow = || ArithError::Overflow(t.clone());
            match (&**f, args.len()) {
                ("+", 2) => eval_arith(&args[0], store)?.checked_add(eval_arith(&args[1], store)?).ok_or_else(overflow),
                ("-", 2) => eval_arith(&args[0], store)?.checked_sub(eval_arith(&args[1], store)?).ok_or_else(overflow),
                ("*", 2) => eval_arith(&args[0], store)?.checked_mul(eval_arith(&args[1], store)?).ok_or_else(overflow),
                ("-", 1) => eval_arith(&args[0], store)?.checked_neg().ok_or_else(overflow),
                _ => Err(ArithError::NotInteger(t.clone())),
            }
        }
    }
}

/// Resolve `t` under `store` and replace every ground arithmetic subterm by
/// its value. Non-ground arithmetic is left in place.
pub fn simplify_arith(t: &Term, store: &BuiltinStore) -> Result<Term, ArithError> {
    fold(&store.resolve(t))
}

fn fold(t: &Term) -> Result<Term, ArithError> {
    match t {
        Term::App(f, args) => {
            if t.is_arith_op() && t.is_ground() {
                return match eval_arith(t, &BuiltinStore::new()) {
                    Ok(n) => Ok(Term::Int(n)),
                    Err(ArithError::NotInteger(_)) => Ok(t.clone()),
                    Err(e) => Err(e),
                };
            }
            Ok(Term::App(f.clone(), args.iter().map(fold).collect::<Result<_, _>>()?))
        }
        _ => Ok(t.clone()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "=<",
            CmpOp::Eq => "=",
            CmpOp::Ne => "\\=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Comparison {
    pub op: CmpOp,
    pub lhs: Term,
    pub rhs: Term,
}

impl Comparison {
    pub fn new(op: CmpOp, lhs: Term, rhs: Term) -> Comparison {
        Comparison { op, lhs, rhs }
    }

    pub fn map_terms(&self, f: impl Fn(&Term) -> Term) -> Comparison {
        Comparison { op: self.op, lhs: f(&self.lhs), rhs: f(&self.rhs) }
    }

    pub fn vars(&self) -> Vec<crate::Var> {
        let mut out = self.lhs.vars();
        self.rhs.collect_vars(&mut out);
        out
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truth {
    Entailed,
    Disentailed,
    Unknown,
}

impl Truth {
    fn negate(self) -> Truth {
        match self {
            Truth::Entailed => Truth::Disentailed,
            Truth::Disentailed => Truth::Entailed,
            Truth::Unknown => Truth::Unknown,
        }
    }

    fn from_bool(b: bool) -> Truth {
        if b {
            Truth::Entailed
        } else {
            Truth::Disentailed
        }
    }
}

fn eq_truth(lhs: &Term, rhs: &Term, store: &BuiltinStore) -> Result<Truth, ArithError> {
    let l = store.resolve(lhs);
    let r = store.resolve(rhs);
    if l.is_arith_op() || r.is_arith_op() {
        return match (eval_arith(&l, store), eval_arith(&r, store)) {
            (Ok(a), Ok(b)) => Ok(Truth::from_bool(a == b)),
            (Err(e @ ArithError::Overflow(_)), _) | (_, Err(e @ ArithError::Overflow(_))) => Err(e),
            (Err(ArithError::NonGround(_)), _) | (_, Err(ArithError::NonGround(_))) => Ok(Truth::Unknown),
            _ => Ok(Truth::Disentailed),
        };
    }
    if l == r {
        return Ok(Truth::Entailed);
    }
    if l.is_ground() && r.is_ground() {
        return Ok(Truth::Disentailed);
    }
    Ok(if store.unifiable(&l, &r) { Truth::Unknown } else { Truth::Disentailed })
}

/// Three-valued evaluation; overflow is reported as an error.
pub fn try_eval_comparison(c: &Comparison, store: &BuiltinStore) -> Result<Truth, ArithError> {
    match c.op {
        CmpOp::Eq => eq_truth(&c.lhs, &c.rhs, store),
        CmpOp::Ne => Ok(eq_truth(&c.lhs, &c.rhs, store)?.negate()),
        CmpOp::Lt | CmpOp::Le => match (eval_arith(&c.lhs, store), eval_arith(&c.rhs, store)) {
            (Ok(a), Ok(b)) => Ok(Truth::from_bool(if c.op == CmpOp::Lt { a < b } else { a <= b })),
            (Err(e @ ArithError::Overflow(_)), _) | (_, Err(e @ ArithError::Overflow(_))) => Err(e),
            (Err(ArithError::NonGround(_)), _) | (_, Err(ArithError::NonGround(_))) => Ok(Truth::Unknown),
            _ => Ok(Truth::Disentailed),
        },
    }
}

/// Three-valued evaluation. Type errors count as disentailed; overflow too.
pub fn eval_comparison(c: &Comparison, store: &BuiltinStore) -> Truth {
    try_eval_comparison(c, store).unwrap_or(Truth::Disentailed)
}
