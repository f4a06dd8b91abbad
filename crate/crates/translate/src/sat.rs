use std::collections::BTreeMap;

use chr_terms::{try_eval_comparison, BuiltinStore, CmpOp, Comparison, Term, Truth, Var};

/// `Σ coef·var + constant`, or `None` for non-linear or non-arithmetic terms.
pub(crate) fn linear(t: &Term) -> Option<(BTreeMap<Var, i64>, i64)> {
    match t {
        Term::Int(n) => Some((BTreeMap::new(), *n)),
        Term::Var(v) => Some((BTreeMap::from([(v.clone(), 1)]), 0)),
        Term::App(f, args) => match (&**f, args.as_slice()) {
            ("+", [a, b]) => combine(linear(a)?, linear(b)?, 1),
            ("-", [a, b]) => combine(linear(a)?, linear(b)?, -1),
            ("-", [a]) => scale(linear(a)?, -1),
            ("*", [a, b]) => {
                let (la, lb) = (linear(a)?, linear(b)?);
                if la.0.values().all(|c| *c == 0) {
                    scale(lb, la.1)
                } else if lb.0.values().all(|c| *c == 0) {
                    scale(la, lb.1)
                } else {
                    None
                }
            }
            _ => None,
        },
    }
}

fn combine(
    (mut xs, a): (BTreeMap<Var, i64>, i64),
    (ys, b): (BTreeMap<Var, i64>, i64),
    sign: i64,
) -> Option<(BTreeMap<Var, i64>, i64)> {
    for (v, c) in ys {
        let e = xs.entry(v).or_insert(0);
        *e = e.checked_add(c.checked_mul(sign)?)?;
    }
    Some((xs, a.checked_add(b.checked_mul(sign)?)?))
}

fn scale((xs, a): (BTreeMap<Var, i64>, i64), k: i64) -> Option<(BTreeMap<Var, i64>, i64)> {
    let xs = xs.into_iter().map(|(v, c)| Some((v, c.checked_mul(k)?))).collect::<Option<_>>()?;
    Some((xs, a.checked_mul(k)?))
}

fn is_numeric(t: &Term) -> bool {
    matches!(t, Term::Int(_)) || t.is_arith_op()
}

/// Over-approximation of `∃ vars. c`: ground comparisons are evaluated,
/// syntactic equality is checked by unification, and linear comparisons
/// whose variables cancel out (`D < D`) are decided on the constant.
pub fn comparison_satisfiable(c: &Comparison) -> bool {
    match try_eval_comparison(c, &BuiltinStore::new()) {
        Ok(Truth::Entailed) => true,
        Ok(Truth::Disentailed) | Err(_) => false,
        Ok(Truth::Unknown) => {
            let arith = matches!(c.op, CmpOp::Lt | CmpOp::Le) || is_numeric(&c.lhs) || is_numeric(&c.rhs);
            if !arith {
                return true;
            }
            let Some(diff) = linear(&c.lhs).zip(linear(&c.rhs)).and_then(|(l, r)| combine(l, r, -1)) else {
                return true;
            };
            if diff.0.values().any(|k| *k != 0) {
                return true;
            }
            match c.op {
                CmpOp::Lt => diff.1 < 0,
                CmpOp::Le => diff.1 <= 0,
                CmpOp::Eq => diff.1 == 0,
                CmpOp::Ne => diff.1 != 0,
            }
        }
    }
}

pub fn satisfiable(cs: &[Comparison]) -> bool {
    cs.iter().all(comparison_satisfiable)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n)
    }

    #[test]
    fn cancelling_variables_are_decided() {
        let lt = Comparison::new(CmpOp::Lt, v("D"), v("D"));
        assert!(!comparison_satisfiable(&lt));
        let le = Comparison::new(CmpOp::Le, Term::add(v("D"), Term::int(1)), Term::add(Term::int(2), v("D")));
        assert!(comparison_satisfiable(&le));
        let open = Comparison::new(CmpOp::Lt, v("A"), v("B"));
        assert!(comparison_satisfiable(&open));
    }

    #[test]
    fn herbrand_equalities_use_unification() {
        let eq = Comparison::new(CmpOp::Eq, Term::app("f", vec![v("X")]), Term::app("g", vec![v("Y")]));
        assert!(!comparison_satisfiable(&eq));
        let ne = Comparison::new(CmpOp::Ne, v("M"), Term::atom("p"));
        assert!(comparison_satisfiable(&ne));
        let same = Comparison::new(CmpOp::Ne, v("X"), v("X"));
        assert!(!comparison_satisfiable(&same));
    }
}
