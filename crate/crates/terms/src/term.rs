use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub type Sym = Arc<str>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub Sym);

impl Var {
    pub fn new(name: &str) -> Var {
        Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A Herbrand term. Atoms are zero-arity applications; arithmetic
/// expressions are applications of `+`, `-` and `*`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Int(i64),
    App(Sym, Vec<Term>),
}

pub const NIL: &str = "[]";
pub const CONS: &str = "[|]";

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn atom(name: &str) -> Term {
        Term::App(Arc::from(name), Vec::new())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(Arc::from(name), args)
    }

    pub fn int(v: i64) -> Term {
        Term::Int(v)
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::app("+", vec![a, b])
    }

    pub fn list(items: Vec<Term>) -> Term {
        items
            .into_iter()
            .rev()
            .fold(Term::atom(NIL), |tail, h| Term::app(CONS, vec![h, tail]))
    }

    pub fn functor(&self) -> Option<(&str, usize)> {
        match self {
            Term::App(f, args) => Some((f, args.len())),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) => args,
            _ => &[],
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Term::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_arith_op(&self) -> bool {
        match self {
            Term::App(f, args) => {
                matches!((&**f, args.len()), ("+", 2) | ("-", 2) | ("*", 2) | ("-", 1))
            }
            _ => false,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Int(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn occurs(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::Int(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    /// Variables in depth-first, first-occurrence order.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            Term::Int(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn var_set(&self) -> BTreeSet<Var> {
        self.vars().into_iter().collect()
    }

    /// Rename every variable through `f`.
    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Int(_) => self.clone(),
            Term::App(name, args) => {
                Term::App(name.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
        }
    }

    fn list_items(&self) -> Option<(Vec<&Term>, Option<&Term>)> {
        let mut items = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::App(f, args) if &**f == CONS && args.len() == 2 => {
                    items.push(&args[0]);
                    cur = &args[1];
                }
                Term::App(f, args) if &**f == NIL && args.is_empty() => return Some((items, None)),
                _ if items.is_empty() => return None,
                _ => return Some((items, Some(cur))),
            }
        }
    }
}

impl From<Var> for Term {
    fn from(v: Var) -> Term {
        Term::Var(v)
    }
}

impl From<i64> for Term {
    fn from(v: i64) -> Term {
        Term::Int(v)
    }
}

fn binary_prec(op: &str) -> Option<u8> {
    match op {
        "+" | "-" => Some(2),
        "*" => Some(1),
        _ => None,
    }
}

// Precedence levels: 0 primary, 1 product, 2 sum. Operands print with
// parentheses when their level exceeds `max`.
fn write_term(t: &Term, max: u8, right: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Var(v) => write!(f, "{v}"),
        Term::Int(n) if *n < 0 && right => write!(f, "({n})"),
        Term::Int(n) => write!(f, "{n}"),
        Term::App(name, args) => {
            if args.len() == 2 {
                if let Some(p) = binary_prec(name) {
                    if p > max {
                        write!(f, "(")?;
                    }
                    write_term(&args[0], p, false, f)?;
                    write!(f, "{name}")?;
                    write_term(&args[1], p - 1, true, f)?;
                    if p > max {
                        write!(f, ")")?;
                    }
                    return Ok(());
                }
            }
            if args.len() == 1 && &**name == "-" {
                return match &args[0] {
                    Term::Var(_) => write!(f, "-{}", args[0]),
                    Term::App(_, _) if !args[0].is_arith_op() && t.list_items().is_none() => {
                        write!(f, "-{}", args[0])
                    }
                    other => {
                        write!(f, "-(")?;
                        write_term(other, 2, false, f)?;
                        write!(f, ")")
                    }
                };
            }
            if let Some((items, tail)) = t.list_items() {
                write!(f, "[")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write_term(it, 2, false, f)?;
                }
                if let Some(tl) = tail {
                    write!(f, "|")?;
                    write_term(tl, 2, false, f)?;
                }
                return write!(f, "]");
            }
            write!(f, "{name}")?;
            if !args.is_empty() {
                write!(f, "(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write_term(a, 2, false, f)?;
                }
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, 2, false, f)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, 2, false, f)
    }
}

/// Source of fresh variable names that cannot clash with parsed ones.
#[derive(Clone, Debug, Default)]
pub struct VarGen {
    next: u64,
}

impl VarGen {
    pub fn new() -> VarGen {
        VarGen::default()
    }

    pub fn fresh(&mut self) -> Var {
        self.next += 1;
        Var::new(&format!("_G{}", self.next))
    }
}
