use std::collections::BTreeMap;

use crate::term::{Term, Var};

/// Idempotent mapping from variables to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        t.map_vars(&mut |v| self.map.get(v).cloned().unwrap_or_else(|| Term::Var(v.clone())))
    }

    /// Add `v ↦ t`, keeping the substitution idempotent. Returns false on an
    /// occurs-check violation or when `v` is already bound to something else.
    pub fn bind(&mut self, v: Var, t: Term) -> bool {
        let t = self.apply(&t);
        if let Some(old) = self.map.get(&v) {
            return *old == t;
        }
        if t == Term::Var(v.clone()) {
            return true;
        }
        if t.occurs(&v) {
            return false;
        }
        let single = Substitution { map: BTreeMap::from([(v.clone(), t.clone())]) };
        for val in self.map.values_mut() {
            *val = single.apply(val);
        }
        self.map.insert(v, t);
        true
    }

    /// Syntactic unification that prefers binding variables of `b` to
    /// variables of `a`, so mgus keep the names of earlier terms.
    pub fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let a = self.apply(a);
        let b = self.apply(b);
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (_, Term::Var(y)) => self.bind(y.clone(), a.clone()),
            (Term::Var(x), _) => self.bind(x.clone(), b.clone()),
            (Term::Int(m), Term::Int(n)) => m == n,
            (Term::App(f, xs), Term::App(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
            _ => false,
        }
    }
}

impl FromIterator<(Var, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        let mut s = Substitution::new();
        for (v, t) in iter {
            s.bind(v, t);
        }
        s
    }
}

/// One-sided matching: bind variables of `pattern` so it equals `ground`.
pub fn match_term(pattern: &Term, ground: &Term) -> Option<Substitution> {
    let mut s = Substitution::new();
    match_into(pattern, ground, &mut s).then_some(s)
}

/// Extend `s` so that `s(pattern)` equals `target`. Variables of `target`
/// are treated as constants. On failure `s` may hold partial bindings.
pub fn match_into(pattern: &Term, ground: &Term, s: &mut Substitution) -> bool {
    match (pattern, ground) {
        (Term::Var(v), _) => match s.map.get(v) {
            Some(bound) => bound == ground,
            None => {
                s.map.insert(v.clone(), ground.clone());
                true
            }
        },
        (Term::Int(m), Term::Int(n)) => m == n,
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| match_into(x, y, s))
        }
        _ => false,
    }
}

/// Most general unifier of a non-empty set of terms.
pub fn mgu_of_set(terms: &[Term]) -> Option<Substitution> {
    let mut s = Substitution::new();
    let (first, rest) = terms.split_first()?;
    for t in rest {
        if !s.unify(first, t) {
            return None;
        }
    }
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n)
    }

    #[test]
    fn match_projects_arguments() {
        let p = Term::app("dist", vec![v("V"), v("D")]);
        let g = Term::app("dist", vec![Term::atom("a"), Term::int(5)]);
        let s = match_term(&p, &g).unwrap();
        assert_eq!(s.apply(&p), g);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn match_rejects_repeated_variable_mismatch() {
        let p = Term::app("e", vec![v("V"), v("C"), v("V")]);
        let g = Term::app("e", vec![Term::atom("a"), Term::int(3), Term::atom("b")]);
        assert!(match_term(&p, &g).is_none());
        let g = Term::app("e", vec![Term::atom("a"), Term::int(3), Term::atom("a")]);
        let s = match_term(&p, &g).unwrap();
        assert_eq!(s.apply(&p), g);
    }

    #[test]
    fn mgu_of_find_heads_keeps_first_names() {
        let a = Term::app("find", vec![v("X"), v("Z")]);
        let b = Term::app("find", vec![v("Y"), v("Z")]);
        let s = mgu_of_set(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(s.apply(&a), s.apply(&b));
        assert_eq!(s.get(&Var::new("Y")), Some(&v("X")));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn mgu_trivial_cases() {
        let t = Term::app("f", vec![v("X")]);
        assert!(mgu_of_set(&[t]).unwrap().is_empty());
        assert!(mgu_of_set(&[Term::atom("a"), Term::atom("b")]).is_none());
        assert!(mgu_of_set(&[v("X"), Term::app("f", vec![v("X")])]).is_none());
    }

    #[test]
    fn bind_keeps_idempotence() {
        let mut s = Substitution::new();
        assert!(s.bind(Var::new("X"), Term::app("f", vec![v("Y")])));
        assert!(s.bind(Var::new("Y"), Term::atom("a")));
        let t = s.apply(&v("X"));
        assert_eq!(t, s.apply(&t));
        assert_eq!(t.to_string(), "f(a)");
    }
}
