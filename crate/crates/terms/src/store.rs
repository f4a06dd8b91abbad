use std::cell::Cell;
use std::collections::HashMap;

use thiserror::Error;

use crate::term::{Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StoreStatus {
    Consistent,
    Failed,
}

/// Herbrand equality store: union-find over variables, each class with an
/// optional non-variable value.
#[derive(Clone, Debug)]
pub struct BuiltinStore {
    index: HashMap<Var, u32>,
    vars: Vec<Var>,
    parent: Vec<Cell<u32>>,
    rank: Vec<u8>,
    value: Vec<Option<Term>>,
    status: StoreStatus,
}

impl Default for BuiltinStore {
    fn default() -> Self {
        BuiltinStore::new()
    }
}

impl BuiltinStore {
    pub fn new() -> BuiltinStore {
        BuiltinStore {
            index: HashMap::new(),
            vars: Vec::new(),
            parent: Vec::new(),
            rank: Vec::new(),
            value: Vec::new(),
            status: StoreStatus::Consistent,
        }
    }

    pub fn status(&self) -> StoreStatus {
        self.status
    }

    pub fn is_failed(&self) -> bool {
        self.status == StoreStatus::Failed
    }

    pub fn known_vars(&self) -> &[Var] {
        &self.vars
    }

    fn slot(&mut self, v: &Var) -> u32 {
        if let Some(&i) = self.index.get(v) {
            return i;
        }
        let i = self.vars.len() as u32;
        self.index.insert(v.clone(), i);
        self.vars.push(v.clone());
        self.parent.push(Cell::new(i));
        self.rank.push(0);
        self.value.push(None);
        i
    }

    fn find(&self, mut i: u32) -> u32 {
        let mut root = i;
        while self.parent[root as usize].get() != root {
            root = self.parent[root as usize].get();
        }
        while self.parent[i as usize].get() != root {
            let next = self.parent[i as usize].get();
            self.parent[i as usize].set(root);
            i = next;
        }
        root
    }

    /// Representative variable of `v`'s class (`v` itself if unknown).
    pub fn root(&self, v: &Var) -> Var {
        match self.index.get(v) {
            Some(&i) => self.vars[self.find(i) as usize].clone(),
            None => v.clone(),
        }
    }

    /// Dereference one level: unbound variables become their class
    /// representative, bound ones their value.
    pub fn walk(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => match self.index.get(v) {
                Some(&i) => {
                    let r = self.find(i) as usize;
                    match &self.value[r] {
                        Some(val) => val.clone(),
                        None => Term::Var(self.vars[r].clone()),
                    }
                }
                None => t.clone(),
            },
            _ => t.clone(),
        }
    }

    /// Fully dereferenced copy of `t`.
    pub fn resolve(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::App(f, args) => Term::App(f, args.iter().map(|a| self.resolve(a)).collect()),
            other => other,
        }
    }

    pub fn is_ground(&self, t: &Term) -> bool {
        self.resolve(t).is_ground()
    }

    /// Unbound representative variables occurring in `t`.
    pub fn free_vars(&self, t: &Term) -> Vec<Var> {
        self.resolve(t).vars()
    }

    fn occurs(&self, root: &Var, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(v) => &v == root,
            Term::Int(_) => false,
            Term::App(_, args) => args.iter().any(|a| self.occurs(root, a)),
        }
    }

    /// Tell `a = b`. On success returns the class representatives (taken
    /// before the update) whose classes changed. On failure the store is
    /// marked failed.
    pub fn unify(&mut self, a: &Term, b: &Term) -> Result<Vec<Var>, UnifyError> {
        if self.is_failed() {
            return Err(UnifyError::Failed);
        }
        let mut touched = Vec::new();
        let mut stack = vec![(a.clone(), b.clone())];
        while let Some((x, y)) = stack.pop() {
            let x = self.walk(&x);
            let y = self.walk(&y);
            match (x, y) {
                (Term::Var(p), Term::Var(q)) => {
                    if p == q {
                        continue;
                    }
                    let i = self.slot(&p);
                    let j = self.slot(&q);
                    touched.push(p);
                    touched.push(q);
                    let (hi, lo) = if self.rank[i as usize] >= self.rank[j as usize] { (i, j) } else { (j, i) };
                    self.parent[lo as usize].set(hi);
                    if self.rank[hi as usize] == self.rank[lo as usize] {
                        self.rank[hi as usize] += 1;
                    }
                }
                (Term::Var(p), t) | (t, Term::Var(p)) => {
                    if self.occurs(&p, &t) {
                        self.status = StoreStatus::Failed;
                        return Err(UnifyError::Occurs);
                    }
                    let i = self.slot(&p);
                    self.value[i as usize] = Some(t);
                    touched.push(p);
                }
                (Term::Int(m), Term::Int(n)) => {
                    if m != n {
                        self.status = StoreStatus::Failed;
                        return Err(UnifyError::Clash);
                    }
                }
                (Term::App(f, xs), Term::App(g, ys)) => {
                    if f != g || xs.len() != ys.len() {
                        self.status = StoreStatus::Failed;
                        return Err(UnifyError::Clash);
                    }
                    stack.extend(xs.into_iter().zip(ys));
                }
                _ => {
                    self.status = StoreStatus::Failed;
                    return Err(UnifyError::Clash);
                }
            }
        }
        Ok(touched)
    }

    /// Would `a = b` be consistent with the store? Does not modify it.
    pub fn unifiable(&self, a: &Term, b: &Term) -> bool {
        let mut scratch = self.clone();
        scratch.unify(a, b).is_ok()
    }

    /// Is `a = b` entailed, i.e. are the dereferenced terms identical?
    pub fn entails_eq(&self, a: &Term, b: &Term) -> bool {
        self.resolve(a) == self.resolve(b)
    }

    /// Partition of all known variables into equivalence classes, each
    /// class sorted by name; classes sorted by their first member.
    pub fn classes(&self) -> Vec<Vec<Var>> {
        let mut by_root: HashMap<u32, Vec<Var>> = HashMap::new();
        for (i, v) in self.vars.iter().enumerate() {
            by_root.entry(self.find(i as u32)).or_default().push(v.clone());
        }
        let mut out: Vec<Vec<Var>> = by_root
            .into_values()
            .map(|mut c| {
                c.sort();
                c
            })
            .collect();
        out.sort();
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UnifyError {
    #[error("functor or constant clash")]
    Clash,
    #[error("occurs check violation")]
    Occurs,
    #[error("store already failed")]
    Failed,
}

/// Functional variant of [`BuiltinStore::unify`].
pub fn unify(a: &Term, b: &Term, store: &BuiltinStore) -> Option<BuiltinStore> {
    let mut next = store.clone();
    next.unify(a, b).ok().map(|_| next)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintId(pub u64);

impl std::fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdState {
    Alive,
    Dead,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("constraint {0} is already dead")]
pub struct DoubleKill(pub ConstraintId);

/// Allocates identifiers and tracks the alive → dead transition.
#[derive(Clone, Debug, Default)]
pub struct IdTable {
    states: Vec<IdState>,
}

impl IdTable {
    pub fn new() -> IdTable {
        IdTable::default()
    }

    /// Identifiers start at 1, as in the operational semantics.
    pub fn fresh(&mut self) -> ConstraintId {
        self.states.push(IdState::Alive);
        ConstraintId(self.states.len() as u64)
    }

    pub fn next(&self) -> u64 {
        self.states.len() as u64 + 1
    }

    pub fn state(&self, id: ConstraintId) -> IdState {
        self.states[(id.0 - 1) as usize]
    }

    pub fn is_alive(&self, id: ConstraintId) -> bool {
        self.state(id) == IdState::Alive
    }

    pub fn kill(&mut self, id: ConstraintId) -> Result<(), DoubleKill> {
        let s = &mut self.states[(id.0 - 1) as usize];
        if *s == IdState::Dead {
            return Err(DoubleKill(id));
        }
        *s = IdState::Dead;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n)
    }

    #[test]
    fn binds_variable_to_compound() {
        let s = unify(&v("X"), &Term::app("f", vec![v("Y")]), &BuiltinStore::new()).unwrap();
        assert_eq!(s.resolve(&v("X")).to_string(), "f(Y)");
    }

    #[test]
    fn clash_and_occurs_fail() {
        let st = BuiltinStore::new();
        assert!(unify(&Term::app("f", vec![Term::atom("a")]), &Term::app("f", vec![Term::atom("b")]), &st).is_none());
        assert!(unify(&v("X"), &Term::app("f", vec![v("X")]), &st).is_none());
        let mut st = BuiltinStore::new();
        assert!(st.unify(&Term::atom("a"), &Term::atom("b")).is_err());
        assert!(st.is_failed());
    }

    #[test]
    fn aliasing_then_binding_reaches_all_members() {
        let mut st = BuiltinStore::new();
        st.unify(&v("X"), &v("Y")).unwrap();
        st.unify(&v("Y"), &v("Z")).unwrap();
        st.unify(&v("Z"), &Term::int(3)).unwrap();
        assert_eq!(st.resolve(&v("X")), Term::int(3));
        assert_eq!(st.classes().len(), 1);
    }

    #[test]
    fn id_table_kills_once() {
        let mut t = IdTable::new();
        let a = t.fresh();
        assert_eq!(a, ConstraintId(1));
        assert!(t.kill(a).is_ok());
        assert!(t.kill(a).is_err());
        assert!(!t.is_alive(a));
    }
}
