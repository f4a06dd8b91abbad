use std::collections::HashMap;
use std::fmt;

use chr_terms::{simplify_arith, BuiltinStore, Term, Var};

/// Identifier-free view of a CHR state for comparisons: store terms sorted,
/// variables aliased to a goal variable named after the smallest such goal
/// variable, all other variables numbered `_0, _1, ...` in order of first
/// occurrence in the sorted store.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonState {
    pub store: Vec<Term>,
    pub bindings: Vec<(Var, Term)>,
    pub failed: bool,
}

impl fmt::Display for CanonState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.failed {
            writeln!(f, "failed")?;
        }
        for t in &self.store {
            writeln!(f, "{t}")?;
        }
        for (v, t) in &self.bindings {
            writeln!(f, "{v} = {t}")?;
        }
        Ok(())
    }
}

struct Renamer<'a> {
    builtins: &'a BuiltinStore,
    goal_names: HashMap<Var, Var>,
    numbers: HashMap<Var, usize>,
}

impl Renamer<'_> {
    fn rename(&mut self, t: &Term, placeholder: bool) -> Term {
        t.map_vars(&mut |v| {
            let root = self.builtins.root(v);
            if let Some(g) = self.goal_names.get(&root) {
                return Term::Var(g.clone());
            }
            if placeholder {
                return Term::var("_");
            }
            let n = self.numbers.len();
            let k = *self.numbers.entry(root).or_insert(n);
            Term::var(&format!("_{k}"))
        })
    }
}

/// Canonical store entries paired with their identifiers, plus bindings.
pub(crate) fn canonical_entries(
    entries: &[(u64, Term)],
    builtins: &BuiltinStore,
    goal_vars: &[Var],
) -> (Vec<(Term, u64)>, Vec<(Var, Term)>) {
    let mut goal_names: HashMap<Var, Var> = HashMap::new();
    for g in goal_vars {
        let root = builtins.root(g);
        let e = goal_names.entry(root).or_insert_with(|| g.clone());
        if g < e {
            *e = g.clone();
        }
    }
    let mut r = Renamer { builtins, goal_names, numbers: HashMap::new() };
    let resolved: Vec<(Term, u64)> = entries
        .iter()
        .map(|(id, t)| (simplify_arith(t, builtins).unwrap_or_else(|_| builtins.resolve(t)), *id))
        .collect();
    let mut keyed: Vec<(Term, usize)> = resolved.iter().enumerate().map(|(i, (t, _))| (r.rename(t, true), i)).collect();
    keyed.sort();
    let mut out: Vec<(Term, u64)> = keyed.iter().map(|(_, i)| (r.rename(&resolved[*i].0, false), resolved[*i].1)).collect();
    out.sort();
    let mut gv: Vec<Var> = goal_vars.to_vec();
    gv.sort();
    gv.dedup();
    let mut bindings = Vec::new();
    for g in gv {
        let val = r.rename(&builtins.resolve(&Term::Var(g.clone())), false);
        if val != Term::Var(g.clone()) {
            bindings.push((g, val));
        }
    }
    (out, bindings)
}

/// All failed states are identified: their store and bindings are dropped.
pub fn canonical_store<'a>(
    terms: impl IntoIterator<Item = &'a Term>,
    builtins: &BuiltinStore,
    goal_vars: &[Var],
    failed: bool,
) -> CanonState {
    if failed {
        return CanonState { store: Vec::new(), bindings: Vec::new(), failed };
    }
    let entries: Vec<(u64, Term)> = terms.into_iter().cloned().enumerate().map(|(i, t)| (i as u64, t)).collect();
    let (store, bindings) = canonical_entries(&entries, builtins, goal_vars);
    CanonState { store: store.into_iter().map(|(t, _)| t).collect(), bindings, failed }
}

impl crate::ExecState {
    pub fn canonical(&self, goal_vars: &[Var]) -> CanonState {
        canonical_store(self.store.values(), &self.builtins, goal_vars, self.failed)
    }
}
