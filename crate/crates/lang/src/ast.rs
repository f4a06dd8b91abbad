use chr_terms::{Comparison, Sym, Term, Var};

/// A positive or `del`-wrapped user atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaAtom {
    pub negated: bool,
    pub atom: Term,
}

impl LaAtom {
    pub fn pos(atom: Term) -> LaAtom {
        LaAtom { negated: false, atom }
    }

    pub fn neg(atom: Term) -> LaAtom {
        LaAtom { negated: true, atom }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Antecedent {
    Pos(Term),
    Neg(Term),
    Cmp(Comparison),
}

impl Antecedent {
    pub fn vars(&self) -> Vec<Var> {
        match self {
            Antecedent::Pos(t) | Antecedent::Neg(t) => t.vars(),
            Antecedent::Cmp(c) => c.vars(),
        }
    }

    pub fn is_user(&self) -> bool {
        !matches!(self, Antecedent::Cmp(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaRule {
    pub name: Sym,
    pub priority: Term,
    pub antecedents: Vec<Antecedent>,
    pub conclusion: Vec<LaAtom>,
}

impl LaRule {
    pub fn is_static(&self) -> bool {
        self.priority.is_ground()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LaProgram {
    pub rules: Vec<LaRule>,
}

/// Body item of a CHR^rp rule or goal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BodyItem {
    Atom(Term),
    Tell(Term, Term),
}

impl BodyItem {
    pub fn vars(&self) -> Vec<Var> {
        match self {
            BodyItem::Atom(t) => t.vars(),
            BodyItem::Tell(a, b) => {
                let mut v = a.vars();
                b.collect_vars(&mut v);
                v
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleKind {
    Simplification,
    Simpagation,
    Propagation,
}

/// `priority :: name @ kept \ removed <=> guard | body`. Propagation rules
/// keep all heads; simplification rules remove all heads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChrRule {
    pub priority: Term,
    pub name: Option<Sym>,
    pub kept: Vec<Term>,
    pub removed: Vec<Term>,
    pub guard: Vec<Comparison>,
    pub body: Vec<BodyItem>,
}

impl ChrRule {
    pub fn kind(&self) -> RuleKind {
        if self.removed.is_empty() {
            RuleKind::Propagation
        } else if self.kept.is_empty() {
            RuleKind::Simplification
        } else {
            RuleKind::Simpagation
        }
    }

    /// Heads in textual order: kept, then removed.
    pub fn heads(&self) -> impl Iterator<Item = &Term> {
        self.kept.iter().chain(self.removed.iter())
    }

    pub fn head_count(&self) -> usize {
        self.kept.len() + self.removed.len()
    }

    pub fn head_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for h in self.heads() {
            h.collect_vars(&mut out);
        }
        out
    }

    pub fn is_static(&self) -> bool {
        self.priority.is_ground()
    }

    pub fn display_name(&self, index: usize) -> String {
        match &self.name {
            Some(n) => n.to_string(),
            None => format!("#{}", index + 1),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChrProgram {
    pub rules: Vec<ChrRule>,
}

impl ChrProgram {
    /// User predicates occurring in heads or bodies, in first-seen order.
    pub fn predicates(&self) -> Vec<(Sym, usize)> {
        let mut out: Vec<(Sym, usize)> = Vec::new();
        let mut add = |t: &Term| {
            if let Term::App(f, args) = t {
                let key = (f.clone(), args.len());
                if !out.contains(&key) {
                    out.push(key);
                }
            }
        };
        for r in &self.rules {
            r.heads().for_each(&mut add);
            for b in &r.body {
                if let BodyItem::Atom(t) = b {
                    add(t)
                }
            }
        }
        out
    }
}

impl LaProgram {
    /// User predicates occurring in antecedents or conclusions (inside
    /// `del`), in first-seen order.
    pub fn predicates(&self) -> Vec<(Sym, usize)> {
        let mut out: Vec<(Sym, usize)> = Vec::new();
        let mut add = |t: &Term| {
            if let Term::App(f, args) = t {
                let key = (f.clone(), args.len());
                if !out.contains(&key) {
                    out.push(key);
                }
            }
        };
        for r in &self.rules {
            for a in &r.antecedents {
                if let Antecedent::Pos(t) | Antecedent::Neg(t) = a {
                    add(t)
                }
            }
            for c in &r.conclusion {
                add(&c.atom)
            }
        }
        out
    }
}
