use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use chr_lang::{normalize_la_priority, Antecedent, BodyItem, ChrProgram, ChrRule, LaAtom, LaProgram};
use chr_terms::{CmpOp, Comparison, Substitution, Term, Var};

use crate::sat::satisfiable;
use crate::{NameMap, TranslateError, TranslationArtifacts};

/// Rules with more user antecedents than this are rejected: the number of
/// generated rules grows with the Bell number of the antecedent count.
pub const MAX_USER_ANTECEDENTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    P,
    N,
    B,
}

impl Mode {
    pub fn term(self) -> Term {
        Term::atom(match self {
            Mode::P => "p",
            Mode::N => "n",
            Mode::B => "b",
        })
    }

    pub fn from_term(t: &Term) -> Option<Mode> {
        match t.functor()? {
            ("p", 0) => Some(Mode::P),
            ("n", 0) => Some(Mode::N),
            ("b", 0) => Some(Mode::B),
            _ => None,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.term())
    }
}

/// Name of the representation predicate of `a`.
pub fn mode_pred(name: &str) -> String {
    format!("{name}_r")
}

/// A partition of the user antecedents (0-based, blocks ordered by their
/// least element) with the unifier that collapses every block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeadPartition {
    pub blocks: Vec<Vec<usize>>,
    pub unifier: Substitution,
}

impl HeadPartition {
    /// `1/2/3` or `1/23`, 1-based.
    pub fn label(&self) -> String {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|i| (i + 1).to_string()).collect::<String>())
            .collect::<Vec<_>>()
            .join("/")
    }
}

pub fn split(antecedents: &[Antecedent]) -> (Vec<Antecedent>, Vec<Comparison>) {
    let mut user = Vec::new();
    let mut cmps = Vec::new();
    for a in antecedents {
        match a {
            Antecedent::Cmp(c) => cmps.push(c.clone()),
            other => user.push(other.clone()),
        }
    }
    (user, cmps)
}

/// All set partitions of `0..m`, finest first; partitions with the same
/// block count are ordered by their restricted growth strings.
pub fn set_partitions(m: usize) -> Vec<Vec<Vec<usize>>> {
    fn go(i: usize, m: usize, rgs: &mut Vec<usize>, blocks: usize, out: &mut Vec<Vec<usize>>) {
        if i == m {
            out.push(rgs.clone());
            return;
        }
        for b in 0..=blocks {
            rgs.push(b);
            go(i + 1, m, rgs, blocks.max(b + 1), out);
            rgs.pop();
        }
    }
    let mut strings = Vec::new();
    go(0, m, &mut Vec::new(), 0, &mut strings);
    let mut parts: Vec<Vec<Vec<usize>>> = strings
        .into_iter()
        .map(|rgs| {
            let k = rgs.iter().max().map_or(0, |x| x + 1);
            let mut blocks = vec![Vec::new(); k];
            for (i, b) in rgs.iter().enumerate() {
                blocks[*b].push(i);
            }
            blocks
        })
        .collect();
    parts.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    parts
}

fn inner(a: &Antecedent) -> (&Term, bool) {
    match a {
        Antecedent::Pos(t) => (t, false),
        Antecedent::Neg(t) => (t, true),
        Antecedent::Cmp(_) => unreachable!("user antecedent expected"),
    }
}

/// Composition of the mgus of every block. A block mixing `A` and
/// `del(A)` has no unifier: a positive antecedent requires its assertion
/// to be undeleted.
pub fn partmgu(blocks: &[Vec<usize>], user: &[Antecedent]) -> Option<Substitution> {
    let mut s = Substitution::new();
    for block in blocks {
        let (first, neg) = inner(&user[block[0]]);
        for &i in &block[1..] {
            let (t, n) = inner(&user[i]);
            if n != neg || !s.unify(first, t) {
                return None;
            }
        }
    }
    Some(s)
}

fn apply_ant(s: &Substitution, a: &Antecedent) -> Antecedent {
    match a {
        Antecedent::Pos(t) => Antecedent::Pos(s.apply(t)),
        Antecedent::Neg(t) => Antecedent::Neg(s.apply(t)),
        Antecedent::Cmp(c) => Antecedent::Cmp(c.map_terms(|t| s.apply(t))),
    }
}

pub fn enumerate_partitions(
    rule: &str,
    user: &[Antecedent],
    comparisons: &[Comparison],
) -> Result<Vec<HeadPartition>, TranslateError> {
    if user.len() > MAX_USER_ANTECEDENTS {
        return Err(TranslateError::TooManyAntecedents {
            rule: rule.to_string(),
            count: user.len(),
            limit: MAX_USER_ANTECEDENTS,
        });
    }
    let mut out = Vec::new();
    for blocks in set_partitions(user.len()) {
        let Some(unifier) = partmgu(&blocks, user) else { continue };
        let cmps: Vec<Comparison> = comparisons.iter().map(|c| c.map_terms(|t| unifier.apply(t))).collect();
        if satisfiable(&cmps) {
            out.push(HeadPartition { blocks, unifier });
        }
    }
    Ok(out)
}

/// Keep the antecedent at the least index of every block.
pub fn filter_representatives(heads: &[Antecedent], blocks: &[Vec<usize>]) -> Vec<Antecedent> {
    let mins: BTreeSet<usize> = blocks.iter().map(|b| b[0]).collect();
    heads.iter().enumerate().filter(|(i, _)| mins.contains(i)).map(|(_, a)| a.clone()).collect()
}

fn fresh_var(base: &str, taken: &mut Vec<Var>) -> Var {
    let mut name = base.to_string();
    while taken.iter().any(|v| v.name() == name) {
        name.push('_');
    }
    let v = Var::new(&name);
    taken.push(v.clone());
    v
}

/// Positive `a(X)` becomes `a_r(X,p)`; `del(a(X))` becomes `a_r(X,N)` with
/// the condition `N \= p`. `taken` supplies names to avoid.
pub fn add_modes(heads: &[Antecedent], taken: &mut Vec<Var>) -> (Vec<Term>, Vec<Comparison>) {
    let mut out = Vec::new();
    let mut conds = Vec::new();
    let mut k = 0;
    for h in heads {
        let (t, neg) = inner(h);
        let mode = if neg {
            k += 1;
            let n = Term::Var(fresh_var(&format!("N{k}"), taken));
            conds.push(Comparison::new(CmpOp::Ne, n.clone(), Mode::P.term()));
            n
        } else {
            Mode::P.term()
        };
        out.push(with_mode(t, mode));
    }
    (out, conds)
}

fn with_mode(t: &Term, mode: Term) -> Term {
    let (f, args) = match t {
        Term::App(f, args) => (f, args.clone()),
        _ => unreachable!("user atom expected"),
    };
    let mut args = args;
    args.push(mode);
    Term::app(&mode_pred(f), args)
}

/// `p + k`, folding into a trailing integer: `D+2` shifted by 2 is `D+4`.
pub fn shift_priority(p: &Term, k: i64) -> Term {
    match p {
        Term::Int(n) => Term::Int(n + k),
        Term::App(f, args) if args.len() == 2 => match (&**f, &args[1]) {
            ("+", Term::Int(n)) => plus(args[0].clone(), n + k),
            ("-", Term::Int(n)) => plus(args[0].clone(), k - n),
            _ => Term::add(p.clone(), Term::int(k)),
        },
        _ => Term::add(p.clone(), Term::int(k)),
    }
}

fn plus(t: Term, n: i64) -> Term {
    match n {
        0 => t,
        n if n < 0 => Term::app("-", vec![t, Term::int(-n)]),
        n => Term::add(t, Term::int(n)),
    }
}

fn del(t: Term) -> Term {
    Term::app("del", vec![t])
}

/// The six rules keeping exactly one representation per assertion.
pub fn set_deletion_rules(pred: &str, arity: usize) -> Vec<ChrRule> {
    let xs: Vec<Term> = (1..=arity).map(|i| Term::var(&format!("X{i}"))).collect();
    let a = Term::app(pred, xs.clone());
    let rep = |m: Term| {
        let mut args = xs.clone();
        args.push(m);
        Term::app(&mode_pred(pred), args)
    };
    let m = Term::var("M");
    let rule = |prio: i64, kept: Vec<Term>, removed: Vec<Term>, guard: Vec<Comparison>, body: Vec<Term>| ChrRule {
        priority: Term::int(prio),
        name: None,
        kept,
        removed,
        guard,
        body: body.into_iter().map(BodyItem::Atom).collect(),
    };
    let mut out = Vec::new();
    for (incoming, other, mode) in [(a.clone(), Mode::N, Mode::P), (del(a.clone()), Mode::P, Mode::N)] {
        out.push(rule(
            1,
            vec![rep(m.clone())],
            vec![incoming.clone()],
            vec![Comparison::new(CmpOp::Ne, m.clone(), other.term())],
            vec![],
        ));
        out.push(rule(1, vec![], vec![rep(other.term()), incoming.clone()], vec![], vec![rep(Mode::B.term())]));
        out.push(rule(2, vec![], vec![incoming], vec![], vec![rep(mode.term())]));
    }
    out
}

fn partition_name(rule: &str, p: &HeadPartition) -> String {
    format!("{rule}__{}", p.label().replace('/', "_"))
}

/// LA goal atoms as CHR^rp goal constraints.
pub fn translate_la_goal(goal: &[LaAtom]) -> Vec<BodyItem> {
    goal.iter().map(|a| BodyItem::Atom(if a.negated { del(a.atom.clone()) } else { a.atom.clone() })).collect()
}

/// The normalized source program the translation is relative to.
pub fn normalize_program(p: &LaProgram) -> LaProgram {
    LaProgram { rules: p.rules.iter().flat_map(normalize_la_priority).collect() }
}

pub fn translate_la_program(p: &LaProgram) -> Result<TranslationArtifacts<ChrProgram>, TranslateError> {
    let norm = normalize_program(p);
    let mut rules = Vec::new();
    let mut names = NameMap::default();
    let preds = norm.predicates();
    for (pred, arity) in &preds {
        let rep = mode_pred(pred);
        if &**pred == "del" || preds.iter().any(|(q, n)| **q == *rep && *n == arity + 1) {
            return Err(TranslateError::Reserved(format!("{pred}/{arity}")));
        }
    }
    for (pred, arity) in preds {
        for r in set_deletion_rules(&pred, arity) {
            names.push(format!("#{}", rules.len() + 1), format!("{pred}/{arity}"), "set/deletion".into());
            rules.push(r);
        }
    }
    for r in &norm.rules {
        let (user, cmps) = split(&r.antecedents);
        if user.is_empty() {
            return Err(TranslateError::NoUserAntecedents(r.name.to_string()));
        }
        for part in enumerate_partitions(&r.name, &user, &cmps)? {
            let th = &part.unifier;
            let heads: Vec<Antecedent> = user.iter().map(|a| apply_ant(th, a)).collect();
            let reps = filter_representatives(&heads, &part.blocks);
            let mut taken: Vec<Var> = r.antecedents.iter().flat_map(|a| a.vars()).collect();
            let (kept, mut guard) = add_modes(&reps, &mut taken);
            guard.extend(cmps.iter().map(|c| c.map_terms(|t| th.apply(t))));
            let body = r
                .conclusion
                .iter()
                .map(|c| {
                    let t = th.apply(&c.atom);
                    BodyItem::Atom(if c.negated { del(t) } else { t })
                })
                .collect();
            let name = partition_name(&r.name, &part);
            names.push(name.clone(), r.name.to_string(), part.label());
            rules.push(ChrRule {
                priority: shift_priority(&th.apply(&r.priority), 2),
                name: Some(Arc::from(name.as_str())),
                kept,
                removed: vec![],
                guard,
                body,
            });
        }
    }
    Ok(TranslationArtifacts { program: ChrProgram { rules }, name_map: names })
}
