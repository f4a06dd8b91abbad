use std::fmt::Write;

use crate::ast::*;

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl std::fmt::Display for LaAtom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.negated {
            write!(f, "del({})", self.atom)
        } else {
            write!(f, "{}", self.atom)
        }
    }
}

impl std::fmt::Display for Antecedent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Antecedent::Pos(t) => write!(f, "{t}"),
            Antecedent::Neg(t) => write!(f, "del({t})"),
            Antecedent::Cmp(c) => write!(f, "{c}"),
        }
    }
}

impl std::fmt::Display for BodyItem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BodyItem::Atom(t) => write!(f, "{t}"),
            BodyItem::Tell(a, b) => write!(f, "{a} = {b}"),
        }
    }
}

pub fn print_la_rule(r: &LaRule) -> String {
    format!("{} @ {} : {} => {}.", r.name, r.priority, join(&r.antecedents), join(&r.conclusion))
}

pub fn print_chr_rule(r: &ChrRule) -> String {
    let mut s = format!("{} :: ", r.priority);
    if let Some(n) = &r.name {
        let _ = write!(s, "{n} @ ");
    }
    match r.kind() {
        RuleKind::Propagation => {
            let _ = write!(s, "{} ==> ", join(&r.kept));
        }
        RuleKind::Simplification => {
            let _ = write!(s, "{} <=> ", join(&r.removed));
        }
        RuleKind::Simpagation => {
            let _ = write!(s, "{} \\ {} <=> ", join(&r.kept), join(&r.removed));
        }
    }
    if !r.guard.is_empty() {
        let _ = write!(s, "{} | ", join(&r.guard));
    }
    if r.body.is_empty() {
        s.push_str("true.");
    } else {
        let _ = write!(s, "{}.", join(&r.body));
    }
    s
}

/// One rule per line, followed by a `goal` line when the goal is non-empty.
pub fn pretty_print_la(program: &LaProgram, goal: &[LaAtom]) -> String {
    let mut out = String::new();
    for r in &program.rules {
        out.push_str(&print_la_rule(r));
        out.push('\n');
    }
    if !goal.is_empty() {
        let _ = writeln!(out, "goal {}.", join(goal));
    }
    out
}

pub fn pretty_print_chrrp(program: &ChrProgram, goal: &[BodyItem]) -> String {
    let mut out = String::new();
    for r in &program.rules {
        out.push_str(&print_chr_rule(r));
        out.push('\n');
    }
    if !goal.is_empty() {
        let _ = writeln!(out, "goal {}.", join(goal));
    }
    out
}
