use std::sync::Arc;

use chr_lang::{Antecedent, BodyItem, ChrProgram, ChrRule, LaAtom, LaProgram, LaRule, RuleKind};
use chr_terms::{CmpOp, Comparison, Substitution, Term, Var};

use crate::sat::satisfiable;
use crate::{NameMap, TranslateError, TranslationArtifacts};

pub const NEXT_ID: &str = "next_id";
pub const TOKEN: &str = "token";

/// Name used for rule `index` in tokens and generated names.
pub fn rule_label(rule: &ChrRule, index: usize) -> String {
    match &rule.name {
        Some(n) => n.to_string(),
        None => format!("rule{}", index + 1),
    }
}

/// Rejects rules outside the positive range-restricted ground segment.
pub fn check_segment(p: &ChrProgram) -> Result<(), TranslateError> {
    for (i, r) in p.rules.iter().enumerate() {
        let seg = |reason: String| TranslateError::Segment { rule: rule_label(r, i), reason };
        let hv = r.head_vars();
        for b in &r.body {
            match b {
                BodyItem::Tell(a, c) => return Err(seg(format!("body contains the tell constraint {a} = {c}"))),
                BodyItem::Atom(t) => {
                    if let Some(v) = t.vars().into_iter().find(|v| !hv.contains(v)) {
                        return Err(seg(format!("body variable {v} does not occur in a head")));
                    }
                    if matches!(t.functor(), Some((NEXT_ID, 1)) | Some((TOKEN, 2))) {
                        return Err(seg(format!("{t} uses a reserved predicate")));
                    }
                }
            }
        }
        for h in r.heads() {
            if matches!(h.functor(), Some((NEXT_ID, 1)) | Some((TOKEN, 2))) {
                return Err(seg(format!("{h} uses a reserved predicate")));
            }
        }
    }
    Ok(())
}

/// Goal constraints with identifiers `1..=k`, then `next_id(k+1)`.
pub fn initial_database(goal: &[BodyItem]) -> Result<Vec<LaAtom>, TranslateError> {
    let mut out = Vec::new();
    for (i, g) in goal.iter().enumerate() {
        match g {
            BodyItem::Atom(t) if t.is_ground() => out.push(LaAtom::pos(with_id(t, Term::int(i as i64 + 1)))),
            other => return Err(TranslateError::NonGroundGoal(format!("{other}"))),
        }
    }
    out.push(LaAtom::pos(Term::app(NEXT_ID, vec![Term::int(goal.len() as i64 + 1)])));
    Ok(out)
}

pub(crate) fn with_id(t: &Term, id: Term) -> Term {
    match t {
        Term::App(f, args) => {
            let mut args = args.clone();
            args.push(id);
            Term::App(f.clone(), args)
        }
        other => other.clone(),
    }
}

fn fresh(base: &str, taken: &mut Vec<Var>) -> Term {
    let mut name = base.to_string();
    while taken.iter().any(|v| v.name() == name) {
        name.push('_');
    }
    let v = Var::new(&name);
    taken.push(v.clone());
    Term::Var(v)
}

fn offset(base: &Term, k: usize) -> Term {
    if k == 0 {
        base.clone()
    } else {
        Term::add(base.clone(), Term::int(k as i64))
    }
}

/// Identifier disequalities between heads that can denote the same
/// constraint given the guard.
fn alldiff(heads: &[Term], guard: &[Comparison], ids: &[Term]) -> Vec<Comparison> {
    let mut out = Vec::new();
    for i in 0..heads.len() {
        for j in i + 1..heads.len() {
            let mut s = Substitution::new();
            if !s.unify(&heads[i], &heads[j]) {
                continue;
            }
            let g: Vec<Comparison> = guard.iter().map(|c| c.map_terms(|t| s.apply(t))).collect();
            if satisfiable(&g) {
                out.push(Comparison::new(CmpOp::Ne, ids[i].clone(), ids[j].clone()));
            }
        }
    }
    out
}

pub fn translate_chrrp_program(p: &ChrProgram) -> Result<TranslationArtifacts<LaProgram>, TranslateError> {
    check_segment(p)?;
    let mut rules = Vec::new();
    let mut names = NameMap::default();
    for (ri, r) in p.rules.iter().enumerate() {
        let label = rule_label(r, ri);
        let heads: Vec<Term> = r.heads().cloned().collect();
        let mut taken = r.head_vars();
        let ids: Vec<Term> = if heads.len() == 1 {
            vec![fresh("Id", &mut taken)]
        } else {
            (1..=heads.len()).map(|i| fresh(&format!("Id{i}"), &mut taken)).collect()
        };
        let nid = fresh("NId", &mut taken);
        let mut ants: Vec<Antecedent> =
            heads.iter().zip(&ids).map(|(h, id)| Antecedent::Pos(with_id(h, id.clone()))).collect();
        ants.extend(alldiff(&heads, &r.guard, &ids).into_iter().map(Antecedent::Cmp));
        ants.extend(r.guard.iter().cloned().map(Antecedent::Cmp));

        let body: Vec<Term> = r
            .body
            .iter()
            .map(|b| match b {
                BodyItem::Atom(t) => t.clone(),
                BodyItem::Tell(..) => unreachable!("rejected by check_segment"),
            })
            .collect();
        let o = body.len();
        let mut produce = Vec::new();
        if o > 0 {
            produce.push(LaAtom::neg(Term::app(NEXT_ID, vec![nid.clone()])));
        }
        produce.extend(body.iter().enumerate().map(|(i, b)| LaAtom::pos(with_id(b, offset(&nid, i)))));
        if o > 0 {
            produce.push(LaAtom::pos(Term::app(NEXT_ID, vec![offset(&nid, o)])));
        }
        let next_ant = Antecedent::Pos(Term::app(NEXT_ID, vec![nid.clone()]));

        if r.kind() == RuleKind::Propagation {
            let token = Term::app(TOKEN, vec![Term::atom(&label), Term::list(ids.clone())]);
            let n1 = format!("{label}_p1");
            let n2 = format!("{label}_p2");
            rules.push(LaRule {
                name: Arc::from(n1.as_str()),
                priority: r.priority.clone(),
                antecedents: ants.clone(),
                conclusion: vec![LaAtom::pos(token.clone())],
            });
            let mut a2 = ants;
            a2.push(Antecedent::Pos(token.clone()));
            if o > 0 {
                a2.push(next_ant);
            }
            let mut c2 = vec![LaAtom::neg(token)];
            c2.extend(produce);
            rules.push(LaRule { name: Arc::from(n2.as_str()), priority: r.priority.clone(), antecedents: a2, conclusion: c2 });
            names.push(n1, label.clone(), "token generation".into());
            names.push(n2, label, "token consumption".into());
        } else {
            if o > 0 {
                ants.push(next_ant);
            }
            let mut concl: Vec<LaAtom> = heads[r.kept.len()..]
                .iter()
                .zip(&ids[r.kept.len()..])
                .map(|(h, id)| LaAtom::neg(with_id(h, id.clone())))
                .collect();
            concl.extend(produce);
            let n = format!("{label}_p");
            rules.push(LaRule { name: Arc::from(n.as_str()), priority: r.priority.clone(), antecedents: ants, conclusion: concl });
            names.push(n, label, String::new());
        }
    }
    Ok(TranslationArtifacts { program: LaProgram { rules }, name_map: names })
}
