use std::sync::Arc;

use chr_terms::{CmpOp, Comparison, Term};

use crate::ast::*;

/// Split a rule whose priority needs variables beyond the first antecedent
/// into `r__1`, which records the priority as `priority_r(P)`, and `r__2`,
/// which leads with that atom. `r__2` re-checks `P = p` once the covering
/// prefix is matched, since a stored priority value cannot match an
/// unevaluated expression.
pub fn normalize_la_priority(rule: &LaRule) -> Vec<LaRule> {
    let pvars = rule.priority.vars();
    let mut bound = Vec::new();
    let mut m = None;
    for (i, a) in rule.antecedents.iter().enumerate() {
        if let Antecedent::Pos(t) | Antecedent::Neg(t) = a {
            t.collect_vars(&mut bound);
        }
        if pvars.iter().all(|v| bound.contains(v)) {
            m = Some(i + 1);
            break;
        }
    }
    let m = match m {
        Some(1) | None => return vec![rule.clone()],
        Some(m) => m,
    };
    let pred = format!("priority_{}", rule.name);
    let mut taken = rule.priority.vars();
    for a in &rule.antecedents {
        taken.extend(a.vars());
    }
    let mut pv = String::from("P");
    while taken.iter().any(|v| v.name() == pv) {
        pv.push('_');
    }
    let p = Term::var(&pv);
    let r1 = LaRule {
        name: Arc::from(format!("{}__1", rule.name).as_str()),
        priority: Term::int(1),
        antecedents: rule.antecedents[..m].to_vec(),
        conclusion: vec![LaAtom::pos(Term::app(&pred, vec![rule.priority.clone()]))],
    };
    let mut ants = vec![Antecedent::Pos(Term::app(&pred, vec![p.clone()]))];
    ants.extend(rule.antecedents[..m].iter().cloned());
    ants.push(Antecedent::Cmp(Comparison::new(CmpOp::Eq, p.clone(), rule.priority.clone())));
    ants.extend(rule.antecedents[m..].iter().cloned());
    let r2 = LaRule {
        name: Arc::from(format!("{}__2", rule.name).as_str()),
        priority: p,
        antecedents: ants,
        conclusion: rule.conclusion.clone(),
    };
    vec![r1, r2]
}
