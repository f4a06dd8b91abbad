use std::collections::HashMap;
use std::fmt::Write as _;

use chr_lang::{to_intermediate, BodyItem, ChrProgram, ChrRule, RuleKind, Sign};
use chr_terms::{eval_arith, BuiltinStore, Comparison, Sym, Term, Var};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("rule {rule}: priority {priority} uses variables of more than one head")]
    PriorityVars { rule: String, priority: String },
    #[error("rule {rule}: static priority {priority} is not an integer")]
    Priority { rule: String, priority: String },
}

/// One head of a rule in join order.
#[derive(Clone, Debug)]
pub struct CompiledItem {
    pub head: Term,
    pub sign: Sign,
    /// Position of the head in textual order (kept, then removed).
    pub source_index: usize,
    /// Guard conjuncts checked once this head is matched.
    pub guard: Vec<Comparison>,
    /// Z̄: variables shared with earlier heads, in first-occurrence order.
    pub key: Vec<Var>,
    /// Ȳ: variables first bound by this head.
    pub new_vars: Vec<Var>,
}

#[derive(Clone, Debug)]
pub struct CompiledRule {
    pub name: String,
    pub priority: Term,
    pub dynamic: bool,
    pub items: Vec<CompiledItem>,
    pub body: Vec<BodyItem>,
    pub kind: RuleKind,
    pub join_order: Vec<usize>,
}

impl CompiledRule {
    pub fn n_heads(&self) -> usize {
        self.items.len()
    }
}

#[derive(Clone, Debug)]
pub struct CompiledProgram {
    pub rules: Vec<CompiledRule>,
    /// (rule, item) pairs per predicate, in rule then join order.
    pub occurrences: HashMap<(Sym, usize), Vec<(usize, usize)>>,
    pub static_priorities: Vec<i64>,
}

fn rename(t: &Term) -> Term {
    t.map_vars(&mut |v| Term::var(&format!("#{}", v.name())))
}

fn rename_rule(r: &ChrRule) -> ChrRule {
    ChrRule {
        priority: rename(&r.priority),
        name: r.name.clone(),
        kept: r.kept.iter().map(rename).collect(),
        removed: r.removed.iter().map(rename).collect(),
        guard: r.guard.iter().map(|c| c.map_terms(rename)).collect(),
        body: r
            .body
            .iter()
            .map(|b| match b {
                BodyItem::Atom(t) => BodyItem::Atom(rename(t)),
                BodyItem::Tell(a, c) => BodyItem::Tell(rename(a), rename(c)),
            })
            .collect(),
    }
}

/// Textual order, except that a dynamic priority needs its variables bound
/// by the first head: the first head that covers them is moved to the front.
fn join_order(r: &ChrRule, name: &str) -> Result<Vec<usize>, CompileError> {
    let n = r.head_count();
    let pv = r.priority.vars();
    let heads: Vec<&Term> = r.heads().collect();
    let first = (0..n).find(|&i| {
        let hv = heads[i].vars();
        pv.iter().all(|v| hv.contains(v))
    });
    let Some(first) = first else {
        return Err(CompileError::PriorityVars { rule: name.to_string(), priority: r.priority.to_string() });
    };
    let mut order = vec![first];
    order.extend((0..n).filter(|&i| i != first));
    Ok(order)
}

pub fn compile(program: &ChrProgram) -> Result<CompiledProgram, CompileError> {
    let mut rules = Vec::new();
    let mut occurrences: HashMap<(Sym, usize), Vec<(usize, usize)>> = HashMap::new();
    let mut static_priorities = Vec::new();
    for (ri, src) in program.rules.iter().enumerate() {
        let name = src.display_name(ri);
        let r = rename_rule(src);
        let dynamic = !r.priority.is_ground();
        if !dynamic {
            let p = eval_arith(&r.priority, &BuiltinStore::new())
                .map_err(|_| CompileError::Priority { rule: name.clone(), priority: src.priority.to_string() })?;
            static_priorities.push(p);
        }
        let order = join_order(&r, &name)?;
        let inter = to_intermediate(&r, Some(&order)).expect("join order is a permutation");
        let mut seen: Vec<Var> = Vec::new();
        let mut items = Vec::new();
        for (j, it) in inter.items.into_iter().enumerate() {
            let mut key = Vec::new();
            let mut new_vars = Vec::new();
            for v in it.head.vars() {
                if seen.contains(&v) {
                    if !key.contains(&v) {
                        key.push(v);
                    }
                } else if !new_vars.contains(&v) {
                    new_vars.push(v);
                }
            }
            seen.extend(new_vars.iter().cloned());
            if let Some((f, a)) = it.head.functor() {
                occurrences.entry((Sym::from(f), a)).or_default().push((ri, j));
            }
            items.push(CompiledItem {
                head: it.head,
                sign: it.sign,
                source_index: it.source_index,
                guard: it.post_guard,
                key,
                new_vars,
            });
        }
        rules.push(CompiledRule {
            name,
            priority: r.priority.clone(),
            dynamic,
            items,
            body: r.body.clone(),
            kind: src.kind(),
            join_order: order,
        });
    }
    static_priorities.sort();
    static_priorities.dedup();
    Ok(CompiledProgram { rules, occurrences, static_priorities })
}

fn show(t: &Term) -> String {
    t.map_vars(&mut |v| Term::var(v.name().trim_start_matches('#'))).to_string()
}

fn show_list(ts: &[Term]) -> String {
    ts.iter().map(show).collect::<Vec<_>>().join(",")
}

fn guard_text(g: &[Comparison]) -> String {
    if g.is_empty() {
        return "true".into();
    }
    g.iter().map(|c| show(&c.lhs) + " " + c.op.symbol() + " " + &show(&c.rhs)).collect::<Vec<_>>().join(", ")
}

impl CompiledProgram {
    /// The compiled program written out as plain CHR rules over occurrence,
    /// prefix-firing, prefix-extension and rule-firing constraints.
    pub fn emit_chr(&self) -> String {
        let mut out = String::new();
        let mut preds: Vec<&(Sym, usize)> = self.occurrences.keys().collect();
        preds.sort();
        for (f, a) in preds {
            let args: Vec<String> = (1..=*a).map(|i| format!("X{i}")).collect();
            let occs: Vec<String> = self.occurrences[&(f.clone(), *a)]
                .iter()
                .map(|(r, j)| format!("{}_occ_{}({},Id)", f, self.rules[*r].items[*j].source_index + 1, args.join(",")))
                .collect();
            let head = if args.is_empty() { f.to_string() } else { format!("{f}({})", args.join(",")) };
            let _ = writeln!(out, "{head} <=> {}.", occs.join(", "));
        }
        for r in &self.rules {
            let _ = writeln!(out, "\n% {} (priority {}, join order {:?})", r.name, show(&r.priority), r.join_order);
            let n = r.items.len();
            let mut bound: Vec<Term> = Vec::new();
            let mut ids: Vec<String> = Vec::new();
            for (j, it) in r.items.iter().enumerate() {
                let (f, _) = it.head.functor().unwrap_or(("?", 0));
                let occ = format!("{f}_occ_{}({},Id{})", it.source_index + 1, show_list(it.head.args()), j + 1);
                let sign = if it.sign == Sign::Kept { "+" } else { "-" };
                ids.push(format!("Id{}", j + 1));
                for v in &it.new_vars {
                    bound.push(Term::Var(v.clone()));
                }
                let key: Vec<Term> = it.key.iter().map(|v| Term::Var(v.clone())).collect();
                let what = if n == 1 {
                    format!("{}_rf({},{},SId), schedule_rf({},SId)", r.name, show_list(&bound), ids.join(","), show(&r.priority))
                } else if j == 0 {
                    let next = &r.items[1].key;
                    let k: Vec<Term> = next.iter().map(|v| Term::Var(v.clone())).collect();
                    format!(
                        "{}_pf_1({},{},SId), schedule_pf({}_1({}),{},SId)",
                        r.name,
                        show_list(&bound),
                        ids.join(","),
                        r.name,
                        show_list(&k),
                        show(&r.priority)
                    )
                } else {
                    format!(
                        "{}_pe_{}({},Id{},SId), schedule_pe({}_{}({}),SId)",
                        r.name,
                        j + 1,
                        show_list(it.head.args()),
                        j + 1,
                        r.name,
                        j,
                        show_list(&key)
                    )
                };
                let _ = writeln!(out, "{occ} <=> {sign} {what}. % guard after head {}: {}", j + 1, guard_text(&it.guard));
            }
            if n > 1 {
                let removed: Vec<String> = r
                    .items
                    .iter()
                    .enumerate()
                    .filter(|(_, it)| it.sign == Sign::Removed)
                    .map(|(j, _)| format!("Id{} = dead", j + 1))
                    .collect();
                let _ = writeln!(
                    out,
                    "match({}_pf_{}, {}_pe_{}) <=> Id{} \\== Id1..Id{} | extend. % rule firing kills: {}",
                    r.name,
                    n - 1,
                    r.name,
                    n,
                    n,
                    n - 1,
                    if removed.is_empty() { "none".into() } else { removed.join(", ") }
                );
            }
            let body: Vec<String> = r
                .body
                .iter()
                .map(|b| match b {
                    BodyItem::Atom(t) => show(t),
                    BodyItem::Tell(a, c) => format!("{} = {}", show(a), show(c)),
                })
                .collect();
            let _ = writeln!(
                out,
                "fire({}_rf) <=> {}.",
                r.name,
                if body.is_empty() { "true".into() } else { body.join(", ") }
            );
        }
        out
    }
}
