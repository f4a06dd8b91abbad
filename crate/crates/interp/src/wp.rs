use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use chr_lang::{BodyItem, ChrProgram, RuleKind};
use chr_terms::{
    eval_arith, eval_comparison, match_into, simplify_arith, BuiltinStore, Comparison, Substitution, Term, Truth, Var,
};

use crate::{InterpError, TieBreak};

/// A rule with its variables renamed apart from any store variable.
#[derive(Clone, Debug)]
pub struct WpRule {
    pub name: String,
    pub priority: Term,
    /// Kept heads followed by removed heads.
    pub heads: Vec<Term>,
    pub n_kept: usize,
    pub guard: Vec<Comparison>,
    pub body: Vec<BodyItem>,
    pub kind: RuleKind,
}

#[derive(Clone, Debug)]
pub struct WpProgram {
    pub rules: Vec<WpRule>,
}

fn rename(t: &Term) -> Term {
    t.map_vars(&mut |v| Term::var(&format!("#{}", v.name())))
}

impl WpProgram {
    pub fn new(p: &ChrProgram) -> WpProgram {
        let rules = p
            .rules
            .iter()
            .enumerate()
            .map(|(i, r)| WpRule {
                name: r.display_name(i),
                priority: rename(&r.priority),
                heads: r.heads().map(rename).collect(),
                n_kept: r.kept.len(),
                guard: r.guard.iter().map(|c| c.map_terms(rename)).collect(),
                body: r
                    .body
                    .iter()
                    .map(|b| match b {
                        BodyItem::Atom(t) => BodyItem::Atom(rename(t)),
                        BodyItem::Tell(a, c) => BodyItem::Tell(rename(a), rename(c)),
                    })
                    .collect(),
                kind: r.kind(),
            })
            .collect();
        WpProgram { rules }
    }
}

/// ⟨G, S, B, T⟩_n
#[derive(Clone, Debug)]
pub struct ExecState {
    pub goal: VecDeque<BodyItem>,
    pub store: BTreeMap<u64, Term>,
    pub builtins: BuiltinStore,
    pub history: BTreeSet<(usize, Vec<u64>)>,
    pub next_id: u64,
    pub failed: bool,
    fresh: u64,
}

impl ExecState {
    pub fn initial(goal: &[BodyItem]) -> ExecState {
        ExecState {
            goal: goal.iter().cloned().collect(),
            store: BTreeMap::new(),
            builtins: BuiltinStore::new(),
            history: BTreeSet::new(),
            next_id: 1,
            failed: false,
            fresh: 0,
        }
    }

    /// Build a state with an empty goal directly from its parts.
    pub fn from_parts(store: BTreeMap<u64, Term>, history: BTreeSet<(usize, Vec<u64>)>, next_id: u64) -> ExecState {
        ExecState { store, history, next_id, ..ExecState::initial(&[]) }
    }

    /// Stored constraints with bindings and ground arithmetic applied.
    pub fn resolved_store(&self) -> Result<Vec<(u64, Term)>, InterpError> {
        self.store.iter().map(|(id, t)| Ok((*id, simplify_arith(t, &self.builtins)?))).collect()
    }
}

/// Variables of the initial goal, in first-occurrence order.
pub fn goal_vars(goal: &[BodyItem]) -> Vec<Var> {
    let mut out = Vec::new();
    for g in goal {
        for v in g.vars() {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WpInstance {
    pub rule: usize,
    pub theta: Substitution,
    /// Identifiers in textual head order (kept, then removed).
    pub ids: Vec<u64>,
    pub priority: i64,
}

#[derive(Clone, Debug)]
pub enum Transition {
    Solve(Term, Term),
    Introduce(u64, Term),
    Apply(WpInstance),
}

impl Transition {
    pub fn render(&self, program: &WpProgram) -> String {
        match self {
            Transition::Solve(a, b) => format!("SOLVE {a} = {b}"),
            Transition::Introduce(id, t) => format!("INTRODUCE {t}#{id}"),
            Transition::Apply(i) => {
                let ids: Vec<String> = i.ids.iter().map(|x| x.to_string()).collect();
                format!("APPLY {}@{} {}", program.rules[i.rule].name, i.priority, ids.join(","))
            }
        }
    }
}

impl fmt::Display for ExecState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (id, t) in &self.store {
            writeln!(f, "{}#{id}", self.builtins.resolve(t))?;
        }
        Ok(())
    }
}

/// All rule instances valid under ω_t, i.e. ignoring the priority clause.
pub fn wp_applicable(state: &ExecState, program: &WpProgram) -> Result<Vec<WpInstance>, InterpError> {
    let store = state.resolved_store()?;
    let mut out = Vec::new();
    for ri in 0..program.rules.len() {
        heads(state, program, &store, ri, Substitution::new(), Vec::new(), &mut out)?;
    }
    Ok(out)
}

fn heads(
    state: &ExecState,
    program: &WpProgram,
    store: &[(u64, Term)],
    ri: usize,
    theta: Substitution,
    ids: Vec<u64>,
    out: &mut Vec<WpInstance>,
) -> Result<(), InterpError> {
    let rule = &program.rules[ri];
    let k = ids.len();
    if k == rule.heads.len() {
        if let Some(i) = finish(state, rule, ri, theta, ids)? {
            out.push(i);
        }
        return Ok(());
    }
    for (id, t) in store {
        if ids.contains(id) {
            continue;
        }
        let mut th = theta.clone();
        if match_into(&rule.heads[k], t, &mut th) {
            let mut next = ids.clone();
            next.push(*id);
            heads(state, program, store, ri, th, next, out)?;
        }
    }
    Ok(())
}

fn finish(
    state: &ExecState,
    rule: &WpRule,
    ri: usize,
    theta: Substitution,
    ids: Vec<u64>,
) -> Result<Option<WpInstance>, InterpError> {
    if state.history.contains(&(ri, ids.clone())) {
        return Ok(None);
    }
    for g in &rule.guard {
        if eval_comparison(&g.map_terms(|t| theta.apply(t)), &state.builtins) != Truth::Entailed {
            return Ok(None);
        }
    }
    let p = theta.apply(&rule.priority);
    let priority = eval_arith(&p, &state.builtins).map_err(|_| InterpError::Priority {
        rule: rule.name.clone(),
        priority: state.builtins.resolve(&p).to_string(),
    })?;
    Ok(Some(WpInstance { rule: ri, theta, ids, priority }))
}

/// Re-check an instance against the ω_t side conditions from scratch.
pub fn instance_holds(state: &ExecState, program: &WpProgram, inst: &WpInstance) -> bool {
    let rule = &program.rules[inst.rule];
    if inst.ids.len() != rule.heads.len() {
        return false;
    }
    let distinct: BTreeSet<_> = inst.ids.iter().collect();
    if distinct.len() != inst.ids.len() {
        return false;
    }
    let mut theta = Substitution::new();
    for (h, id) in rule.heads.iter().zip(&inst.ids) {
        let Some(t) = state.store.get(id) else { return false };
        let Ok(t) = simplify_arith(t, &state.builtins) else { return false };
        if !match_into(h, &t, &mut theta) {
            return false;
        }
    }
    matches!(finish(state, rule, inst.rule, theta, inst.ids.clone()), Ok(Some(i)) if i.priority == inst.priority)
}

/// Highest-priority instance; ties are presented to `tie` ordered by
/// (rule index, identifier sequence).
pub fn wp_select(mut instances: Vec<WpInstance>, tie: &mut TieBreak) -> Option<WpInstance> {
    let best = instances.iter().map(|i| i.priority).min()?;
    instances.retain(|i| i.priority == best);
    instances.sort_by(|a, b| (a.rule, &a.ids).cmp(&(b.rule, &b.ids)));
    let k = tie.pick(instances.len());
    Some(instances.swap_remove(k))
}

/// Solve or Introduce the first goal item when there is one.
pub(crate) fn goal_step(state: &mut ExecState) -> Result<Option<Transition>, InterpError> {
    if state.failed {
        return Ok(None);
    }
    let Some(item) = state.goal.pop_front() else { return Ok(None) };
    Ok(Some(match item {
        BodyItem::Tell(a, b) => {
            if state.builtins.unify(&a, &b).is_err() {
                state.failed = true;
            }
            Transition::Solve(a, b)
        }
        BodyItem::Atom(t) => {
            let t = simplify_arith(&t, &state.builtins)?;
            let id = state.next_id;
            state.next_id += 1;
            state.store.insert(id, t.clone());
            Transition::Introduce(id, t)
        }
    }))
}

/// Fire `inst`: remove the removed heads, record the history tuple and put
/// the instantiated body in front of the goal.
pub fn apply_instance(state: &mut ExecState, program: &WpProgram, inst: &WpInstance) {
    let rule = &program.rules[inst.rule];
    for id in &inst.ids[rule.n_kept..] {
        state.store.remove(id);
    }
    state.history.insert((inst.rule, inst.ids.clone()));
    let mut theta = inst.theta.clone();
    let mut fresh = state.fresh;
    let mut local = |t: &Term, theta: &mut Substitution| {
        for v in t.vars() {
            if theta.get(&v).is_none() {
                fresh += 1;
                theta.bind(v, Term::var(&format!("_#{fresh}")));
            }
        }
    };
    for b in &rule.body {
        match b {
            BodyItem::Atom(t) => local(t, &mut theta),
            BodyItem::Tell(a, c) => {
                local(a, &mut theta);
                local(c, &mut theta);
            }
        }
    }
    state.fresh = fresh;
    let body: Vec<BodyItem> = rule
        .body
        .iter()
        .map(|b| match b {
            BodyItem::Atom(t) => BodyItem::Atom(theta.apply(t)),
            BodyItem::Tell(a, c) => BodyItem::Tell(theta.apply(a), theta.apply(c)),
        })
        .collect();
    for b in body.into_iter().rev() {
        state.goal.push_front(b);
    }
}

/// One ω_p transition, or `None` in a final (or failed) state.
pub fn wp_step(state: &mut ExecState, program: &WpProgram, tie: &mut TieBreak) -> Result<Option<Transition>, InterpError> {
    if state.failed {
        return Ok(None);
    }
    if !state.goal.is_empty() {
        return goal_step(state);
    }
    let Some(inst) = wp_select(wp_applicable(state, program)?, tie) else {
        return Ok(None);
    };
    apply_instance(state, program, &inst);
    Ok(Some(Transition::Apply(inst)))
}

#[derive(Clone, Debug)]
pub struct WpRun {
    pub state: ExecState,
    pub steps: usize,
    pub fired: Vec<(usize, Vec<u64>)>,
    pub trace: Vec<String>,
}

pub fn wp_run(
    goal: &[BodyItem],
    program: &WpProgram,
    budget: usize,
    tie: &mut TieBreak,
    trace: bool,
) -> Result<WpRun, InterpError> {
    let mut state = ExecState::initial(goal);
    let mut run = WpRun { state: state.clone(), steps: 0, fired: Vec::new(), trace: Vec::new() };
    loop {
        if run.steps == budget {
            return Err(InterpError::BudgetExhausted { budget, partial: state.to_string() });
        }
        match wp_step(&mut state, program, tie)? {
            None => break,
            Some(t) => {
                if trace {
                    run.trace.push(t.render(program));
                }
                if let Transition::Apply(i) = &t {
                    run.fired.push((i.rule, i.ids.clone()));
                }
                run.steps += 1;
            }
        }
    }
    run.state = state;
    Ok(run)
}
