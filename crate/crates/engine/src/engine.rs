use std::collections::{BTreeSet, HashMap, HashSet};

use chr_lang::{BodyItem, Sign};
use chr_sched::{Scheduler, Task};
use chr_terms::{eval_arith, eval_comparison, match_into, simplify_arith, ArithError, BuiltinStore, Substitution, Term, Truth, Var};
use thiserror::Error;

use crate::compile::CompiledProgram;
use crate::metrics::Metrics;

/// Schedule key: rule, head position in join order, values of Z̄.
pub type Key = (usize, usize, Vec<Term>);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("rule {rule}: priority {priority} does not evaluate to an integer")]
    Priority { rule: String, priority: String },
    #[error("arithmetic error: {0}")]
    Arith(#[from] ArithError),
    #[error("constraint #{0} deleted twice")]
    DoubleDelete(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Final,
    Failed,
    BudgetExhausted,
}

#[derive(Clone, Debug)]
pub struct FinalReport {
    /// Live constraints with bindings and ground arithmetic applied.
    pub store: Vec<(u64, Term)>,
    pub builtins: BuiltinStore,
    pub metrics: Metrics,
    pub status: Status,
    pub trace: Vec<String>,
    /// (rule, constituent ids in textual head order) per firing.
    pub fired: Vec<(usize, Vec<u64>)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Obj {
    Pf(u64),
    Pe(u64),
    Rf(u64),
    Susp(u64),
}

struct Constraint {
    term: Term,
    alive: bool,
    refs: Vec<Obj>,
}

/// The first `len` heads of a rule matched, in join order.
#[derive(Clone, Debug)]
struct Partial {
    rule: usize,
    len: usize,
    theta: Substitution,
    ids: Vec<u64>,
    prio: i64,
}

#[derive(Clone, Debug)]
struct PeObj {
    rule: usize,
    pos: usize,
    theta: Substitution,
    id: u64,
}

#[derive(Clone, Debug)]
enum Susp {
    /// Head match neither entailed nor disentailed.
    Occ { cid: u64, rule: usize, pos: usize },
    /// Guard after the last matched head undecided.
    Guard(Partial),
}

struct SuspRec {
    susp: Susp,
    vars: Vec<Var>,
}

enum HeadMatch {
    Entailed(Substitution),
    Disentailed,
    Unknown(Vec<Var>),
}

fn head_match(pattern: &Term, term: &Term) -> HeadMatch {
    let mut s = Substitution::new();
    if match_into(pattern, term, &mut s) {
        return HeadMatch::Entailed(s);
    }
    let mut u = Substitution::new();
    if u.unify(pattern, term) {
        HeadMatch::Unknown(term.vars())
    } else {
        HeadMatch::Disentailed
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    /// Maximum number of executed match and fire tasks.
    pub budget: u64,
    pub trace: bool,
}

impl Default for Options {
    fn default() -> Options {
        Options { budget: 10_000_000, trace: false }
    }
}

pub struct Engine<'p> {
    prog: &'p CompiledProgram,
    opts: Options,
    builtins: BuiltinStore,
    sched: Scheduler<Key>,
    constraints: Vec<Constraint>,
    live: u64,
    pfs: HashMap<u64, Partial>,
    pes: HashMap<u64, PeObj>,
    rfs: HashMap<u64, Partial>,
    susps: HashMap<u64, SuspRec>,
    susp_by_var: HashMap<Var, BTreeSet<u64>>,
    keys_by_var: HashMap<Var, BTreeSet<Key>>,
    live_keys: HashSet<Key>,
    next_obj: u64,
    fresh: u64,
    failed: bool,
    metrics: Metrics,
    trace: Vec<String>,
    fired: Vec<(usize, Vec<u64>)>,
}

impl<'p> Engine<'p> {
    pub fn new(prog: &'p CompiledProgram, opts: Options) -> Engine<'p> {
        Engine {
            prog,
            opts,
            builtins: BuiltinStore::new(),
            sched: Scheduler::new(prog.static_priorities.iter().copied()),
            constraints: Vec::new(),
            live: 0,
            pfs: HashMap::new(),
            pes: HashMap::new(),
            rfs: HashMap::new(),
            susps: HashMap::new(),
            susp_by_var: HashMap::new(),
            keys_by_var: HashMap::new(),
            live_keys: HashSet::new(),
            next_obj: 0,
            fresh: 0,
            failed: false,
            metrics: Metrics::default(),
            trace: Vec::new(),
            fired: Vec::new(),
        }
    }

    fn obj_id(&mut self) -> u64 {
        self.next_obj += 1;
        self.next_obj
    }

    fn log(&mut self, line: impl FnOnce() -> String) {
        if self.opts.trace {
            self.trace.push(line());
        }
    }

    fn shown(&self, t: &Term) -> String {
        let t = self.builtins.resolve(t);
        t.map_vars(&mut |v| Term::var(v.name().trim_start_matches('#'))).to_string()
    }

    pub fn is_alive(&self, id: u64) -> bool {
        id >= 1 && self.constraints.get(id as usize - 1).is_some_and(|c| c.alive)
    }

    fn constraint(&mut self, id: u64) -> &mut Constraint {
        &mut self.constraints[id as usize - 1]
    }

    fn priority(&self, rule: usize, theta: &Substitution) -> Result<i64, EngineError> {
        let r = &self.prog.rules[rule];
        let p = theta.apply(&r.priority);
        eval_arith(&p, &self.builtins)
            .map_err(|_| EngineError::Priority { rule: r.name.clone(), priority: self.shown(&p) })
    }

    /// Add a user constraint and create its occurrences.
    pub fn assert_constraint(&mut self, t: &Term) -> Result<u64, EngineError> {
        let t = simplify_arith(t, &self.builtins)?;
        self.constraints.push(Constraint { term: t.clone(), alive: true, refs: Vec::new() });
        let id = self.constraints.len() as u64;
        self.live += 1;
        self.metrics.c_max = self.metrics.c_max.max(self.live);
        self.metrics.introduces += 1;
        self.log(|| format!("INTRODUCE {}#{id}", t));
        let Some((f, a)) = t.functor() else { return Ok(id) };
        let Some(occs) = self.prog.occurrences.get(&(f.into(), a)) else { return Ok(id) };
        for &(r, j) in occs {
            if self.prog.rules[r].dynamic {
                self.metrics.a_d += 1;
            } else {
                self.metrics.a_s += 1;
            }
            self.occurrence(id, r, j)?;
            if self.failed || !self.is_alive(id) {
                break;
            }
        }
        Ok(id)
    }

    fn occurrence(&mut self, cid: u64, rule: usize, pos: usize) -> Result<(), EngineError> {
        let term = simplify_arith(&self.constraints[cid as usize - 1].term, &self.builtins)?;
        let prog = self.prog;
        let head = &prog.rules[rule].items[pos].head;
        match head_match(head, &term) {
            HeadMatch::Disentailed => Ok(()),
            HeadMatch::Unknown(vars) => {
                self.suspend(Susp::Occ { cid, rule, pos }, vars, &[cid]);
                Ok(())
            }
            HeadMatch::Entailed(theta) if pos == 0 => {
                let prio = self.priority(rule, &theta)?;
                self.extend(Partial { rule, len: 1, theta, ids: vec![cid], prio })
            }
            HeadMatch::Entailed(theta) => {
                self.add_pe(rule, pos, theta, cid);
                Ok(())
            }
        }
    }

    fn suspend(&mut self, susp: Susp, vars: Vec<Var>, ids: &[u64]) {
        let sid = self.obj_id();
        for v in &vars {
            let set = self.susp_by_var.entry(v.clone()).or_default();
            set.insert(sid);
            self.metrics.s_max = self.metrics.s_max.max(set.len() as u64);
        }
        for &id in ids {
            self.constraint(id).refs.push(Obj::Susp(sid));
        }
        self.susps.insert(sid, SuspRec { susp, vars });
    }

    fn detach(&mut self, rec: &SuspRec, sid: u64) {
        for v in &rec.vars {
            if let Some(set) = self.susp_by_var.get_mut(v) {
                set.remove(&sid);
                if set.is_empty() {
                    self.susp_by_var.remove(v);
                }
            }
        }
    }

    /// Check the guard after the last matched head; activate, suspend or drop.
    fn extend(&mut self, p: Partial) -> Result<(), EngineError> {
        let prog = self.prog;
        let item = &prog.rules[p.rule].items[p.len - 1];
        let mut pending = Vec::new();
        for c in &item.guard {
            let c = c.map_terms(|t| p.theta.apply(t));
            match eval_comparison(&c, &self.builtins) {
                Truth::Entailed => {}
                Truth::Disentailed => return Ok(()),
                Truth::Unknown => {
                    for v in c.vars() {
                        for w in self.builtins.free_vars(&Term::Var(v)) {
                            if !pending.contains(&w) {
                                pending.push(w);
                            }
                        }
                    }
                }
            }
        }
        if pending.is_empty() {
            self.activate(p);
        } else {
            let ids = p.ids.clone();
            self.suspend(Susp::Guard(p), pending, &ids);
        }
        Ok(())
    }

    fn make_key(&mut self, rule: usize, pos: usize, theta: &Substitution) -> Key {
        let prog = self.prog;
        let item = &prog.rules[rule].items[pos];
        let vals: Vec<Term> = item
            .key
            .iter()
            .map(|v| {
                let t = theta.apply(&Term::Var(v.clone()));
                simplify_arith(&t, &self.builtins).unwrap_or_else(|_| self.builtins.resolve(&t))
            })
            .collect();
        let key = (rule, pos, vals);
        self.register_key(&key);
        key
    }

    fn register_key(&mut self, key: &Key) {
        if !self.live_keys.insert(key.clone()) {
            return;
        }
        let mut vars = Vec::new();
        for t in &key.2 {
            t.collect_vars(&mut vars);
        }
        for v in vars {
            let set = self.keys_by_var.entry(v).or_default();
            set.insert(key.clone());
            self.metrics.k_max = self.metrics.k_max.max(set.len() as u64);
        }
    }

    fn count_prefix(&mut self, p: &Partial) {
        let r = &self.prog.rules[p.rule];
        if r.dynamic {
            self.metrics.p_d += 1;
        } else {
            self.metrics.p_s += 1;
        }
        *self.metrics.prefix_by_rule.entry(r.name.clone()).or_default() += 1;
        self.metrics.priorities.insert(p.prio);
    }

    fn activate(&mut self, p: Partial) {
        self.count_prefix(&p);
        let id = self.obj_id();
        let prog = self.prog;
        let r = &prog.rules[p.rule];
        let dynamic = r.dynamic;
        for &cid in &p.ids {
            let obj = if p.len == r.n_heads() { Obj::Rf(id) } else { Obj::Pf(id) };
            self.constraint(cid).refs.push(obj);
        }
        if p.len == self.prog.rules[p.rule].n_heads() {
            let tie = std::iter::once(p.rule as u64).chain(self.textual_ids(&p)).collect();
            self.sched.schedule_rf(p.prio, dynamic, tie, id).expect("fresh rule firing id");
            self.rfs.insert(id, p);
        } else {
            let key = self.make_key(p.rule, p.len, &p.theta);
            self.sched.schedule_pf(&key, p.prio, dynamic, id).expect("fresh prefix firing id");
            self.pfs.insert(id, p);
        }
    }

    fn textual_ids(&self, p: &Partial) -> Vec<u64> {
        let r = &self.prog.rules[p.rule];
        let mut ids = vec![0; p.ids.len()];
        for (j, id) in p.ids.iter().enumerate() {
            ids[r.items[j].source_index] = *id;
        }
        ids
    }

    fn add_pe(&mut self, rule: usize, pos: usize, theta: Substitution, cid: u64) {
        let id = self.obj_id();
        let key = self.make_key(rule, pos, &theta);
        self.sched.schedule_pe(&key, id).expect("fresh extension id");
        self.constraint(cid).refs.push(Obj::Pe(id));
        self.pes.insert(id, PeObj { rule, pos, theta, id: cid });
    }

    /// Combine a prefix firing with an extension of the same schedule.
    pub fn process_match(&mut self, pf: u64, pe: u64) -> Result<(), EngineError> {
        let p = &self.pfs[&pf];
        let e = &self.pes[&pe];
        debug_assert_eq!((p.rule, p.len), (e.rule, e.pos));
        if p.ids.contains(&e.id) {
            return Ok(());
        }
        let mut theta = p.theta.clone();
        for (v, t) in e.theta.iter() {
            match theta.get(v) {
                Some(old) => {
                    if !self.builtins.entails_eq(old, t) {
                        return Ok(());
                    }
                }
                None => {
                    theta.bind(v.clone(), t.clone());
                }
            }
        }
        let mut ids = p.ids.clone();
        ids.push(e.id);
        let next = Partial { rule: p.rule, len: p.len + 1, theta, ids, prio: p.prio };
        if self.opts.trace {
            let r = &self.prog.rules[next.rule];
            let line = format!("MATCH {} {:?}+#{}", r.name, p.ids, e.id);
            self.trace.push(line);
        }
        self.extend(next)
    }

    /// Kill one constraint and everything built on it.
    pub fn delete_constraint(&mut self, id: u64) -> Result<(), EngineError> {
        if !self.is_alive(id) {
            return Err(EngineError::DoubleDelete(id));
        }
        self.live -= 1;
        let c = self.constraint(id);
        c.alive = false;
        let refs = std::mem::take(&mut c.refs);
        for o in refs {
            match o {
                Obj::Pf(x) => {
                    if self.pfs.remove(&x).is_some() {
                        self.sched.remove_pf(x).expect("live prefix firing");
                    }
                }
                Obj::Pe(x) => {
                    if self.pes.remove(&x).is_some() {
                        self.sched.remove_pe(x).expect("live extension");
                    }
                }
                Obj::Rf(x) => {
                    if self.rfs.remove(&x).is_some() {
                        self.sched.remove_rf(x).expect("live rule firing");
                    }
                }
                Obj::Susp(x) => {
                    if let Some(rec) = self.susps.remove(&x) {
                        self.detach(&rec, x);
                    }
                }
            }
        }
        Ok(())
    }

    /// Apply a rule firing: remove its removed heads, then run the body.
    pub fn fire(&mut self, rf: u64) -> Result<(), EngineError> {
        let p = self.rfs.remove(&rf).expect("scheduled rule firing is live");
        let prog = self.prog;
        let r = &prog.rules[p.rule];
        self.metrics.fires += 1;
        *self.metrics.fires_by_rule.entry(r.name.clone()).or_default() += 1;
        let textual = self.textual_ids(&p);
        self.log(|| {
            let ids: Vec<String> = textual.iter().map(|x| x.to_string()).collect();
            format!("APPLY {}@{} {}", r.name, p.prio, ids.join(","))
        });
        self.fired.push((p.rule, textual));
        for (j, it) in r.items.iter().enumerate() {
            if it.sign == Sign::Removed {
                self.delete_constraint(p.ids[j])?;
            }
        }
        let mut theta = p.theta;
        for b in &r.body {
            let vars = match b {
                BodyItem::Atom(t) => t.vars(),
                BodyItem::Tell(a, c) => {
                    let mut v = a.vars();
                    c.collect_vars(&mut v);
                    v
                }
            };
            for v in vars {
                if theta.get(&v).is_none() {
                    self.fresh += 1;
                    theta.bind(v, Term::var(&format!("_#{}", self.fresh)));
                }
            }
        }
        for b in &r.body {
            match b {
                BodyItem::Atom(t) => {
                    self.assert_constraint(&theta.apply(t))?;
                }
                BodyItem::Tell(a, c) => self.solve_tell(&theta.apply(a), &theta.apply(c))?,
            }
            if self.failed {
                break;
            }
        }
        Ok(())
    }

    /// Tell `a = b`: rehash affected keys, then wake suspended objects.
    pub fn solve_tell(&mut self, a: &Term, b: &Term) -> Result<(), EngineError> {
        self.metrics.b += 1;
        self.log(|| format!("SOLVE {a} = {b}"));
        let touched = match self.builtins.unify(a, b) {
            Ok(t) => t,
            Err(_) => {
                self.failed = true;
                return Ok(());
            }
        };
        let mut keys: BTreeSet<Key> = BTreeSet::new();
        let mut sids: BTreeSet<u64> = BTreeSet::new();
        for v in &touched {
            if let Some(ks) = self.keys_by_var.remove(v) {
                keys.extend(ks);
            }
            if let Some(ss) = self.susp_by_var.remove(v) {
                sids.extend(ss);
            }
        }
        for k in keys {
            if !self.live_keys.contains(&k) {
                continue;
            }
            let vals: Vec<Term> = k
                .2
                .iter()
                .map(|t| simplify_arith(t, &self.builtins).unwrap_or_else(|_| self.builtins.resolve(t)))
                .collect();
            let new = (k.0, k.1, vals);
            if new != k {
                self.live_keys.remove(&k);
                self.sched.rehash_key(&k, new.clone());
            } else {
                self.live_keys.remove(&k);
            }
            self.register_key(&new);
        }
        for sid in sids {
            let Some(rec) = self.susps.remove(&sid) else { continue };
            self.detach(&rec, sid);
            self.metrics.reactivations += 1;
            match rec.susp {
                Susp::Occ { cid, rule, pos } => {
                    self.log(|| format!("REACTIVATE occurrence #{cid}"));
                    if self.is_alive(cid) {
                        self.occurrence(cid, rule, pos)?;
                    }
                }
                Susp::Guard(p) => {
                    let prog = self.prog;
                    self.log(|| format!("REACTIVATE {} {:?}", prog.rules[p.rule].name, p.ids));
                    self.extend(p)?;
                }
            }
            if self.failed {
                break;
            }
        }
        Ok(())
    }

    fn step(&mut self) -> Result<bool, EngineError> {
        match self.sched.execute() {
            Task::Done => Ok(false),
            Task::Match { pf, pe } => {
                self.metrics.matches += 1;
                self.process_match(pf, pe)?;
                Ok(true)
            }
            Task::Fire(rf) => {
                self.fire(rf)?;
                Ok(true)
            }
        }
    }

    /// Process the goal left to right, then run tasks until none is left.
    pub fn run(mut self, goal: &[BodyItem]) -> Result<FinalReport, EngineError> {
        for g in goal {
            match g {
                BodyItem::Atom(t) => {
                    self.assert_constraint(t)?;
                }
                BodyItem::Tell(a, b) => self.solve_tell(a, b)?,
            }
            if self.failed {
                break;
            }
        }
        let mut status = Status::Final;
        let mut tasks = 0;
        while !self.failed {
            if tasks == self.opts.budget {
                status = Status::BudgetExhausted;
                break;
            }
            if !self.step()? {
                break;
            }
            tasks += 1;
        }
        if self.failed {
            status = Status::Failed;
        }
        Ok(self.finish(status))
    }

    fn finish(mut self, status: Status) -> FinalReport {
        let c = self.sched.counters();
        self.metrics.idle_polls = c.unsuccessful_executes;
        self.metrics.scheduler = c.snapshot();
        self.metrics.n = self.metrics.priorities.len() as u64;
        let store = self
            .constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| c.alive)
            .map(|(i, c)| {
                let t = simplify_arith(&c.term, &self.builtins).unwrap_or_else(|_| self.builtins.resolve(&c.term));
                (i as u64 + 1, t)
            })
            .collect();
        FinalReport {
            store,
            builtins: self.builtins,
            metrics: self.metrics,
            status,
            trace: self.trace,
            fired: self.fired,
        }
    }
}

/// Run `goal` on a fresh engine.
pub fn run(goal: &[BodyItem], program: &CompiledProgram, opts: Options) -> Result<FinalReport, EngineError> {
    Engine::new(program, opts).run(goal)
}
