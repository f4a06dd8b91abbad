use std::collections::BTreeSet;

use chr_engine::{compile, run, CompiledProgram, Options, Status};
use chr_interp::{
    canonical_store, goal_vars, reachable_finals_wp, wp_run, CanonState, Inconclusive, TieBreak, WpProgram,
};
use chr_lang::{parse_chrrp, parse_la, BodyItem, ChrProgram, LaAtom};
use chr_translate::{initial_database, translate_chrrp_program, translate_la_goal, translate_la_program};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gen;
use crate::programs;

/// A CHR^rp program the engine runs, with a generator for its goals.
pub struct Subject {
    pub name: &'static str,
    pub program: ChrProgram,
    pub compiled: CompiledProgram,
    pub wp: WpProgram,
    pub goal_kind: &'static str,
    /// How a generated source goal becomes a goal of `program`.
    pub lift: Lift,
    /// Goals up to this size are checked against every reachable final state.
    pub explore_max: usize,
    /// Larger goals, up to this size, are compared with the deterministic
    /// oracle. Only meaningful for confluent programs.
    pub max_goal: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lift {
    Same,
    /// Goal of an LA program, translated to CHR^rp.
    FromLa,
    /// Goal of a CHR^rp program, taken to LA and back.
    ThroughLa,
}

impl Subject {
    pub fn new(
        name: &'static str,
        program: ChrProgram,
        goal_kind: &'static str,
        lift: Lift,
        explore_max: usize,
        max_goal: usize,
    ) -> Subject {
        let compiled = compile(&program).expect("corpus program compiles");
        let wp = WpProgram::new(&program);
        Subject { name, program, compiled, wp, goal_kind, lift, explore_max, max_goal: max_goal.max(explore_max) }
    }

    pub fn confluent(&self) -> bool {
        self.max_goal > self.explore_max
    }

    pub fn goal(&self, size: usize, rng: &mut ChaCha8Rng) -> Vec<BodyItem> {
        let g = gen::corpus_goal(self.goal_kind, size, rng);
        match self.lift {
            Lift::Same => g,
            Lift::FromLa => translate_la_goal(&la_atoms(&g)),
            Lift::ThroughLa => translate_la_goal(&initial_database(&g).expect("corpus goals are ground")),
        }
    }
}

/// Ground atoms of a CHR goal as positive LA assertions.
pub fn la_atoms(goal: &[BodyItem]) -> Vec<LaAtom> {
    goal.iter()
        .filter_map(|b| match b {
            BodyItem::Atom(t) => Some(LaAtom::pos(t.clone())),
            BodyItem::Tell(..) => None,
        })
        .collect()
}

fn chr(src: &str) -> ChrProgram {
    parse_chrrp(src).expect("corpus program parses").0
}

/// leq, merge sort, Dijkstra, Boolean and, gcd, closure, the union-find LA
/// translation, and the closure program taken to LA (token pairs) and back.
pub fn corpus() -> Vec<Subject> {
    let uf = parse_la(programs::UNIONFIND).expect("corpus program parses").0;
    let uf_chr = translate_la_program(&uf).expect("union-find translates").program;
    let closure = chr(programs::CLOSURE);
    let tokens = translate_chrrp_program(&closure).expect("closure is in the segment").program;
    let tokens_chr = translate_la_program(&tokens).expect("token program translates").program;
    vec![
        Subject::new("leq", chr(programs::LEQ), "leq", Lift::Same, 8, 30),
        Subject::new("mergesort", chr(programs::MERGESORT), "mergesort", Lift::Same, 8, 8),
        Subject::new("dijkstra", chr(programs::DIJKSTRA_CHR), "dijkstra", Lift::Same, 12, 30),
        Subject::new("boolean", chr(programs::BOOLEAN), "boolean", Lift::Same, 12, 30),
        Subject::new("gcd", chr(programs::GCD), "gcd", Lift::Same, 4, 30),
        Subject::new("closure", closure, "closure", Lift::Same, 6, 30),
        Subject::new("unionfind-la", uf_chr, "unionfind", Lift::FromLa, 4, 4),
        Subject::new("closure-tokens", tokens_chr, "closure", Lift::ThroughLa, 3, 3),
    ]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// The reachable set is a single state and the engine reached it.
    Confluent,
    /// The engine's state is one of several reachable final states.
    Member { finals: usize },
    Mismatch { engine: CanonState, detail: String },
    Inconclusive(String),
}

impl Outcome {
    pub fn ok(&self) -> bool {
        matches!(self, Outcome::Confluent | Outcome::Member { .. })
    }
}

/// Run the engine on `goal` and look its canonical final state up in the
/// set of ω_p-reachable final states (at most `bound` states explored).
pub fn conform(
    compiled: &CompiledProgram,
    wp: &WpProgram,
    goal: &[BodyItem],
    budget: u64,
    bound: usize,
) -> Outcome {
    let report = match run(goal, compiled, Options { budget, trace: false }) {
        Ok(r) => r,
        Err(e) => return Outcome::Inconclusive(format!("engine error: {e}")),
    };
    if report.status == Status::BudgetExhausted {
        return Outcome::Inconclusive("engine budget exhausted".into());
    }
    let gv = goal_vars(goal);
    let engine = canonical_store(
        report.store.iter().map(|(_, t)| t),
        &report.builtins,
        &gv,
        report.status == Status::Failed,
    );
    let finals: BTreeSet<CanonState> = match reachable_finals_wp(goal, wp, bound) {
        Ok(f) => f,
        Err(Inconclusive::Bound(b)) => return Outcome::Inconclusive(format!("more than {b} states")),
        Err(Inconclusive::Interp(e)) => return Outcome::Inconclusive(format!("oracle error: {e}")),
    };
    if !finals.contains(&engine) {
        return Outcome::Mismatch { engine, detail: format!("{} reachable final states, none equal", finals.len()) };
    }
    if finals.len() > 1 {
        return Outcome::Member { finals: finals.len() };
    }
    match agree_with_oracle(compiled, wp, goal, budget) {
        Outcome::Mismatch { detail, .. } => Outcome::Mismatch { engine, detail },
        other => other,
    }
}

#[derive(Clone, Debug, Default)]
pub struct ConformanceSummary {
    pub goals: usize,
    pub confluent: usize,
    pub member: usize,
    pub failures: Vec<String>,
}

/// Run the engine and the deterministic oracle and compare final states.
pub fn agree_with_oracle(compiled: &CompiledProgram, wp: &WpProgram, goal: &[BodyItem], budget: u64) -> Outcome {
    let report = match run(goal, compiled, Options { budget, trace: false }) {
        Ok(r) if r.status != Status::BudgetExhausted => r,
        Ok(_) => return Outcome::Inconclusive("engine budget exhausted".into()),
        Err(e) => return Outcome::Inconclusive(format!("engine error: {e}")),
    };
    let gv = goal_vars(goal);
    let engine = canonical_store(
        report.store.iter().map(|(_, t)| t),
        &report.builtins,
        &gv,
        report.status == Status::Failed,
    );
    match wp_run(goal, wp, budget as usize, &mut TieBreak::Lex, false) {
        Ok(r) if r.state.canonical(&gv) == engine => Outcome::Confluent,
        Ok(r) => Outcome::Mismatch { engine, detail: format!("deterministic oracle ends in\n{}", r.state.canonical(&gv)) },
        Err(e) => Outcome::Inconclusive(format!("oracle error: {e}")),
    }
}

/// `trials` random goals for one subject. Sizes cycle through
/// 1..=max_goal; sizes above `explore_max` use the deterministic oracle.
pub fn conform_subject(s: &Subject, trials: usize, seed: u64, budget: u64, bound: usize) -> ConformanceSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ConformanceSummary::default();
    for t in 0..trials {
        let size = 1 + (t % s.max_goal);
        let goal = s.goal(size, &mut rng);
        out.goals += 1;
        let outcome = if size <= s.explore_max {
            conform(&s.compiled, &s.wp, &goal, budget, bound)
        } else {
            agree_with_oracle(&s.compiled, &s.wp, &goal, budget)
        };
        match outcome {
            Outcome::Confluent => out.confluent += 1,
            Outcome::Member { .. } => out.member += 1,
            other => out.failures.push(format!("{}: goal {}: {other:?}", s.name, show_goal(&goal))),
        }
    }
    out
}

pub fn show_goal(goal: &[BodyItem]) -> String {
    goal.iter()
        .map(|b| match b {
            BodyItem::Atom(t) => t.to_string(),
            BodyItem::Tell(a, c) => format!("{a} = {c}"),
        })
        .collect::<Vec<_>>()
        .join(", ")
}
