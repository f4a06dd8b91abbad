use std::collections::BTreeSet;

use chr_engine::*;
use chr_interp::{
    apply_instance, canonical_store, goal_vars, reachable_finals_wp, wp_applicable, wp_run, wp_step, ExecState, TieBreak,
    WpProgram,
};
use chr_lang::{parse_chrrp, BodyItem, ChrProgram, Sign};
use chr_terms::Term;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DIJKSTRA: &str = include_str!("../../../programs/dijkstra.chrrp");
const LEQ: &str = include_str!("../../../programs/leq.chrrp");
const MERGESORT: &str = include_str!("../../../programs/mergesort.chrrp");
const BOOLEAN: &str = include_str!("../../../programs/boolean.chrrp");
const GCD: &str = include_str!("../../../programs/gcd.chrrp");
const CLOSURE: &str = include_str!("../../../programs/closure.chrrp");

fn parse(src: &str) -> (ChrProgram, Vec<BodyItem>) {
    parse_chrrp(src).unwrap()
}

fn goal_of(src: &str) -> Vec<BodyItem> {
    parse_chrrp(&format!("goal {src}.")).unwrap().1
}

fn run_engine(p: &ChrProgram, goal: &[BodyItem]) -> FinalReport {
    let c = compile(p).unwrap();
    run(goal, &c, Options { budget: 1_000_000, trace: true }).unwrap()
}

fn shown(r: &FinalReport) -> Vec<String> {
    let mut v: Vec<String> = r.store.iter().map(|(_, t)| t.to_string()).collect();
    v.sort();
    v
}

fn drain(st: &mut ExecState, wp: &WpProgram) {
    while !st.goal.is_empty() && !st.failed {
        wp_step(st, wp, &mut TieBreak::Lex).unwrap();
    }
}

/// Replay the engine's firings in the ω_p oracle. Each firing must be an
/// applicable instance of minimal priority, and the end state must be final
/// and equal to the engine's.
fn replay(p: &ChrProgram, goal: &[BodyItem], r: &FinalReport) -> Result<(), String> {
    let wp = WpProgram::new(p);
    let mut st = ExecState::initial(goal);
    drain(&mut st, &wp);
    for (k, (rule, ids)) in r.fired.iter().enumerate() {
        let insts = wp_applicable(&st, &wp).map_err(|e| e.to_string())?;
        let best = insts.iter().map(|i| i.priority).min();
        let Some(inst) = insts.iter().find(|i| i.rule == *rule && &i.ids == ids) else {
            return Err(format!("firing {k}: {} {ids:?} is not applicable", wp.rules[*rule].name));
        };
        if Some(inst.priority) != best {
            return Err(format!("firing {k}: priority {} while {best:?} is applicable", inst.priority));
        }
        apply_instance(&mut st, &wp, inst);
        drain(&mut st, &wp);
    }
    if !st.failed {
        let left = wp_applicable(&st, &wp).map_err(|e| e.to_string())?;
        if let Some(i) = left.first() {
            return Err(format!("engine stopped while {} {:?} is applicable", wp.rules[i.rule].name, i.ids));
        }
    }
    let gv = goal_vars(goal);
    let ours = canonical_store(r.store.iter().map(|(_, t)| t), &r.builtins, &gv, r.status == Status::Failed);
    if ours != st.canonical(&gv) {
        return Err(format!("final states differ:\n{ours}\nvs\n{}", st.canonical(&gv)));
    }
    Ok(())
}

#[test]
fn compile_classifies_occurrences_and_keys() {
    let c = compile(&parse(DIJKSTRA).0).unwrap();
    let d3 = &c.rules[2];
    assert_eq!(d3.n_heads(), 2);
    assert!(d3.dynamic);
    assert!(d3.items[0].key.is_empty());
    assert_eq!(d3.items[1].key.len(), 1);
    assert_eq!(d3.items[1].key[0].name(), "#V");
    assert_eq!(c.static_priorities, vec![1]);
    let dist = &c.occurrences[&("dist".into(), 2)];
    assert_eq!(dist, &vec![(1, 0), (1, 1), (2, 0)]);
    assert_eq!(c.occurrences[&("e".into(), 3)], vec![(2, 1)]);

    let single = compile(&parse("1 :: r @ a(X) <=> b(X).").0).unwrap();
    assert_eq!(single.rules[0].n_heads(), 1);
    assert_eq!(single.rules[0].items[0].sign, Sign::Removed);
}

#[test]
fn dynamic_priority_picks_a_covering_first_head() {
    let c = compile(&parse("P :: r @ a(X), b(P) ==> c(X).").0).unwrap();
    assert_eq!(c.rules[0].join_order, vec![1, 0]);
    assert!(matches!(
        compile(&parse("P+Q :: r @ a(P), b(Q) ==> c.").0),
        Err(CompileError::PriorityVars { .. })
    ));
}

#[test]
fn emit_chr_shows_the_occurrence_rules() {
    let c = compile(&parse(DIJKSTRA).0).unwrap();
    let text = c.emit_chr();
    assert!(text.contains("dist(X1,X2) <=> dist_occ_1(X1,X2,Id), dist_occ_2(X1,X2,Id), dist_occ_1(X1,X2,Id)."));
    assert!(text.contains("schedule_pf(d3_1(V),D+2,SId)"));
    assert!(text.contains("schedule_pe(d3_1(V),SId)"));
}

#[test]
fn head_match_residue_suspends_and_discards() {
    let (p, _) = parse("1 :: loop @ e(V,_,V) <=> true.\n2 :: keep @ e(V,C,U) ==> seen(V,U).");
    let r = run_engine(&p, &goal_of("e(a,3,a), e(a,3,b)"));
    assert_eq!(shown(&r), vec!["e(a,3,b)", "seen(a,b)"]);
    let r = run_engine(&p, &goal_of("e(X,3,Y), X = Y"));
    assert!(r.store.is_empty());
    assert_eq!(r.metrics.reactivations, 1);
    replay(&p, &goal_of("e(X,3,Y), X = Y"), &r).unwrap();
}

#[test]
fn dijkstra_three_nodes() {
    let (p, goal) = parse(DIJKSTRA);
    let r = run_engine(&p, &goal);
    assert_eq!(shown(&r).into_iter().filter(|s| s.starts_with("dist")).collect::<Vec<_>>(), vec![
        "dist(a,0)",
        "dist(b,1)",
        "dist(c,2)"
    ]);
    replay(&p, &goal, &r).unwrap();
    assert!(r.metrics.p_d > 0 && r.metrics.p_s > 0);
    assert!(r.trace.iter().any(|l| l.starts_with("MATCH d3")));
}

#[test]
fn empty_goal_does_nothing() {
    let (p, _) = parse(DIJKSTRA);
    let r = run_engine(&p, &[]);
    assert!(r.store.is_empty());
    assert_eq!(r.metrics.tasks(), 0);
    assert_eq!(r.metrics.a_s + r.metrics.a_d + r.metrics.p_s + r.metrics.p_d + r.metrics.b, 0);
    assert_eq!(r.status, Status::Final);
}

#[test]
fn merge_sort_of_eight() {
    let (p, _) = parse(MERGESORT);
    let goal = goal_of("number(5), number(2), number(7), number(1), number(8), number(3), number(6), number(4)");
    let r = run_engine(&p, &goal);
    let s = shown(&r);
    assert_eq!(s.iter().filter(|x| x.starts_with("merge")).collect::<Vec<_>>(), vec!["merge(7,1)"]);
    let arrows: Vec<&String> = s.iter().filter(|x| x.starts_with("arrow")).collect();
    assert_eq!(arrows, vec!["arrow(1,2)", "arrow(2,3)", "arrow(3,4)", "arrow(4,5)", "arrow(5,6)", "arrow(6,7)", "arrow(7,8)"]);
    replay(&p, &goal, &r).unwrap();
}

#[test]
fn leq_cycle_collapses() {
    let (p, goal) = parse(LEQ);
    let r = run_engine(&p, &goal);
    assert!(r.store.is_empty());
    let a = r.builtins.root(&chr_terms::Var::new("A"));
    assert_eq!(r.builtins.root(&chr_terms::Var::new("B")), a);
    assert_eq!(r.builtins.root(&chr_terms::Var::new("C")), a);
    assert!(r.metrics.b >= 1);
    assert!(r.metrics.scheduler["rehashes"] > 0);
    replay(&p, &goal, &r).unwrap();
}

#[test]
fn boolean_tells_reactivate() {
    let (p, goal) = parse(BOOLEAN);
    let r = run_engine(&p, &goal);
    replay(&p, &goal, &r).unwrap();
    assert!(r.metrics.reactivations > 0);
    let r = run_engine(&p, &goal_of("and(A,B,C), A = 0, C = 1"));
    assert_eq!(r.status, Status::Failed);
    replay(&p, &goal_of("and(A,B,C), A = 0, C = 1"), &r).unwrap();
}

#[test]
fn deleting_a_constituent_cancels_pending_firings() {
    // b2 would fire on a and b but the first rule consumes a before.
    let (p, _) = parse("1 :: r1 @ a(X) <=> c(X).\n2 :: r2 @ a(X), b(X) ==> d(X).");
    let r = run_engine(&p, &goal_of("a(1), b(1)"));
    assert_eq!(shown(&r), vec!["b(1)", "c(1)"]);
    assert!(r.trace.iter().all(|l| !l.starts_with("APPLY r2")));
}

#[test]
fn double_delete_is_an_error() {
    let c = compile(&parse("1 :: r @ a <=> true.").0).unwrap();
    let mut e = Engine::new(&c, Options::default());
    let id = e.assert_constraint(&Term::atom("b")).unwrap();
    e.delete_constraint(id).unwrap();
    assert_eq!(e.delete_constraint(id), Err(EngineError::DoubleDelete(id)));
}

#[test]
fn budget_is_reported() {
    let (p, _) = parse("1 :: r @ a(N) <=> a(N+1).");
    let c = compile(&p).unwrap();
    let r = run(&goal_of("a(0)"), &c, Options { budget: 100, trace: false }).unwrap();
    assert_eq!(r.status, Status::BudgetExhausted);
    assert_eq!(r.metrics.fires, 100);
}

#[test]
fn counters_obey_their_laws() {
    let (p, goal) = parse(LEQ);
    let r = run_engine(&p, &goal);
    let m = &r.metrics;
    let single_head_rules = ["reflexivity"];
    let single: u64 = single_head_rules.iter().map(|n| m.fires_by_rule.get(*n).copied().unwrap_or(0)).sum();
    assert!(m.fires <= m.matches + single);
    // leq/2 occurs seven times in the program.
    assert_eq!(m.a_s + m.a_d, 7 * m.introduces);
    let fired: BTreeSet<_> = r.fired.iter().collect();
    assert_eq!(fired.len(), r.fired.len());
}

#[test]
fn atgb_bound_of_an_empty_run_is_zero() {
    let (p, _) = parse(MERGESORT);
    let c = compile(&p).unwrap();
    let r = run(&[], &c, Options::default()).unwrap();
    assert_eq!(atgb_bound(&r.metrics, &c).bound, 0);
}

/// Dead identifiers never reappear in a later match or firing.
fn check_dead_ids(r: &FinalReport, p: &ChrProgram) {
    let c = compile(p).unwrap();
    let mut dead: BTreeSet<u64> = BTreeSet::new();
    for (rule, ids) in &r.fired {
        assert!(ids.iter().all(|i| !dead.contains(i)), "{ids:?} uses a dead id");
        let rr = &p.rules[*rule];
        for (j, id) in ids.iter().enumerate() {
            if j >= rr.kept.len() {
                dead.insert(*id);
            }
        }
    }
    let _ = c;
}

fn random_goal(kind: &str, rng: &mut ChaCha8Rng, size: usize) -> Vec<BodyItem> {
    let mut items: Vec<String> = Vec::new();
    match kind {
        "leq" => {
            let k = rng.gen_range(2..=5);
            for _ in 0..size {
                items.push(format!("leq(X{},X{})", rng.gen_range(0..k), rng.gen_range(0..k)));
            }
        }
        "mergesort" => {
            let mut seen = BTreeSet::new();
            while seen.len() < size {
                seen.insert(rng.gen_range(0..1000));
            }
            let mut v: Vec<i64> = seen.into_iter().collect();
            for i in (1..v.len()).rev() {
                v.swap(i, rng.gen_range(0..=i));
            }
            items.extend(v.iter().map(|x| format!("number({x})")));
        }
        "dijkstra" => {
            items.push("source(n0)".into());
            for _ in 1..size {
                items.push(format!("e(n{},{},n{})", rng.gen_range(0..5), rng.gen_range(1..10), rng.gen_range(0..5)));
            }
        }
        "boolean" => {
            let t = |rng: &mut ChaCha8Rng| match rng.gen_range(0..6) {
                0 => "0".to_string(),
                1 => "1".to_string(),
                k => format!("B{k}"),
            };
            for _ in 0..size {
                if rng.gen_bool(0.2) {
                    items.push(format!("B{} = {}", rng.gen_range(2..6), rng.gen_range(0..2)));
                } else {
                    items.push(format!("and({},{},{})", t(rng), t(rng), t(rng)));
                }
            }
        }
        "gcd" => {
            for _ in 0..size {
                items.push(format!("gcd({})", rng.gen_range(0..40)));
            }
        }
        "closure" => {
            for _ in 0..size {
                let a = rng.gen_range(0..5);
                let b = rng.gen_range(a + 1..=5);
                items.push(format!("edge(v{a},v{b})"));
            }
        }
        _ => unreachable!(),
    }
    if items.is_empty() {
        return Vec::new();
    }
    goal_of(&items.join(", "))
}

#[test]
fn random_goals_replay_in_the_oracle() {
    let corpus = [
        ("leq", LEQ, 8),
        ("mergesort", MERGESORT, 12),
        ("dijkstra", DIJKSTRA, 10),
        ("boolean", BOOLEAN, 8),
        ("gcd", GCD, 5),
        ("closure", CLOSURE, 7),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (kind, src, max) in corpus {
        let (p, _) = parse(src);
        for _ in 0..25 {
            let size = rng.gen_range(0..=max);
            let goal = random_goal(kind, &mut rng, size);
            let r = run_engine(&p, &goal);
            if let Err(e) = replay(&p, &goal, &r) {
                panic!("{kind} on {goal:?}: {e}");
            }
            check_dead_ids(&r, &p);
        }
    }
}

#[test]
fn final_states_lie_in_the_reachable_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (kind, src) in [("leq", LEQ), ("boolean", BOOLEAN), ("gcd", GCD)] {
        let (p, _) = parse(src);
        let wp = WpProgram::new(&p);
        for _ in 0..10 {
            let goal = random_goal(kind, &mut rng, 4);
            let r = run_engine(&p, &goal);
            let gv = goal_vars(&goal);
            let ours = canonical_store(r.store.iter().map(|(_, t)| t), &r.builtins, &gv, r.status == Status::Failed);
            let finals = reachable_finals_wp(&goal, &wp, 100_000).unwrap();
            assert!(finals.contains(&ours), "{kind}: {ours}");
            let lex = wp_run(&goal, &wp, 100_000, &mut TieBreak::Lex, false).unwrap();
            assert_eq!(finals.len(), 1, "{kind} {goal:?}: {finals:#?}");
            assert_eq!(lex.state.canonical(&gv), ours);
        }
    }
}

#[test]
fn tell_entails_a_suspended_guard() {
    let (p, _) = parse("1 :: r @ a(X), b(Y) ==> X < Y | c(X,Y).\n3 :: t @ go(Z) <=> Z = 3.");
    let goal = goal_of("a(Z), b(5), go(Z)");
    let r = run_engine(&p, &goal);
    assert!(shown(&r).contains(&"c(3,5)".to_string()));
    assert!(r.trace.iter().any(|l| l.starts_with("REACTIVATE r")));
    replay(&p, &goal, &r).unwrap();
}

#[test]
fn deleting_a_constraint_removes_its_memories() {
    let (p, _) = parse("1 :: r @ a(X), b(X) ==> c(X).\n2 :: s @ a(X) ==> d(X).");
    let c = compile(&p).unwrap();
    let mut e = Engine::new(&c, Options::default());
    e.assert_constraint(&goal_of("b(1)").into_iter().next().map(|b| match b { BodyItem::Atom(t) => t, _ => unreachable!() }).unwrap()).unwrap();
    let a = e.assert_constraint(&Term::app("a", vec![Term::int(1)])).unwrap();
    e.delete_constraint(a).unwrap();
    let r = e.run(&[]).unwrap();
    assert_eq!(r.metrics.fires, 0);
    assert_eq!(r.metrics.scheduler["pf_removed"], 1);
    assert_eq!(r.metrics.scheduler["rf_removed"], 1);
    assert_eq!(shown(&r), vec!["b(1)"]);
}

fn textbook_dijkstra(n: usize, edges: &[(usize, i64, usize)]) -> Vec<Option<i64>> {
    let mut dist = vec![None; n];
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(std::cmp::Reverse((0i64, 0usize)));
    while let Some(std::cmp::Reverse((d, v))) = heap.pop() {
        if dist[v].is_some() {
            continue;
        }
        dist[v] = Some(d);
        for &(a, c, b) in edges {
            if a == v && dist[b].is_none() {
                heap.push(std::cmp::Reverse((d + c, b)));
            }
        }
    }
    dist
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn dijkstra_matches_the_textbook(edges in proptest::collection::vec((0usize..8, 1i64..20, 0usize..8), 0..25)) {
            let (p, _) = parse(DIJKSTRA);
            let mut items = vec!["source(n0)".to_string()];
            items.extend(edges.iter().map(|(a, c, b)| format!("e(n{a},{c},n{b})")));
            let r = run_engine(&p, &goal_of(&items.join(", ")));
            let want = textbook_dijkstra(8, &edges);
            for (v, d) in want.iter().enumerate() {
                let got: Vec<&Term> = r.store.iter().map(|(_, t)| t)
                    .filter(|t| t.functor() == Some(("dist", 2)) && t.args()[0] == Term::atom(&format!("n{v}")))
                    .collect();
                match d {
                    None => prop_assert!(got.is_empty()),
                    Some(d) => {
                        prop_assert_eq!(got.len(), 1);
                        prop_assert_eq!(&got[0].args()[1], &Term::int(*d));
                    }
                }
            }
            let fired: BTreeSet<_> = r.fired.iter().collect();
            prop_assert_eq!(fired.len(), r.fired.len());
        }

        #[test]
        fn leq_goals_replay(pairs in proptest::collection::vec((0usize..5, 0usize..5), 0..10)) {
            let (p, _) = parse(LEQ);
            let items: Vec<String> = pairs.iter().map(|(a, b)| format!("leq(X{a},X{b})")).collect();
            let goal = if items.is_empty() { vec![] } else { goal_of(&items.join(", ")) };
            let r = run_engine(&p, &goal);
            prop_assert!(replay(&p, &goal, &r).is_ok());
        }
    }
}
