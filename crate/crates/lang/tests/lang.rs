use chr_lang::*;
use chr_terms::{CmpOp, Term};

const DIJKSTRA_LA: &str = "
d1 @ 1 : source(V) => dist(V,0).
d2 @ 1 : dist(V,D1), dist(V,D2), D2 < D1 => del(dist(V,D1)).
d3 @ D+2 : dist(V,D), e(V,C,U) => dist(U,D+C).
";

const LEQ: &str = "
1 :: reflexivity @ leq(X,X) <=> true.
2 :: antisymmetry @ leq(X,Y), leq(Y,X) <=> X = Y.
1 :: idempotence @ leq(X,Y) \\ leq(X,Y) <=> true.
3 :: transitivity @ leq(X,Y), leq(Y,Z) ==> leq(X,Z).
goal leq(A,B), leq(B,C), leq(C,A).
";

#[test]
fn parses_dijkstra_la_rules() {
    let (p, goal) = parse_la(DIJKSTRA_LA).unwrap();
    assert!(goal.is_empty());
    assert_eq!(p.rules.len(), 3);
    let d3 = &p.rules[2];
    assert_eq!(&*d3.name, "d3");
    assert!(!d3.is_static());
    assert_eq!(d3.priority.to_string(), "D+2");
    assert_eq!(d3.antecedents.len(), 2);
    assert_eq!(d3.conclusion.len(), 1);
    let d2 = &p.rules[1];
    assert!(d2.conclusion[0].negated);
    assert!(matches!(&d2.antecedents[2], Antecedent::Cmp(c) if c.op == CmpOp::Lt));
}

#[test]
fn rejects_comparison_on_unbound_variable() {
    let e = parse_la("x @ 1 : a(X), Y < X => b.").unwrap_err();
    assert!(e.message.contains("scope"), "{e}");
    assert!(e.message.contains('Y'), "{e}");
}

#[test]
fn rejects_unbound_conclusion_and_priority_variables() {
    assert!(parse_la("x @ 1 : a(X) => b(Y).").is_err());
    assert!(parse_la("x @ P : a(X) => b(X).").unwrap_err().message.contains("priority"));
}

#[test]
fn classifies_chr_rule_kinds() {
    let (p, _) = parse_chrrp("1 :: ms1 @ arrow(X,A) \\ arrow(X,B) <=> A < B | arrow(A,B).").unwrap();
    let r = &p.rules[0];
    assert_eq!(r.kind(), RuleKind::Simpagation);
    assert_eq!((r.kept.len(), r.removed.len()), (1, 1));
    assert_eq!(r.guard.len(), 1);
    let (p, _) = parse_chrrp("3 :: transitivity @ leq(X,Y), leq(Y,Z) ==> leq(X,Z).").unwrap();
    assert_eq!(p.rules[0].kind(), RuleKind::Propagation);
    let (p, _) = parse_chrrp("2 :: e(V,C,U) <=> e_r(V,C,U,p).").unwrap();
    assert_eq!(p.rules[0].kind(), RuleKind::Simplification);
    assert!(p.rules[0].name.is_none());
}

#[test]
fn rejects_dynamic_priority_outside_heads() {
    let e = parse_chrrp("D+2 :: d @ a(X) <=> true.").unwrap_err();
    assert!(e.message.contains('D'), "{e}");
}

#[test]
fn syntax_errors_carry_positions() {
    let e = parse_la("d1 @ 1 : source(V)\n  dist(V,0).").unwrap_err();
    assert_eq!((e.line, e.col), (2, 3));
    assert!(!e.expected.is_empty());
}

#[test]
fn goal_directive_and_tells() {
    let (p, goal) = parse_chrrp(LEQ).unwrap();
    assert_eq!(p.rules.len(), 4);
    assert_eq!(goal.len(), 3);
    assert_eq!(p.rules[1].body, vec![BodyItem::Tell(Term::var("X"), Term::var("Y"))]);
    let (_, g) = parse_chrrp("goal a(X), X = 3, b.").unwrap();
    assert_eq!(g.len(), 3);
}

#[test]
fn anonymous_variables_are_distinct() {
    let (p, _) = parse_chrrp("1 :: d1 @ e(V,_,V) \\ e(_,_,_) <=> true.").unwrap();
    let vars = p.rules[0].head_vars();
    assert_eq!(vars.len(), 5);
}

#[test]
fn round_trips_programs() {
    let (p, g) = parse_la(DIJKSTRA_LA).unwrap();
    let text = pretty_print_la(&p, &g);
    assert_eq!(parse_la(&text).unwrap(), (p, g));
    let (p, g) = parse_chrrp(LEQ).unwrap();
    let text = pretty_print_chrrp(&p, &g);
    assert_eq!(parse_chrrp(&text).unwrap(), (p, g));
    assert_eq!(pretty_print_la(&LaProgram::default(), &[]), "");
}

#[test]
fn prints_rules_in_source_style() {
    let src = "D+4 :: d3__1_2 @ dist_r(V,D,p), e_r(V,C,U,p) ==> dist(U,D+C).";
    let (p, _) = parse_chrrp(src).unwrap();
    assert_eq!(print_chr_rule(&p.rules[0]), src);
    let src = "ms2_p @ 2 : merge(N,A,Id1), merge(N,B,Id2), A < B, next_id(NId) => del(merge(N,A,Id1)), del(merge(N,B,Id2)), del(next_id(NId)), merge(2*N+1,A,NId), arrow(A,B,NId+1), next_id(NId+2).";
    let (p, _) = parse_la(src).unwrap();
    assert_eq!(print_la_rule(&p.rules[0]), src);
}

#[test]
fn normalization_is_identity_for_first_head_priorities() {
    let (p, _) = parse_la("r @ D : a(D), b(X) => c(X).\ns @ 1 : a(D) => c(D).").unwrap();
    for r in &p.rules {
        assert_eq!(normalize_la_priority(r), vec![r.clone()]);
    }
}

#[test]
fn normalization_splits_multi_head_priorities() {
    let (p, _) = parse_la("r @ P1+P2 : a(P1), b(P2), d(Q) => c(Q).").unwrap();
    let out = normalize_la_priority(&p.rules[0]);
    let text: Vec<String> = out.iter().map(print_la_rule).collect();
    assert_eq!(
        text,
        vec![
            "r__1 @ 1 : a(P1), b(P2) => priority_r(P1+P2).".to_string(),
            "r__2 @ P : priority_r(P), a(P1), b(P2), P = P1+P2, d(Q) => c(Q).".to_string(),
        ]
    );
    for r in &out {
        let t = print_la_rule(r);
        assert_eq!(&parse_la(&t).unwrap().0.rules[0], r);
    }
}

#[test]
fn intermediate_form_of_dijkstra_d3() {
    let (p, _) = parse_chrrp("D+2 :: d3 @ dist(V,D), e(V,C,U) ==> dist(U,D+C).").unwrap();
    let ir = to_intermediate(&p.rules[0], None).unwrap();
    let items: Vec<String> = ir.items.iter().map(|i| i.to_string()).collect();
    assert_eq!(items.join(", "), "+dist(V,D), ?true, +e(V,C,U), ?true");
}

#[test]
fn intermediate_guard_hoisting_and_join_order() {
    let (p, _) = parse_chrrp("1 :: d2 @ dist(V,D1) \\ dist(V,D2) <=> D1 =< D2, 0 < 1 | true.").unwrap();
    let ir = to_intermediate(&p.rules[0], None).unwrap();
    assert_eq!(ir.items[0].post_guard.len(), 1);
    assert_eq!(ir.items[1].post_guard.len(), 1);
    assert_eq!(ir.items[1].sign, Sign::Removed);

    let (p, _) = parse_chrrp("2 :: antisymmetry @ leq(X,Y), leq(Y,X) <=> X = Y.").unwrap();
    let ir = to_intermediate(&p.rules[0], Some(&[1, 0])).unwrap();
    assert_eq!(ir.items[0].head.to_string(), "leq(Y,X)");
    assert_eq!(ir.items[0].source_index, 1);
    assert!(to_intermediate(&p.rules[0], Some(&[0, 0])).is_err());
    assert!(to_intermediate(&p.rules[0], Some(&[0])).is_err());
}

#[test]
fn single_head_rule_gets_whole_guard() {
    let (p, _) = parse_chrrp("1 :: r @ a(X,Y) <=> X < Y, Y < 3 | b.").unwrap();
    let ir = to_intermediate(&p.rules[0], None).unwrap();
    assert_eq!(ir.items.len(), 1);
    assert_eq!(ir.items[0].post_guard.len(), 2);
}
