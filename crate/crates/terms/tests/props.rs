use chr_terms::*;
use proptest::prelude::*;

const VARS: [&str; 3] = ["X", "Y", "Z"];

fn term(depth: u32) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        (0..3usize).prop_map(|i| Term::var(VARS[i])),
        prop_oneof![Just("a"), Just("b")].prop_map(Term::atom),
        (0..3i64).prop_map(Term::int),
    ];
    leaf.prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::app("f", vec![t])),
            (inner.clone(), inner).prop_map(|(a, b)| Term::app("g", vec![a, b])),
        ]
    })
}

fn ground(depth: u32) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![prop_oneof![Just("a"), Just("b")].prop_map(Term::atom), (0..3i64).prop_map(Term::int)];
    leaf.prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::app("f", vec![t])),
            (inner.clone(), inner).prop_map(|(a, b)| Term::app("g", vec![a, b])),
        ]
    })
}

fn all_vars(ts: &[&Term]) -> Vec<Var> {
    let mut out = Vec::new();
    for t in ts {
        t.collect_vars(&mut out);
    }
    out
}

fn universe() -> Vec<Term> {
    vec![Term::atom("a"), Term::atom("b"), Term::int(0), Term::app("f", vec![Term::atom("a")])]
}

proptest! {
    #[test]
    fn unify_is_commutative(a in term(3), b in term(3)) {
        let s = BuiltinStore::new();
        let ab = unify(&a, &b, &s);
        let ba = unify(&b, &a, &s);
        prop_assert_eq!(ab.is_some(), ba.is_some());
        if let (Some(ab), Some(ba)) = (ab, ba) {
            prop_assert!(ab.entails_eq(&a, &b));
            for v in all_vars(&[&a, &b]) {
                let t = Term::Var(v);
                prop_assert_eq!(ab.resolve(&ba.resolve(&t)), ab.resolve(&t));
                prop_assert_eq!(ba.resolve(&ab.resolve(&t)), ba.resolve(&t));
            }
        }
    }

    #[test]
    fn match_reapplies_to_ground(p in term(5), vals in proptest::collection::vec(ground(2), 3)) {
        let theta: Substitution = VARS.iter().zip(vals).map(|(n, g)| (Var::new(n), g)).collect();
        let g = theta.apply(&p);
        let m = match_term(&p, &g).expect("instance must match");
        prop_assert_eq!(m.apply(&p), g);
    }

    #[test]
    fn match_result_is_sound(p in term(4), g in ground(4)) {
        if let Some(m) = match_term(&p, &g) {
            prop_assert_eq!(m.apply(&p), g);
        }
    }

    #[test]
    fn mgu_is_most_general(ts in proptest::collection::vec(term(2), 1..4)) {
        let mgu = mgu_of_set(&ts);
        let refs: Vec<&Term> = ts.iter().collect();
        let vars = all_vars(&refs);
        let uni = universe();
        let total = uni.len().pow(vars.len() as u32);
        for code in 0..total {
            let mut c = code;
            let sigma: Substitution = vars.iter().map(|v| {
                let t = uni[c % uni.len()].clone();
                c /= uni.len();
                (v.clone(), t)
            }).collect();
            let first = sigma.apply(&ts[0]);
            if ts.iter().all(|t| sigma.apply(t) == first) {
                let mgu = mgu.as_ref().expect("a unifier exists, so must the mgu");
                for v in &vars {
                    let t = Term::Var(v.clone());
                    prop_assert_eq!(sigma.apply(&mgu.apply(&t)), sigma.apply(&t));
                }
            }
        }
        if let Some(m) = &mgu {
            let first = m.apply(&ts[0]);
            for t in &ts {
                prop_assert_eq!(m.apply(t), first.clone());
            }
            for t in &ts {
                let once = m.apply(t);
                prop_assert_eq!(m.apply(&once), once);
            }
        }
    }

    #[test]
    fn comparisons_are_monotone(
        op in prop_oneof![Just(CmpOp::Lt), Just(CmpOp::Le), Just(CmpOp::Eq), Just(CmpOp::Ne)],
        l in prop_oneof![(0..3usize).prop_map(|i| Term::var(VARS[i])), (0..4i64).prop_map(Term::int)],
        r in prop_oneof![(0..3usize).prop_map(|i| Term::var(VARS[i])), (0..4i64).prop_map(Term::int)],
        first in proptest::collection::vec((0..3usize, 0..4i64), 0..2),
        more in proptest::collection::vec((0..3usize, 0..4i64), 0..3),
    ) {
        let c = Comparison::new(op, Term::add(l, Term::int(0)), r);
        let mut st = BuiltinStore::new();
        for (v, n) in first {
            let _ = st.unify(&Term::var(VARS[v]), &Term::int(n));
        }
        if st.is_failed() { return Ok(()); }
        let before = eval_comparison(&c, &st);
        for (v, n) in more {
            let _ = st.unify(&Term::var(VARS[v]), &Term::int(n));
        }
        if st.is_failed() { return Ok(()); }
        let after = eval_comparison(&c, &st);
        if before != Truth::Unknown {
            prop_assert_eq!(before, after);
        }
    }

    #[test]
    fn herbrand_equality_is_monotone(a in term(2), b in term(2), x in term(2), y in term(2)) {
        let c = Comparison::new(CmpOp::Eq, a, b);
        let st = BuiltinStore::new();
        let before = eval_comparison(&c, &st);
        if let Some(ext) = unify(&x, &y, &st) {
            let after = eval_comparison(&c, &ext);
            if before != Truth::Unknown {
                prop_assert_eq!(before, after);
            }
        }
    }
}
