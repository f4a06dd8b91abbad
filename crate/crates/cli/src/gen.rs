use std::collections::BTreeSet;

use chr_lang::{BodyItem, LaAtom};
use chr_terms::{Term, Var};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A weighted digraph on nodes 0..n, every node reachable from node 0.
#[derive(Clone, Debug)]
pub struct Graph {
    pub nodes: usize,
    pub edges: Vec<(usize, i64, usize)>,
}

/// Erdős–Rényi-style graph with exactly `e` edges (e ≥ nodes − 1), weights
/// 1..=100. A random spanning arborescence rooted at 0 is laid down first.
pub fn random_graph(nodes: usize, e: usize, rng: &mut ChaCha8Rng) -> Graph {
    assert!(nodes >= 1 && e + 1 >= nodes, "need at least nodes-1 edges");
    let mut order: Vec<usize> = (1..nodes).collect();
    order.shuffle(rng);
    let mut placed = vec![0usize];
    let mut seen = BTreeSet::new();
    let mut edges = Vec::with_capacity(e);
    for v in order {
        let u = placed[rng.gen_range(0..placed.len())];
        seen.insert((u, v));
        edges.push((u, rng.gen_range(1..=100), v));
        placed.push(v);
    }
    let possible = nodes * nodes.saturating_sub(1);
    while edges.len() < e.min(possible) {
        let u = rng.gen_range(0..nodes);
        let v = rng.gen_range(0..nodes);
        if u != v && seen.insert((u, v)) {
            edges.push((u, rng.gen_range(1..=100), v));
        }
    }
    edges.shuffle(rng);
    Graph { nodes, edges }
}

pub fn node(i: usize) -> Term {
    Term::atom(&format!("n{i}"))
}

pub fn dijkstra_goal(g: &Graph) -> Vec<BodyItem> {
    let mut goal = vec![BodyItem::Atom(Term::app("source", vec![node(0)]))];
    for &(u, c, v) in &g.edges {
        goal.push(BodyItem::Atom(Term::app("e", vec![node(u), Term::int(c), node(v)])));
    }
    goal
}

/// Shortest distances from node 0 by the binary-heap algorithm.
pub fn textbook_dijkstra(g: &Graph) -> Vec<Option<i64>> {
    use std::cmp::Reverse;
    let mut adj = vec![Vec::new(); g.nodes];
    for &(u, c, v) in &g.edges {
        adj[u].push((c, v));
    }
    let mut dist = vec![None; g.nodes];
    let mut heap = std::collections::BinaryHeap::from([Reverse((0i64, 0usize))]);
    while let Some(Reverse((d, u))) = heap.pop() {
        if dist[u].is_some() {
            continue;
        }
        dist[u] = Some(d);
        for &(c, v) in &adj[u] {
            if dist[v].is_none() {
                heap.push(Reverse((d + c, v)));
            }
        }
    }
    dist
}

/// `number/1` constraints over a random permutation of 1..=n.
pub fn mergesort_goal(n: usize, rng: &mut ChaCha8Rng) -> Vec<BodyItem> {
    let mut xs: Vec<i64> = (1..=n as i64).collect();
    xs.shuffle(rng);
    xs.into_iter().map(|x| BodyItem::Atom(Term::app("number", vec![Term::int(x)]))).collect()
}

/// leq(X1,X2), ..., leq(Xn-1,Xn), leq(Xn,X1).
pub fn leq_cycle_goal(n: usize) -> Vec<BodyItem> {
    (1..=n)
        .map(|i| {
            let j = if i == n { 1 } else { i + 1 };
            BodyItem::Atom(Term::app("leq", vec![Term::var(&format!("X{i}")), Term::var(&format!("X{j}"))]))
        })
        .collect()
}

pub fn leq_cycle_vars(n: usize) -> Vec<Var> {
    (1..=n).map(|i| Var::new(&format!("X{i}"))).collect()
}

fn atom(name: &str, args: Vec<Term>) -> BodyItem {
    BodyItem::Atom(Term::app(name, args))
}

/// Random goals for the corpus programs. `size` is the number of goal items.
pub fn corpus_goal(kind: &str, size: usize, rng: &mut ChaCha8Rng) -> Vec<BodyItem> {
    let int = |x: i64| Term::int(x);
    let mut goal = Vec::with_capacity(size);
    match kind {
        "leq" => {
            let k = rng.gen_range(2..=5);
            for _ in 0..size {
                let a = Term::var(&format!("X{}", rng.gen_range(0..k)));
                let b = Term::var(&format!("X{}", rng.gen_range(0..k)));
                goal.push(atom("leq", vec![a, b]));
            }
        }
        "mergesort" => {
            let mut seen = BTreeSet::new();
            while seen.len() < size {
                seen.insert(rng.gen_range(0..1000));
            }
            let mut xs: Vec<i64> = seen.into_iter().collect();
            xs.shuffle(rng);
            goal.extend(xs.into_iter().map(|x| atom("number", vec![int(x)])));
        }
        "dijkstra" => {
            if size > 0 {
                goal.push(atom("source", vec![node(0)]));
            }
            for _ in 1..size {
                let (u, v) = (rng.gen_range(0..5), rng.gen_range(0..5));
                goal.push(atom("e", vec![node(u), int(rng.gen_range(1..10)), node(v)]));
            }
        }
        "boolean" => {
            let t = |rng: &mut ChaCha8Rng| match rng.gen_range(0..6) {
                0 => int(0),
                1 => int(1),
                k => Term::var(&format!("B{k}")),
            };
            for _ in 0..size {
                if rng.gen_bool(0.2) {
                    goal.push(BodyItem::Tell(Term::var(&format!("B{}", rng.gen_range(2..6))), int(rng.gen_range(0..2))));
                } else {
                    let args = vec![t(rng), t(rng), t(rng)];
                    goal.push(atom("and", args));
                }
            }
        }
        "gcd" => {
            for _ in 0..size {
                goal.push(atom("gcd", vec![int(rng.gen_range(0..40))]));
            }
        }
        "closure" => {
            for _ in 0..size {
                let a = rng.gen_range(0..5);
                let b = rng.gen_range(a + 1..=5);
                goal.push(atom("edge", vec![node(a), node(b)]));
            }
        }
        "unionfind" => {
            for _ in 0..size {
                goal.push(atom("union", vec![int(rng.gen_range(1..=6)), int(rng.gen_range(1..=6))]));
            }
        }
        other => panic!("no goal generator for {other}"),
    }
    goal
}

/// Random ground LA goal over the given predicates, arguments 1..=4.
pub fn la_goal(preds: &[(String, usize)], size: usize, rng: &mut ChaCha8Rng) -> Vec<LaAtom> {
    if preds.is_empty() {
        return Vec::new();
    }
    (0..size)
        .map(|_| {
            let (f, a) = &preds[rng.gen_range(0..preds.len())];
            LaAtom::pos(Term::app(f, (0..*a).map(|_| Term::int(rng.gen_range(1..=4))).collect()))
        })
        .collect()
}

/// Random ground CHR goal over the given predicates, arguments 1..=4.
pub fn chr_goal(preds: &[(String, usize)], size: usize, rng: &mut ChaCha8Rng) -> Vec<BodyItem> {
    la_goal(preds, size, rng).into_iter().map(|a| BodyItem::Atom(a.atom)).collect()
}
