use std::collections::BTreeMap;

use chr_engine::{compile, run, CompiledProgram, FinalReport, Options, Status};
use chr_lang::{parse_chrrp, BodyItem};
use chr_terms::Term;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fit::{doubling_ratio, fit, Fit};
use crate::gen;
use crate::programs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Example {
    Dijkstra,
    Mergesort,
    Leq,
}

impl Example {
    pub fn default_sizes(self) -> Vec<usize> {
        match self {
            Example::Dijkstra => vec![50, 100, 200, 400, 800],
            Example::Mergesort => vec![8, 16, 32, 64, 128, 256],
            Example::Leq => vec![4, 8, 12, 16, 20],
        }
    }

    /// The counter whose growth the example is judged by.
    pub fn headline(self) -> &'static str {
        match self {
            Example::Dijkstra => "P_s+P_d",
            Example::Mergesort => "prefix.ms1",
            Example::Leq => "P_s",
        }
    }

    fn source(self) -> &'static str {
        match self {
            Example::Dijkstra => programs::DIJKSTRA_CHR,
            Example::Mergesort => programs::MERGESORT,
            Example::Leq => programs::LEQ,
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("a fit needs at least 4 sizes, got {0}")]
    TooFewSizes(usize),
    #[error("size {0} is too small for this example")]
    BadSize(usize),
    #[error("size {size}: engine stopped with status {status:?}")]
    Run { size: usize, status: Status },
    #[error("engine: {0}")]
    Engine(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    /// n, or e for Dijkstra.
    pub size: usize,
    pub counters: BTreeMap<String, u64>,
    /// Headline counter of the example.
    pub headline: u64,
    /// Output check: exact distances, sorted chain, or single class.
    pub output_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub example: Example,
    pub seed: u64,
    pub headline: &'static str,
    pub rows: Vec<BenchRow>,
    pub fit: Option<Fit>,
    pub doubling_ratio: Option<f64>,
    pub envelope: Vec<Check>,
}

/// One envelope condition with the value it was judged on.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub ok: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, ok: bool) -> Check {
        Check { name: name.into(), value, ok }
    }
}

impl BenchReport {
    pub fn points(&self, counter: &str) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.size as f64, r.counters.get(counter).copied().unwrap_or(0) as f64)).collect()
    }

    pub fn headline_points(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.size as f64, r.headline as f64)).collect()
    }

    pub fn envelope_ok(&self) -> bool {
        self.envelope.iter().all(|c| c.ok)
    }
}

fn ratio_check(name: &str, r: Option<f64>, lo: f64, hi: f64) -> Check {
    let v = r.unwrap_or(f64::NAN);
    Check::new(format!("{name} doubling ratio in [{lo}, {hi}]"), v, (lo..=hi).contains(&v))
}

/// The expected growth of each example, judged on the measured rows.
fn envelope(report: &BenchReport) -> Vec<Check> {
    let rows = &report.rows;
    let mut out = vec![Check::new(
        "output correct at every size",
        rows.iter().filter(|r| r.output_ok).count() as f64,
        rows.iter().all(|r| r.output_ok),
    )];
    let best = report.fit.as_ref().map(|f| f.best).unwrap_or("none");
    match report.example {
        Example::Dijkstra => {
            out.push(ratio_check("P_s+P_d", report.doubling_ratio, 1.6, 2.6));
            let n_per_e = rows.iter().map(|r| r.counters["N"] as f64 / r.size as f64).fold(0.0, f64::max);
            out.push(Check::new("N <= e at every size", n_per_e, n_per_e <= 1.0));
            let c: Vec<f64> = rows.iter().map(|r| r.counters["tasks"] as f64 / r.size as f64).collect();
            let spread = c.iter().cloned().fold(0.0, f64::max) / c.iter().cloned().fold(f64::INFINITY, f64::min);
            out.push(Check::new("tasks/e spread within 2x", spread, spread <= 2.0));
        }
        Example::Mergesort => {
            out.push(ratio_check("ms1 prefix firing", report.doubling_ratio, 2.0, 2.7));
            out.push(Check::new("best fit is n log n", 0.0, best == "n log n"));
        }
        Example::Leq => {
            out.push(ratio_check("P_s", report.doubling_ratio, 6.0, 10.0));
        }
    }
    out
}

pub fn program(example: Example) -> CompiledProgram {
    let (p, _) = parse_chrrp(example.source()).expect("shipped program parses");
    compile(&p).expect("shipped program compiles")
}

/// Per-size seed, so that rows do not depend on the other sizes.
fn size_rng(seed: u64, size: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (size as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Nodes of the benchmark graph with e edges.
pub fn dijkstra_nodes(e: usize) -> usize {
    (e / 4).max(2)
}

pub fn bench_row(example: Example, size: usize, seed: u64, prog: &CompiledProgram) -> Result<BenchRow, BenchError> {
    let mut rng = size_rng(seed, size);
    let (goal, check): (Vec<BodyItem>, Box<dyn Fn(&FinalReport) -> bool>) = match example {
        Example::Dijkstra => {
            let nodes = dijkstra_nodes(size);
            if size + 1 < nodes {
                return Err(BenchError::BadSize(size));
            }
            let g = gen::random_graph(nodes, size, &mut rng);
            let expect = gen::textbook_dijkstra(&g);
            (gen::dijkstra_goal(&g), Box::new(move |r: &FinalReport| distances_match(r, &expect)))
        }
        Example::Mergesort => {
            if size < 2 {
                return Err(BenchError::BadSize(size));
            }
            (gen::mergesort_goal(size, &mut rng), Box::new(move |r: &FinalReport| sorted_chain(r, size)))
        }
        Example::Leq => {
            if size < 2 {
                return Err(BenchError::BadSize(size));
            }
            (gen::leq_cycle_goal(size), Box::new(move |r: &FinalReport| one_class(r, size)))
        }
    };
    let report = run(&goal, prog, Options::default()).map_err(|e| BenchError::Engine(e.to_string()))?;
    if report.status != Status::Final {
        return Err(BenchError::Run { size, status: report.status });
    }
    let m = &report.metrics;
    let headline = match example {
        Example::Dijkstra => m.p_s + m.p_d,
        Example::Mergesort => m.prefix_by_rule.get("ms1").copied().unwrap_or(0),
        Example::Leq => m.p_s,
    };
    Ok(BenchRow { size, counters: m.to_map(), headline, output_ok: check(&report) })
}

/// Run the example at every size (in parallel) and fit the headline counter.
pub fn cmd_bench(example: Example, sizes: &[usize], seed: u64) -> Result<BenchReport, BenchError> {
    if sizes.len() < 4 {
        return Err(BenchError::TooFewSizes(sizes.len()));
    }
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let prog = program(example);
    let rows = sizes.par_iter().map(|&s| bench_row(example, s, seed, &prog)).collect::<Result<Vec<_>, _>>()?;
    let mut report = BenchReport {
        example,
        seed,
        headline: example.headline(),
        rows,
        fit: None,
        doubling_ratio: None,
        envelope: Vec::new(),
    };
    let pts = report.headline_points();
    report.fit = fit(&pts);
    report.doubling_ratio = doubling_ratio(&pts);
    report.envelope = envelope(&report);
    Ok(report)
}

fn distances_match(r: &FinalReport, expect: &[Option<i64>]) -> bool {
    let mut got: BTreeMap<Term, Vec<i64>> = BTreeMap::new();
    for (_, t) in &r.store {
        if let Term::App(f, args) = t {
            if &**f == "dist" && args.len() == 2 {
                match args[1].as_int() {
                    Some(d) => got.entry(args[0].clone()).or_default().push(d),
                    None => return false,
                }
            }
        }
    }
    expect.iter().enumerate().all(|(i, want)| match (want, got.get(&gen::node(i))) {
        (None, None) => true,
        (Some(d), Some(ds)) => ds == &[*d],
        _ => false,
    }) && got.len() == expect.iter().flatten().count()
}

/// Exactly arrow(i,i+1) for 1 ≤ i < n plus merge(n−1, 1).
fn sorted_chain(r: &FinalReport, n: usize) -> bool {
    let mut arrows = Vec::new();
    let mut merges = Vec::new();
    for (_, t) in &r.store {
        let Term::App(f, args) = t else { return false };
        let ints: Option<Vec<i64>> = args.iter().map(Term::as_int).collect();
        let Some(ints) = ints else { return false };
        match (&**f, ints.as_slice()) {
            ("arrow", [a, b]) => arrows.push((*a, *b)),
            ("merge", [k, a]) => merges.push((*k, *a)),
            _ => return false,
        }
    }
    arrows.sort_unstable();
    let want: Vec<(i64, i64)> = (1..n as i64).map(|i| (i, i + 1)).collect();
    arrows == want && merges == [(n as i64 - 1, 1)]
}

/// Empty store and X1..Xn all bound together.
fn one_class(r: &FinalReport, n: usize) -> bool {
    let vars = gen::leq_cycle_vars(n);
    r.store.is_empty() && vars.iter().all(|v| r.builtins.root(v) == r.builtins.root(&vars[0]))
}
