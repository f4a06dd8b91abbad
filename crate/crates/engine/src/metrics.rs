use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::compile::CompiledProgram;

/// Operation counters of one run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Metrics {
    /// Assertions of constraints, one per occurrence in a static rule.
    pub a_s: u64,
    /// Same for occurrences in dynamic-priority rules.
    pub a_d: u64,
    /// Strong prefix firings (all lengths, including complete rule
    /// firings) of static rules.
    pub p_s: u64,
    pub p_d: u64,
    /// Distinct priorities of scheduled prefix and rule firings.
    pub n: u64,
    /// Built-in tells.
    pub b: u64,
    pub matches: u64,
    pub fires: u64,
    pub reactivations: u64,
    /// Unsuccessful scheduler polls (a prefix firing or batch found nothing
    /// to match and went passive).
    pub idle_polls: u64,
    pub introduces: u64,
    /// Observed maximum of keys one variable occurs in.
    pub k_max: u64,
    /// Observed maximum of suspended objects attached to one variable.
    pub s_max: u64,
    /// Observed maximum number of live constraints.
    pub c_max: u64,
    pub prefix_by_rule: BTreeMap<String, u64>,
    pub fires_by_rule: BTreeMap<String, u64>,
    pub scheduler: BTreeMap<&'static str, u64>,
    pub(crate) priorities: BTreeSet<i64>,
}

impl Metrics {
    /// Executed scheduler tasks: matches, firings and idle polls.
    pub fn tasks(&self) -> u64 {
        self.matches + self.fires + self.idle_polls
    }

    /// Length of the derivation: introduced constraints, tells and rule
    /// applications.
    pub fn derivation_length(&self) -> u64 {
        self.introduces + self.b + self.fires
    }

    /// Flat key/value view for JSON output.
    pub fn to_map(&self) -> BTreeMap<String, u64> {
        let mut m = BTreeMap::new();
        for (k, v) in [
            ("A_s", self.a_s),
            ("A_d", self.a_d),
            ("P_s", self.p_s),
            ("P_d", self.p_d),
            ("N", self.n),
            ("B", self.b),
            ("K", self.k_max),
            ("S", self.s_max),
            ("matches", self.matches),
            ("fires", self.fires),
            ("reactivations", self.reactivations),
            ("idle_polls", self.idle_polls),
            ("introduces", self.introduces),
            ("c_max", self.c_max),
            ("tasks", self.tasks()),
        ] {
            m.insert(k.to_string(), v);
        }
        for (r, v) in &self.prefix_by_rule {
            m.insert(format!("prefix.{r}"), *v);
        }
        for (r, v) in &self.fires_by_rule {
            m.insert(format!("fires.{r}"), *v);
        }
        for (k, v) in &self.scheduler {
            m.insert(format!("sched.{k}"), *v);
        }
        m
    }
}

/// The generic bound D·Σ_r c_max^{n_r} next to what was measured.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtgbReport {
    pub derivation_length: u64,
    pub c_max: u64,
    pub per_rule: Vec<(String, u32, u128)>,
    pub bound: u128,
    pub measured_tasks: u64,
    /// Terms of the priority-aware formula with unit ask/tell costs:
    /// A_s + P_s + (A_d + P_d)·log2 N + B·(K + S).
    pub formula: u128,
}

impl AtgbReport {
    pub fn ratio(&self) -> f64 {
        if self.measured_tasks == 0 {
            return f64::INFINITY;
        }
        self.bound as f64 / self.measured_tasks as f64
    }
}

impl fmt::Display for AtgbReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "D = {}, c_max = {}", self.derivation_length, self.c_max)?;
        for (r, n, t) in &self.per_rule {
            writeln!(f, "  {r}: c_max^{n} = {t}")?;
        }
        writeln!(f, "generic bound D*sum = {}", self.bound)?;
        writeln!(f, "measured tasks = {}", self.measured_tasks)?;
        writeln!(f, "priority-aware formula = {}", self.formula)
    }
}

/// Head, guard, tell and store operations are all taken to cost 1.
pub fn atgb_bound(m: &Metrics, program: &CompiledProgram) -> AtgbReport {
    let d = m.derivation_length();
    let per_rule: Vec<(String, u32, u128)> = program
        .rules
        .iter()
        .map(|r| {
            let n = r.n_heads() as u32;
            (r.name.clone(), n, (m.c_max as u128).saturating_pow(n))
        })
        .collect();
    let sum = per_rule.iter().fold(0u128, |a, (_, _, t)| a.saturating_add(*t));
    let bound = if d == 0 { 0 } else { (d as u128).saturating_mul(sum) };
    let log_n = if m.n > 1 { 64 - (m.n - 1).leading_zeros() as u128 } else { 1 };
    let formula = (m.a_s + m.p_s) as u128 + (m.a_d + m.p_d) as u128 * log_n + m.b as u128 * (m.k_max + m.s_max) as u128;
    AtgbReport { derivation_length: d, c_max: m.c_max, per_rule, bound, measured_tasks: m.tasks(), formula }
}
