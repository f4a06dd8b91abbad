use std::fmt;

use chr_terms::{Comparison, Sym, Term, Var};
use thiserror::Error;

use crate::ast::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Kept,
    Removed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntermediateItem {
    pub sign: Sign,
    pub head: Term,
    /// Index of the head in textual order (kept heads, then removed heads).
    pub source_index: usize,
    pub post_guard: Vec<Comparison>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntermediateRule {
    pub priority: Term,
    pub name: Option<Sym>,
    pub items: Vec<IntermediateItem>,
    pub body: Vec<BodyItem>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("join order {order:?} is not a permutation of 0..{heads}")]
pub struct JoinOrderError {
    pub order: Vec<usize>,
    pub heads: usize,
}

/// Lay out the heads of `rule` in join order, attaching each guard conjunct
/// to the earliest head after which all its variables are bound.
pub fn to_intermediate(rule: &ChrRule, join_order: Option<&[usize]>) -> Result<IntermediateRule, JoinOrderError> {
    let n = rule.head_count();
    let order: Vec<usize> = match join_order {
        Some(o) => {
            let mut seen = vec![false; n];
            let ok = o.len() == n && o.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true));
            if !ok {
                return Err(JoinOrderError { order: o.to_vec(), heads: n });
            }
            o.to_vec()
        }
        None => (0..n).collect(),
    };
    let heads: Vec<&Term> = rule.heads().collect();
    let mut bound: Vec<Var> = Vec::new();
    let mut items = Vec::with_capacity(n);
    let mut placed = vec![false; rule.guard.len()];
    for &i in &order {
        heads[i].collect_vars(&mut bound);
        let mut post_guard = Vec::new();
        for (g, done) in rule.guard.iter().zip(placed.iter_mut()) {
            if !*done && g.vars().iter().all(|v| bound.contains(v)) {
                *done = true;
                post_guard.push(g.clone());
            }
        }
        items.push(IntermediateItem {
            sign: if i < rule.kept.len() { Sign::Kept } else { Sign::Removed },
            head: heads[i].clone(),
            source_index: i,
            post_guard,
        });
    }
    // Guard variables outside the heads cannot occur after parsing, but keep
    // every conjunct anyway.
    if let Some(last) = items.last_mut() {
        for (g, done) in rule.guard.iter().zip(placed) {
            if !done {
                last.post_guard.push(g.clone());
            }
        }
    }
    Ok(IntermediateRule { priority: rule.priority.clone(), name: rule.name.clone(), items, body: rule.body.clone() })
}

impl fmt::Display for IntermediateItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.sign == Sign::Kept { '+' } else { '-' };
        write!(f, "{sign}{}, ?", self.head)?;
        if self.post_guard.is_empty() {
            return write!(f, "true");
        }
        let g: Vec<String> = self.post_guard.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", g.join(", "))
    }
}

impl fmt::Display for IntermediateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :: ", self.priority)?;
        if let Some(n) = &self.name {
            write!(f, "{n} @ ")?;
        }
        let items: Vec<String> = self.items.iter().map(|i| i.to_string()).collect();
        write!(f, "{} <=> ", items.join(", "))?;
        if self.body.is_empty() {
            return write!(f, "true.");
        }
        let b: Vec<String> = self.body.iter().map(|x| x.to_string()).collect();
        write!(f, "{}.", b.join(", "))
    }
}
