use std::collections::BTreeSet;
use std::fmt;

use chr_lang::{Antecedent, LaAtom, LaProgram};
use chr_terms::{eval_arith, eval_comparison, match_into, simplify_arith, BuiltinStore, Substitution, Term, Truth};

use crate::{InterpError, TieBreak};

/// A set of positive and negative ground assertions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaState {
    pub pos: BTreeSet<Term>,
    pub neg: BTreeSet<Term>,
}

impl LaState {
    pub fn new() -> LaState {
        LaState::default()
    }

    pub fn from_atoms<'a>(atoms: impl IntoIterator<Item = &'a LaAtom>) -> Result<LaState, InterpError> {
        let mut s = LaState::new();
        for a in atoms {
            s.insert(&ground(a)?);
        }
        Ok(s)
    }

    pub fn contains(&self, a: &LaAtom) -> bool {
        if a.negated {
            self.neg.contains(&a.atom)
        } else {
            self.pos.contains(&a.atom)
        }
    }

    pub fn insert(&mut self, a: &LaAtom) -> bool {
        if a.negated {
            self.neg.insert(a.atom.clone())
        } else {
            self.pos.insert(a.atom.clone())
        }
    }

    pub fn is_superset(&self, other: &LaState) -> bool {
        self.pos.is_superset(&other.pos) && self.neg.is_superset(&other.neg)
    }

    /// Positive assertions that are not also deleted.
    pub fn live(&self) -> impl Iterator<Item = &Term> {
        self.pos.iter().filter(|t| !self.neg.contains(*t))
    }

    pub fn len(&self) -> usize {
        self.pos.len() + self.neg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty()
    }
}

impl fmt::Display for LaState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.pos {
            writeln!(f, "{t}")?;
        }
        for t in &self.neg {
            writeln!(f, "del({t})")?;
        }
        Ok(())
    }
}

fn ground(a: &LaAtom) -> Result<LaAtom, InterpError> {
    Ok(LaAtom { negated: a.negated, atom: simplify_arith(&a.atom, &BuiltinStore::new())? })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaInstance {
    pub rule: usize,
    pub theta: Substitution,
    /// Ground user antecedents in rule order.
    pub matched: Vec<Term>,
    pub priority: i64,
    pub conclusion: Vec<LaAtom>,
}

impl LaInstance {
    fn lex_key(&self) -> (usize, &[Term]) {
        (self.rule, &self.matched)
    }
}

/// Every fireable ground instance, by brute force over the database.
pub fn la_applicable(state: &LaState, program: &LaProgram) -> Result<Vec<LaInstance>, InterpError> {
    let mut out = Vec::new();
    for (ri, _) in program.rules.iter().enumerate() {
        search(state, program, ri, 0, Substitution::new(), Vec::new(), &mut out)?;
    }
    Ok(out)
}

fn search(
    state: &LaState,
    program: &LaProgram,
    ri: usize,
    k: usize,
    theta: Substitution,
    matched: Vec<Term>,
    out: &mut Vec<LaInstance>,
) -> Result<(), InterpError> {
    let rule = &program.rules[ri];
    let empty = BuiltinStore::new();
    let Some(ant) = rule.antecedents.get(k) else {
        let p = theta.apply(&rule.priority);
        let priority = eval_arith(&p, &empty)
            .map_err(|_| InterpError::Priority { rule: rule.name.to_string(), priority: p.to_string() })?;
        let conclusion = rule
            .conclusion
            .iter()
            .map(|c| ground(&LaAtom { negated: c.negated, atom: theta.apply(&c.atom) }))
            .collect::<Result<Vec<_>, _>>()?;
        if conclusion.iter().all(|c| state.contains(c)) {
            return Ok(());
        }
        out.push(LaInstance { rule: ri, theta, matched, priority, conclusion });
        return Ok(());
    };
    match ant {
        Antecedent::Cmp(c) => {
            if eval_comparison(&c.map_terms(|t| theta.apply(t)), &empty) == Truth::Entailed {
                search(state, program, ri, k + 1, theta, matched, out)?;
            }
        }
        Antecedent::Pos(t) | Antecedent::Neg(t) => {
            let negated = matches!(ant, Antecedent::Neg(_));
            let pat = simplify_arith(&theta.apply(t), &empty)?;
            let pool = if negated { &state.neg } else { &state.pos };
            for g in pool {
                if !negated && state.neg.contains(g) {
                    continue;
                }
                let mut th = theta.clone();
                if match_into(&pat, g, &mut th) {
                    let mut m = matched.clone();
                    m.push(g.clone());
                    search(state, program, ri, k + 1, th, m, out)?;
                }
            }
        }
    }
    Ok(())
}

/// Highest-priority instance; ties are presented to `tie` in
/// (rule index, matched atoms) order.
pub fn la_select(mut instances: Vec<LaInstance>, tie: &mut TieBreak) -> Option<LaInstance> {
    let best = instances.iter().map(|i| i.priority).min()?;
    instances.retain(|i| i.priority == best);
    instances.sort_by(|a, b| a.lex_key().cmp(&b.lex_key()));
    let k = tie.pick(instances.len());
    Some(instances.swap_remove(k))
}

/// One Apply transition, or `None` in a final state.
pub fn la_step(
    state: &LaState,
    program: &LaProgram,
    tie: &mut TieBreak,
) -> Result<Option<(LaState, LaInstance)>, InterpError> {
    let Some(inst) = la_select(la_applicable(state, program)?, tie) else {
        return Ok(None);
    };
    let mut next = state.clone();
    for c in &inst.conclusion {
        next.insert(c);
    }
    Ok(Some((next, inst)))
}

#[derive(Clone, Debug)]
pub struct LaRun {
    pub state: LaState,
    pub steps: usize,
    pub trace: Vec<String>,
}

pub fn la_run(
    goal: &[LaAtom],
    program: &LaProgram,
    budget: usize,
    tie: &mut TieBreak,
    trace: bool,
) -> Result<LaRun, InterpError> {
    let mut state = LaState::from_atoms(goal)?;
    let mut lines = Vec::new();
    let mut steps = 0;
    loop {
        if steps == budget {
            return Err(InterpError::BudgetExhausted { budget, partial: state.to_string() });
        }
        match la_step(&state, program, tie)? {
            None => return Ok(LaRun { state, steps, trace: lines }),
            Some((next, inst)) => {
                if trace {
                    let m: Vec<String> = inst.matched.iter().map(|t| t.to_string()).collect();
                    lines.push(format!("APPLY {}@{} {}", program.rules[inst.rule].name, inst.priority, m.join(", ")));
                }
                state = next;
                steps += 1;
            }
        }
    }
}
