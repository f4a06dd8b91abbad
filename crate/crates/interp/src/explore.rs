use std::collections::{BTreeSet, HashSet};

use chr_lang::{BodyItem, LaAtom, LaProgram};
use chr_terms::{Term, Var};
use thiserror::Error;

use crate::canon::canonical_entries;
use crate::la::{la_applicable, LaState};
use crate::wp::{apply_instance, goal_step, goal_vars, wp_applicable, ExecState, WpProgram};
use crate::{CanonState, InterpError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Inconclusive {
    #[error("state bound of {0} exceeded")]
    Bound(usize),
    #[error(transparent)]
    Interp(#[from] InterpError),
}

type Key = (Vec<Term>, Vec<(usize, Vec<usize>)>, Vec<(Var, Term)>, bool);

fn key(state: &ExecState, gv: &[Var]) -> Key {
    let entries: Vec<(u64, Term)> = state.store.iter().map(|(i, t)| (*i, t.clone())).collect();
    let (sorted, bindings) = canonical_entries(&entries, &state.builtins, gv);
    let pos = |id: &u64| sorted.iter().position(|(_, x)| x == id);
    let mut hist: Vec<(usize, Vec<usize>)> = state
        .history
        .iter()
        .filter_map(|(r, ids)| ids.iter().map(pos).collect::<Option<Vec<_>>>().map(|p| (*r, p)))
        .collect();
    hist.sort();
    (sorted.into_iter().map(|(t, _)| t).collect(), hist, bindings, state.failed)
}

fn drain(state: &mut ExecState) -> Result<(), InterpError> {
    while goal_step(state)?.is_some() {}
    Ok(())
}

/// Every final state reachable under ω_p, exploring all ways of breaking
/// ties between highest-priority instances. Goal items are processed left
/// to right, which only affects identifiers. Gives up after visiting
/// `bound` distinct states.
pub fn reachable_finals_wp(
    goal: &[BodyItem],
    program: &WpProgram,
    bound: usize,
) -> Result<BTreeSet<CanonState>, Inconclusive> {
    let gv = goal_vars(goal);
    let mut start = ExecState::initial(goal);
    drain(&mut start)?;
    let mut seen: HashSet<Key> = HashSet::from([key(&start, &gv)]);
    let mut stack = vec![start];
    let mut finals = BTreeSet::new();
    while let Some(state) = stack.pop() {
        if seen.len() > bound {
            return Err(Inconclusive::Bound(bound));
        }
        let insts = if state.failed { Vec::new() } else { wp_applicable(&state, program)? };
        let Some(best) = insts.iter().map(|i| i.priority).min() else {
            finals.insert(state.canonical(&gv));
            continue;
        };
        for inst in insts.iter().filter(|i| i.priority == best) {
            let mut next = state.clone();
            apply_instance(&mut next, program, inst);
            drain(&mut next)?;
            if seen.insert(key(&next, &gv)) {
                stack.push(next);
            }
        }
    }
    Ok(finals)
}

/// LA counterpart of [`reachable_finals_wp`].
pub fn reachable_finals_la(
    goal: &[LaAtom],
    program: &LaProgram,
    bound: usize,
) -> Result<BTreeSet<LaState>, Inconclusive> {
    let start = LaState::from_atoms(goal)?;
    let mut seen: HashSet<LaState> = HashSet::from([start.clone()]);
    let mut stack = vec![start];
    let mut finals = BTreeSet::new();
    while let Some(state) = stack.pop() {
        if seen.len() > bound {
            return Err(Inconclusive::Bound(bound));
        }
        let insts = la_applicable(&state, program)?;
        let Some(best) = insts.iter().map(|i| i.priority).min() else {
            finals.insert(state);
            continue;
        };
        for inst in insts.iter().filter(|i| i.priority == best) {
            let mut next = state.clone();
            for c in &inst.conclusion {
                next.insert(c);
            }
            if seen.insert(next.clone()) {
                stack.push(next);
            }
        }
    }
    Ok(finals)
}
