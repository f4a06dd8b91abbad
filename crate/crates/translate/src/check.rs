use chr_interp::{
    apply_instance, la_applicable, la_step, wp_applicable, wp_step, ExecState, InterpError, LaState, TieBreak,
    Transition, WpProgram,
};
use chr_lang::{Antecedent, BodyItem, ChrProgram, LaAtom, LaProgram};
use chr_terms::{CmpOp, Term};

use crate::chr2la::{initial_database, NEXT_ID, TOKEN};
use crate::la2chr::{normalize_program, translate_la_goal};
use crate::mapping::{chrtola, exec_key, latochr, show_la, ModeTable};
use crate::TranslateError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    LaToChr,
    ChrToLa,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass { transitions: usize },
    Mismatch { step: usize, detail: String },
    Inconclusive(String),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }
}

fn mismatch(step: usize, detail: String) -> Result<Verdict, TranslateError> {
    Ok(Verdict::Mismatch { step, detail })
}

/// Runs the translation of `source` under ω_p and checks that every
/// transition leaves the mapped LA state unchanged or performs one
/// highest-priority LA step, and that the final state is LA-final.
pub fn check_la2chr(
    source: &LaProgram,
    translated: &ChrProgram,
    goal: &[LaAtom],
    budget: usize,
    tie: &mut TieBreak,
) -> Result<Verdict, TranslateError> {
    let norm = normalize_program(source);
    let table = ModeTable::new(&norm);
    let wp = WpProgram::new(translated);
    let mut state = ExecState::initial(&translate_la_goal(goal));
    let mut before = chrtola(&state, &table)?;
    if before != LaState::from_atoms(goal)? {
        return mismatch(0, format!("initial state maps to {{{}}}", show_la(&before)));
    }
    for step in 1..=budget {
        let Some(t) = wp_step(&mut state, &wp, tie)? else {
            let open = la_applicable(&before, &norm)?;
            if let Some(i) = open.first() {
                return mismatch(
                    step,
                    format!("CHR final but LA rule {} applicable in {{{}}}", norm.rules[i.rule].name, show_la(&before)),
                );
            }
            return Ok(Verdict::Pass { transitions: step - 1 });
        };
        let dups = table.duplicate_representations(&state);
        if !dups.is_empty() {
            return mismatch(step, format!("{} has two representations", dups[0]));
        }
        let after = chrtola(&state, &table)?;
        if after == before {
            continue;
        }
        let ok = match &t {
            Transition::Apply(_) => {
                let insts = la_applicable(&before, &norm)?;
                let best = insts.iter().map(|i| i.priority).min();
                insts.iter().filter(|i| Some(i.priority) == best).any(|i| {
                    let mut s = before.clone();
                    i.conclusion.iter().for_each(|c| {
                        s.insert(c);
                    });
                    s == after
                })
            }
            _ => false,
        };
        if !ok {
            return mismatch(
                step,
                format!(
                    "{}\n  CHR maps {{{}}}\n  to {{{}}}\n  which is no highest-priority LA step",
                    t.render(&wp),
                    show_la(&before),
                    show_la(&after)
                ),
            );
        }
        before = after;
    }
    Ok(Verdict::Inconclusive(format!("budget of {budget} transitions exhausted")))
}

fn drain(state: &mut ExecState, wp: &WpProgram) -> Result<(), InterpError> {
    let mut lex = TieBreak::Lex;
    while !state.goal.is_empty() && !state.failed {
        wp_step(state, wp, &mut lex)?;
    }
    Ok(())
}

/// Runs the LA translation of `source` and checks that every step leaves
/// the mapped execution state unchanged (token generation) or performs one
/// highest-priority ω_p rule application followed by introduction of its
/// body, and that the final state is ω_p-final.
pub fn check_chr2la(
    source: &ChrProgram,
    translated: &LaProgram,
    goal: &[BodyItem],
    budget: usize,
    tie: &mut TieBreak,
) -> Result<Verdict, TranslateError> {
    let wp = WpProgram::new(source);
    let mut la = LaState::from_atoms(&initial_database(goal)?)?;
    let mut start = ExecState::initial(goal);
    drain(&mut start, &wp)?;
    let mut before = match latochr(&la, source) {
        Ok(s) => s,
        Err(e) => return mismatch(0, e.to_string()),
    };
    if exec_key(&before, source)? != exec_key(&start, source)? {
        return mismatch(0, "initial database does not map to the introduced goal".into());
    }
    for step in 1..=budget {
        let Some((next, inst)) = la_step(&la, translated, tie)? else {
            let open = wp_applicable(&before, &wp)?;
            if let Some(i) = open.first() {
                return mismatch(step, format!("LA final but CHR rule {} applicable", wp.rules[i.rule].name));
            }
            return Ok(Verdict::Pass { transitions: step - 1 });
        };
        la = next;
        let after = match latochr(&la, source) {
            Ok(s) => s,
            Err(e) => return mismatch(step, format!("{}: {e}", translated.rules[inst.rule].name)),
        };
        let key_after = exec_key(&after, source)?;
        if key_after == exec_key(&before, source)? {
            continue;
        }
        let insts = wp_applicable(&before, &wp)?;
        let best = insts.iter().map(|i| i.priority).min();
        let mut ok = false;
        for i in insts.iter().filter(|i| Some(i.priority) == best) {
            let mut s = before.clone();
            apply_instance(&mut s, &wp, i);
            drain(&mut s, &wp)?;
            if exec_key(&s, source)? == key_after {
                ok = true;
                break;
            }
        }
        if !ok {
            let fired = &translated.rules[inst.rule].name;
            let matched: Vec<String> = inst.matched.iter().map(|t| t.to_string()).collect();
            return mismatch(
                step,
                format!("LA rule {fired} on {} is no highest-priority ω_p transition", matched.join(", ")),
            );
        }
        before = after;
    }
    Ok(Verdict::Inconclusive(format!("budget of {budget} transitions exhausted")))
}

/// Deliberate corruptions of a translation, used to show the checker
/// notices them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    PriorityPlusOne(usize),
    DropAlldiff(usize),
    DropTokenRule(usize),
}

fn bump(p: &Term) -> Term {
    crate::la2chr::shift_priority(p, 1)
}

pub fn mutate_chr(p: &ChrProgram, m: Mutation) -> Option<ChrProgram> {
    let Mutation::PriorityPlusOne(i) = m else { return None };
    let mut out = p.clone();
    let r = out.rules.get_mut(i)?;
    r.priority = bump(&r.priority);
    Some(out)
}

pub fn mutate_la(p: &LaProgram, m: Mutation) -> Option<LaProgram> {
    let mut out = p.clone();
    match m {
        Mutation::PriorityPlusOne(i) => {
            let r = out.rules.get_mut(i)?;
            r.priority = bump(&r.priority);
        }
        Mutation::DropAlldiff(i) => {
            let r = out.rules.get_mut(i)?;
            let ids: Vec<Term> = r
                .antecedents
                .iter()
                .filter_map(|a| match a {
                    Antecedent::Pos(t) if !matches!(t.functor(), Some((NEXT_ID, 1)) | Some((TOKEN, 2))) => {
                        t.args().last().cloned()
                    }
                    _ => None,
                })
                .collect();
            let n = r.antecedents.len();
            r.antecedents.retain(|a| {
                !matches!(a, Antecedent::Cmp(c) if c.op == CmpOp::Ne && ids.contains(&c.lhs) && ids.contains(&c.rhs))
            });
            if r.antecedents.len() == n {
                return None;
            }
        }
        Mutation::DropTokenRule(i) => {
            let r = out.rules.get(i)?;
            let is_gen = matches!(r.conclusion.as_slice(), [c] if !c.negated && matches!(c.atom.functor(), Some((TOKEN, 2))));
            if !is_gen {
                return None;
            }
            out.rules.remove(i);
        }
    }
    Some(out)
}
