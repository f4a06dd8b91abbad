use std::collections::{BTreeMap, BTreeSet};

use chr_interp::{ExecState, LaState};
use chr_lang::{BodyItem, ChrProgram, LaAtom, LaProgram, RuleKind};
use chr_terms::{simplify_arith, Sym, Term};

use crate::chr2la::{rule_label, NEXT_ID, TOKEN};
use crate::la2chr::{mode_pred, Mode};
use crate::TranslateError;

/// Recognizes representation constraints `a_r(X̄,M)` of a source program.
#[derive(Clone, Debug)]
pub struct ModeTable {
    reps: BTreeMap<(String, usize), Sym>,
}

impl ModeTable {
    pub fn new(source: &LaProgram) -> ModeTable {
        let reps = source.predicates().into_iter().map(|(f, n)| ((mode_pred(&f), n + 1), f)).collect();
        ModeTable { reps }
    }

    fn classify(&self, t: &Term, out: &mut LaState) {
        let Term::App(f, args) = t else { return };
        if &**f == "del" && args.len() == 1 {
            out.neg.insert(args[0].clone());
            return;
        }
        if let Some(base) = self.reps.get(&(f.to_string(), args.len())) {
            if let Some(mode) = Mode::from_term(&args[args.len() - 1]) {
                let atom = Term::App(base.clone(), args[..args.len() - 1].to_vec());
                if mode != Mode::N {
                    out.pos.insert(atom.clone());
                }
                if mode != Mode::P {
                    out.neg.insert(atom);
                }
                return;
            }
        }
        out.pos.insert(t.clone());
    }

    /// Source assertions represented by more than one stored constraint.
    pub fn duplicate_representations(&self, state: &ExecState) -> Vec<Term> {
        let mut seen = BTreeSet::new();
        let mut dups = Vec::new();
        for t in state.store.values() {
            let t = state.builtins.resolve(t);
            if let Term::App(f, args) = &t {
                if self.reps.contains_key(&(f.to_string(), args.len())) {
                    let key = Term::App(f.clone(), args[..args.len() - 1].to_vec());
                    if !seen.insert(key.clone()) {
                        dups.push(key);
                    }
                }
            }
        }
        dups
    }
}

/// LA state denoted by an execution state of a translated program,
/// counting constraints still in the goal.
pub fn chrtola(state: &ExecState, table: &ModeTable) -> Result<LaState, TranslateError> {
    let mut out = LaState::new();
    for t in state.store.values() {
        table.classify(&simplify_arith(t, &state.builtins)?, &mut out);
    }
    for g in &state.goal {
        if let BodyItem::Atom(t) = g {
            table.classify(&simplify_arith(t, &state.builtins)?, &mut out);
        }
    }
    Ok(out)
}

/// Execution state denoted by an LA state of a `translate_chrrp_program`
/// output. History holds propagation-rule tokens that were consumed.
pub fn latochr(state: &LaState, program: &ChrProgram) -> Result<ExecState, TranslateError> {
    let labels: Vec<String> = program.rules.iter().enumerate().map(|(i, r)| rule_label(r, i)).collect();
    let malformed = |m: String| TranslateError::MalformedState(m);
    let mut store = BTreeMap::new();
    let mut next = Vec::new();
    for t in state.live() {
        let Term::App(f, args) = t else { return Err(malformed(format!("{t} is not an atom"))) };
        match (&**f, args.len()) {
            (NEXT_ID, 1) => next.push(args[0].clone()),
            (TOKEN, 2) => {}
            _ => {
                let Some(Term::Int(id)) = args.last() else {
                    return Err(malformed(format!("{t} has no identifier")));
                };
                let c = Term::App(f.clone(), args[..args.len() - 1].to_vec());
                if store.insert(*id as u64, c).is_some() {
                    return Err(malformed(format!("identifier {id} is shared")));
                }
            }
        }
    }
    let next_id = match next.as_slice() {
        [Term::Int(n)] => *n as u64,
        _ => return Err(malformed(format!("expected one undeleted next_id, found {}", next.len()))),
    };
    let mut history = BTreeSet::new();
    for t in &state.neg {
        if let Some((TOKEN, 2)) = t.functor() {
            let name = t.args()[0].to_string();
            let r = labels
                .iter()
                .position(|l| *l == name)
                .ok_or_else(|| malformed(format!("token of unknown rule {name}")))?;
            history.insert((r, list_ids(&t.args()[1]).ok_or_else(|| malformed(format!("bad token {t}")))?));
        }
    }
    Ok(ExecState::from_parts(store, history, next_id))
}

fn list_ids(t: &Term) -> Option<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur = t;
    loop {
        match cur {
            Term::App(f, args) if &**f == "[]" && args.is_empty() => return Some(out),
            Term::App(f, args) if &**f == "[|]" && args.len() == 2 => {
                let Term::Int(n) = args[0] else { return None };
                out.push(n as u64);
                cur = &args[1];
            }
            _ => return None,
        }
    }
}

/// The observable part of an execution state of a ground program: store,
/// propagation history and next identifier.
pub type ExecKey = (BTreeMap<u64, Term>, BTreeSet<(usize, Vec<u64>)>, u64);

pub fn exec_key(state: &ExecState, program: &ChrProgram) -> Result<ExecKey, TranslateError> {
    let store = state
        .store
        .iter()
        .map(|(id, t)| Ok((*id, simplify_arith(t, &state.builtins)?)))
        .collect::<Result<_, TranslateError>>()?;
    let history = state
        .history
        .iter()
        .filter(|(r, _)| program.rules[*r].kind() == RuleKind::Propagation)
        .cloned()
        .collect();
    Ok((store, history, state.next_id))
}

/// Rendering helper for counterexamples.
pub fn show_la(state: &LaState) -> String {
    let mut atoms: Vec<String> = state.pos.iter().map(|t| t.to_string()).collect();
    atoms.extend(state.neg.iter().map(|t| LaAtom::neg(t.clone()).to_string()));
    atoms.join(", ")
}
