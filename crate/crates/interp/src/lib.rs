//! Naive interpreters for the LA semantics and for ω_p. They re-enumerate
//! every rule instance at every step and serve as oracles for the engine
//! and the translators.

mod canon;
mod explore;
mod la;
mod tie;
mod wp;

use thiserror::Error;

pub use canon::{canonical_store, CanonState};
pub use explore::{reachable_finals_la, reachable_finals_wp, Inconclusive};
pub use la::{la_applicable, la_run, la_select, la_step, LaInstance, LaRun, LaState};
pub use tie::TieBreak;
pub use wp::{
    apply_instance, goal_vars, instance_holds, wp_applicable, wp_run, wp_select, wp_step, ExecState, Transition,
    WpInstance, WpProgram, WpRule, WpRun,
};

pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InterpError {
    #[error("step budget of {budget} exhausted; partial state:\n{partial}")]
    BudgetExhausted { budget: usize, partial: String },
    #[error("rule {rule}: priority {priority} does not evaluate to an integer")]
    Priority { rule: String, priority: String },
    #[error("arithmetic error: {0}")]
    Arith(#[from] chr_terms::ArithError),
}
