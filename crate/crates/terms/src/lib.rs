//! Terms, substitutions, integer arithmetic and the built-in store.
//!
//! Everything above this crate shares [`Term`] as its value type.

mod arith;
mod store;
mod subst;
mod term;

pub use arith::{eval_arith, eval_comparison, simplify_arith, try_eval_comparison, ArithError, CmpOp, Comparison, Truth};
pub use store::{unify, BuiltinStore, ConstraintId, DoubleKill, IdState, IdTable, StoreStatus, UnifyError};
pub use subst::{match_into, match_term, mgu_of_set, Substitution};
pub use term::{Sym, Term, Var, VarGen};
