//! Translation of Logical Algorithms programs into CHR^rp and of the
//! positive range-restricted ground segment of CHR^rp into Logical
//! Algorithms, the state mappings between both, and an empirical
//! correspondence checker built on the reference interpreters.

mod check;
mod chr2la;
mod la2chr;
mod mapping;
mod sat;

use chr_interp::InterpError;
use chr_terms::ArithError;
use thiserror::Error;

pub use check::{check_chr2la, check_la2chr, mutate_chr, mutate_la, Direction, Mutation, Verdict};
pub use chr2la::{check_segment, initial_database, rule_label, translate_chrrp_program, NEXT_ID, TOKEN};
pub use la2chr::{
    add_modes, enumerate_partitions, filter_representatives, mode_pred, normalize_program, partmgu, set_deletion_rules,
    set_partitions, shift_priority, split, translate_la_goal, translate_la_program, HeadPartition, Mode,
    MAX_USER_ANTECEDENTS,
};
pub use mapping::{chrtola, exec_key, latochr, ExecKey, ModeTable};
pub use sat::{comparison_satisfiable, satisfiable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("rule {rule}: {count} user antecedents exceed the limit of {limit}")]
    TooManyAntecedents { rule: String, count: usize, limit: usize },
    #[error("rule {0} has no user antecedent")]
    NoUserAntecedents(String),
    #[error("rule {rule} is outside the positive range-restricted ground segment: {reason}")]
    Segment { rule: String, reason: String },
    #[error("goal item {0} is not a ground constraint")]
    NonGroundGoal(String),
    #[error("predicate {0} clashes with a generated name")]
    Reserved(String),
    #[error("malformed state: {0}")]
    MalformedState(String),
    #[error(transparent)]
    Interp(#[from] InterpError),
}

impl From<ArithError> for TranslateError {
    fn from(e: ArithError) -> Self {
        TranslateError::Interp(InterpError::Arith(e))
    }
}

/// Generated rule name, source rule, and a note (partition or role).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NameMap {
    pub entries: Vec<(String, String, String)>,
}

impl NameMap {
    pub fn push(&mut self, generated: String, source: String, note: String) {
        self.entries.push((generated, source, note));
    }

    pub fn source_of(&self, generated: &str) -> Option<&str> {
        self.entries.iter().find(|e| e.0 == generated).map(|e| e.1.as_str())
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("generated\tsource\tnote\n");
        for (g, s, n) in &self.entries {
            out.push_str(&format!("{g}\t{s}\t{n}\n"));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranslationArtifacts<P> {
    pub program: P,
    pub name_map: NameMap,
}
