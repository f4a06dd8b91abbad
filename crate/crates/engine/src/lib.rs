//! The CHR^rp execution engine: rules compiled to occurrence, prefix
//! firing, prefix extension and rule firing objects, driven by the
//! mergeable schedules of `chr-sched`.

mod compile;
mod engine;
mod metrics;

pub use compile::{compile, CompileError, CompiledItem, CompiledProgram, CompiledRule};
pub use engine::{run, Engine, EngineError, FinalReport, Key, Options, Status};
pub use metrics::{atgb_bound, AtgbReport, Metrics};
