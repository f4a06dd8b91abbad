//! Program-independent scheduling: mergeable per-key schedules of prefix
//! firings and prefix extensions, a global queue mixing a bucket queue for
//! static priorities with a Fibonacci heap for dynamic ones, and a naive
//! shadow scheduler with the same tie policy for testing.

mod bucket;
mod fib;
mod queue;
mod sched;
mod shadow;

pub use bucket::BucketQueue;
pub use fib::{FibHeap, Handle};
pub use queue::{DynQueue, GlobalQueue};
pub use sched::{Counters, Entity, Item, PeId, PfId, RfId, SchedError, Scheduler, Task, TaskKey};
pub use shadow::ShadowScheduler;
