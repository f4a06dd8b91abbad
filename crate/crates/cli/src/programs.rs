//! The example programs shipped in `programs/`.

pub const LEQ: &str = include_str!("../../../programs/leq.chrrp");
pub const MERGESORT: &str = include_str!("../../../programs/mergesort.chrrp");
pub const DIJKSTRA_CHR: &str = include_str!("../../../programs/dijkstra.chrrp");
pub const DIJKSTRA_LA: &str = include_str!("../../../programs/dijkstra.la");
pub const BOOLEAN: &str = include_str!("../../../programs/boolean.chrrp");
pub const GCD: &str = include_str!("../../../programs/gcd.chrrp");
pub const CLOSURE: &str = include_str!("../../../programs/closure.chrrp");
pub const UNIONFIND: &str = include_str!("../../../programs/unionfind.la");
