use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use crate::bucket::BucketQueue;
use crate::fib::{FibHeap, Handle};

/// Dynamic priorities: a Fibonacci heap with one node per distinct
/// priority, each node holding its entries ordered by secondary key.
#[derive(Clone, Debug)]
pub struct DynQueue<S> {
    heap: FibHeap<i64>,
    nodes: HashMap<i64, (Handle, BTreeMap<S, ()>)>,
}

impl<S: Ord + Clone> Default for DynQueue<S> {
    fn default() -> Self {
        DynQueue { heap: FibHeap::new(), nodes: HashMap::new() }
    }
}

impl<S: Ord + Clone> DynQueue<S> {
    pub fn insert(&mut self, prio: i64, key: S) -> bool {
        let heap = &mut self.heap;
        let (_, entries) = self.nodes.entry(prio).or_insert_with(|| (heap.push(prio), BTreeMap::new()));
        entries.insert(key, ()).is_none()
    }

    pub fn remove(&mut self, prio: i64, key: &S) -> bool {
        let Some((h, entries)) = self.nodes.get_mut(&prio) else { return false };
        if entries.remove(key).is_none() {
            return false;
        }
        if entries.is_empty() {
            let h = *h;
            self.heap.delete(h);
            self.nodes.remove(&prio);
        }
        true
    }

    pub fn peek(&self) -> Option<(i64, &S)> {
        let (_, &p) = self.heap.peek_min()?;
        self.nodes[&p].1.keys().next().map(|k| (p, k))
    }

    /// Number of heap nodes, i.e. distinct priorities present.
    pub fn node_count(&self) -> usize {
        self.heap.len()
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        self.heap.check_invariants()?;
        if self.heap.len() != self.nodes.len() {
            return Err("node count differs from distinct priorities".into());
        }
        Ok(())
    }
}

/// Static entries go to the bucket queue, dynamic ones (and static ones
/// outside the declared range) to the Fibonacci heap. The minimum is taken
/// over both by (priority, secondary key).
#[derive(Clone, Debug)]
pub struct GlobalQueue<T, S> {
    buckets: BucketQueue<S>,
    dynamic: DynQueue<S>,
    loc: HashMap<T, (i64, bool, S)>,
}

impl<T: Hash + Eq + Clone, S: Ord + Clone> GlobalQueue<T, S> {
    pub fn new(static_priorities: impl IntoIterator<Item = i64>) -> GlobalQueue<T, S> {
        GlobalQueue { buckets: BucketQueue::new(static_priorities), dynamic: DynQueue::default(), loc: HashMap::new() }
    }

    pub fn len(&self) -> usize {
        self.loc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loc.is_empty()
    }

    pub fn contains(&self, item: &T) -> bool {
        self.loc.contains_key(item)
    }

    pub fn insert(&mut self, item: T, prio: i64, dynamic: bool, key: S) {
        let in_buckets = !dynamic && self.buckets.supports(prio);
        if in_buckets {
            self.buckets.insert(prio, key.clone());
        } else {
            self.dynamic.insert(prio, key.clone());
        }
        let old = self.loc.insert(item, (prio, in_buckets, key));
        assert!(old.is_none(), "item queued twice");
    }

    pub fn remove(&mut self, item: &T) -> bool {
        let Some((prio, in_buckets, key)) = self.loc.remove(item) else { return false };
        if in_buckets {
            self.buckets.remove(prio, &key);
        } else {
            self.dynamic.remove(prio, &key);
        }
        true
    }

    pub fn peek(&self) -> Option<(i64, &S)> {
        match (self.buckets.peek(), self.dynamic.peek()) {
            (Some(a), Some(b)) => Some(if (a.0, a.1) <= (b.0, b.1) { a } else { b }),
            (a, b) => a.or(b),
        }
    }

    pub fn dynamic_nodes(&self) -> usize {
        self.dynamic.node_count()
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        self.dynamic.check_invariants()
    }
}
