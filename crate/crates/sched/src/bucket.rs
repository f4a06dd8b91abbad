use std::collections::{BTreeMap, HashMap};

/// Priority queue over a fixed set of static priorities. Each bucket keeps
/// its entries ordered by a secondary key.
#[derive(Clone, Debug)]
pub struct BucketQueue<S> {
    prios: Vec<i64>,
    index: HashMap<i64, usize>,
    buckets: Vec<BTreeMap<S, ()>>,
    min: usize,
    len: usize,
}

impl<S: Ord + Clone> BucketQueue<S> {
    pub fn new(priorities: impl IntoIterator<Item = i64>) -> BucketQueue<S> {
        let mut prios: Vec<i64> = priorities.into_iter().collect();
        prios.sort_unstable();
        prios.dedup();
        let index = prios.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        let buckets = prios.iter().map(|_| BTreeMap::new()).collect();
        let min = prios.len();
        BucketQueue { prios, index, buckets, min, len: 0 }
    }

    pub fn supports(&self, prio: i64) -> bool {
        self.index.contains_key(&prio)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn insert(&mut self, prio: i64, key: S) -> bool {
        let i = self.index[&prio];
        let fresh = self.buckets[i].insert(key, ()).is_none();
        if fresh {
            self.len += 1;
            self.min = self.min.min(i);
        }
        fresh
    }

    pub fn remove(&mut self, prio: i64, key: &S) -> bool {
        let Some(&i) = self.index.get(&prio) else { return false };
        if self.buckets[i].remove(key).is_none() {
            return false;
        }
        self.len -= 1;
        while self.min < self.buckets.len() && self.buckets[self.min].is_empty() {
            self.min += 1;
        }
        true
    }

    pub fn peek(&self) -> Option<(i64, &S)> {
        let b = self.buckets.get(self.min)?;
        b.keys().next().map(|k| (self.prios[self.min], k))
    }
}
