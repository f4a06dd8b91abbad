use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::hash::Hash;

use thiserror::Error;

use crate::queue::GlobalQueue;

pub type PfId = u64;
pub type PeId = u64;
pub type RfId = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Item {
    Pf(PfId),
    Batch(usize),
    Rf(RfId),
}

/// Secondary ordering inside one priority: matching work (class 0) before
/// rule firings (class 1), then the caller's tie vector, then activation
/// stamp.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TaskKey {
    pub class: u8,
    pub tie: Vec<u64>,
    pub stamp: u64,
    pub item: Item,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Match { pf: PfId, pe: PeId },
    Fire(RfId),
    Done,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Entity {
    Pf,
    Pe,
    Rf,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchedError {
    #[error("{0:?} {1} is already scheduled")]
    Duplicate(Entity, u64),
    #[error("{0:?} {1} is not scheduled")]
    Unknown(Entity, u64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub pf_scheduled: u64,
    pub pe_scheduled: u64,
    pub rf_scheduled: u64,
    pub pf_removed: u64,
    pub pe_removed: u64,
    pub rf_removed: u64,
    pub matches: u64,
    pub fires: u64,
    pub passivations: u64,
    pub batch_passivations: u64,
    pub reactivations: u64,
    pub merges: u64,
    pub pe_copies: u64,
    pub unsuccessful_executes: u64,
    pub queue_inserts: u64,
    pub queue_removes: u64,
    pub rehashes: u64,
}

impl Counters {
    pub fn snapshot(&self) -> BTreeMap<&'static str, u64> {
        BTreeMap::from([
            ("pf_scheduled", self.pf_scheduled),
            ("pe_scheduled", self.pe_scheduled),
            ("rf_scheduled", self.rf_scheduled),
            ("pf_removed", self.pf_removed),
            ("pe_removed", self.pe_removed),
            ("rf_removed", self.rf_removed),
            ("matches", self.matches),
            ("fires", self.fires),
            ("passivations", self.passivations),
            ("batch_passivations", self.batch_passivations),
            ("reactivations", self.reactivations),
            ("merges", self.merges),
            ("pe_copies", self.pe_copies),
            ("unsuccessful_executes", self.unsuccessful_executes),
            ("queue_inserts", self.queue_inserts),
            ("queue_removes", self.queue_removes),
            ("rehashes", self.rehashes),
        ])
    }
}

/// Append-only list of extension slots. Removed slots are skipped through
/// a "next live slot" union-find.
#[derive(Clone, Debug)]
struct PeList {
    slots: Vec<PeId>,
    next: Vec<u32>,
}

impl PeList {
    fn new() -> PeList {
        PeList { slots: Vec::new(), next: vec![0] }
    }

    fn len(&self) -> u32 {
        self.slots.len() as u32
    }

    fn push(&mut self, pe: PeId) -> u32 {
        let i = self.len();
        self.slots.push(pe);
        self.next.push(i + 1);
        i
    }

    fn kill(&mut self, i: u32) {
        self.next[i as usize] = i + 1;
    }

    fn next_live(&mut self, i: u32) -> u32 {
        let mut r = i;
        while self.next[r as usize] != r {
            r = self.next[r as usize];
        }
        let mut j = i;
        while self.next[j as usize] != r {
            let n = self.next[j as usize];
            self.next[j as usize] = r;
            j = n;
        }
        r
    }
}

/// Position of a prefix firing (or batch) in its schedule: closed segments
/// of older lists still owed, then an open position in the current list.
#[derive(Clone, Debug)]
struct Cursor {
    extras: VecDeque<(usize, u32, u32)>,
    list: usize,
    idx: u32,
}

impl Cursor {
    fn at(list: usize, idx: u32) -> Cursor {
        Cursor { extras: VecDeque::new(), list, idx }
    }

    fn next(&mut self, lists: &mut [PeList], consume: bool) -> Option<PeId> {
        while let Some(seg) = self.extras.front_mut() {
            let l = &mut lists[seg.0];
            let j = l.next_live(seg.1);
            if j < seg.2 {
                seg.1 = if consume { j + 1 } else { j };
                return Some(l.slots[j as usize]);
            }
            self.extras.pop_front();
        }
        let l = &mut lists[self.list];
        let j = l.next_live(self.idx);
        if j < l.len() {
            self.idx = if consume { j + 1 } else { j };
            return Some(l.slots[j as usize]);
        }
        self.idx = j;
        None
    }
}

#[derive(Clone, Debug)]
enum PfState {
    Active { cursor: Cursor },
    Grouped(usize),
}

#[derive(Clone, Debug)]
struct Pf {
    prio: i64,
    dynamic: bool,
    sched: usize,
    state: PfState,
}

/// A passive set, or a batch of reactivated firings sharing one cursor.
#[derive(Clone, Debug)]
struct Group {
    members: BTreeSet<(i64, PfId)>,
    sched: usize,
    batch: Option<(Cursor, u64)>,
}

#[derive(Clone, Debug)]
struct Pe {
    sched: usize,
    slots: Vec<(usize, u32)>,
}

#[derive(Clone, Debug)]
struct Schedule {
    list: usize,
    passive: usize,
    active: HashSet<PfId>,
    batches: HashSet<usize>,
    n_pfs: usize,
    n_pes: usize,
}

/// Mergeable W(r,t) schedules over a global priority queue.
#[derive(Clone, Debug)]
pub struct Scheduler<K> {
    keys: HashMap<K, usize>,
    sched_parent: Vec<usize>,
    scheds: Vec<Schedule>,
    lists: Vec<PeList>,
    groups: HashMap<usize, Group>,
    next_group: usize,
    pfs: HashMap<PfId, Pf>,
    pes: HashMap<PeId, Pe>,
    rfs: HashSet<RfId>,
    queue: GlobalQueue<Item, TaskKey>,
    stamp: u64,
    counters: Counters,
}

impl<K: Hash + Eq + Clone> Scheduler<K> {
    pub fn new(static_priorities: impl IntoIterator<Item = i64>) -> Scheduler<K> {
        Scheduler {
            keys: HashMap::new(),
            sched_parent: Vec::new(),
            scheds: Vec::new(),
            lists: Vec::new(),
            groups: HashMap::new(),
            next_group: 0,
            pfs: HashMap::new(),
            pes: HashMap::new(),
            rfs: HashSet::new(),
            queue: GlobalQueue::new(static_priorities),
            stamp: 0,
            counters: Counters::default(),
        }
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    /// Distinct priorities currently held by the dynamic heap.
    pub fn dynamic_nodes(&self) -> usize {
        self.queue.dynamic_nodes()
    }

    fn fresh_stamp(&mut self) -> u64 {
        self.stamp += 1;
        self.stamp
    }

    fn find(&mut self, mut s: usize) -> usize {
        let mut root = s;
        while self.sched_parent[root] != root {
            root = self.sched_parent[root];
        }
        while self.sched_parent[s] != root {
            let n = self.sched_parent[s];
            self.sched_parent[s] = root;
            s = n;
        }
        root
    }

    fn new_group(&mut self, sched: usize) -> usize {
        let g = self.next_group;
        self.next_group += 1;
        self.groups.insert(g, Group { members: BTreeSet::new(), sched, batch: None });
        g
    }

    fn new_schedule(&mut self) -> usize {
        let s = self.scheds.len();
        self.lists.push(PeList::new());
        self.sched_parent.push(s);
        let passive = self.new_group(s);
        self.scheds.push(Schedule {
            list: self.lists.len() - 1,
            passive,
            active: HashSet::new(),
            batches: HashSet::new(),
            n_pfs: 0,
            n_pes: 0,
        });
        s
    }

    fn sched_for(&mut self, key: &K) -> usize {
        let s = match self.keys.get(key) {
            Some(&s) => s,
            None => {
                let s = self.new_schedule();
                self.keys.insert(key.clone(), s);
                s
            }
        };
        self.find(s)
    }

    /// Current schedule of `key`, if one was ever created.
    pub fn schedule_of(&mut self, key: &K) -> Option<usize> {
        let s = *self.keys.get(key)?;
        Some(self.find(s))
    }

    fn enqueue(&mut self, item: Item, prio: i64, dynamic: bool, class: u8, tie: Vec<u64>, stamp: u64) {
        self.counters.queue_inserts += 1;
        self.queue.insert(item, prio, dynamic, TaskKey { class, tie, stamp, item });
    }

    fn dequeue(&mut self, item: Item) {
        if self.queue.remove(&item) {
            self.counters.queue_removes += 1;
        }
    }

    fn enqueue_batch(&mut self, g: usize) {
        let grp = &self.groups[&g];
        let (prio, pf) = *grp.members.first().expect("non-empty batch");
        let stamp = grp.batch.as_ref().expect("batch").1;
        let dynamic = self.pfs[&pf].dynamic;
        self.enqueue(Item::Batch(g), prio, dynamic, 0, Vec::new(), stamp);
    }

    /// Turn a non-empty passive group into a batch starting at `cursor`.
    fn activate_group(&mut self, s: usize, g: usize, cursor: Cursor) {
        let stamp = self.fresh_stamp();
        self.groups.get_mut(&g).unwrap().batch = Some((cursor, stamp));
        self.scheds[s].batches.insert(g);
        self.enqueue_batch(g);
        self.counters.reactivations += 1;
    }

    /// Merge group `b` into `a` (moving the smaller member set).
    fn union_groups(&mut self, a: usize, b: usize, sched: usize) -> usize {
        let (keep, drop) =
            if self.groups[&a].members.len() >= self.groups[&b].members.len() { (a, b) } else { (b, a) };
        let moved = self.groups.remove(&drop).unwrap().members;
        for &(_, pf) in &moved {
            self.pfs.get_mut(&pf).unwrap().state = PfState::Grouped(keep);
        }
        let k = self.groups.get_mut(&keep).unwrap();
        k.members.extend(moved);
        k.batch = None;
        k.sched = sched;
        keep
    }

    pub fn schedule_pf(&mut self, key: &K, prio: i64, dynamic: bool, id: PfId) -> Result<(), SchedError> {
        if self.pfs.contains_key(&id) {
            return Err(SchedError::Duplicate(Entity::Pf, id));
        }
        let s = self.sched_for(key);
        let stamp = self.fresh_stamp();
        let cursor = Cursor::at(self.scheds[s].list, 0);
        self.pfs.insert(id, Pf { prio, dynamic, sched: s, state: PfState::Active { cursor } });
        self.scheds[s].active.insert(id);
        self.scheds[s].n_pfs += 1;
        self.enqueue(Item::Pf(id), prio, dynamic, 0, Vec::new(), stamp);
        self.counters.pf_scheduled += 1;
        Ok(())
    }

    pub fn schedule_pe(&mut self, key: &K, id: PeId) -> Result<(), SchedError> {
        if self.pes.contains_key(&id) {
            return Err(SchedError::Duplicate(Entity::Pe, id));
        }
        let s = self.sched_for(key);
        let list = self.scheds[s].list;
        let slot = self.lists[list].push(id);
        self.pes.insert(id, Pe { sched: s, slots: vec![(list, slot)] });
        self.scheds[s].n_pes += 1;
        self.counters.pe_scheduled += 1;
        let g = self.scheds[s].passive;
        if !self.groups[&g].members.is_empty() {
            self.scheds[s].passive = self.new_group(s);
            self.activate_group(s, g, Cursor::at(list, slot));
        }
        Ok(())
    }

    /// Rule firings are ordered by `tie` among equal priorities.
    pub fn schedule_rf(&mut self, prio: i64, dynamic: bool, tie: Vec<u64>, id: RfId) -> Result<(), SchedError> {
        if !self.rfs.insert(id) {
            return Err(SchedError::Duplicate(Entity::Rf, id));
        }
        let stamp = self.fresh_stamp();
        self.enqueue(Item::Rf(id), prio, dynamic, 1, tie, stamp);
        self.counters.rf_scheduled += 1;
        Ok(())
    }

    pub fn remove_rf(&mut self, id: RfId) -> Result<(), SchedError> {
        if !self.rfs.remove(&id) {
            return Err(SchedError::Unknown(Entity::Rf, id));
        }
        self.dequeue(Item::Rf(id));
        self.counters.rf_removed += 1;
        Ok(())
    }

    pub fn remove_pe(&mut self, id: PeId) -> Result<(), SchedError> {
        let pe = self.pes.remove(&id).ok_or(SchedError::Unknown(Entity::Pe, id))?;
        for (l, slot) in pe.slots {
            self.lists[l].kill(slot);
        }
        let s = self.find(pe.sched);
        self.scheds[s].n_pes -= 1;
        self.counters.pe_removed += 1;
        Ok(())
    }

    pub fn remove_pf(&mut self, id: PfId) -> Result<(), SchedError> {
        let pf = self.pfs.remove(&id).ok_or(SchedError::Unknown(Entity::Pf, id))?;
        let s = self.find(pf.sched);
        self.scheds[s].n_pfs -= 1;
        self.counters.pf_removed += 1;
        match pf.state {
            PfState::Active { .. } => {
                self.scheds[s].active.remove(&id);
                self.dequeue(Item::Pf(id));
            }
            PfState::Grouped(g) => self.leave_group(g, pf.prio, id),
        }
        Ok(())
    }

    fn leave_group(&mut self, g: usize, prio: i64, id: PfId) {
        let grp = self.groups.get_mut(&g).unwrap();
        let was_min = grp.members.first() == Some(&(prio, id));
        grp.members.remove(&(prio, id));
        if grp.batch.is_none() {
            return;
        }
        if grp.members.is_empty() {
            let s = grp.sched;
            self.groups.remove(&g);
            let s = self.find(s);
            self.scheds[s].batches.remove(&g);
            self.dequeue(Item::Batch(g));
        } else if was_min {
            self.dequeue(Item::Batch(g));
            self.enqueue_batch(g);
        }
    }

    fn passivate_pf(&mut self, id: PfId) {
        let pf = &self.pfs[&id];
        let (prio, s) = (pf.prio, pf.sched);
        let s = self.find(s);
        self.dequeue(Item::Pf(id));
        self.scheds[s].active.remove(&id);
        let g = self.scheds[s].passive;
        self.groups.get_mut(&g).unwrap().members.insert((prio, id));
        let pf = self.pfs.get_mut(&id).unwrap();
        pf.state = PfState::Grouped(g);
        pf.sched = s;
        self.counters.passivations += 1;
    }

    /// Run the highest-priority task. Prefix firings or batches with
    /// nothing left to match are passivated on the way.
    pub fn execute(&mut self) -> Task {
        loop {
            let Some((_, key)) = self.queue.peek() else { return Task::Done };
            match key.item {
                Item::Rf(id) => {
                    self.rfs.remove(&id);
                    self.dequeue(Item::Rf(id));
                    self.counters.fires += 1;
                    return Task::Fire(id);
                }
                Item::Pf(id) => {
                    let PfState::Active { cursor } = &mut self.pfs.get_mut(&id).unwrap().state else {
                        unreachable!("queued prefix firing is active")
                    };
                    if let Some(pe) = cursor.next(&mut self.lists, true) {
                        self.counters.matches += 1;
                        return Task::Match { pf: id, pe };
                    }
                    self.passivate_pf(id);
                    self.counters.unsuccessful_executes += 1;
                }
                Item::Batch(g) => {
                    let grp = self.groups.get_mut(&g).unwrap();
                    let (cursor, _) = grp.batch.as_mut().unwrap();
                    match cursor.next(&mut self.lists, false) {
                        Some(pe) => {
                            let mut own = cursor.clone();
                            own.next(&mut self.lists, true);
                            let &(prio, pf) = grp.members.first().unwrap();
                            self.leave_group(g, prio, pf);
                            let stamp = self.fresh_stamp();
                            let rec = self.pfs.get_mut(&pf).unwrap();
                            rec.state = PfState::Active { cursor: own };
                            let (s, dynamic) = (rec.sched, rec.dynamic);
                            let s = self.find(s);
                            self.pfs.get_mut(&pf).unwrap().sched = s;
                            self.scheds[s].active.insert(pf);
                            self.enqueue(Item::Pf(pf), prio, dynamic, 0, Vec::new(), stamp);
                            self.counters.matches += 1;
                            return Task::Match { pf, pe };
                        }
                        None => {
                            let s = grp.sched;
                            let s = self.find(s);
                            self.dequeue(Item::Batch(g));
                            self.scheds[s].batches.remove(&g);
                            let p = self.scheds[s].passive;
                            self.scheds[s].passive = self.union_groups(p, g, s);
                            self.counters.batch_passivations += 1;
                            self.counters.unsuccessful_executes += 1;
                        }
                    }
                }
            }
        }
    }

    /// Make `a` and `b` share one schedule. Every prefix firing still meets
    /// each live extension it has not met, exactly once.
    pub fn merge_schedules(&mut self, a: &K, b: &K) {
        let sa = self.sched_for(a);
        let sb = self.sched_for(b);
        self.merge_ids(sa, sb);
    }

    /// Re-file the schedule of `old` under `new`, merging when `new` is
    /// already taken.
    pub fn rehash_key(&mut self, old: &K, new: K) {
        if old == &new {
            return;
        }
        let Some(s) = self.keys.remove(old) else { return };
        self.counters.rehashes += 1;
        match self.keys.get(&new) {
            Some(&t) => self.merge_ids(t, s),
            None => {
                self.keys.insert(new, s);
            }
        }
    }

    fn merge_ids(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        self.counters.merges += 1;
        let size = |s: &Schedule| s.n_pfs + s.n_pes;
        let (l, s) = if size(&self.scheds[a]) >= size(&self.scheds[b]) { (a, b) } else { (b, a) };
        let (l_list, s_list) = (self.scheds[l].list, self.scheds[s].list);
        let len_l = self.lists[l_list].len();
        let len_s = self.lists[s_list].len();

        // Copy the live extensions of S behind those of L.
        let mut copied = 0;
        let mut j = self.lists[s_list].next_live(0);
        while j < len_s {
            let pe = self.lists[s_list].slots[j as usize];
            let slot = self.lists[l_list].push(pe);
            self.pes.get_mut(&pe).unwrap().slots.push((l_list, slot));
            copied += 1;
            j = self.lists[s_list].next_live(j + 1);
        }
        self.counters.pe_copies += copied as u64;
        let fresh_main = len_l + copied;

        // Passive firings of L now owe S's extensions.
        let lp = self.scheds[l].passive;
        if self.scheds[s].n_pes > 0 && !self.groups[&lp].members.is_empty() {
            self.scheds[l].passive = self.new_group(l);
            self.activate_group(l, lp, Cursor::at(l_list, len_l));
        }

        // Firings of S owe the rest of S, then all of L.
        let retarget = |c: &mut Cursor| {
            c.extras.push_back((c.list, c.idx, len_s));
            c.extras.push_back((l_list, 0, len_l));
            c.list = l_list;
            c.idx = fresh_main;
        };
        let active: Vec<PfId> = self.scheds[s].active.drain().collect();
        for id in active {
            let pf = self.pfs.get_mut(&id).unwrap();
            if let PfState::Active { cursor } = &mut pf.state {
                retarget(cursor);
            }
            pf.sched = l;
            self.scheds[l].active.insert(id);
        }
        let batches: Vec<usize> = self.scheds[s].batches.drain().collect();
        for g in batches {
            let grp = self.groups.get_mut(&g).unwrap();
            retarget(&mut grp.batch.as_mut().unwrap().0);
            grp.sched = l;
            self.scheds[l].batches.insert(g);
        }

        // Passive firings of S owe all of L.
        let sp = self.scheds[s].passive;
        if !self.groups[&sp].members.is_empty() {
            if self.scheds[l].n_pes > 0 {
                let mut c = Cursor::at(l_list, fresh_main);
                c.extras.push_back((l_list, 0, len_l));
                self.groups.get_mut(&sp).unwrap().sched = l;
                self.activate_group(l, sp, c);
            } else {
                let lp = self.scheds[l].passive;
                self.scheds[l].passive = self.union_groups(lp, sp, l);
            }
        } else {
            self.groups.remove(&sp);
        }
        let (n_pfs, n_pes) = (self.scheds[s].n_pfs, self.scheds[s].n_pes);
        self.scheds[l].n_pfs += n_pfs;
        self.scheds[l].n_pes += n_pes;
        self.sched_parent[s] = l;
    }

    /// Structural self-check used by tests.
    pub fn check_invariants(&mut self) -> Result<(), String> {
        self.queue.check_invariants()?;
        let mut queued = 0;
        for (&id, pf) in &self.pfs {
            match &pf.state {
                PfState::Active { .. } => {
                    if !self.queue.contains(&Item::Pf(id)) {
                        return Err(format!("active pf {id} not queued"));
                    }
                    queued += 1;
                }
                PfState::Grouped(g) => {
                    let grp = self.groups.get(g).ok_or(format!("pf {id} in dead group"))?;
                    if !grp.members.contains(&(pf.prio, id)) {
                        return Err(format!("pf {id} missing from its group"));
                    }
                }
            }
        }
        let batches = self.groups.values().filter(|g| g.batch.is_some()).count();
        if queued + batches + self.rfs.len() != self.queue.len() {
            return Err("queue holds stale entries".into());
        }
        let members: usize = self.groups.values().map(|g| g.members.len()).sum();
        if queued + members != self.pfs.len() {
            return Err("prefix firing conservation violated".into());
        }
        Ok(())
    }
}
