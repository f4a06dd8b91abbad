//! Brute-force reference scheduler. Every prefix firing and batch carries
//! its explicit list of pending extensions and the minimum is found by a
//! linear scan. Ordering and batching policy match [`crate::Scheduler`].

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::hash::Hash;

use crate::sched::{Entity, Item, PeId, PfId, RfId, SchedError, Task, TaskKey};

#[derive(Clone, Debug)]
enum State {
    Active { pending: VecDeque<PeId>, stamp: u64 },
    Grouped(usize),
}

#[derive(Clone, Debug)]
struct Pf {
    prio: i64,
    sched: usize,
    state: State,
}

#[derive(Clone, Debug)]
struct Group {
    members: BTreeSet<(i64, PfId)>,
    batch: Option<(VecDeque<PeId>, u64)>,
}

#[derive(Clone, Debug, Default)]
struct Schedule {
    order: Vec<PeId>,
    passive: usize,
    active: BTreeSet<PfId>,
    batches: BTreeSet<usize>,
    n_pfs: usize,
}

#[derive(Clone, Debug)]
pub struct ShadowScheduler<K> {
    keys: HashMap<K, usize>,
    parent: Vec<usize>,
    scheds: Vec<Schedule>,
    groups: HashMap<usize, Group>,
    next_group: usize,
    pfs: HashMap<PfId, Pf>,
    pes: HashMap<PeId, usize>,
    rfs: HashMap<RfId, (i64, Vec<u64>, u64)>,
    stamp: u64,
}

impl<K: Hash + Eq + Clone> Default for ShadowScheduler<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Hash + Eq + Clone> ShadowScheduler<K> {
    pub fn new() -> ShadowScheduler<K> {
        ShadowScheduler {
            keys: HashMap::new(),
            parent: Vec::new(),
            scheds: Vec::new(),
            groups: HashMap::new(),
            next_group: 0,
            pfs: HashMap::new(),
            pes: HashMap::new(),
            rfs: HashMap::new(),
            stamp: 0,
        }
    }

    fn fresh_stamp(&mut self) -> u64 {
        self.stamp += 1;
        self.stamp
    }

    fn find(&self, mut s: usize) -> usize {
        while self.parent[s] != s {
            s = self.parent[s];
        }
        s
    }

    fn new_group(&mut self) -> usize {
        let g = self.next_group;
        self.next_group += 1;
        self.groups.insert(g, Group { members: BTreeSet::new(), batch: None });
        g
    }

    fn sched_for(&mut self, key: &K) -> usize {
        if let Some(&s) = self.keys.get(key) {
            return self.find(s);
        }
        let s = self.scheds.len();
        let passive = self.new_group();
        self.scheds.push(Schedule { passive, ..Schedule::default() });
        self.parent.push(s);
        self.keys.insert(key.clone(), s);
        s
    }

    fn n_pes(&self, s: usize) -> usize {
        self.scheds[s].order.len()
    }

    fn make_batch(&mut self, s: usize, g: usize, pending: VecDeque<PeId>) {
        let stamp = self.fresh_stamp();
        self.groups.get_mut(&g).unwrap().batch = Some((pending, stamp));
        self.scheds[s].batches.insert(g);
    }

    fn absorb(&mut self, into: usize, from: usize) {
        let moved = self.groups.remove(&from).unwrap().members;
        for &(_, pf) in &moved {
            self.pfs.get_mut(&pf).unwrap().state = State::Grouped(into);
        }
        let g = self.groups.get_mut(&into).unwrap();
        g.members.extend(moved);
        g.batch = None;
    }

    pub fn schedule_pf(&mut self, key: &K, prio: i64, _dynamic: bool, id: PfId) -> Result<(), SchedError> {
        if self.pfs.contains_key(&id) {
            return Err(SchedError::Duplicate(Entity::Pf, id));
        }
        let s = self.sched_for(key);
        let stamp = self.fresh_stamp();
        let pending = self.scheds[s].order.iter().copied().collect();
        self.pfs.insert(id, Pf { prio, sched: s, state: State::Active { pending, stamp } });
        self.scheds[s].active.insert(id);
        self.scheds[s].n_pfs += 1;
        Ok(())
    }

    pub fn schedule_pe(&mut self, key: &K, id: PeId) -> Result<(), SchedError> {
        if self.pes.contains_key(&id) {
            return Err(SchedError::Duplicate(Entity::Pe, id));
        }
        let s = self.sched_for(key);
        self.pes.insert(id, s);
        self.scheds[s].order.push(id);
        for pf in self.scheds[s].active.clone() {
            if let State::Active { pending, .. } = &mut self.pfs.get_mut(&pf).unwrap().state {
                pending.push_back(id);
            }
        }
        for g in self.scheds[s].batches.clone() {
            self.groups.get_mut(&g).unwrap().batch.as_mut().unwrap().0.push_back(id);
        }
        let p = self.scheds[s].passive;
        if !self.groups[&p].members.is_empty() {
            self.scheds[s].passive = self.new_group();
            self.make_batch(s, p, VecDeque::from([id]));
        }
        Ok(())
    }

    pub fn schedule_rf(&mut self, prio: i64, _dynamic: bool, tie: Vec<u64>, id: RfId) -> Result<(), SchedError> {
        if self.rfs.contains_key(&id) {
            return Err(SchedError::Duplicate(Entity::Rf, id));
        }
        let stamp = self.fresh_stamp();
        self.rfs.insert(id, (prio, tie, stamp));
        Ok(())
    }

    pub fn remove_rf(&mut self, id: RfId) -> Result<(), SchedError> {
        self.rfs.remove(&id).map(|_| ()).ok_or(SchedError::Unknown(Entity::Rf, id))
    }

    pub fn remove_pe(&mut self, id: PeId) -> Result<(), SchedError> {
        let s = self.pes.remove(&id).ok_or(SchedError::Unknown(Entity::Pe, id))?;
        let s = self.find(s);
        self.scheds[s].order.retain(|&p| p != id);
        for pf in self.pfs.values_mut() {
            if let State::Active { pending, .. } = &mut pf.state {
                pending.retain(|&p| p != id);
            }
        }
        for g in self.groups.values_mut() {
            if let Some((pending, _)) = &mut g.batch {
                pending.retain(|&p| p != id);
            }
        }
        Ok(())
    }

    pub fn remove_pf(&mut self, id: PfId) -> Result<(), SchedError> {
        let pf = self.pfs.remove(&id).ok_or(SchedError::Unknown(Entity::Pf, id))?;
        let s = self.find(pf.sched);
        self.scheds[s].n_pfs -= 1;
        match pf.state {
            State::Active { .. } => {
                self.scheds[s].active.remove(&id);
            }
            State::Grouped(g) => self.leave_group(s, g, pf.prio, id),
        }
        Ok(())
    }

    fn leave_group(&mut self, s: usize, g: usize, prio: i64, id: PfId) {
        let grp = self.groups.get_mut(&g).unwrap();
        grp.members.remove(&(prio, id));
        if grp.batch.is_some() && grp.members.is_empty() {
            self.groups.remove(&g);
            self.scheds[s].batches.remove(&g);
        }
    }

    fn min_task(&self) -> Option<TaskKey> {
        let mut best: Option<(i64, TaskKey)> = None;
        let mut consider = |prio: i64, key: TaskKey| {
            if best.as_ref().is_none_or(|b| (prio, &key) < (b.0, &b.1)) {
                best = Some((prio, key));
            }
        };
        for (&id, pf) in &self.pfs {
            if let State::Active { stamp, .. } = pf.state {
                consider(pf.prio, TaskKey { class: 0, tie: Vec::new(), stamp, item: Item::Pf(id) });
            }
        }
        for (&g, grp) in &self.groups {
            if let Some((_, stamp)) = grp.batch {
                let prio = grp.members.first().unwrap().0;
                consider(prio, TaskKey { class: 0, tie: Vec::new(), stamp, item: Item::Batch(g) });
            }
        }
        for (&id, (prio, tie, stamp)) in &self.rfs {
            consider(*prio, TaskKey { class: 1, tie: tie.clone(), stamp: *stamp, item: Item::Rf(id) });
        }
        best.map(|b| b.1)
    }

    pub fn execute(&mut self) -> Task {
        loop {
            let Some(key) = self.min_task() else { return Task::Done };
            match key.item {
                Item::Rf(id) => {
                    self.rfs.remove(&id);
                    return Task::Fire(id);
                }
                Item::Pf(id) => {
                    let pf = self.pfs.get_mut(&id).unwrap();
                    let State::Active { pending, .. } = &mut pf.state else { unreachable!() };
                    if let Some(pe) = pending.pop_front() {
                        return Task::Match { pf: id, pe };
                    }
                    let (prio, sched) = (pf.prio, pf.sched);
                    let s = self.find(sched);
                    self.scheds[s].active.remove(&id);
                    let g = self.scheds[s].passive;
                    self.groups.get_mut(&g).unwrap().members.insert((prio, id));
                    self.pfs.get_mut(&id).unwrap().state = State::Grouped(g);
                }
                Item::Batch(g) => {
                    let grp = &self.groups[&g];
                    let (pending, _) = grp.batch.as_ref().unwrap();
                    let &(prio, pf) = grp.members.first().unwrap();
                    let pf_sched = self.pfs[&pf].sched;
                    let s = self.find(pf_sched);
                    match pending.front().copied() {
                        Some(pe) => {
                            let rest: VecDeque<PeId> = pending.iter().skip(1).copied().collect();
                            self.leave_group(s, g, prio, pf);
                            let stamp = self.fresh_stamp();
                            self.pfs.get_mut(&pf).unwrap().state = State::Active { pending: rest, stamp };
                            self.scheds[s].active.insert(pf);
                            return Task::Match { pf, pe };
                        }
                        None => {
                            self.scheds[s].batches.remove(&g);
                            let p = self.scheds[s].passive;
                            self.absorb(p, g);
                        }
                    }
                }
            }
        }
    }

    pub fn merge_schedules(&mut self, a: &K, b: &K) {
        let sa = self.sched_for(a);
        let sb = self.sched_for(b);
        self.merge_ids(sa, sb);
    }

    pub fn rehash_key(&mut self, old: &K, new: K) {
        if old == &new {
            return;
        }
        let Some(s) = self.keys.remove(old) else { return };
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
        let size = |me: &Self, s: usize| me.scheds[s].n_pfs + me.n_pes(s);
        let (l, s) = if size(self, a) >= size(self, b) { (a, b) } else { (b, a) };
        let l_order = self.scheds[l].order.clone();
        let s_order = self.scheds[s].order.clone();

        for pf in self.scheds[l].active.clone() {
            if let State::Active { pending, .. } = &mut self.pfs.get_mut(&pf).unwrap().state {
                pending.extend(&s_order);
            }
        }
        for g in self.scheds[l].batches.clone() {
            self.groups.get_mut(&g).unwrap().batch.as_mut().unwrap().0.extend(&s_order);
        }
        let lp = self.scheds[l].passive;
        if !s_order.is_empty() && !self.groups[&lp].members.is_empty() {
            self.scheds[l].passive = self.new_group();
            self.make_batch(l, lp, s_order.iter().copied().collect());
        }

        for pf in std::mem::take(&mut self.scheds[s].active) {
            let rec = self.pfs.get_mut(&pf).unwrap();
            if let State::Active { pending, .. } = &mut rec.state {
                pending.extend(&l_order);
            }
            rec.sched = l;
            self.scheds[l].active.insert(pf);
        }
        for g in std::mem::take(&mut self.scheds[s].batches) {
            self.groups.get_mut(&g).unwrap().batch.as_mut().unwrap().0.extend(&l_order);
            self.scheds[l].batches.insert(g);
        }
        let sp = self.scheds[s].passive;
        if !self.groups[&sp].members.is_empty() {
            if !l_order.is_empty() {
                self.make_batch(l, sp, l_order.iter().copied().collect());
            } else {
                let lp = self.scheds[l].passive;
                self.absorb(lp, sp);
            }
        } else {
            self.groups.remove(&sp);
        }
        self.scheds[l].order.extend(s_order);
        let n = self.scheds[s].n_pfs;
        self.scheds[l].n_pfs += n;
        self.parent[s] = l;
    }

    pub fn pending_pfs(&self) -> HashSet<PfId> {
        self.pfs.keys().copied().collect()
    }
}
