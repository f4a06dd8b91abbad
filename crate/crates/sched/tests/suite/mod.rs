//! Randomized scheduler checks shared by the unit tests and the
//! acceptance suite.

use std::collections::{BTreeMap, HashMap, HashSet};

use chr_sched::{FibHeap, Handle, SchedError, Scheduler, ShadowScheduler, Task};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random push, pop, decrease-key and delete against a sorted map.
pub fn fib_oracle(seed: u64, ops: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut heap = FibHeap::new();
    let mut oracle: BTreeMap<(i64, u64), ()> = BTreeMap::new();
    let mut live: Vec<(Handle, (i64, u64))> = Vec::new();
    for n in 0..ops {
        match rng.gen_range(0..10) {
            0..=3 => {
                let k = (rng.gen_range(-500..500), n);
                live.push((heap.push(k), k));
                oracle.insert(k, ());
            }
            4..=5 => {
                let got = heap.pop_min();
                let want = oracle.pop_first().map(|e| e.0);
                assert_eq!(got, want);
                if let Some(k) = got {
                    live.retain(|e| e.1 != k);
                }
            }
            6..=7 if !live.is_empty() => {
                let i = rng.gen_range(0..live.len());
                let (h, k) = live[i];
                let nk = (k.0 - rng.gen_range(0..50), k.1);
                heap.decrease_key(h, nk);
                oracle.remove(&k);
                oracle.insert(nk, ());
                live[i].1 = nk;
            }
            8 if !live.is_empty() => {
                let (h, k) = live.swap_remove(rng.gen_range(0..live.len()));
                assert_eq!(heap.delete(h), k);
                oracle.remove(&k);
            }
            _ => {
                assert_eq!(heap.peek_min().map(|e| *e.1), oracle.keys().next().copied());
            }
        }
        assert_eq!(heap.len(), oracle.len());
        if n % 500 == 0 {
            heap.check_invariants().unwrap();
        }
    }
    heap.check_invariants().unwrap();
}

#[derive(Debug, Clone)]
pub enum Op {
    Pf(u32, i64, u64),
    Pe(u32, u64),
    Rf(i64, Vec<u64>, u64),
    RemovePf(u64),
    RemovePe(u64),
    RemoveRf(u64),
    Exec,
    Merge(u32, u32),
    Rehash(u32, u32),
}

pub fn random_ops(rng: &mut ChaCha8Rng, len: usize) -> Vec<Op> {
    let mut ops = Vec::new();
    let mut next = 0u64;
    let (mut pfs, mut pes, mut rfs) = (Vec::new(), Vec::new(), Vec::new());
    let key = |rng: &mut ChaCha8Rng| rng.gen_range(0..5u32);
    for _ in 0..len {
        next += 1;
        let op = match rng.gen_range(0..12) {
            0 | 1 => {
                pfs.push(next);
                Op::Pf(key(rng), rng.gen_range(1..4), next)
            }
            2..=4 => {
                pes.push(next);
                Op::Pe(key(rng), next)
            }
            5 => {
                rfs.push(next);
                Op::Rf(rng.gen_range(1..4), vec![rng.gen_range(0..3)], next)
            }
            6 if !pfs.is_empty() => Op::RemovePf(pfs.swap_remove(rng.gen_range(0..pfs.len()))),
            7 if !pes.is_empty() => Op::RemovePe(pes.swap_remove(rng.gen_range(0..pes.len()))),
            8 if !rfs.is_empty() => Op::RemoveRf(rfs.swap_remove(rng.gen_range(0..rfs.len()))),
            9 => Op::Merge(key(rng), key(rng)),
            10 => Op::Rehash(key(rng), key(rng)),
            _ => Op::Exec,
        };
        ops.push(op);
    }
    ops
}

pub fn apply_real(s: &mut Scheduler<u32>, op: &Op) -> Result<Option<Task>, SchedError> {
    match op {
        Op::Pf(k, p, id) => s.schedule_pf(k, *p, *p == 3, *id).map(|_| None),
        Op::Pe(k, id) => s.schedule_pe(k, *id).map(|_| None),
        Op::Rf(p, t, id) => s.schedule_rf(*p, *p == 3, t.clone(), *id).map(|_| None),
        Op::RemovePf(id) => s.remove_pf(*id).map(|_| None),
        Op::RemovePe(id) => s.remove_pe(*id).map(|_| None),
        Op::RemoveRf(id) => s.remove_rf(*id).map(|_| None),
        Op::Exec => Ok(Some(s.execute())),
        Op::Merge(a, b) => {
            s.merge_schedules(a, b);
            Ok(None)
        }
        Op::Rehash(a, b) => {
            s.rehash_key(a, *b);
            Ok(None)
        }
    }
}

fn apply_shadow(s: &mut ShadowScheduler<u32>, op: &Op) -> Result<Option<Task>, SchedError> {
    match op {
        Op::Pf(k, p, id) => s.schedule_pf(k, *p, *p == 3, *id).map(|_| None),
        Op::Pe(k, id) => s.schedule_pe(k, *id).map(|_| None),
        Op::Rf(p, t, id) => s.schedule_rf(*p, *p == 3, t.clone(), *id).map(|_| None),
        Op::RemovePf(id) => s.remove_pf(*id).map(|_| None),
        Op::RemovePe(id) => s.remove_pe(*id).map(|_| None),
        Op::RemoveRf(id) => s.remove_rf(*id).map(|_| None),
        Op::Exec => Ok(Some(s.execute())),
        Op::Merge(a, b) => {
            s.merge_schedules(a, b);
            Ok(None)
        }
        Op::Rehash(a, b) => {
            s.rehash_key(a, *b);
            Ok(None)
        }
    }
}

/// Matched pfs keep running, so a drained schedule re-executes forever
/// only if tasks keep coming; a fixed cap guards against livelock.
fn drain_both(real: &mut Scheduler<u32>, shadow: &mut ShadowScheduler<u32>) {
    for _ in 0..10_000 {
        let (a, b) = (real.execute(), shadow.execute());
        assert_eq!(a, b);
        if a == Task::Done {
            return;
        }
    }
    panic!("drain did not terminate");
}


/// Random op sequences of length ≤ 50 against the shadow scheduler.
/// Returns the totals of matches, merges and batch reactivations.
pub fn shadow_agreement(seed: u64, rounds: usize) -> (u64, u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut matches, mut merges, mut batches) = (0, 0, 0);
    for round in 0..rounds {
        let len = rng.gen_range(1..=50);
        let ops = random_ops(&mut rng, len);
        let mut real = Scheduler::new([1, 2]);
        let mut shadow = ShadowScheduler::new();
        for (i, op) in ops.iter().enumerate() {
            let a = apply_real(&mut real, op);
            let b = apply_shadow(&mut shadow, op);
            assert_eq!(a, b, "round {round} op {i}: {op:?}\n{ops:?}");
            real.check_invariants().unwrap_or_else(|e| panic!("round {round} op {i}: {e}"));
        }
        drain_both(&mut real, &mut shadow);
        let c = real.counters();
        matches += c.matches;
        merges += c.merges;
        batches += c.reactivations;
    }
    (matches, merges, batches)
}

/// Every (pf, pe) pair whose keys end up merged is matched exactly once.
pub fn merge_exhaustive(seed: u64, scenarios: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for scenario in 0..scenarios {
        let mut s: Scheduler<u32> = Scheduler::new([1, 2, 3]);
        let mut home: HashMap<u64, u32> = HashMap::new();
        let mut pfs = Vec::new();
        let mut pes = Vec::new();
        let mut parent: Vec<u32> = (0..6).collect();
        fn find(p: &mut [u32], mut x: u32) -> u32 {
            while p[x as usize] != x {
                x = p[x as usize];
            }
            x
        }
        let mut seen: HashSet<(u64, u64)> = HashSet::new();
        let record = |t: Task, seen: &mut HashSet<(u64, u64)>| {
            if let Task::Match { pf, pe } = t {
                assert!(seen.insert((pf, pe)), "scenario {scenario}: repeated {pf}/{pe}");
            }
        };
        for id in 0..rng.gen_range(5..40u64) {
            match rng.gen_range(0..6) {
                0 | 1 => {
                    let k = rng.gen_range(0..6);
                    s.schedule_pf(&k, rng.gen_range(1..4), false, id).unwrap();
                    home.insert(id, k);
                    pfs.push(id);
                }
                2 | 3 => {
                    let k = rng.gen_range(0..6);
                    s.schedule_pe(&k, id).unwrap();
                    home.insert(id, k);
                    pes.push(id);
                }
                4 => {
                    let (a, b) = (rng.gen_range(0..6), rng.gen_range(0..6));
                    s.merge_schedules(&a, &b);
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra as usize] = rb;
                }
                _ => {
                    for _ in 0..rng.gen_range(0..4) {
                        let t = s.execute();
                        record(t, &mut seen);
                    }
                }
            }
            s.check_invariants().unwrap();
        }
        loop {
            let t = s.execute();
            if t == Task::Done {
                break;
            }
            record(t, &mut seen);
        }
        let mut want = HashSet::new();
        for &pf in &pfs {
            for &pe in &pes {
                if find(&mut parent, home[&pf]) == find(&mut parent, home[&pe]) {
                    want.insert((pf, pe));
                }
            }
        }
        assert_eq!(seen, want, "scenario {scenario}");
    }
}
