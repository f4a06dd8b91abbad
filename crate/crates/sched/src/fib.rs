//! Fibonacci heap over an index arena. Handles stay valid until their
//! entry is removed.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Handle(usize);

#[derive(Clone, Debug)]
struct Node<K> {
    key: Option<K>,
    parent: Option<usize>,
    child: Option<usize>,
    left: usize,
    right: usize,
    degree: usize,
    mark: bool,
}

#[derive(Clone, Debug)]
pub struct FibHeap<K> {
    nodes: Vec<Node<K>>,
    free: Vec<usize>,
    min: Option<usize>,
    len: usize,
}

impl<K: Ord> Default for FibHeap<K> {
    fn default() -> Self {
        FibHeap::new()
    }
}

impl<K: Ord> FibHeap<K> {
    pub fn new() -> FibHeap<K> {
        FibHeap { nodes: Vec::new(), free: Vec::new(), min: None, len: 0 }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn key(&self, i: usize) -> &K {
        self.nodes[i].key.as_ref().expect("live node")
    }

    pub fn get(&self, h: Handle) -> Option<&K> {
        self.nodes.get(h.0).and_then(|n| n.key.as_ref())
    }

    fn alloc(&mut self, key: K) -> usize {
        let node = Node { key: Some(key), parent: None, child: None, left: 0, right: 0, degree: 0, mark: false };
        let i = match self.free.pop() {
            Some(i) => {
                self.nodes[i] = node;
                i
            }
            None => {
                self.nodes.push(node);
                self.nodes.len() - 1
            }
        };
        self.nodes[i].left = i;
        self.nodes[i].right = i;
        i
    }

    // Insert the single node `x` into the circular list containing `at`.
    fn splice(&mut self, at: usize, x: usize) {
        let r = self.nodes[at].right;
        self.nodes[x].left = at;
        self.nodes[x].right = r;
        self.nodes[at].right = x;
        self.nodes[r].left = x;
    }

    fn unlink(&mut self, x: usize) {
        let (l, r) = (self.nodes[x].left, self.nodes[x].right);
        self.nodes[l].right = r;
        self.nodes[r].left = l;
        self.nodes[x].left = x;
        self.nodes[x].right = x;
    }

    fn add_root(&mut self, x: usize) {
        self.nodes[x].parent = None;
        self.nodes[x].mark = false;
        match self.min {
            None => self.min = Some(x),
            Some(m) => {
                self.splice(m, x);
                if self.key(x) < self.key(m) {
                    self.min = Some(x);
                }
            }
        }
    }

    pub fn push(&mut self, key: K) -> Handle {
        let x = self.alloc(key);
        self.add_root(x);
        self.len += 1;
        Handle(x)
    }

    pub fn peek_min(&self) -> Option<(Handle, &K)> {
        self.min.map(|m| (Handle(m), self.key(m)))
    }

    fn children(&self, x: usize) -> Vec<usize> {
        let mut out = Vec::new();
        if let Some(c) = self.nodes[x].child {
            let mut y = c;
            loop {
                out.push(y);
                y = self.nodes[y].right;
                if y == c {
                    break;
                }
            }
        }
        out
    }

    fn roots(&self) -> Vec<usize> {
        let mut out = Vec::new();
        if let Some(m) = self.min {
            let mut y = m;
            loop {
                out.push(y);
                y = self.nodes[y].right;
                if y == m {
                    break;
                }
            }
        }
        out
    }

    // Detach root `x` from the root list, promoting its children. The min
    // pointer is left for the caller to fix.
    fn remove_root(&mut self, x: usize) -> K {
        for c in self.children(x) {
            self.unlink(c);
            self.nodes[c].parent = None;
            self.nodes[c].mark = false;
            self.splice(x, c);
        }
        self.nodes[x].child = None;
        let next = self.nodes[x].right;
        self.unlink(x);
        if self.min == Some(x) {
            self.min = if next == x { None } else { Some(next) };
        }
        self.len -= 1;
        self.free.push(x);
        self.nodes[x].key.take().expect("live node")
    }

    pub fn pop_min(&mut self) -> Option<K> {
        let m = self.min?;
        let k = self.remove_root(m);
        if self.min.is_some() {
            self.consolidate();
        }
        Some(k)
    }

    fn link(&mut self, y: usize, x: usize) {
        self.unlink(y);
        self.nodes[y].parent = Some(x);
        self.nodes[y].mark = false;
        match self.nodes[x].child {
            None => self.nodes[x].child = Some(y),
            Some(c) => self.splice(c, y),
        }
        self.nodes[x].degree += 1;
    }

    fn consolidate(&mut self) {
        let mut table: Vec<Option<usize>> = Vec::new();
        for w in self.roots() {
            let mut x = w;
            let mut d = self.nodes[x].degree;
            loop {
                if table.len() <= d {
                    table.resize(d + 1, None);
                }
                let Some(mut y) = table[d].take() else { break };
                if self.key(y) < self.key(x) {
                    std::mem::swap(&mut x, &mut y);
                }
                self.link(y, x);
                d += 1;
            }
            table[d] = Some(x);
        }
        self.min = None;
        for x in table.into_iter().flatten() {
            self.nodes[x].left = x;
            self.nodes[x].right = x;
            self.add_root(x);
        }
    }

    fn cut(&mut self, x: usize, p: usize) {
        let next = self.nodes[x].right;
        if self.nodes[p].child == Some(x) {
            self.nodes[p].child = if next == x { None } else { Some(next) };
        }
        self.unlink(x);
        self.nodes[p].degree -= 1;
        self.add_root(x);
    }

    fn cascading_cut(&mut self, mut y: usize) {
        while let Some(p) = self.nodes[y].parent {
            if !self.nodes[y].mark {
                self.nodes[y].mark = true;
                return;
            }
            self.cut(y, p);
            y = p;
        }
    }

    /// Lower the key of `h`. Panics if `key` is larger than the current key.
    pub fn decrease_key(&mut self, h: Handle, key: K) {
        let x = h.0;
        assert!(&key <= self.key(x), "decrease_key with a larger key");
        self.nodes[x].key = Some(key);
        if let Some(p) = self.nodes[x].parent {
            if self.key(x) < self.key(p) {
                self.cut(x, p);
                self.cascading_cut(p);
            }
        }
        if let Some(m) = self.min {
            if self.key(x) < self.key(m) {
                self.min = Some(x);
            }
        }
    }

    /// Remove an arbitrary entry.
    pub fn delete(&mut self, h: Handle) -> K {
        let x = h.0;
        if let Some(p) = self.nodes[x].parent {
            self.cut(x, p);
            self.cascading_cut(p);
        }
        let was_min = self.min == Some(x);
        let k = self.remove_root(x);
        if was_min && self.min.is_some() {
            self.consolidate();
        }
        k
    }

    /// Absorb `other`. Its handles are remapped through the returned
    /// function. Costs O(|other|) because the arenas are separate.
    pub fn meld(&mut self, other: FibHeap<K>) -> impl Fn(Handle) -> Handle {
        let off = self.nodes.len();
        let other_min = other.min;
        let other_len = other.len;
        for (i, mut n) in other.nodes.into_iter().enumerate() {
            n.parent = n.parent.map(|p| p + off);
            n.child = n.child.map(|c| c + off);
            n.left += off;
            n.right += off;
            if n.key.is_none() {
                self.free.push(i + off);
            }
            self.nodes.push(n);
        }
        if let Some(om) = other_min {
            let om = om + off;
            match self.min {
                None => self.min = Some(om),
                Some(m) => {
                    // Concatenate the two circular root lists.
                    let (mr, oml) = (self.nodes[m].right, self.nodes[om].left);
                    self.nodes[m].right = om;
                    self.nodes[om].left = m;
                    self.nodes[oml].right = mr;
                    self.nodes[mr].left = oml;
                    if self.key(om) < self.key(m) {
                        self.min = Some(om);
                    }
                }
            }
        }
        self.len += other_len;
        move |h: Handle| Handle(h.0 + off)
    }

    /// Heap order, degrees, parent links, size and min pointer.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut count = 0;
        let mut stack = self.roots();
        if let Some(m) = self.min {
            if stack.iter().any(|&r| self.key(r) < self.key(m)) {
                return Err("min pointer is not minimal".into());
            }
        }
        for &r in &stack {
            if self.nodes[r].parent.is_some() {
                return Err(format!("root {r} has a parent"));
            }
        }
        while let Some(x) = stack.pop() {
            count += 1;
            let kids = self.children(x);
            if kids.len() != self.nodes[x].degree {
                return Err(format!("node {x}: degree {} but {} children", self.nodes[x].degree, kids.len()));
            }
            for c in kids {
                if self.nodes[c].parent != Some(x) {
                    return Err(format!("node {c}: wrong parent"));
                }
                if self.key(c) < self.key(x) {
                    return Err(format!("heap order violated at {c}"));
                }
                stack.push(c);
            }
        }
        if count != self.len {
            return Err(format!("len {} but {count} reachable nodes", self.len));
        }
        Ok(())
    }
}
