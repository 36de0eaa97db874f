//! Reduced ordered binary decision diagrams.
//!
//! A [`BddStore`] owns a fixed variable order, a node table with a unique
//! table, and an operation cache. Variable index doubles as level: there is
//! no reordering, and variables added later always sit below existing ones.
//!
//! Node-cap exhaustion does not abort an operation midway. Instead the store
//! latches an exhausted flag and returns `FALSE` for nodes it could not
//! allocate; callers check [`BddStore::check`] at iteration boundaries.

mod ops;

use rustc_hash::FxHashMap as HashMap;
use std::fmt;

use thiserror::Error;

pub use ops::Split;

/// Handle of a node inside one [`BddStore`]. Never valid across stores.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BddRef(u32);

impl BddRef {
    pub const FALSE: BddRef = BddRef(0);
    pub const TRUE: BddRef = BddRef(1);

    pub fn is_const(self) -> bool {
        self.0 < 2
    }

    pub fn is_false(self) -> bool {
        self == Self::FALSE
    }

    pub fn is_true(self) -> bool {
        self == Self::TRUE
    }

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn constant(value: bool) -> BddRef {
        if value {
            Self::TRUE
        } else {
            Self::FALSE
        }
    }
}

/// Variable handle; the index is also the level in the order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum VarRole {
    StateBit,
    NextStateBit,
    Output,
    Input,
    Letter,
    Obligation,
}

#[derive(Clone, Debug)]
pub struct VarInfo {
    pub name: String,
    pub role: VarRole,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BddError {
    #[error("BDD node cap of {cap} nodes exceeded")]
    NodeCap { cap: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Xor,
    /// `f & !g`
    Diff,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Node {
    var: u32,
    lo: BddRef,
    hi: BddRef,
}

const TERMINAL_VAR: u32 = u32::MAX;

/// Counters exposed for diagnostics and benchmark records.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct BddStats {
    /// Top-level symbolic operations (apply, negate, ite, quantify, compose, restrict).
    pub ops: u64,
    pub cache_hits: u64,
    pub nodes_created: u64,
    pub collections: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum CacheKey {
    Bin(BinOp, BddRef, BddRef),
    Not(BddRef),
    Ite(BddRef, BddRef, BddRef),
}

#[derive(Clone)]
pub struct BddStore {
    vars: Vec<VarInfo>,
    nodes: Vec<Node>,
    unique: HashMap<Node, BddRef>,
    free: Vec<u32>,
    cache: HashMap<CacheKey, BddRef>,
    cache_enabled: bool,
    node_cap: usize,
    exhausted: bool,
    protected: HashMap<BddRef, usize>,
    stats: BddStats,
}

impl fmt::Debug for BddStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BddStore")
            .field("vars", &self.vars.len())
            .field("live_nodes", &self.live_nodes())
            .field("stats", &self.stats)
            .finish()
    }
}

impl Default for BddStore {
    fn default() -> Self {
        Self::new()
    }
}

pub const DEFAULT_NODE_CAP: usize = 1 << 24;

impl BddStore {
    pub fn new() -> Self {
        Self::with_cap(DEFAULT_NODE_CAP)
    }

    pub fn with_cap(node_cap: usize) -> Self {
        let terminal = |v: u32| Node {
            var: TERMINAL_VAR,
            lo: BddRef(v),
            hi: BddRef(v),
        };
        BddStore {
            vars: Vec::new(),
            nodes: vec![terminal(0), terminal(1)],
            unique: HashMap::default(),
            free: Vec::new(),
            cache: HashMap::default(),
            cache_enabled: true,
            node_cap: node_cap.max(2),
            exhausted: false,
            protected: HashMap::default(),
            stats: BddStats::default(),
        }
    }

    pub fn set_cache_enabled(&mut self, enabled: bool) {
        self.cache_enabled = enabled;
        if !enabled {
            self.cache.clear();
        }
    }

    pub fn node_cap(&self) -> usize {
        self.node_cap
    }

    pub fn set_node_cap(&mut self, cap: usize) {
        self.node_cap = cap.max(2);
    }

    pub fn stats(&self) -> BddStats {
        self.stats
    }

    pub fn check(&self) -> Result<(), BddError> {
        if self.exhausted {
            Err(BddError::NodeCap { cap: self.node_cap })
        } else {
            Ok(())
        }
    }

    pub fn live_nodes(&self) -> usize {
        self.nodes.len() - self.free.len()
    }

    // ---- variables -------------------------------------------------------

    pub fn add_var(&mut self, name: impl Into<String>, role: VarRole) -> Var {
        let v = Var(self.vars.len() as u32);
        self.vars.push(VarInfo {
            name: name.into(),
            role,
        });
        v
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_info(&self, v: Var) -> &VarInfo {
        &self.vars[v.index()]
    }

    pub fn var_by_name(&self, name: &str) -> Option<Var> {
        self.vars
            .iter()
            .position(|info| info.name == name)
            .map(|i| Var(i as u32))
    }

    pub fn vars_with_role(&self, role: VarRole) -> Vec<Var> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, info)| info.role == role)
            .map(|(i, _)| Var(i as u32))
            .collect()
    }

    /// The projection function of `v`.
    pub fn var(&mut self, v: Var) -> BddRef {
        assert!(v.index() < self.vars.len(), "unknown variable {v:?}");
        self.mk(v.0, BddRef::FALSE, BddRef::TRUE)
    }

    pub fn nvar(&mut self, v: Var) -> BddRef {
        self.mk(v.0, BddRef::TRUE, BddRef::FALSE)
    }

    pub fn literal(&mut self, v: Var, positive: bool) -> BddRef {
        if positive {
            self.var(v)
        } else {
            self.nvar(v)
        }
    }

    /// Conjunction of literals.
    pub fn cube(&mut self, lits: &[(Var, bool)]) -> BddRef {
        let mut sorted: Vec<(Var, bool)> = lits.to_vec();
        sorted.sort_by_key(|(v, _)| std::cmp::Reverse(*v));
        let mut acc = BddRef::TRUE;
        for (v, pos) in sorted {
            if acc.is_false() {
                break;
            }
            // Building bottom-up keeps every step a single `mk`, unless a
            // variable repeats, in which case fall back to a real conjunction.
            let top = self.top_var(acc);
            if top.map_or(true, |t| t > v) {
                acc = if pos {
                    self.mk(v.0, BddRef::FALSE, acc)
                } else {
                    self.mk(v.0, acc, BddRef::FALSE)
                };
            } else {
                let lit = self.literal(v, pos);
                acc = self.and(acc, lit);
            }
        }
        acc
    }

    // ---- node access -----------------------------------------------------

    pub fn top_var(&self, f: BddRef) -> Option<Var> {
        let n = self.nodes[f.0 as usize];
        (n.var != TERMINAL_VAR).then_some(Var(n.var))
    }

    pub fn low(&self, f: BddRef) -> BddRef {
        self.nodes[f.0 as usize].lo
    }

    pub fn high(&self, f: BddRef) -> BddRef {
        self.nodes[f.0 as usize].hi
    }

    fn level(&self, f: BddRef) -> u32 {
        self.nodes[f.0 as usize].var
    }

    pub(crate) fn mk(&mut self, var: u32, lo: BddRef, hi: BddRef) -> BddRef {
        if lo == hi {
            return lo;
        }
        debug_assert!(var < self.level(lo) && var < self.level(hi), "order violated");
        let node = Node { var, lo, hi };
        if let Some(&r) = self.unique.get(&node) {
            return r;
        }
        if self.live_nodes() >= self.node_cap {
            self.exhausted = true;
            return BddRef::FALSE;
        }
        let r = if let Some(slot) = self.free.pop() {
            self.nodes[slot as usize] = node;
            BddRef(slot)
        } else {
            self.nodes.push(node);
            BddRef((self.nodes.len() - 1) as u32)
        };
        self.unique.insert(node, r);
        self.stats.nodes_created += 1;
        r
    }

    fn cache_get(&mut self, key: &CacheKey) -> Option<BddRef> {
        if !self.cache_enabled {
            return None;
        }
        let hit = self.cache.get(key).copied();
        if hit.is_some() {
            self.stats.cache_hits += 1;
        }
        hit
    }

    fn cache_put(&mut self, key: CacheKey, value: BddRef) {
        if self.cache_enabled && !self.exhausted {
            self.cache.insert(key, value);
        }
    }

    // ---- Boolean connectives ---------------------------------------------

    pub fn not(&mut self, f: BddRef) -> BddRef {
        self.stats.ops += 1;
        self.not_rec(f)
    }

    fn not_rec(&mut self, f: BddRef) -> BddRef {
        if f.is_const() {
            return BddRef::constant(f.is_false());
        }
        let key = CacheKey::Not(f);
        if let Some(r) = self.cache_get(&key) {
            return r;
        }
        let n = self.nodes[f.0 as usize];
        let lo = self.not_rec(n.lo);
        let hi = self.not_rec(n.hi);
        let r = self.mk(n.var, lo, hi);
        self.cache_put(key, r);
        r
    }

    pub fn apply(&mut self, op: BinOp, f: BddRef, g: BddRef) -> BddRef {
        self.stats.ops += 1;
        self.apply_rec(op, f, g)
    }

    pub fn and(&mut self, f: BddRef, g: BddRef) -> BddRef {
        self.apply(BinOp::And, f, g)
    }

    pub fn or(&mut self, f: BddRef, g: BddRef) -> BddRef {
        self.apply(BinOp::Or, f, g)
    }

    pub fn xor(&mut self, f: BddRef, g: BddRef) -> BddRef {
        self.apply(BinOp::Xor, f, g)
    }

    pub fn diff(&mut self, f: BddRef, g: BddRef) -> BddRef {
        self.apply(BinOp::Diff, f, g)
    }

    pub fn iff(&mut self, f: BddRef, g: BddRef) -> BddRef {
        let x = self.xor(f, g);
        self.not(x)
    }

    pub fn implies(&mut self, f: BddRef, g: BddRef) -> BddRef {
        let nf = self.not(f);
        self.or(nf, g)
    }

    pub fn and_all(&mut self, fs: impl IntoIterator<Item = BddRef>) -> BddRef {
        let mut acc = BddRef::TRUE;
        for f in fs {
            acc = self.and(acc, f);
        }
        acc
    }

    pub fn or_all(&mut self, fs: impl IntoIterator<Item = BddRef>) -> BddRef {
        let mut acc = BddRef::FALSE;
        for f in fs {
            acc = self.or(acc, f);
        }
        acc
    }

    fn apply_terminal(op: BinOp, f: BddRef, g: BddRef) -> Option<BddRef> {
        use BinOp::*;
        match op {
            And => {
                if f.is_false() || g.is_false() {
                    Some(BddRef::FALSE)
                } else if f.is_true() {
                    Some(g)
                } else if g.is_true() || f == g {
                    Some(f)
                } else {
                    None
                }
            }
            Or => {
                if f.is_true() || g.is_true() {
                    Some(BddRef::TRUE)
                } else if f.is_false() {
                    Some(g)
                } else if g.is_false() || f == g {
                    Some(f)
                } else {
                    None
                }
            }
            Xor => {
                if f == g {
                    Some(BddRef::FALSE)
                } else if f.is_false() {
                    Some(g)
                } else if g.is_false() {
                    Some(f)
                } else if f.is_const() && g.is_const() {
                    Some(BddRef::TRUE)
                } else {
                    None
                }
            }
            Diff => {
                if f.is_false() || g.is_true() || f == g {
                    Some(BddRef::FALSE)
                } else if g.is_false() {
                    Some(f)
                } else if f.is_true() && g.is_const() {
                    Some(BddRef::TRUE)
                } else {
                    None
                }
            }
        }
    }

    fn apply_rec(&mut self, op: BinOp, f: BddRef, g: BddRef) -> BddRef {
        if let Some(r) = Self::apply_terminal(op, f, g) {
            return r;
        }
        if op == BinOp::Xor && (f.is_true() || g.is_true()) {
            let other = if f.is_true() { g } else { f };
            return self.not_rec(other);
        }
        if op == BinOp::Diff && f.is_true() {
            return self.not_rec(g);
        }
        // Commutative ops get a normalized key.
        let (a, b) = match op {
            BinOp::And | BinOp::Or | BinOp::Xor if g < f => (g, f),
            _ => (f, g),
        };
        let key = CacheKey::Bin(op, a, b);
        if let Some(r) = self.cache_get(&key) {
            return r;
        }
        let (la, lb) = (self.level(a), self.level(b));
        let top = la.min(lb);
        let (a0, a1) = if la == top {
            (self.low(a), self.high(a))
        } else {
            (a, a)
        };
        let (b0, b1) = if lb == top {
            (self.low(b), self.high(b))
        } else {
            (b, b)
        };
        let lo = self.apply_rec(op, a0, b0);
        let hi = self.apply_rec(op, a1, b1);
        let r = self.mk(top, lo, hi);
        self.cache_put(key, r);
        r
    }

    pub fn ite(&mut self, f: BddRef, g: BddRef, h: BddRef) -> BddRef {
        self.stats.ops += 1;
        self.ite_rec(f, g, h)
    }

    fn ite_rec(&mut self, f: BddRef, g: BddRef, h: BddRef) -> BddRef {
        if f.is_true() {
            return g;
        }
        if f.is_false() {
            return h;
        }
        if g == h {
            return g;
        }
        if g.is_true() && h.is_false() {
            return f;
        }
        if g.is_false() && h.is_true() {
            return self.not_rec(f);
        }
        let key = CacheKey::Ite(f, g, h);
        if let Some(r) = self.cache_get(&key) {
            return r;
        }
        let top = self.level(f).min(self.level(g)).min(self.level(h));
        let cof = |s: &Self, x: BddRef| {
            if s.level(x) == top {
                (s.low(x), s.high(x))
            } else {
                (x, x)
            }
        };
        let (f0, f1) = cof(self, f);
        let (g0, g1) = cof(self, g);
        let (h0, h1) = cof(self, h);
        let lo = self.ite_rec(f0, g0, h0);
        let hi = self.ite_rec(f1, g1, h1);
        let r = self.mk(top, lo, hi);
        self.cache_put(key, r);
        r
    }

    // ---- evaluation ------------------------------------------------------

    /// Evaluates `f` under a total assignment given as a closure over variables.
    pub fn eval(&self, f: BddRef, assignment: impl Fn(Var) -> bool) -> bool {
        let mut cur = f;
        while !cur.is_const() {
            let n = self.nodes[cur.0 as usize];
            cur = if assignment(Var(n.var)) { n.hi } else { n.lo };
        }
        cur.is_true()
    }

    /// Evaluates `f` with variable `i` set to bit `i` of `bits`.
    pub fn eval_bits(&self, f: BddRef, bits: u64) -> bool {
        self.eval(f, |v| v.0 < 64 && bits >> v.0 & 1 == 1)
    }

    /// Number of nodes in the DAG rooted at `f`, terminals excluded.
    pub fn size(&self, f: BddRef) -> usize {
        let mut seen = rustc_hash::FxHashSet::default();
        let mut stack = vec![f];
        while let Some(x) = stack.pop() {
            if x.is_const() || !seen.insert(x) {
                continue;
            }
            stack.push(self.low(x));
            stack.push(self.high(x));
        }
        seen.len()
    }

    pub fn support(&self, f: BddRef) -> Vec<Var> {
        let mut seen = rustc_hash::FxHashSet::default();
        let mut vars = std::collections::BTreeSet::new();
        let mut stack = vec![f];
        while let Some(x) = stack.pop() {
            if x.is_const() || !seen.insert(x) {
                continue;
            }
            vars.insert(Var(self.level(x)));
            stack.push(self.low(x));
            stack.push(self.high(x));
        }
        vars.into_iter().collect()
    }

    /// Number of satisfying assignments over the first `nvars` variables.
    pub fn sat_count(&self, f: BddRef, nvars: usize) -> f64 {
        fn rec(s: &BddStore, f: BddRef, nvars: usize, memo: &mut HashMap<BddRef, f64>) -> f64 {
            // Returns count over variables from level(f) to nvars.
            if f.is_false() {
                return 0.0;
            }
            if f.is_true() {
                return 1.0;
            }
            if let Some(&c) = memo.get(&f) {
                return c;
            }
            let lvl = s.level(f) as usize;
            let lo = s.low(f);
            let hi = s.high(f);
            let skip = |x: BddRef| {
                let l = if x.is_const() { nvars } else { s.level(x) as usize };
                (l - lvl - 1) as i32
            };
            let c = rec(s, lo, nvars, memo) * 2f64.powi(skip(lo))
                + rec(s, hi, nvars, memo) * 2f64.powi(skip(hi));
            memo.insert(f, c);
            c
        }
        let mut memo = HashMap::default();
        let top = if f.is_const() {
            nvars
        } else {
            self.level(f) as usize
        };
        rec(self, f, nvars, &mut memo) * 2f64.powi(top as i32)
    }

    // ---- garbage collection ----------------------------------------------

    /// Marks `f` as an external root that survives collections.
    pub fn protect(&mut self, f: BddRef) {
        *self.protected.entry(f).or_insert(0) += 1;
    }

    pub fn unprotect(&mut self, f: BddRef) {
        if let Some(c) = self.protected.get_mut(&f) {
            *c -= 1;
            if *c == 0 {
                self.protected.remove(&f);
            }
        }
    }

    /// Sweeps every node not reachable from `roots` or the protected set.
    /// Live handles keep their ids; caches are cleared.
    pub fn collect(&mut self, roots: &[BddRef]) {
        let mut marked = vec![false; self.nodes.len()];
        marked[0] = true;
        marked[1] = true;
        let mut stack: Vec<BddRef> = roots.to_vec();
        stack.extend(self.protected.keys().copied());
        while let Some(x) = stack.pop() {
            let i = x.0 as usize;
            if marked[i] {
                continue;
            }
            marked[i] = true;
            stack.push(self.nodes[i].lo);
            stack.push(self.nodes[i].hi);
        }
        let already_free: rustc_hash::FxHashSet<u32> = self.free.iter().copied().collect();
        for (i, m) in marked.iter().enumerate().skip(2) {
            if !m && !already_free.contains(&(i as u32)) {
                let node = self.nodes[i];
                self.unique.remove(&node);
                self.free.push(i as u32);
            }
        }
        self.cache.clear();
        self.stats.collections += 1;
    }

    /// Collects when the live node count passes half the cap.
    pub fn maybe_collect(&mut self, roots: &[BddRef]) {
        if self.live_nodes() * 2 > self.node_cap {
            self.collect(roots);
        }
    }
}
