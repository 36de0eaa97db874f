//! Symbolic SCC decomposition (forward/backward with pivots) and the
//! bottom-up SCC solver.

use serde::{Deserialize, Serialize};

use super::{finish, push_layer, reach_with, safe_with, LayerKind, SolveResult, SolveStats, SolverKind};
use crate::arena::Arena;
use crate::bdd::{BddRef, Var};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageMode {
    /// Images by output splitting over the next-state functions.
    Compose,
    /// Images through a monolithic relation over primed variables.
    #[default]
    Relational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// States reachable from the initial state.
    #[default]
    Reachable,
    /// Every code over the state bits.
    All,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SccOptions {
    pub image: ImageMode,
    pub domain: Domain,
}

#[derive(Clone, Debug)]
pub struct SymbolicSccSet {
    /// Bottom-up: every successor SCC of `sccs[i]` comes before it.
    pub sccs: Vec<BddRef>,
    pub domain: BddRef,
    pub image: ImageMode,
}

impl SymbolicSccSet {
    pub fn len(&self) -> usize {
        self.sccs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sccs.is_empty()
    }

    /// `(i, j)`: some state of SCC `i` has a successor in SCC `j`, `i != j`.
    /// Quadratic in the number of SCCs.
    pub fn edges(&self, a: &mut Arena) -> Result<Vec<(usize, usize)>> {
        let mut edges = Vec::new();
        for i in 0..self.sccs.len() {
            let p = post(a, self.sccs[i], self.image)?;
            let mut out = a.store.diff(p, self.sccs[i]);
            for (j, &t) in self.sccs.iter().enumerate().take(i) {
                if out.is_false() {
                    break;
                }
                if !a.store.and(out, t).is_false() {
                    edges.push((i, j));
                    out = a.store.diff(out, t);
                }
            }
        }
        Ok(edges)
    }
}

fn post(a: &mut Arena, s: BddRef, mode: ImageMode) -> Result<BddRef> {
    let r = match mode {
        ImageMode::Compose => a.post_split(s),
        ImageMode::Relational => a.post_relational(s),
    };
    a.store.check()?;
    Ok(r)
}

fn pivot(a: &mut Arena, s: BddRef) -> BddRef {
    let z = a.z.clone();
    let bits = a.store.pick_min_witness(s, &z).expect("nonempty set");
    let lits: Vec<(Var, bool)> = z.into_iter().zip(bits).collect();
    a.store.cube(&lits)
}

/// Forward closure of `from` inside `within`.
fn forward(a: &mut Arena, from: BddRef, within: BddRef, mode: ImageMode) -> Result<BddRef> {
    let mut x = from;
    loop {
        let p = post(a, x, mode)?;
        let p = a.store.and(p, within);
        let next = a.store.or(x, p);
        if next == x {
            return Ok(x);
        }
        x = next;
    }
}

fn backward(a: &mut Arena, from: BddRef, within: BddRef) -> Result<BddRef> {
    let mut x = from;
    loop {
        let p = a.pre_exists(x);
        let p = a.store.and(p, within);
        let next = a.store.or(x, p);
        a.store.check()?;
        if next == x {
            return Ok(x);
        }
        x = next;
    }
}

/// Forward closure of `v` inside `s` by frontiers, with a skeleton: a
/// path from `v` to a state of the last frontier, and that end state.
fn skel_forward(a: &mut Arena, v: BddRef, s: BddRef, mode: ImageMode) -> Result<(BddRef, BddRef, BddRef)> {
    let mut layers = vec![v];
    let mut f = v;
    loop {
        let p = post(a, *layers.last().unwrap(), mode)?;
        let p = a.store.and(p, s);
        let p = a.store.diff(p, f);
        if p.is_false() {
            break;
        }
        f = a.store.or(f, p);
        layers.push(p);
    }
    let end = pivot(a, layers.pop().unwrap());
    let mut path = end;
    let mut cur = end;
    while let Some(layer) = layers.pop() {
        let pre = a.pre_exists(cur);
        let pre = a.store.and(pre, layer);
        cur = pivot(a, pre);
        path = a.store.or(path, cur);
    }
    a.store.check()?;
    Ok((f, path, end))
}

/// Exact SCC partition of the chosen domain in bottom-up order.
///
/// Forward/backward decomposition: for a pivot's forward set `F` and SCC
/// `B` inside `S`, nothing in `F` leads back to `B` or out to `S \ F`, so
/// `order(F \ B)`, `B`, `order(S \ F)` is bottom-up. Pivots follow the
/// skeleton of the previous forward search, which bounds the total number
/// of image steps linearly.
///
/// Long decompositions may garbage-collect the store; handles other than
/// the arena's own and the returned sets should not be kept across a call.
pub fn sym_scc_decompose(a: &mut Arena, opts: &SccOptions) -> Result<SymbolicSccSet> {
    enum Item {
        /// A set, a skeleton path inside it and the path's end (or `FALSE`).
        Split(BddRef, BddRef, BddRef),
        Emit(BddRef),
    }
    if opts.image == ImageMode::Relational {
        a.relation();
        if a.store.check().is_err() {
            return Err(Error::RelationCap {
                cap: a.store.node_cap(),
            });
        }
    }
    let domain = match opts.domain {
        Domain::All => BddRef::TRUE,
        Domain::Reachable => {
            let init = a.init;
            forward(a, init, BddRef::TRUE, opts.image)?
        }
    };
    let mut sccs = Vec::new();
    let mut work = vec![Item::Split(domain, BddRef::FALSE, BddRef::FALSE)];
    while let Some(item) = work.pop() {
        let (s, skel, node) = match item {
            Item::Emit(b) => {
                sccs.push(b);
                continue;
            }
            Item::Split(s, ..) if s.is_false() => continue,
            Item::Split(s, skel, node) => (s, skel, node),
        };
        let mut roots: Vec<BddRef> = sccs.clone();
        for i in &work {
            match *i {
                Item::Split(x, y, z) => roots.extend([x, y, z]),
                Item::Emit(x) => roots.push(x),
            }
        }
        roots.extend([s, skel, node, domain]);
        a.store.maybe_collect(&roots);
        let (v, skel) = if node.is_false() { (pivot(a, s), BddRef::FALSE) } else { (node, skel) };
        let (f, new_skel, new_node) = skel_forward(a, v, s, opts.image)?;
        let b = backward(a, v, f)?;
        // The skeleton minus this SCC still ends in a single state.
        let rest_skel = a.store.diff(skel, b);
        let tail = a.store.and(b, skel);
        let pre = a.pre_exists(tail);
        let pre = a.store.and(pre, rest_skel);
        let rest_node = if pre.is_false() { BddRef::FALSE } else { pivot(a, pre) };
        let rest_s = a.store.diff(s, f);
        let rest_f = a.store.diff(f, b);
        let inner_skel = a.store.diff(new_skel, b);
        let inner_node = a.store.diff(new_node, b);
        work.push(Item::Split(rest_s, rest_skel, rest_node));
        work.push(Item::Emit(b));
        work.push(Item::Split(rest_f, inner_skel, inner_node));
    }
    Ok(SymbolicSccSet {
        sccs,
        domain,
        image: opts.image,
    })
}

/// Processes SCCs bottom-up: accepting ones by `Safe(SCC, W)`, rejecting
/// ones by `Reach(SCC, W)`.
pub fn solve_weak_scc(a: &mut Arena, sccs: &SymbolicSccSet) -> Result<SolveResult> {
    let ops0 = a.store.stats().ops;
    let mut st = SolveStats::default();
    let mut w = BddRef::FALSE;
    let mut layers = Vec::new();
    for &s in &sccs.sccs {
        st.outer_iters += 1;
        let inside = a.store.and(s, a.acc);
        let outside = a.store.diff(s, a.acc);
        let x = if outside.is_false() {
            let x = safe_with(a, s, w, &mut st)?;
            push_layer(&mut layers, x, LayerKind::Safety);
            x
        } else if inside.is_false() {
            let mut ls = Vec::new();
            let x = reach_with(a, s, w, &mut st, |l| ls.push(l))?;
            for l in ls {
                push_layer(&mut layers, l, LayerKind::Reach);
            }
            x
        } else {
            let z = a.z.clone();
            let p = a.store.pick_min_witness(inside, &z).unwrap();
            let q = a.store.pick_min_witness(outside, &z).unwrap();
            let code = |bits: Vec<bool>| bits.iter().enumerate().fold(0u64, |c, (k, &b)| c | (b as u64) << k);
            return Err(Error::NotWeak(format!(
                "SCC contains accepting state {:#x} and rejecting state {:#x}",
                code(p),
                code(q)
            )));
        };
        w = a.store.or(w, x);
    }
    Ok(finish(a, SolverKind::Scc, w, layers, Vec::new(), st, ops0))
}
