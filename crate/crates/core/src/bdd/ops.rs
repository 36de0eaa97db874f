use rustc_hash::FxHashMap as HashMap;

use super::{BddRef, BddStore, Quantifier, Var};

/// One leaf of [`BddStore::split`]: a cube over the split variables together
/// with the constant values every function takes under it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub cube: Vec<(Var, bool)>,
    pub values: Vec<BddRef>,
}

impl BddStore {
    /// Existential or universal abstraction of `vars` from `f`.
    pub fn quantify(&mut self, kind: Quantifier, vars: &[Var], f: BddRef) -> BddRef {
        self.stats.ops += 1;
        if vars.is_empty() || f.is_const() {
            return f;
        }
        let mut mask = vec![false; self.num_vars()];
        for v in vars {
            mask[v.index()] = true;
        }
        let last = vars.iter().map(|v| v.0).max().unwrap_or(0);
        let mut memo = HashMap::default();
        self.quant_rec(kind, &mask, last, f, &mut memo)
    }

    pub fn exists(&mut self, vars: &[Var], f: BddRef) -> BddRef {
        self.quantify(Quantifier::Exists, vars, f)
    }

    pub fn forall(&mut self, vars: &[Var], f: BddRef) -> BddRef {
        self.quantify(Quantifier::Forall, vars, f)
    }

    fn quant_rec(
        &mut self,
        kind: Quantifier,
        mask: &[bool],
        last: u32,
        f: BddRef,
        memo: &mut HashMap<BddRef, BddRef>,
    ) -> BddRef {
        if f.is_const() {
            return f;
        }
        let var = self.level(f);
        if var > last {
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let lo = self.quant_rec(kind, mask, last, self.low(f), memo);
        let hi = self.quant_rec(kind, mask, last, self.high(f), memo);
        let r = if mask[var as usize] {
            match kind {
                Quantifier::Exists => self.apply_rec(super::BinOp::Or, lo, hi),
                Quantifier::Forall => self.apply_rec(super::BinOp::And, lo, hi),
            }
        } else {
            self.mk(var, lo, hi)
        };
        memo.insert(f, r);
        r
    }

    /// Simultaneous substitution of variables by functions.
    pub fn compose<S: std::hash::BuildHasher>(
        &mut self,
        f: BddRef,
        subst: &std::collections::HashMap<Var, BddRef, S>,
    ) -> BddRef {
        self.stats.ops += 1;
        if subst.is_empty() {
            return f;
        }
        let mut table: Vec<Option<BddRef>> = vec![None; self.num_vars()];
        for (v, g) in subst {
            table[v.index()] = Some(*g);
        }
        let last = subst.keys().map(|v| v.0).max().unwrap_or(0);
        let mut memo = HashMap::default();
        self.compose_rec(f, &table, last, &mut memo)
    }

    fn compose_rec(
        &mut self,
        f: BddRef,
        table: &[Option<BddRef>],
        last: u32,
        memo: &mut HashMap<BddRef, BddRef>,
    ) -> BddRef {
        if f.is_const() || self.level(f) > last {
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let var = self.level(f);
        let lo = self.compose_rec(self.low(f), table, last, memo);
        let hi = self.compose_rec(self.high(f), table, last, memo);
        let sel = match table[var as usize] {
            Some(g) => g,
            None => self.mk(var, BddRef::FALSE, BddRef::TRUE),
        };
        let r = self.ite_rec(sel, hi, lo);
        memo.insert(f, r);
        r
    }

    /// Cofactor of `f` with respect to a partial assignment.
    pub fn restrict(&mut self, f: BddRef, assignment: &[(Var, bool)]) -> BddRef {
        self.stats.ops += 1;
        if assignment.is_empty() {
            return f;
        }
        let mut table: Vec<Option<bool>> = vec![None; self.num_vars()];
        for (v, b) in assignment {
            table[v.index()] = Some(*b);
        }
        let last = assignment.iter().map(|(v, _)| v.0).max().unwrap_or(0);
        let mut memo = HashMap::default();
        self.restrict_rec(f, &table, last, &mut memo)
    }

    fn restrict_rec(
        &mut self,
        f: BddRef,
        table: &[Option<bool>],
        last: u32,
        memo: &mut HashMap<BddRef, BddRef>,
    ) -> BddRef {
        if f.is_const() || self.level(f) > last {
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let var = self.level(f);
        let r = match table[var as usize] {
            Some(true) => self.restrict_rec(self.high(f), table, last, memo),
            Some(false) => self.restrict_rec(self.low(f), table, last, memo),
            None => {
                let lo = self.restrict_rec(self.low(f), table, last, memo);
                let hi = self.restrict_rec(self.high(f), table, last, memo);
                self.mk(var, lo, hi)
            }
        };
        memo.insert(f, r);
        r
    }

    /// Lexicographically smallest assignment to `vars` (false < true, in the
    /// given order) that extends to a model of `f`.
    pub fn pick_min_witness(&mut self, f: BddRef, vars: &[Var]) -> Option<Vec<bool>> {
        if f.is_false() {
            return None;
        }
        let mut sorted = vars.to_vec();
        sorted.sort();
        let others: Vec<Var> = {
            let support = self.support(f);
            support.into_iter().filter(|v| !sorted.contains(v)).collect()
        };
        // Project away everything else so each greedy choice is exact.
        let mut g = self.exists(&others, f);
        let mut chosen: HashMap<Var, bool> = HashMap::default();
        for &v in &sorted {
            let g0 = self.restrict(g, &[(v, false)]);
            if !g0.is_false() {
                chosen.insert(v, false);
                g = g0;
            } else {
                chosen.insert(v, true);
                g = self.restrict(g, &[(v, true)]);
            }
        }
        debug_assert!(!g.is_false());
        Some(vars.iter().map(|v| chosen[v]).collect())
    }

    /// Copies a function from another store, renaming variables through `map`.
    pub fn import(&mut self, other: &BddStore, f: BddRef, map: &dyn Fn(Var) -> Var) -> BddRef {
        let mut memo = HashMap::default();
        self.import_rec(other, f, map, &mut memo)
    }

    fn import_rec(
        &mut self,
        other: &BddStore,
        f: BddRef,
        map: &dyn Fn(Var) -> Var,
        memo: &mut HashMap<BddRef, BddRef>,
    ) -> BddRef {
        if f.is_const() {
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let lo = self.import_rec(other, other.low(f), map, memo);
        let hi = self.import_rec(other, other.high(f), map, memo);
        let v = map(Var(other.level(f)));
        let sel = self.mk(v.0, BddRef::FALSE, BddRef::TRUE);
        let r = self.ite_rec(sel, hi, lo);
        memo.insert(f, r);
        r
    }

    /// Disjoint cubes (paths to `TRUE`) covering `f`.
    pub fn cubes(&self, f: BddRef) -> Vec<Vec<(Var, bool)>> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.cubes_rec(f, &mut path, &mut out);
        out
    }

    fn cubes_rec(&self, f: BddRef, path: &mut Vec<(Var, bool)>, out: &mut Vec<Vec<(Var, bool)>>) {
        if f.is_false() {
            return;
        }
        if f.is_true() {
            out.push(path.clone());
            return;
        }
        let v = Var(self.level(f));
        path.push((v, false));
        self.cubes_rec(self.low(f), path, out);
        path.pop();
        path.push((v, true));
        self.cubes_rec(self.high(f), path, out);
        path.pop();
    }

    /// Renders `f` as a disjunction of cubes using `name` for variables.
    /// Constants print as `true` / `false`.
    pub fn to_formula(&self, f: BddRef, name: &dyn Fn(Var) -> String) -> String {
        self.render(f, name, "true", "false", " & ", " | ", "!")
    }

    pub(crate) fn render(
        &self,
        f: BddRef,
        name: &dyn Fn(Var) -> String,
        tt: &str,
        ff: &str,
        and: &str,
        or: &str,
        not: &str,
    ) -> String {
        if f.is_true() {
            return tt.to_string();
        }
        if f.is_false() {
            return ff.to_string();
        }
        let cubes = self.cubes(f);
        let many = cubes.len() > 1;
        cubes
            .iter()
            .map(|cube| {
                if cube.is_empty() {
                    return tt.to_string();
                }
                let body = cube
                    .iter()
                    .map(|(v, pos)| {
                        if *pos {
                            name(*v)
                        } else {
                            format!("{not}{}", name(*v))
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(and);
                if many && cube.len() > 1 {
                    format!("({body})")
                } else {
                    body
                }
            })
            .collect::<Vec<_>>()
            .join(or)
    }

    /// Splits the joint behaviour of `fs` along the variables `vars`: each
    /// leaf is a cube over `vars` under which every function is independent of
    /// `vars`. The leaves are disjoint and cover the whole space. Used to read
    /// off successor tuples of a vector of next-state functions.
    pub fn split(&mut self, fs: &[BddRef], vars: &[Var]) -> Vec<Split> {
        let mut mask = vec![false; self.num_vars()];
        for v in vars {
            mask[v.index()] = true;
        }
        let mut out = Vec::new();
        let mut cube = Vec::new();
        self.split_rec(fs.to_vec(), &mask, &mut cube, &mut out);
        out
    }

    fn split_rec(
        &mut self,
        fs: Vec<BddRef>,
        mask: &[bool],
        cube: &mut Vec<(Var, bool)>,
        out: &mut Vec<Split>,
    ) {
        // Smallest split variable occurring anywhere in the functions.
        let mut best: Option<Var> = None;
        for &f in &fs {
            for v in self.support(f) {
                if mask[v.index()] && best.map_or(true, |b| v < b) {
                    best = Some(v);
                }
            }
        }
        match best {
            None => out.push(Split {
                cube: cube.clone(),
                values: fs,
            }),
            Some(v) => {
                for val in [false, true] {
                    let next: Vec<BddRef> =
                        fs.iter().map(|&f| self.restrict_rec_single(f, v, val)).collect();
                    cube.push((v, val));
                    self.split_rec(next, mask, cube, out);
                    cube.pop();
                }
            }
        }
    }

    fn restrict_rec_single(&mut self, f: BddRef, v: Var, val: bool) -> BddRef {
        let mut table: Vec<Option<bool>> = vec![None; self.num_vars()];
        table[v.index()] = Some(val);
        let mut memo = HashMap::default();
        self.restrict_rec(f, &table, v.0, &mut memo)
    }
}
