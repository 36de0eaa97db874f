//! Explicit-graph game solving, used as ground truth for the symbolic
//! solvers.

use std::collections::VecDeque;

use crate::arena::{ExplicitGame, Owner};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// Visit accepting nodes infinitely often.
    Buchi,
    /// Eventually stay among accepting nodes.
    CoBuchi,
    /// Weak games: both readings agree, solved as Büchi.
    Weak,
}

#[derive(Clone, Debug)]
pub struct ExplicitSolution {
    pub system: Vec<bool>,
    pub environment: Vec<bool>,
    /// Positional system strategy on system-owned winning nodes (Büchi and
    /// weak objectives only).
    pub strategy: Option<Vec<Option<usize>>>,
    pub rounds: u64,
}

/// Attractor of `target` for `player` inside the subgame `alive`. Returns
/// the set and, per node, the distance rank (for strategies).
fn attractor(
    g: &ExplicitGame,
    preds: &[Vec<usize>],
    alive: &[bool],
    target: &[bool],
    player: Owner,
) -> (Vec<bool>, Vec<usize>) {
    let n = g.len();
    let mut inside = vec![false; n];
    let mut rank = vec![usize::MAX; n];
    let mut count: Vec<usize> = (0..n)
        .map(|v| g.succ[v].iter().filter(|&&s| alive[s]).count())
        .collect();
    let mut queue = VecDeque::new();
    for v in 0..n {
        if alive[v] && target[v] {
            inside[v] = true;
            rank[v] = 0;
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &p in &preds[v] {
            if !alive[p] || inside[p] {
                continue;
            }
            let join = if g.owner[p] == player {
                true
            } else {
                count[p] -= 1;
                count[p] == 0
            };
            if join {
                inside[p] = true;
                rank[p] = rank[v] + 1;
                queue.push_back(p);
            }
        }
    }
    (inside, rank)
}

fn opponent(p: Owner) -> Owner {
    match p {
        Owner::System => Owner::Environment,
        Owner::Environment => Owner::System,
    }
}

/// Classical Büchi algorithm for `player` with accepting set `f`: returns
/// the winning region, a strategy for `player` and the number of rounds.
fn buchi(g: &ExplicitGame, preds: &[Vec<usize>], f: &[bool], player: Owner) -> (Vec<bool>, Vec<Option<usize>>, u64) {
    let n = g.len();
    let mut alive = vec![true; n];
    let mut rounds = 0;
    loop {
        rounds += 1;
        let target: Vec<bool> = (0..n).map(|v| alive[v] && f[v]).collect();
        let (attr, rank) = attractor(g, preds, &alive, &target, player);
        let trap: Vec<bool> = (0..n).map(|v| alive[v] && !attr[v]).collect();
        if !trap.iter().any(|&b| b) {
            let mut strat = vec![None; n];
            for v in 0..n {
                if !alive[v] || g.owner[v] != player {
                    continue;
                }
                strat[v] = if f[v] {
                    g.succ[v].iter().copied().find(|&s| alive[s])
                } else {
                    g.succ[v].iter().copied().find(|&s| alive[s] && rank[s] < rank[v])
                };
            }
            return (alive, strat, rounds);
        }
        let (lost, _) = attractor(g, preds, &alive, &trap, opponent(player));
        for v in 0..n {
            if lost[v] {
                alive[v] = false;
            }
        }
    }
}

/// Controllable predecessor of `w` on the explicit graph.
fn cpre(g: &ExplicitGame, w: &[bool], player: Owner) -> Vec<bool> {
    (0..g.len())
        .map(|v| {
            if g.owner[v] == player {
                g.succ[v].iter().any(|&s| w[s])
            } else {
                g.succ[v].iter().all(|&s| w[s])
            }
        })
        .collect()
}

/// Co-Büchi winning region of `player` by the nested fixpoint
/// `μX. νY. CPre(X) ∪ (F ∩ CPre(Y))` on explicit sets.
fn cobuchi(g: &ExplicitGame, f: &[bool], player: Owner) -> (Vec<bool>, u64) {
    let n = g.len();
    let mut x = vec![false; n];
    let mut rounds = 0;
    loop {
        rounds += 1;
        let cx = cpre(g, &x, player);
        let mut y = vec![true; n];
        loop {
            let cy = cpre(g, &y, player);
            let ny: Vec<bool> = (0..n).map(|v| cx[v] || (f[v] && cy[v])).collect();
            if ny == y {
                break;
            }
            y = ny;
        }
        if y == x {
            return (x, rounds);
        }
        x = y;
    }
}

/// Winning regions of both players for `objective` on the accepting nodes.
/// The environment's region is computed by its own (dual) algorithm, so the
/// two regions partitioning the nodes is a genuine check.
pub fn explicit_oracle_solve(g: &ExplicitGame, objective: Objective) -> ExplicitSolution {
    let preds = g.preds();
    let f = &g.accepting;
    let not_f: Vec<bool> = f.iter().map(|b| !b).collect();
    match objective {
        Objective::Buchi | Objective::Weak => {
            let (system, strat, rounds) = buchi(g, &preds, f, Owner::System);
            let (environment, _) = cobuchi(g, &not_f, Owner::Environment);
            ExplicitSolution {
                system,
                environment,
                strategy: Some(strat),
                rounds,
            }
        }
        Objective::CoBuchi => {
            let (system, rounds) = cobuchi(g, f, Owner::System);
            let (environment, _, _) = buchi(g, &preds, &not_f, Owner::Environment);
            ExplicitSolution {
                system,
                environment,
                strategy: None,
                rounds,
            }
        }
    }
}
