//! A slow, direct evaluator and bisimulation checker used as an oracle.
//!
//! Everything here goes through `joint_actions`, `merge` and `outcome_set`
//! and quantifies over every coalition pair literally, including
//! overlapping ones.

#![allow(dead_code)]

use std::collections::HashMap;

use constr_core::formula::{AgentSet, Formula, StrategicOp};
use constr_core::model::{merge, Coalition, GameModel, JointAction};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn coalition(model: &GameModel, set: &AgentSet) -> Coalition {
    let names: Vec<&str> = set.iter().collect();
    model.coalition(&names).expect("formula agents exist in the model")
}

pub fn all_coalitions(model: &GameModel) -> Vec<Coalition> {
    Coalition::full(model.agent_count()).subsets().collect()
}

pub fn agent_set(model: &GameModel, c: Coalition) -> AgentSet {
    AgentSet(model.coalition_names(c).into_iter().collect())
}

/// Outcome sets with a cache, since the clause loops ask for the same
/// joint action many times.
pub struct Oracle<'m> {
    pub model: &'m GameModel,
    outs: HashMap<JointAction, Vec<usize>>,
    moves: HashMap<(usize, Coalition), Vec<JointAction>>,
}

impl<'m> Oracle<'m> {
    pub fn new(model: &'m GameModel) -> Self {
        Oracle {
            model,
            outs: HashMap::new(),
            moves: HashMap::new(),
        }
    }

    pub fn moves(&mut self, state: usize, c: Coalition) -> Vec<JointAction> {
        let m = self.model;
        self.moves
            .entry((state, c))
            .or_insert_with(|| m.joint_actions(c, state).unwrap())
            .clone()
    }

    pub fn out(&mut self, sigma: &JointAction) -> Vec<usize> {
        let m = self.model;
        self.outs
            .entry(sigma.clone())
            .or_insert_with(|| m.outcome_set(sigma.state(), sigma).unwrap().ones().collect())
            .clone()
    }

    pub fn out_merged(&mut self, a: &JointAction, b: &JointAction) -> Vec<usize> {
        let ab = merge(a, b).unwrap();
        self.out(&ab)
    }

    pub fn holds(&mut self, state: usize, f: &Formula) -> bool {
        match f {
            Formula::Atom(p) => self.model.labels(state).contains(&p.as_str()),
            Formula::Top => true,
            Formula::Not(g) => !self.holds(state, g),
            Formula::And(l, r) => self.holds(state, l) && self.holds(state, r),
            Formula::Strategic { op, a, b, phi, psi } => {
                let phi_ext = self.extension(phi);
                let psi_ext = self.extension(psi);
                let ca = coalition(self.model, a);
                let cb = coalition(self.model, b);
                self.operator(state, *op, ca, cb, &phi_ext, &psi_ext)
            }
        }
    }

    pub fn extension(&mut self, f: &Formula) -> Vec<bool> {
        (0..self.model.state_count()).map(|s| self.holds(s, f)).collect()
    }

    fn operator(&mut self, s: usize, op: StrategicOp, a: Coalition, b: Coalition, phi: &[bool], psi: &[bool]) -> bool {
        let inside = |set: &[usize], ext: &[bool]| set.iter().all(|&u| ext[u]);
        let sa = self.moves(s, a);
        let sb = self.moves(s, b);
        match op {
            StrategicOp::Cooperation => sa.iter().any(|x| {
                inside(&self.out(x), phi) && sb.iter().any(|y| inside(&self.out_merged(x, y), psi))
            }),
            StrategicOp::Proactive => sb.iter().any(|y| {
                sa.iter()
                    .all(|x| !inside(&self.out(x), phi) || inside(&self.out_merged(x, y), psi))
            }),
            StrategicOp::Reactive => sa.iter().all(|x| {
                !inside(&self.out(x), phi) || sb.iter().any(|y| inside(&self.out_merged(x, y), psi))
            }),
        }
    }
}

type Pairs = Vec<(usize, usize)>;

/// A relation as a dense matrix.
pub type Rel = Vec<Vec<bool>>;

/// Every `u2` in `o2` has an `r`-partner in `o1`.
fn local_back(r: &dyn Fn(usize, usize) -> bool, o1: &[usize], o2: &[usize]) -> bool {
    o2.iter().all(|&u2| o1.iter().any(|&u1| r(u1, u2)))
}

/// Every `u1` in `o1` has an `r`-partner in `o2`.
fn local_forth(r: &dyn Fn(usize, usize) -> bool, o1: &[usize], o2: &[usize]) -> bool {
    o1.iter().all(|&u1| o2.iter().any(|&u2| r(u1, u2)))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Clause {
    Cl,
    C,
    Alpha,
    Beta,
}

impl<'m> Oracle<'m> {
    /// The forth half of one clause at `(s1, s2)`; `r(u1, u2)` relates an
    /// `s1`-side outcome to an `s2`-side one.
    fn forth(&mut self, clause: Clause, s1: usize, s2: usize, a: Coalition, b: Coalition, r: &dyn Fn(usize, usize) -> bool) -> bool {
        let a1 = self.moves(s1, a);
        let a2 = self.moves(s2, a);
        let b1 = self.moves(s1, b);
        let b2 = self.moves(s2, b);
        match clause {
            Clause::Cl => a1.iter().all(|x1| {
                let o1 = self.out(x1);
                a2.iter().any(|x2| local_back(r, &o1, &self.out(x2)))
            }),
            Clause::C => a1.iter().all(|x1| {
                let o1 = self.out(x1);
                a2.iter().any(|x2| {
                    local_back(r, &o1, &self.out(x2))
                        && b1.iter().all(|y1| {
                            let m1 = self.out_merged(x1, y1);
                            b2.iter().any(|y2| local_back(r, &m1, &self.out_merged(x2, y2)))
                        })
                })
            }),
            Clause::Alpha => b1.iter().all(|y1| {
                b2.iter().any(|y2| {
                    a2.iter().all(|x2| {
                        let o2 = self.out(x2);
                        let m2 = self.out_merged(x2, y2);
                        a1.iter().any(|x1| {
                            local_forth(r, &self.out(x1), &o2) && local_back(r, &self.out_merged(x1, y1), &m2)
                        })
                    })
                })
            }),
            Clause::Beta => a1.iter().all(|x1| {
                let o1 = self.out(x1);
                a2.iter().any(|x2| {
                    local_back(r, &o1, &self.out(x2))
                        && b2.iter().all(|y2| {
                            let m2 = self.out_merged(x2, y2);
                            b1.iter().any(|y1| local_forth(r, &self.out_merged(x1, y1), &m2))
                        })
                })
            }),
        }
    }

    fn pair_ok(&mut self, rel: &Rel, clauses: &[Clause], s1: usize, s2: usize) -> bool {
        if self.model.labels(s1) != self.model.labels(s2) {
            return false;
        }
        let coalitions = all_coalitions(self.model);
        let fwd = |u1: usize, u2: usize| rel[u1][u2];
        let bwd = |u2: usize, u1: usize| rel[u1][u2];
        for &clause in clauses {
            for &a in &coalitions {
                let bs: &[Coalition] = if clause == Clause::Cl { &[Coalition::EMPTY] } else { &coalitions };
                for &b in bs {
                    if !self.forth(clause, s1, s2, a, b, &fwd) || !self.forth(clause, s2, s1, a, b, &bwd) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Whether `rel` satisfies atom equivalence and every listed clause at
    /// every related pair.
    pub fn is_bisim(&mut self, rel: &Rel, clauses: &[Clause]) -> bool {
        let n = self.model.state_count();
        (0..n).all(|x| (0..n).all(|y| !rel[x][y] || self.pair_ok(rel, clauses, x, y)))
    }
}

pub const CONSTR: [Clause; 3] = [Clause::C, Clause::Alpha, Clause::Beta];

/// The greatest bisimulation by searching relations outright: the union
/// of every relation that passes. Candidates are all subsets of the
/// atom-equivalent pairs, or, with more than `literal_limit` such pairs,
/// only the reflexive symmetric ones (the greatest relation is both,
/// since the identity is a bisimulation and the clauses are closed under
/// inverse and union).
pub fn search_greatest(model: &GameModel, clauses: &[Clause], literal_limit: usize) -> Rel {
    let n = model.state_count();
    let same = |x: usize, y: usize| model.labels(x) == model.labels(y);
    let mut oracle = Oracle::new(model);
    let mut best = vec![vec![false; n]; n];
    let all: Vec<(usize, usize)> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).filter(|&(x, y)| same(x, y)).collect();
    let (free, fixed): (Pairs, Pairs) = if all.len() <= literal_limit {
        (all, Vec::new())
    } else {
        let off: Vec<(usize, usize)> = all.iter().copied().filter(|&(x, y)| x < y).collect();
        (off, (0..n).map(|x| (x, x)).collect())
    };
    let symmetric = !fixed.is_empty();
    for mask in 0u64..(1u64 << free.len()) {
        let mut rel = vec![vec![false; n]; n];
        for &(x, y) in &fixed {
            rel[x][y] = true;
        }
        for (i, &(x, y)) in free.iter().enumerate() {
            if mask >> i & 1 == 1 {
                rel[x][y] = true;
                if symmetric {
                    rel[y][x] = true;
                }
            }
        }
        if oracle.is_bisim(&rel, clauses) {
            for x in 0..n {
                for y in 0..n {
                    best[x][y] |= rel[x][y];
                }
            }
        }
    }
    best
}

/// A random formula of modal depth at most `depth` over `p`, `q` and the
/// model's agents.
pub fn random_formula<R: Rng>(rng: &mut R, agents: &[String], depth: usize) -> Formula {
    let leaf = |rng: &mut R| match rng.gen_range(0..4) {
        0 => Formula::atom("p"),
        1 => Formula::atom("q"),
        2 => Formula::Top,
        _ => Formula::bottom(),
    };
    let coalition = |rng: &mut R| {
        let members: Vec<&String> = agents.iter().filter(|_| rng.gen_bool(0.5)).collect();
        AgentSet(members.into_iter().cloned().collect())
    };
    match rng.gen_range(0..10) {
        0..=2 => leaf(rng),
        3 => Formula::not(random_formula(rng, agents, depth)),
        4 => Formula::and(random_formula(rng, agents, depth), random_formula(rng, agents, depth)),
        5 => Formula::or(random_formula(rng, agents, depth), random_formula(rng, agents, depth)),
        _ if depth == 0 => leaf(rng),
        _ => {
            let op = *StrategicOp::ALL.choose(rng).unwrap();
            let (a, b) = (coalition(rng), coalition(rng));
            let phi = random_formula(rng, agents, depth - 1);
            let psi = random_formula(rng, agents, depth - 1);
            Formula::strategic(op, a, b, phi, psi)
        }
    }
}

/// One formula per boolean function of `p` and `q`.
pub fn boolean_functions() -> Vec<Formula> {
    let p = Formula::atom("p");
    let q = Formula::atom("q");
    let minterms = [
        Formula::and(p.clone(), q.clone()),
        Formula::and(p.clone(), Formula::not(q.clone())),
        Formula::and(Formula::not(p.clone()), q.clone()),
        Formula::and(Formula::not(p), Formula::not(q)),
    ];
    (0..16u32)
        .map(|bits| {
            let chosen: Vec<Formula> = (0..4).filter(|i| bits >> i & 1 == 1).map(|i| minterms[i].clone()).collect();
            if chosen.is_empty() {
                Formula::bottom()
            } else {
                Formula::disjunction(chosen)
            }
        })
        .collect()
}

pub fn mask(ext: &[bool]) -> u64 {
    ext.iter().enumerate().fold(0, |m, (i, &b)| m | (b as u64) << i)
}
