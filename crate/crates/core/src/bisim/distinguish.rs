//! Distinguishing formulas by definable partition refinement.
//!
//! Every class of the current partition carries a formula χ whose
//! extension is exactly that class, so any union of classes is definable
//! by a disjunction. While the partition (read as an equivalence) violates
//! some clause at a pair of same-class states, we look for an operator
//! formula `Op(A, D, χ(Z), χ(Y))` over unions of classes that separates the
//! two, and split every class by its extension. Candidate formulas are
//! evaluated on sets directly, since ⟦χ(Z)⟧ = Z.
//!
//! When the partition stops violating the clauses it is a bisimulation
//! whose classes are formula-definable, hence it is the greatest one.

use thiserror::Error;

use super::clauses::{disjoint_pairs, pair_violation, Family, Tables, View};
use crate::formula::{AgentSet, Formula, StrategicOp};
use crate::model::{Coalition, GameModel, StateSet};
use crate::semantics::operator_holds;

/// Unions over at most this many relevant classes are searched exhaustively.
const EXHAUSTIVE_CLASSES: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RefinementError {
    /// A clause fails inside a class but no candidate formula separates
    /// the pair.
    #[error("no candidate formula separates `{s}` from `{t}` although a clause fails for them")]
    Stalled { s: String, t: String },
}

/// The stable partition together with the formulas that produced it.
#[derive(Clone, Debug)]
pub struct Refinement {
    class_of: Vec<usize>,
    characteristic: Vec<Formula>,
    /// Every formula used to split, with its extension, in creation order.
    splitters: Vec<(Formula, StateSet)>,
}

impl Refinement {
    pub fn compute(model: &GameModel) -> Result<Refinement, RefinementError> {
        let n = model.state_count();
        let mut r = Refinement {
            class_of: vec![0; n],
            characteristic: vec![Formula::Top],
            splitters: Vec::new(),
        };
        for atom in model.atoms() {
            r.split(Formula::atom(atom), model.atom_extension(atom));
        }
        let mut tables = Tables::new(model);
        loop {
            let view = r.view();
            let mut stalled = None;
            let mut progressed = false;
            'pairs: for x in 0..n {
                for y in 0..n {
                    if x == y || r.class_of[x] != r.class_of[y] {
                        continue;
                    }
                    let Some(v) = pair_violation(&mut tables, &Family::CONSTR, model.agent_count(), x, y, &view, &view) else {
                        continue;
                    };
                    let order = op_order(v.family);
                    match r.find_splitter(model, &mut tables, x, y, &order, (v.a, v.d)) {
                        Some((f, ext)) => {
                            r.split(f, ext);
                            progressed = true;
                            break 'pairs;
                        }
                        None => {
                            stalled.get_or_insert((x, y));
                        }
                    }
                }
            }
            if progressed {
                continue;
            }
            return match stalled {
                None => Ok(r),
                Some((x, y)) => Err(RefinementError::Stalled {
                    s: model.state_name(x).to_string(),
                    t: model.state_name(y).to_string(),
                }),
            };
        }
    }

    pub fn class_count(&self) -> usize {
        self.characteristic.len()
    }

    pub fn same_class(&self, s: usize, t: usize) -> bool {
        self.class_of[s] == self.class_of[t]
    }

    /// Formula whose extension is exactly the class of `s`.
    pub fn characteristic(&self, s: usize) -> &Formula {
        &self.characteristic[self.class_of[s]]
    }

    pub fn splitters(&self) -> &[(Formula, StateSet)] {
        &self.splitters
    }

    /// A formula true at `s` and false at `t`, or `None` when they share a
    /// class.
    pub fn distinguish(&self, s: usize, t: usize) -> Option<Formula> {
        self.splitters.iter().find_map(|(f, ext)| match (ext.contains(s), ext.contains(t)) {
            (true, false) => Some(f.clone()),
            (false, true) => Some(Formula::not(f.clone())),
            _ => None,
        })
    }

    fn view(&self) -> View {
        let n = self.class_of.len();
        let members = self.members();
        let fwd: Vec<StateSet> = (0..n).map(|s| members[self.class_of[s]].clone()).collect();
        View { bwd: fwd.clone(), fwd }
    }

    fn members(&self) -> Vec<StateSet> {
        let n = self.class_of.len();
        let mut members = vec![StateSet::with_capacity(n); self.characteristic.len()];
        for (s, &c) in self.class_of.iter().enumerate() {
            members[c].insert(s);
        }
        members
    }

    fn split(&mut self, f: Formula, ext: StateSet) {
        let members = self.members();
        let mut touched = false;
        for (c, set) in members.iter().enumerate() {
            let inside = set.intersection(&ext).count();
            if inside == 0 || inside == set.count_ones(..) {
                continue;
            }
            touched = true;
            let chi = self.characteristic[c].clone();
            let fresh = self.characteristic.len();
            self.characteristic[c] = conj(chi.clone(), f.clone());
            self.characteristic.push(conj(chi, Formula::not(f.clone())));
            for s in set.ones().filter(|&s| !ext.contains(s)) {
                self.class_of[s] = fresh;
            }
        }
        if touched {
            self.splitters.push((f, ext));
        }
    }

    /// Formula for a union of classes (bitmask over class ids).
    fn union_formula(&self, classes: &[usize], total: usize) -> Formula {
        if classes.is_empty() {
            return Formula::bottom();
        }
        if classes.len() == total {
            return Formula::Top;
        }
        if classes.len() * 2 > total {
            let rest = (0..total)
                .filter(|c| !classes.contains(c))
                .map(|c| self.characteristic[c].clone());
            return Formula::not(Formula::disjunction(rest));
        }
        Formula::disjunction(classes.iter().map(|&c| self.characteristic[c].clone()))
    }

    fn find_splitter(
        &self,
        model: &GameModel,
        tables: &mut Tables<'_>,
        x: usize,
        y: usize,
        ops: &[StrategicOp],
        first: (Coalition, Coalition),
    ) -> Option<(Formula, StateSet)> {
        let members = self.members();
        let total = members.len();
        let mut pairs = vec![first];
        pairs.extend(disjoint_pairs(model.agent_count()).into_iter().filter(|&p| p != first));
        // classes that contain a successor of x or y; the rest never matter
        let mut succ = model.successors(x);
        succ.union_with(&model.successors(y));
        let relevant: Vec<usize> = (0..total).filter(|&c| !members[c].is_disjoint(&succ)).collect();
        let candidates = candidate_unions(&relevant, &members, tables, x, y, &pairs);
        let as_set = |mask: &Vec<usize>| {
            let mut set = StateSet::with_capacity(model.state_count());
            for &c in mask {
                set.union_with(&members[c]);
            }
            set
        };
        let sets: Vec<StateSet> = candidates.iter().map(as_set).collect();
        for &(a, d) in &pairs {
            let t = tables.get(a, d);
            for &op in ops {
                for (zi, z) in sets.iter().enumerate() {
                    for (yi, ys) in sets.iter().enumerate() {
                        if operator_holds(op, &t[x], z, ys) == operator_holds(op, &t[y], z, ys) {
                            continue;
                        }
                        let ext: StateSet = (0..model.state_count())
                            .filter(|&s| operator_holds(op, &t[s], z, ys))
                            .collect();
                        let f = Formula::strategic(
                            op,
                            AgentSet::of(&model.coalition_names(a)),
                            AgentSet::of(&model.coalition_names(d)),
                            self.union_formula(&candidates[zi], total),
                            self.union_formula(&candidates[yi], total),
                        );
                        return Some((f, ext));
                    }
                }
            }
        }
        None
    }
}

fn conj(l: Formula, r: Formula) -> Formula {
    if l == Formula::Top {
        r
    } else {
        Formula::and(l, r)
    }
}

fn op_order(family: Family) -> Vec<StrategicOp> {
    let first = match family {
        Family::Proactive => StrategicOp::Proactive,
        Family::Reactive => StrategicOp::Reactive,
        _ => StrategicOp::Cooperation,
    };
    let mut ops = vec![first];
    ops.extend(StrategicOp::ALL.iter().copied().filter(|&op| op != first));
    ops
}

/// Unions of classes to try as argument sets: all subsets of the relevant
/// classes when there are few, otherwise class closures of outcome sets at
/// the two states plus their complements.
fn candidate_unions(
    relevant: &[usize],
    members: &[StateSet],
    tables: &mut Tables<'_>,
    x: usize,
    y: usize,
    pairs: &[(Coalition, Coalition)],
) -> Vec<Vec<usize>> {
    if relevant.len() <= EXHAUSTIVE_CLASSES {
        return (0u32..1 << relevant.len())
            .map(|mask| {
                relevant
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &c)| c)
                    .collect()
            })
            .collect();
    }
    let closure = |set: &StateSet| -> Vec<usize> {
        relevant
            .iter()
            .copied()
            .filter(|&c| !members[c].is_disjoint(set))
            .collect()
    };
    let mut out: Vec<Vec<usize>> = vec![Vec::new(), relevant.to_vec()];
    for &(a, d) in pairs {
        let t = tables.get(a, d);
        for s in [x, y] {
            for set in t[s].by_a.iter().chain(t[s].by_ab.iter().flatten()) {
                let c = closure(set);
                let co: Vec<usize> = relevant.iter().copied().filter(|k| !c.contains(k)).collect();
                out.push(c);
                out.push(co);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// A formula true at `s` and false at `t`, or `None` when the two states
/// are ConStR-bisimilar.
pub fn distinguishing_formula(model: &GameModel, s: usize, t: usize) -> Result<Option<Formula>, RefinementError> {
    Ok(Refinement::compute(model)?.distinguish(s, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisim::greatest_constr_bisim;
    use crate::corpus;
    use crate::semantics::Evaluator;

    #[test]
    fn partition_matches_greatest_bisimulation() {
        for f in corpus::fixtures() {
            let m = f.model();
            let r = Refinement::compute(&m).unwrap();
            let g = greatest_constr_bisim(&m);
            for s in 0..m.state_count() {
                for t in 0..m.state_count() {
                    assert_eq!(r.same_class(s, t), g.contains(s, t), "{} {s} {t}", f.name);
                }
            }
        }
    }

    #[test]
    fn characteristic_formulas_define_their_classes() {
        let m = corpus::fixture("oc_not_cl").unwrap().model();
        let r = Refinement::compute(&m).unwrap();
        let mut ev = Evaluator::new(&m);
        for s in 0..m.state_count() {
            let ext = ev.extension(r.characteristic(s)).unwrap();
            for t in 0..m.state_count() {
                assert_eq!(ext.contains(t), r.same_class(s, t));
            }
        }
    }

    #[test]
    fn separates_the_cooperation_split() {
        let m = corpus::fixture("oc_not_cl").unwrap().model();
        let (s0, t0) = (m.state_index("s0").unwrap(), m.state_index("t0").unwrap());
        let f = distinguishing_formula(&m, s0, t0).unwrap().unwrap();
        let mut ev = Evaluator::new(&m);
        assert!(ev.holds_at(s0, &f).unwrap());
        assert!(!ev.holds_at(t0, &f).unwrap());
        assert_eq!(distinguishing_formula(&m, s0, s0).unwrap(), None);
    }

    #[test]
    fn differing_labels_give_an_atom() {
        let m = corpus::fixture("cooperation").unwrap().model();
        let f = distinguishing_formula(&m, 1, 3).unwrap().unwrap();
        assert_eq!(f.modal_depth(), 0);
    }
}
