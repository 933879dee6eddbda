mod common;

use constr_core::bisim::{
    check_cl_bisim, check_constr_bisim, check_families, distinguishing_formula, greatest_cl_bisim, greatest_constr_bisim,
    ClauseTag, Family, StateRelation,
};
use constr_core::corpus::{fixture, fixtures};
use constr_core::model::parse_model;
use constr_core::semantics::Evaluator;
use constr_core::validity::RandomFamily;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_models(count: usize, seed: u64) -> Vec<constr_core::GameModel> {
    let family = RandomFamily {
        agents: (1, 3),
        states: (1, 5),
        actions: (1, 2),
        atoms: vec!["p".into()],
        count,
        seed,
    };
    (0..count).map(|i| family.model(i)).collect()
}

#[test]
fn identity_is_a_bisimulation() {
    let corpus = fixtures().iter().map(|f| f.model());
    for m in corpus.chain(random_models(100, 1)) {
        let id = StateRelation::identity(m.state_count());
        assert!(check_cl_bisim(&m, &id).ok);
        assert!(check_constr_bisim(&m, &id).ok);
    }
}

#[test]
fn differing_labels_fail_atom_equivalence() {
    let m = fixture("cooperation").unwrap().model();
    let rel = StateRelation::from_pairs([(m.state_index("s1").unwrap(), m.state_index("s3").unwrap())]);
    for v in [check_cl_bisim(&m, &rel), check_constr_bisim(&m, &rel)] {
        let failure = v.failure.unwrap();
        assert_eq!(failure.tag, ClauseTag::AtomEq);
        assert_eq!(failure.pair, ("s1".to_string(), "s3".to_string()));
    }
}

#[test]
fn cl_bisimilar_pairs_split_by_each_operator() {
    for (name, family) in [
        ("oc_not_cl", Family::Cooperation),
        ("conditional_box_not_cl", Family::Reactive),
        ("alpha_not_cl", Family::Proactive),
    ] {
        let f = fixture(name).unwrap();
        let m = f.model();
        let rel = f.relation(&m).unwrap();
        assert!(check_cl_bisim(&m, &rel).ok, "{name}");
        let own = check_families(&m, &rel, &[family]);
        let failure = own.failure.expect(name);
        assert_eq!(failure.tag.family(), Some(family), "{name}");
        assert_eq!(failure.pair, ("s0".to_string(), "t0".to_string()), "{name}");
        assert!(!check_constr_bisim(&m, &rel).ok);

        let (s0, t0) = (m.state_index("s0").unwrap(), m.state_index("t0").unwrap());
        assert!(greatest_cl_bisim(&m).contains(s0, t0));
        assert!(!greatest_constr_bisim(&m).contains(s0, t0));
        for (x, y) in rel.pairs() {
            assert!(greatest_cl_bisim(&m).contains(x, y));
        }
    }
}

#[test]
fn cooperation_family_witness() {
    let f = fixture("oc_not_cl").unwrap();
    let m = f.model();
    let rel = f.relation(&m).unwrap();
    let report = check_constr_bisim(&m, &rel).failure.unwrap();
    assert_eq!(report.tag.family(), Some(Family::Cooperation));
    let s0 = m.state_index("s0").unwrap();
    let t0 = m.state_index("t0").unwrap();
    let phi = distinguishing_formula(&m, s0, t0).unwrap().unwrap();
    let mut ev = Evaluator::new(&m);
    assert!(ev.holds_at(s0, &phi).unwrap());
    assert!(!ev.holds_at(t0, &phi).unwrap());
}

#[test]
fn greatest_relations_are_sound_and_nested() {
    let corpus = fixtures().iter().map(|f| f.model());
    for m in corpus.chain(random_models(200, 2)) {
        let cl = greatest_cl_bisim(&m);
        let constr = greatest_constr_bisim(&m);
        assert!(check_cl_bisim(&m, &cl).ok);
        assert!(check_constr_bisim(&m, &constr).ok);
        assert!(constr.is_subset(&cl));
        assert!(StateRelation::identity(m.state_count()).is_subset(&constr));
        assert!(constr.is_symmetric() && cl.is_symmetric());
    }
}

#[test]
fn single_state_model() {
    let m = parse_model("agents: a\nstates: s\nactions s a: x\ngo s (x) -> s\n").unwrap();
    assert_eq!(greatest_constr_bisim(&m), StateRelation::identity(1));
    assert_eq!(distinguishing_formula(&m, 0, 0).unwrap(), None);
}

#[test]
fn isomorphic_copies_are_bisimilar() {
    let one = fixture("cooperation").unwrap().model();
    let m = one.disjoint_union("l_", &one, "r_").unwrap();
    let n = one.state_count();
    let rel = greatest_constr_bisim(&m);
    for s in 0..n {
        assert!(rel.contains(s, s + n), "{}", m.state_name(s));
        assert_eq!(distinguishing_formula(&m, s, s + n).unwrap(), None);
    }
    let iso = StateRelation::from_pairs((0..n).map(|s| (s, s + n)));
    assert!(check_constr_bisim(&m, &iso).ok);
}

fn dense(rel: &StateRelation, n: usize) -> common::Rel {
    (0..n).map(|x| (0..n).map(|y| rel.contains(x, y)).collect()).collect()
}

#[test]
fn checker_agrees_with_direct_clauses() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for m in random_models(300, 3) {
        let n = m.state_count();
        let mut oracle = common::Oracle::new(&m);
        // random relations are almost never bisimulations, so also try
        // the greatest ones with a pair dropped or added
        let mut candidates = vec![greatest_constr_bisim(&m), greatest_cl_bisim(&m)];
        for _ in 0..3 {
            let pairs = (0..n).flat_map(|x| (0..n).map(move |y| (x, y)));
            candidates.push(StateRelation::from_pairs(pairs.filter(|_| rng.gen_bool(0.5))));
        }
        let mut tweaked = candidates[0].clone();
        tweaked.insert(rng.gen_range(0..n), rng.gen_range(0..n));
        candidates.push(tweaked);
        for rel in &candidates {
            let d = dense(rel, n);
            assert_eq!(check_constr_bisim(&m, rel).ok, oracle.is_bisim(&d, &common::CONSTR), "{}", rel.render(&m));
            assert_eq!(check_cl_bisim(&m, rel).ok, oracle.is_bisim(&d, &[common::Clause::Cl]));
            for (family, clause) in [
                (Family::Cooperation, common::Clause::C),
                (Family::Proactive, common::Clause::Alpha),
                (Family::Reactive, common::Clause::Beta),
            ] {
                assert_eq!(check_families(&m, rel, &[family]).ok, oracle.is_bisim(&d, &[clause]));
            }
        }
    }
}

#[test]
fn invariance_on_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for m in random_models(100, 4) {
        let rel = greatest_constr_bisim(&m);
        let mut ev = Evaluator::new(&m);
        for _ in 0..30 {
            let phi = common::random_formula(&mut rng, m.agents(), 3);
            let ext = ev.extension(&phi).unwrap();
            for (x, y) in rel.pairs() {
                assert_eq!(ext.contains(x), ext.contains(y), "{}", phi.render());
            }
        }
    }
}

#[test]
fn distinguishing_formulas_on_random_models() {
    for m in random_models(150, 5) {
        let rel = greatest_constr_bisim(&m);
        let mut ev = Evaluator::new(&m);
        for s in 0..m.state_count() {
            for t in 0..m.state_count() {
                match distinguishing_formula(&m, s, t).unwrap() {
                    None => assert!(rel.contains(s, t)),
                    Some(phi) => {
                        assert!(!rel.contains(s, t));
                        assert!(ev.holds_at(s, &phi).unwrap() && !ev.holds_at(t, &phi).unwrap());
                    }
                }
            }
        }
    }
}

#[test]
fn relation_text_errors_carry_positions() {
    let m = fixture("cooperation").unwrap().model();
    assert!(StateRelation::parse(&m, "s0 ~ s0\n# comment\ns1 ~ s4\n").is_ok());
    let err = StateRelation::parse(&m, "s0 ~ s0\ns1 ~ zz\n").unwrap_err();
    assert_eq!(err.line, 2);
    assert!(StateRelation::parse(&m, "s0 s1\n").is_err());
}
