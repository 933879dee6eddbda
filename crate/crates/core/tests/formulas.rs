use constr_core::formula::{parse_formula, AgentSet, Derived, Formula, StrategicOp};
use proptest::prelude::*;

fn p() -> Formula {
    Formula::atom("p")
}

fn q() -> Formula {
    Formula::atom("q")
}

fn set(names: &[&str]) -> AgentSet {
    AgentSet::of(names)
}

#[test]
fn parses_operators_and_sugar() {
    assert_eq!(
        parse_formula("Oc[{a},{b}](p, q)").unwrap(),
        Formula::strategic(StrategicOp::Cooperation, set(&["a"]), set(&["b"]), p(), q())
    );
    assert_eq!(
        parse_formula("[{b}] q").unwrap(),
        Formula::oa(AgentSet::empty(), set(&["b"]), Formula::Top, q())
    );
    assert_eq!(parse_formula("p -> q").unwrap(), Formula::not(Formula::and(p(), Formula::not(q()))));
    assert_eq!(parse_formula("false").unwrap(), Formula::not(Formula::Top));
    assert_eq!(
        parse_formula("Cd[{a}](p, q)").unwrap(),
        Formula::not(Formula::ob(set(&["a"]), AgentSet::empty(), p(), Formula::not(q())))
    );
    assert_eq!(
        Derived::ConditionalDiamond(set(&["a"]), p(), q()).desugar(),
        parse_formula("Cd[{a}](p, q)").unwrap()
    );
}

#[test]
fn prints_canonically() {
    assert_eq!(
        Formula::oc(set(&["a"]), set(&["b"]), p(), q()).render(),
        "Oc[{a},{b}](p, q)"
    );
    assert_eq!(Formula::not(Formula::not(p())).render(), "~~p");
    assert_eq!(
        Formula::ob(AgentSet::empty(), set(&["a", "b"]), Formula::Top, p()).render(),
        "Ob[{},{a,b}](true, p)"
    );
}

#[test]
fn rejects_malformed_input() {
    for bad in ["", "p &", "Oc[{a}](p, q)", "Oc[{a},{b}](p)", "(p", "p q", "Ox[{},{}](p, q)", "{a}"] {
        assert!(parse_formula(bad).is_err(), "{bad:?} parsed");
    }
}

fn coalition() -> impl Strategy<Value = AgentSet> {
    prop::collection::btree_set(prop::sample::select(vec!["a", "b", "c"]), 0..=3)
        .prop_map(|s| AgentSet(s.into_iter().map(String::from).collect()))
}

fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::Top),
        prop::sample::select(vec!["p", "q", "r1", "done_x"]).prop_map(Formula::atom),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
            (
                prop::sample::select(StrategicOp::ALL.to_vec()),
                coalition(),
                coalition(),
                inner.clone(),
                inner
            )
                .prop_map(|(op, a, b, phi, psi)| Formula::strategic(op, a, b, phi, psi)),
        ]
    })
}

proptest! {
    #[test]
    fn print_then_parse_is_identity(f in formula()) {
        let text = f.render();
        let back = parse_formula(&text).unwrap();
        prop_assert_eq!(&back, &f, "{}", text);
        prop_assert_eq!(back.render(), text);
    }
}
