use hylo_core::codata::{
    check_guardedness, prefix, productivity_probe, unfold, CodataSystem, Outcome, SymbolDoc, DEFAULT_FUEL,
};
use num_bigint::BigInt;
use proptest::prelude::*;

const DROPEVEN: &str = include_str!("../../../fixtures/dropeven.codata");
const SMERGE: &str = include_str!("../../../fixtures/smerge.codata");
const BAD_LOOP: &str = include_str!("../../../fixtures/bad_loop.codata");

/// State `i` of a machine denotes `v_i : interleave(S_{j_i}, S_{l_i})`.
type Machine = Vec<(i64, usize, usize)>;

/// Element `k` of `S_i`, read straight off the stream equations.
fn machine_nth(m: &Machine, i: usize, k: usize) -> i64 {
    let (v, j, l) = m[i];
    if k == 0 {
        return v;
    }
    let k = k - 1;
    if k.is_multiple_of(2) {
        machine_nth(m, j, k / 2)
    } else {
        machine_nth(m, l, k / 2)
    }
}

fn machine_system(m: &Machine) -> CodataSystem {
    let base = CodataSystem::parse(SMERGE).unwrap();
    let equation = m
        .iter()
        .enumerate()
        .map(|(i, (v, j, l))| format!("f(g{i}) = smerge({v},f(g{j}),f(g{l}))"))
        .collect();
    let generators = (0..m.len())
        .map(|i| SymbolDoc {
            name: format!("g{i}"),
            arity: 0,
            sorts: None,
        })
        .collect();
    base.with_equation(equation, generators).unwrap()
}

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn machine() -> impl Strategy<Value = Machine> {
    (1usize..=4).prop_flat_map(|n| prop::collection::vec((-5i64..=5, 0..n, 0..n), n))
}

#[test]
fn dropeven_keeps_even_positions() {
    let sys = CodataSystem::parse(DROPEVEN).unwrap();
    let t = sys.parse_term("f(arith(0,1))").unwrap();
    assert_eq!(prefix(&sys, &t, 8, DEFAULT_FUEL).unwrap().values, big(&[0, 2, 4, 6, 8, 10, 12, 14]));
    for (path, want) in [(vec!["hd"], 0), (vec!["tl", "hd"], 2), (vec!["tl", "tl", "hd"], 4)] {
        let r = unfold(&sys, &t, &path, DEFAULT_FUEL).unwrap();
        assert_eq!(r.outcome, Outcome::Done(hylo_core::codata::Observation::Value(BigInt::from(want))));
    }
    assert!(productivity_probe(&sys, &t, 32, DEFAULT_FUEL).ok);
    assert!(check_guardedness(&sys).guarded);
}

#[test]
fn smerge_fixture_is_constant_zero() {
    let sys = CodataSystem::parse(SMERGE).unwrap();
    let t = sys.parse_term("f(g)").unwrap();
    assert_eq!(prefix(&sys, &t, 4, DEFAULT_FUEL).unwrap().values, big(&[0, 0, 0, 0]));
    assert!(check_guardedness(&sys).guarded);
    assert!(productivity_probe(&sys, &t, 32, DEFAULT_FUEL).ok);
}

#[test]
fn two_state_machine() {
    let m: Machine = vec![(0, 1, 1), (1, 0, 0)];
    let want: Vec<i64> = (0..4).map(|k| machine_nth(&m, 0, k)).collect();
    assert_eq!(want, vec![0, 1, 1, 0]);
    let sys = machine_system(&m);
    let t = sys.parse_term("f(g0)").unwrap();
    assert_eq!(prefix(&sys, &t, 4, DEFAULT_FUEL).unwrap().values, big(&want));
}

#[test]
fn bad_loop_exhausts_fuel() {
    let sys = CodataSystem::parse(BAD_LOOP).unwrap();
    let t = sys.parse_term("bad(arith(0,1))").unwrap();
    let r = unfold(&sys, &t, &["hd"], 1000).unwrap();
    assert!(matches!(r.outcome, Outcome::FuelExhausted { .. }));
    assert_eq!(r.steps_used, 1000);
    let g = check_guardedness(&sys);
    assert!(!g.guarded);
    assert_eq!(g.offending_rule.as_deref(), Some("hd(bad(s)) = hd(bad(s))"));
    let cert = productivity_probe(&sys, &t, 1, 1000);
    assert!(!cert.ok);
    assert_eq!(cert.failure.unwrap().0, 0);
}

#[test]
fn cycle_copy() {
    let sys = CodataSystem::parse(DROPEVEN).unwrap();
    let t = sys.parse_term("f(cycle([7]))").unwrap();
    assert_eq!(prefix(&sys, &t, 6, DEFAULT_FUEL).unwrap().values, big(&[7; 6]));
    let t = sys.parse_term("f(cycle([1,2,3]))").unwrap();
    assert_eq!(prefix(&sys, &t, 6, DEFAULT_FUEL).unwrap().values, big(&[1, 3, 2, 1, 3, 2]));
}

proptest! {
    #[test]
    fn machines_match_interleave_oracle(m in machine(), start in 0usize..4) {
        let start = start % m.len();
        let sys = machine_system(&m);
        let t = sys.parse_term(&format!("f(g{start})")).unwrap();
        let want: Vec<i64> = (0..16).map(|k| machine_nth(&m, start, k)).collect();
        let got = prefix(&sys, &t, 16, DEFAULT_FUEL).unwrap();
        prop_assert_eq!(got.values, big(&want));
        prop_assert!(productivity_probe(&sys, &t, 16, DEFAULT_FUEL).ok);
        prop_assert!(check_guardedness(&sys).guarded);
    }

    #[test]
    fn dropeven_on_arith(a in -1000i64..1000, s in -50i64..50, n in 0usize..24) {
        let sys = CodataSystem::parse(DROPEVEN).unwrap();
        let t = sys.parse_term(&format!("f(arith({a},{s}))")).unwrap();
        let want: Vec<i64> = (0..n as i64).map(|k| a + 2 * k * s).collect();
        prop_assert_eq!(prefix(&sys, &t, n, DEFAULT_FUEL).unwrap().values, big(&want));
    }

    #[test]
    fn unfold_is_deterministic(m in machine(), depth in 0usize..12) {
        let sys = machine_system(&m);
        let t = sys.parse_term("f(g0)").unwrap();
        let mut path = vec!["tl"; depth];
        path.push("hd");
        prop_assert_eq!(unfold(&sys, &t, &path, DEFAULT_FUEL).unwrap(), unfold(&sys, &t, &path, DEFAULT_FUEL).unwrap());
    }

    #[test]
    fn more_fuel_gives_the_same_answer(m in machine(), depth in 0usize..10, fuel in 1u64..200, extra in 0u64..500) {
        let sys = machine_system(&m);
        let t = sys.parse_term("f(g0)").unwrap();
        let mut path = vec!["tl"; depth];
        path.push("hd");
        let small = unfold(&sys, &t, &path, fuel).unwrap();
        if let Outcome::Done(v) = small.outcome {
            let large = unfold(&sys, &t, &path, fuel + extra).unwrap();
            prop_assert_eq!(large.outcome, Outcome::Done(v));
            prop_assert_eq!(large.steps_used, small.steps_used);
        }
    }

    #[test]
    fn prefixes_cohere(m in machine(), n in 0usize..12, fuel in 1u64..400) {
        let sys = machine_system(&m);
        let t = sys.parse_term("f(g0)").unwrap();
        let short = prefix(&sys, &t, n, fuel).unwrap();
        let long = prefix(&sys, &t, n + 1, fuel).unwrap();
        if short.exhausted_at.is_none() && long.exhausted_at.is_none() {
            prop_assert_eq!(&long.values[..n], &short.values[..]);
        }
    }
}
