use hylo_core::coinductive::{verify_solution, SquareCheck, VerifyMode};
use hylo_core::instance::{generate_example, ExampleKind};
use hylo_core::oracle::{enumerate_solutions, random_instance, Budget};
use hylo_core::{EquationInstance, Limits};
use proptest::prelude::*;

fn profile() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..=3, 1..=3)
}

proptest! {
    #[test]
    fn json_round_trip(profile in profile(), size_a in 0usize..=4, size_b in 1usize..=3, seed in any::<u64>()) {
        let inst = random_instance(&profile, size_a, size_b, seed).unwrap();
        let text = inst.to_json();
        let back = EquationInstance::parse(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn oracle_solutions_verify(profile in profile(), size_a in 0usize..=3, size_b in 1usize..=3, seed in any::<u64>()) {
        let inst = random_instance(&profile, size_a, size_b, seed).unwrap();
        let found = enumerate_solutions(&inst, usize::MAX, &Budget::default()).unwrap();
        prop_assert_eq!(found.solutions.len() as u64, found.count);
        for s in &found.solutions {
            prop_assert_eq!(verify_solution(&inst, s, VerifyMode::Plain).unwrap(), SquareCheck::Pass);
        }
    }

    #[test]
    fn generated_examples_round_trip(el in 1usize..=3, max_len in 0usize..=3, qsort in any::<bool>()) {
        let kind = if qsort { ExampleKind::Qsort { el, max_len } } else { ExampleKind::Isort { el, max_len } };
        let inst = generate_example(kind, Limits::default()).unwrap();
        prop_assert_eq!(EquationInstance::parse(&inst.to_json()).unwrap(), inst);
    }
}
