#[path = "support/heap_gen.rs"]
mod heap_gen;

use heap_gen::*;
use proptest::prelude::*;

/// Pairs that share a description half of the time, so both outcomes of
/// the equivalence are exercised.
fn pair() -> impl Strategy<Value = (Desc, Desc, u64, u64)> {
    (1..=3usize).prop_flat_map(|n| (desc(n), desc(n), any::<bool>(), any::<u64>(), any::<u64>())).prop_map(|(a, b, same, s1, s2)| {
        let b = if same { a.clone() } else { b };
        (a, b, s1, s2)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn equivalence_laws_and_equal_lists_agreement((d1, d2, s1, s2) in pair()) {
        if let Err(e) = check_pair(&d1, &d2, s1, s2) {
            prop_assert!(false, "{}", e);
        }
    }

    #[test]
    fn equivalence_is_transitive(
        (d, pick, s) in (1..=3usize).prop_flat_map(|n| (prop::collection::vec(desc(n), 3), prop::collection::vec(0..3usize, 3), any::<[u64; 3]>()))
    ) {
        // Mostly repeated descriptions, so chains of equivalences occur.
        let ds = [&d[pick[0].min(1)], &d[pick[1].min(1)], &d[pick[2]]];
        if let Err(e) = check_triple(ds, s) {
            prop_assert!(false, "{}", e);
        }
    }
}

#[test]
fn equal_descriptions_with_different_layouts_are_equivalent() {
    let d = vec![RefSpec::Fresh(vec![1, 0]), RefSpec::Alias(0), RefSpec::Null];
    let sp = spec(3);
    for seed in 0..50 {
        assert!(loopstream::heap::heap_equiv(&realize(&d, 0), &realize(&d, seed), &sp));
    }
    let unaliased = vec![RefSpec::Fresh(vec![1, 0]), RefSpec::Fresh(vec![1, 0]), RefSpec::Null];
    assert!(!loopstream::heap::heap_equiv(&realize(&d, 0), &realize(&unaliased, 0), &sp));
}
