use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use lemip::boxes::PrBox;
use lemip::commitments::{equivocate, hom_linear, pr_commit_full, pr_unveil_verify, CommitKeys, Mode, Opening};
use lemip::fields::{interpolate, BoolTable, FieldSpec};
use lemip::stats::RateEstimate;

fn field() -> impl Strategy<Value = FieldSpec> {
    prop_oneof![
        prop::sample::select(vec![2u64, 3, 5, 7, 13, 251, 65521, 2_147_483_647]).prop_map(|p| FieldSpec::prime(p).unwrap()),
        (1u32..=16).prop_map(|k| FieldSpec::binary(k).unwrap()),
    ]
}

/// A field and `n` of its elements.
fn with_elems(n: usize) -> impl Strategy<Value = (FieldSpec, Vec<u64>)> {
    field().prop_flat_map(move |f| (Just(f), prop::collection::vec(0..f.order(), n)))
}

proptest! {
    #[test]
    fn field_operations_are_consistent((f, v) in with_elems(3)) {
        let (a, b, c) = (v[0], v[1], v[2]);
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), 0);
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn pr_box_law_holds_in_either_order((f, v) in with_elems(2), seed: u64, a_first: bool) {
        let mut bx = PrBox::new(f, &mut ChaCha20Rng::seed_from_u64(seed));
        let (x, u) = if a_first {
            prop_assert!(bx.input_a(v[0]).unwrap().is_none());
            let x = bx.input_b(v[1]).unwrap();
            (x, bx.output_a().unwrap())
        } else {
            let x = bx.input_b(v[1]).unwrap();
            (x, bx.input_a(v[0]).unwrap().unwrap())
        };
        prop_assert_eq!(f.sub(u, x), f.mul(v[0], v[1]));
        prop_assert!(bx.input_b(0).is_err());
    }

    #[test]
    fn honest_commitments_open_to_their_value((f, v) in with_elems(4)) {
        let keys = CommitKeys { z1: v[0].max(1), z2: v[1] };
        let opening = Opening { w1: v[2], w2: v[3] };
        let value = f.reduce(v[3] ^ v[2]);
        let com = pr_commit_full(&f, keys, value, opening).unwrap();
        prop_assert_eq!(pr_unveil_verify(&f, &com, opening, Mode::Field).unwrap(), value);
        let tampered = Opening { w1: v[2], w2: f.add(v[3], 1) };
        prop_assert!(pr_unveil_verify(&f, &com, tampered, Mode::Field).is_err());
    }

    #[test]
    fn linear_combinations_open_to_the_combined_value((f, v) in with_elems(10)) {
        let keys = CommitKeys { z1: v[0].max(1), z2: v[1] };
        let items: Vec<_> = (0..2)
            .map(|i| {
                let o = Opening { w1: v[2 + 3 * i], w2: v[3 + 3 * i] };
                (pr_commit_full(&f, keys, v[4 + 3 * i], o).unwrap(), o)
            })
            .collect();
        let coeffs = [v[8], v[9]];
        let (com, o) = hom_linear(&f, &items, &coeffs).unwrap();
        let expected = f.add(f.mul(coeffs[0], v[4]), f.mul(coeffs[1], v[7]));
        prop_assert_eq!(pr_unveil_verify(&f, &com, o, Mode::Field).unwrap(), expected);
    }

    #[test]
    fn a_box_equivocates_to_any_target((f, v) in with_elems(4), seed: u64) {
        let (z1, z2, c, target) = (v[0].max(1), v[1], v[2], v[3]);
        let mut bx = PrBox::new(f, &mut ChaCha20Rng::seed_from_u64(seed));
        let d = bx.input_b(z2).unwrap();
        let com = lemip::commitments::PrCommitment { keys: CommitKeys { z1, z2 }, c, d };
        let o = equivocate(&f, &mut bx, target, c, z1).unwrap();
        prop_assert_eq!(pr_unveil_verify(&f, &com, o, Mode::Field).unwrap(), target);
    }

    #[test]
    fn multilinear_extension_agrees_on_the_cube(s in 1usize..=4, code: u64) {
        let f = FieldSpec::prime(65521).unwrap();
        let table = BoolTable::from_code(s, code % (1 << (1 << s)));
        for idx in 0..1u64 << s {
            let point: Vec<u64> = (0..s).map(|j| (idx >> j) & 1).collect();
            let bits: Vec<bool> = point.iter().map(|&b| b == 1).collect();
            prop_assert_eq!(table.eval(&f, &point).unwrap(), table.get(&bits) as u64);
        }
    }

    #[test]
    fn interpolation_recovers_the_samples((f, ys) in with_elems(4)) {
        prop_assume!(f.order() >= 4);
        let xs: Vec<u64> = (0..4).collect();
        let p = interpolate(f, &xs, &ys).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            prop_assert_eq!(p.eval(*x), *y);
        }
    }

    #[test]
    fn wilson_interval_brackets_the_point(trials in 1u64..100_000, frac in 0.0f64..=1.0) {
        let successes = (frac * trials as f64).floor() as u64;
        let r = RateEstimate::wilson(successes, trials);
        prop_assert!(0.0 <= r.lower && r.lower <= r.point && r.point <= r.upper && r.upper <= 1.0);
    }
}

#[test]
fn wilson_matches_a_hand_computed_interval() {
    // 0 of 100: upper = z^2/n / (1 + z^2/n) with z = 1.959964.
    let r = RateEstimate::wilson(0, 100);
    assert!((r.upper - 0.036_993).abs() < 1e-5, "{}", r.upper);
    assert_eq!(r.lower, 0.0);
    // 50 of 100: centre 0.5, half-width 0.0962.
    let r = RateEstimate::wilson(50, 100);
    assert!((r.lower - 0.403_832).abs() < 1e-5 && (r.upper - 0.596_168).abs() < 1e-5, "{r:?}");
}
