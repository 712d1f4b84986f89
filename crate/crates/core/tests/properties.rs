use proptest::prelude::*;

use hsb_core::field::GridField;
use hsb_core::hyperdim::global_histogram_d;
use hsb_core::levelsets::{binomial_expected, histogram, lp_norm_pth_power, verify_field};
use hsb_core::normalize::{normalize, witness_apply, RearrangementWitness};
use hsb_core::{eval_grid, eval_grid_fast, id_rect, DyadicRect, SignAssignment, SignSampler};

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn sample(n: u32, d: usize, seed: u64) -> SignAssignment {
    SignSampler::new(n, d, seed).unwrap().next_assignment()
}

/// `(n, a, b, ox, oy)` with `a + b <= n + 1`.
fn admissible() -> impl Strategy<Value = (u32, DyadicRect)> {
    (0u32..=6)
        .prop_flat_map(|n| (Just(n), 0..=n + 1))
        .prop_flat_map(|(n, a)| (Just(n), Just(a), 0..=n + 1 - a))
        .prop_flat_map(|(n, a, b)| (Just(n), Just(a), Just(b), 0..1u64 << a, 0..1u64 << b))
        .prop_map(|(n, a, b, ox, oy)| (n, DyadicRect::from_parts(&[a, b], &[ox, oy]).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn histogram_matches_closed_form((n, q) in admissible(), seed in any::<u64>()) {
        let s = sample(n, 2, seed);
        let h = histogram(&eval_grid_fast(n, &s).unwrap(), &q).unwrap();
        let shift = n + 1 - q.level_sum();
        for k in 0..=n as u64 + 1 {
            let want = binom(n as u64 + 1, k) << shift;
            prop_assert_eq!(h.count(n as i32 + 1 - 2 * k as i32), want);
            prop_assert_eq!(binomial_expected(n, &q, k as u32).unwrap(), want);
        }
        prop_assert_eq!(h.total(), q.cell_count(n + 1).unwrap());
    }

    #[test]
    fn negation_mirrors_histograms((n, q) in admissible(), seed in any::<u64>()) {
        let s = sample(n, 2, seed);
        let h = histogram(&eval_grid_fast(n, &s).unwrap(), &q).unwrap();
        let m = histogram(&eval_grid_fast(n, &s.negated()).unwrap(), &q).unwrap();
        prop_assert_eq!(m, h.mirrored());
    }

    #[test]
    fn single_flip_changes_field_by_twice_the_haar_function(n in 0u32..=5, seed in any::<u64>(), pick in any::<u64>()) {
        let s = sample(n, 2, seed);
        let id = pick % s.len() as u64;
        let mut t = s.clone();
        t.negate(id).unwrap();
        let a = eval_grid_fast(n, &s).unwrap();
        let b = eval_grid_fast(n, &t).unwrap();
        let rect = id_rect(n, 2, id).unwrap();
        let ranges = rect.cell_ranges(n + 1).unwrap();
        let side = a.side();
        for i in 0..side {
            for j in 0..side {
                let diff = a.get(&[i, j]).unwrap() - b.get(&[i, j]).unwrap();
                let inside = ranges[0].contains(&i) && ranges[1].contains(&j);
                prop_assert_eq!(diff.abs(), if inside { 2 } else { 0 });
            }
        }
    }

    #[test]
    fn witness_is_a_permutation_of_the_region((n, q) in admissible(), seed in any::<u64>()) {
        let s = sample(n, 2, seed);
        let (ones, witness) = normalize(n, &s, &q).unwrap();
        prop_assert!(ones.is_all_ones());
        let map = witness.source_map().unwrap();
        let mut seen = vec![false; map.len()];
        for &src in &map {
            prop_assert!(!seen[src as usize]);
            seen[src as usize] = true;
        }
        let ranges = q.cell_ranges(n + 1).unwrap();
        let side = 1u64 << (n + 1);
        for (p, &src) in map.iter().enumerate() {
            let inside = |c: u64| ranges[0].contains(&(c / side)) && ranges[1].contains(&(c % side));
            prop_assert_eq!(inside(p as u64), inside(src as u64));
            if !inside(p as u64) {
                prop_assert_eq!(p as u32, src);
            }
        }
        let back = RearrangementWitness::from_json(&witness.to_json()).unwrap();
        prop_assert_eq!(&back, &witness);
        let moved = witness_apply(&witness, &eval_grid_fast(n, &s).unwrap()).unwrap();
        let target = eval_grid_fast(n, &ones).unwrap();
        prop_assert_eq!(histogram(&moved, &q).unwrap(), histogram(&target, &q).unwrap());
    }

    #[test]
    fn sign_text_round_trip(n in 0u32..=6, d in 1usize..=3, seed in any::<u64>()) {
        prop_assume!(d as u32 * (n + 1) <= 12);
        let s = sample(n, d, seed);
        let back: SignAssignment = s.to_string().parse().unwrap();
        prop_assert_eq!(back.digest(), s.digest());
        prop_assert_eq!(back, s);
    }

    #[test]
    fn dump_round_trip(n in 0u32..=5, d in 1usize..=3, seed in any::<u64>()) {
        prop_assume!(d as u32 * (n + 1) <= 12);
        let f = eval_grid_fast(n, &sample(n, d, seed)).unwrap();
        let mut buf = Vec::new();
        f.write_dump(&mut buf).unwrap();
        prop_assert_eq!(GridField::read_dump(&buf[..]).unwrap(), f);
    }

    #[test]
    fn fast_matches_reference_in_higher_dimensions(n in 0u32..=2, d in 3usize..=4, seed in any::<u64>()) {
        let s = sample(n, d, seed);
        prop_assert_eq!(eval_grid_fast(n, &s).unwrap(), eval_grid(n, &s).unwrap());
        let h = global_histogram_d(n, d, &s).unwrap();
        prop_assert_eq!(h.total(), 1u64 << (d as u32 * (n + 1)));
    }

    #[test]
    fn fourth_moment_is_assignment_independent_in_the_plane(n in 0u32..=6, seed in any::<u64>()) {
        let m = n as u64 + 1;
        let v = lp_norm_pth_power(n, &sample(n, 2, seed), 4).unwrap();
        let want = 3 * m * m - 2 * m;
        prop_assert_eq!(v.as_integer(), Some(want.into()));
    }
}

#[test]
fn verifier_reports_corrupted_cells() {
    let n = 3;
    let s = sample(n, 2, 17);
    let mut values = eval_grid_fast(n, &s).unwrap().values().to_vec();
    // Swap a top cell with a bottom cell: the global histogram is unchanged
    // but small regions see the wrong distribution.
    let top = values.iter().position(|&v| v == 4).unwrap();
    let bottom = values.iter().position(|&v| v == -4).unwrap();
    values.swap(top, bottom);
    let field = GridField::from_values(n, 2, values).unwrap();
    let report = verify_field(&field, s.digest()).unwrap();
    assert!(!report.passed());
    assert!(report.outcomes[0].passed());
    assert!(report.failures().count() > 0);
}
