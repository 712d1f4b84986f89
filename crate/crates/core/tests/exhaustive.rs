//! Long enumerations, run with `cargo test --release -- --ignored`.

use rayon::prelude::*;

use hsb_core::hyperdim::{count_classes, Mode};
use hsb_core::{eval_grid, eval_grid_fast, SignAssignment};

/// All `2^32` assignments at `n = 3`; hours on a single core.
#[test]
#[ignore]
fn fast_matches_reference_for_every_assignment_at_n3() {
    let bad = (0..1u64 << 32)
        .into_par_iter()
        .filter(|&i| {
            let s = SignAssignment::from_index(3, 2, i).unwrap();
            eval_grid_fast(3, &s).unwrap() != eval_grid(3, &s).unwrap()
        })
        .count();
    assert_eq!(bad, 0);
}

/// All `2^24` assignments at `(d = 3, n = 2)`; about two minutes on
/// one core.
#[test]
#[ignore]
fn three_dimensional_classes_at_n2() {
    let r = count_classes(2, 3, Mode::Exhaustive).unwrap();
    let mut sizes: Vec<u64> = r.classes.iter().map(|c| c.size).collect();
    sizes.sort_unstable();
    assert_eq!(sizes, [131_072, 131_072, 3_670_016, 3_670_016, 9_175_040]);
}
