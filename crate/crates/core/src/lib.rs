//! Exact evaluation and level-set analysis of signed hyperbolic Haar sums
//! `Σ_{|R| = 2^-n} ε_R h_R` over dyadic rectangles of the unit square (and
//! cube).
//!
//! All measures are finest-cell counts on the `(2^(n+1))^d` grid, so every
//! identity checked here is an exact integer identity.

pub mod dyadic;
pub mod error;
pub mod field;
pub mod hyperdim;
pub mod levelsets;
pub mod normalize;
pub mod signs;

pub use dyadic::{
    enumerate_layers, haar_at, id_rect, interval_relate, layer_rects, rect_id, Dyadic, DyadicInterval, DyadicPoint,
    DyadicRect, LayerSpec, Layout, Relation,
};
pub use error::{Error, Result};
pub use field::{allones_value, eval_cell, eval_grid, eval_grid_fast, GridField};
pub use signs::{SignAssignment, SignSampler};
