//! Exact dyadic geometry on the unit cube.
//!
//! Every interval is an integer `(level, offset)` pair describing
//! `[offset * 2^-level, (offset + 1) * 2^-level)`, so all containment, volume
//! and measure questions reduce to shifts and comparisons on integers.
//!
//! The rectangles of volume `2^-n` in dimension `d` are grouped into *layers*:
//! one layer per composition `(k_1, .., k_d)` of `n`, holding the `2^n`
//! rectangles whose `t`-th side has length `2^-k_t`. The canonical rectangle
//! order used by sign assignments, files and searches is layer-major (layers
//! in lexicographic order of their shape), then offsets lexicographically with
//! the first coordinate most significant.

use std::cmp::Ordering;
use std::fmt;

use num_integer::binomial;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum `d * (n + 1)`: the number of address bits of the finest-cell grid.
pub const GRID_BIT_BUDGET: u32 = 40;

/// Largest supported interval level (offsets are `u64`).
pub const MAX_LEVEL: u32 = 63;

/// Checks the grid-bit budget for a `(n, d)` pair.
pub fn check_grid_budget(n: u32, d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    let bits = (d as u64) * (n as u64 + 1);
    if bits > GRID_BIT_BUDGET as u64 {
        return Err(Error::GridTooLarge {
            bits: bits.min(u32::MAX as u64) as u32,
            limit: GRID_BIT_BUDGET,
        });
    }
    Ok(())
}

/// A dyadic rational `numerator / 2^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    numerator: u128,
    exponent: u32,
}

impl Dyadic {
    pub fn new(numerator: u128, exponent: u32) -> Self {
        Dyadic { numerator, exponent }.reduced()
    }

    pub fn numerator(&self) -> u128 {
        self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    fn reduced(mut self) -> Self {
        if self.numerator == 0 {
            self.exponent = 0;
            return self;
        }
        let tz = self.numerator.trailing_zeros().min(self.exponent);
        self.numerator >>= tz;
        self.exponent -= tz;
        self
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 * (-(self.exponent as f64)).exp2()
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        let (sa, sb) = (e - self.exponent, e - other.exponent);
        if self.numerator.leading_zeros() >= sa && other.numerator.leading_zeros() >= sb {
            (self.numerator << sa).cmp(&(other.numerator << sb))
        } else {
            self.to_f64().total_cmp(&other.to_f64())
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else if self.exponent < 128 {
            write!(f, "{}/{}", self.numerator, 1u128 << self.exponent)
        } else {
            write!(f, "{}/2^{}", self.numerator, self.exponent)
        }
    }
}

/// The half-open dyadic interval `[offset * 2^-level, (offset + 1) * 2^-level)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    level: u32,
    offset: u64,
}

/// How two dyadic intervals sit relative to each other. Partial overlap is
/// impossible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Disjoint,
    Equal,
    FirstContainsSecond,
    SecondContainsFirst,
}

impl DyadicInterval {
    pub const UNIT: DyadicInterval = DyadicInterval { level: 0, offset: 0 };

    pub fn new(level: u32, offset: u64) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::LevelOutOfRange(level));
        }
        if offset >> level != 0 {
            return Err(Error::OffsetOutOfRange { level, offset });
        }
        Ok(DyadicInterval { level, offset })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn start(&self) -> Dyadic {
        Dyadic::new(self.offset as u128, self.level)
    }

    pub fn end(&self) -> Dyadic {
        Dyadic::new(self.offset as u128 + 1, self.level)
    }

    pub fn length(&self) -> Dyadic {
        Dyadic::new(1, self.level)
    }

    /// The left and right halves.
    pub fn halves(&self) -> Result<(DyadicInterval, DyadicInterval)> {
        let level = self.level + 1;
        Ok((
            DyadicInterval::new(level, self.offset << 1)?,
            DyadicInterval::new(level, (self.offset << 1) | 1)?,
        ))
    }

    /// Whether `other` is contained in (or equal to) `self`.
    pub fn contains(&self, other: &DyadicInterval) -> bool {
        other.level >= self.level && other.offset >> (other.level - self.level) == self.offset
    }

    pub fn intersect(&self, other: &DyadicInterval) -> Option<DyadicInterval> {
        match interval_relate(self, other) {
            Relation::Disjoint => None,
            Relation::Equal | Relation::SecondContainsFirst => Some(*self),
            Relation::FirstContainsSecond => Some(*other),
        }
    }

    /// The cells of a grid at `cell_level` covered by this interval.
    pub fn cell_range(&self, cell_level: u32) -> Result<std::ops::Range<u64>> {
        if self.level > cell_level {
            return Err(Error::RegionTooFine {
                level: self.level,
                cell_level,
            });
        }
        let shift = cell_level - self.level;
        Ok((self.offset << shift)..((self.offset + 1) << shift))
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start(), self.end())
    }
}

pub fn interval_relate(first: &DyadicInterval, second: &DyadicInterval) -> Relation {
    if first == second {
        Relation::Equal
    } else if first.contains(second) {
        Relation::FirstContainsSecond
    } else if second.contains(first) {
        Relation::SecondContainsFirst
    } else {
        Relation::Disjoint
    }
}

/// A point of `[0, 1)` given as `numerator / 2^level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicPoint {
    numerator: u64,
    level: u32,
}

impl DyadicPoint {
    pub fn new(numerator: u64, level: u32) -> Result<Self> {
        DyadicInterval::new(level, numerator)?;
        Ok(DyadicPoint { numerator, level })
    }
}

/// Haar function of `interval` at `t`: -1 on the left half, +1 on the right
/// half, 0 outside.
pub fn haar_at(interval: &DyadicInterval, t: DyadicPoint) -> i32 {
    let m = (interval.level + 1).max(t.level);
    let point = (t.numerator as u128) << (m - t.level);
    let half = 1u128 << (m - interval.level - 1);
    let start = (interval.offset as u128) << (m - interval.level);
    if point < start || point >= start + 2 * half {
        0
    } else if point < start + half {
        -1
    } else {
        1
    }
}

/// A product of `d >= 1` dyadic intervals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicRect {
    coords: Vec<DyadicInterval>,
}

impl DyadicRect {
    pub fn new(coords: Vec<DyadicInterval>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        Ok(DyadicRect { coords })
    }

    pub fn unit(d: usize) -> Self {
        DyadicRect {
            coords: vec![DyadicInterval::UNIT; d.max(1)],
        }
    }

    pub fn from_parts(levels: &[u32], offsets: &[u64]) -> Result<Self> {
        if levels.len() != offsets.len() {
            return Err(Error::DimensionMismatch {
                expected: levels.len(),
                got: offsets.len(),
            });
        }
        let coords = levels
            .iter()
            .zip(offsets)
            .map(|(&l, &o)| DyadicInterval::new(l, o))
            .collect::<Result<Vec<_>>>()?;
        DyadicRect::new(coords)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[DyadicInterval] {
        &self.coords
    }

    pub fn coord(&self, axis: usize) -> DyadicInterval {
        self.coords[axis]
    }

    pub fn levels(&self) -> Vec<u32> {
        self.coords.iter().map(|c| c.level).collect()
    }

    pub fn offsets(&self) -> Vec<u64> {
        self.coords.iter().map(|c| c.offset).collect()
    }

    /// `Σ levels`; the volume is `2^-level_sum`.
    pub fn level_sum(&self) -> u32 {
        self.coords.iter().map(|c| c.level).sum()
    }

    pub fn volume(&self) -> Dyadic {
        Dyadic::new(1, self.level_sum())
    }

    pub fn contains(&self, other: &DyadicRect) -> bool {
        self.dim() == other.dim() && self.coords.iter().zip(&other.coords).all(|(a, b)| a.contains(b))
    }

    pub fn intersect(&self, other: &DyadicRect) -> Option<DyadicRect> {
        if self.dim() != other.dim() {
            return None;
        }
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a.intersect(b))
            .collect::<Option<Vec<_>>>()?;
        Some(DyadicRect { coords })
    }

    /// Replaces the interval along `axis` by its left (`upper == false`) or
    /// right half.
    pub fn half(&self, axis: usize, upper: bool) -> Result<DyadicRect> {
        let (lo, hi) = self.coords[axis].halves()?;
        let mut coords = self.coords.clone();
        coords[axis] = if upper { hi } else { lo };
        Ok(DyadicRect { coords })
    }

    /// Per-axis cell index ranges on a grid with `2^cell_level` cells per side.
    pub fn cell_ranges(&self, cell_level: u32) -> Result<Vec<std::ops::Range<u64>>> {
        self.coords.iter().map(|c| c.cell_range(cell_level)).collect()
    }

    /// Number of grid cells covered, or `RegionTooFine`.
    pub fn cell_count(&self, cell_level: u32) -> Result<u64> {
        let ranges = self.cell_ranges(cell_level)?;
        Ok(ranges.iter().map(|r| r.end - r.start).product())
    }
}

impl fmt::Display for DyadicRect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str("x")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// One layer of the hyperbolic family: the `2^n` rectangles whose side along
/// axis `t` has level `shape[t]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LayerSpec {
    n: u32,
    shape: Vec<u32>,
}

impl LayerSpec {
    pub fn new(n: u32, shape: Vec<u32>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        let sum: u64 = shape.iter().map(|&k| k as u64).sum();
        if sum != n as u64 {
            return Err(Error::WrongVolume {
                got: sum.min(u32::MAX as u64) as u32,
                expected: n,
            });
        }
        Ok(LayerSpec { n, shape })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn shape(&self) -> &[u32] {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    /// Number of rectangles in the layer, `2^n`.
    pub fn len(&self) -> u64 {
        1u64 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The `index`-th rectangle in canonical (first-coordinate-major) order.
    pub fn rect(&self, index: u64) -> DyadicRect {
        let mut rest = index;
        let mut coords = vec![DyadicInterval::UNIT; self.shape.len()];
        for (t, &k) in self.shape.iter().enumerate().rev() {
            coords[t] = DyadicInterval {
                level: k,
                offset: rest & ((1u64 << k) - 1),
            };
            rest >>= k;
        }
        DyadicRect { coords }
    }

    /// Inverse of [`LayerSpec::rect`]; `None` if the rectangle has another shape.
    pub fn index_of(&self, rect: &DyadicRect) -> Option<u64> {
        if rect.dim() != self.dim() {
            return None;
        }
        let mut index = 0u64;
        for (c, &k) in rect.coords.iter().zip(&self.shape) {
            if c.level != k {
                return None;
            }
            index = (index << k) | c.offset;
        }
        Some(index)
    }
}

/// All compositions of `n` into `d` non-negative parts, lexicographic.
pub fn enumerate_layers(n: u32, d: usize) -> Vec<LayerSpec> {
    fn rec(n: u32, remaining: usize, prefix: &mut Vec<u32>, out: &mut Vec<LayerSpec>, total: u32) {
        if remaining == 1 {
            prefix.push(n);
            out.push(LayerSpec {
                n: total,
                shape: prefix.clone(),
            });
            prefix.pop();
            return;
        }
        for k in 0..=n {
            prefix.push(k);
            rec(n - k, remaining - 1, prefix, out, total);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d == 0 {
        return out;
    }
    rec(n, d, &mut Vec::with_capacity(d), &mut out, n);
    out
}

/// The `2^n` rectangles of a layer in canonical order.
pub fn layer_rects(spec: &LayerSpec) -> Vec<DyadicRect> {
    (0..spec.len()).map(|i| spec.rect(i)).collect()
}

/// Number of layers, `C(n + d - 1, d - 1)`.
pub fn layer_count(n: u32, d: usize) -> u64 {
    if d == 0 {
        return 0;
    }
    binomial(n as u64 + d as u64 - 1, d as u64 - 1)
}

/// The canonical indexing of all rectangles of volume `2^-n` in dimension `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    n: u32,
    d: usize,
    layers: Vec<LayerSpec>,
}

impl Layout {
    pub fn new(n: u32, d: usize) -> Result<Self> {
        check_grid_budget(n, d)?;
        Ok(Layout {
            n,
            d,
            layers: enumerate_layers(n, d),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn layer_len(&self) -> u64 {
        1u64 << self.n
    }

    pub fn rect_count(&self) -> u64 {
        self.layers.len() as u64 * self.layer_len()
    }

    pub fn layer_index(&self, shape: &[u32]) -> Option<usize> {
        self.layers.binary_search_by(|l| l.shape.as_slice().cmp(shape)).ok()
    }

    pub fn rect_id(&self, rect: &DyadicRect) -> Result<u64> {
        if rect.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: rect.dim(),
            });
        }
        let sum = rect.level_sum();
        if sum != self.n {
            return Err(Error::WrongVolume {
                got: sum,
                expected: self.n,
            });
        }
        let layer = self
            .layer_index(&rect.levels())
            .expect("every shape with the right level sum is a layer");
        let within = self.layers[layer]
            .index_of(rect)
            .expect("shape matches by construction");
        Ok(layer as u64 * self.layer_len() + within)
    }

    pub fn id_rect(&self, id: u64) -> Result<DyadicRect> {
        let count = self.rect_count();
        if id >= count {
            return Err(Error::IdOutOfRange { id, count });
        }
        let layer = (id >> self.n) as usize;
        Ok(self.layers[layer].rect(id & (self.layer_len() - 1)))
    }
}

pub fn rect_id(n: u32, d: usize, rect: &DyadicRect) -> Result<u64> {
    Layout::new(n, d)?.rect_id(rect)
}

pub fn id_rect(n: u32, d: usize, id: u64) -> Result<DyadicRect> {
    Layout::new(n, d)?.id_rect(id)
}
