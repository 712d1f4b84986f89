//! Exact evaluation of `F = Σ_{|R| = 2^-n} ε_R h_R` on the finest-cell grid.
//!
//! The grid has `2^(n+1)` cells per axis and `F` is constant on every cell.
//! Cells are stored row-major with the first coordinate most significant.
//!
//! Bit convention. For a layer of shape `(k_1, .., k_d)` and a cell with
//! per-axis indices `c_t` in `[0, 2^(n+1))`:
//!
//! | quantity                           | value                           |
//! |------------------------------------|---------------------------------|
//! | offset of the rectangle along `t`  | `c_t >> (n + 1 - k_t)`          |
//! | Haar sign along `t`                | bit `n - k_t` of `c_t` (0 → -1, 1 → +1) |
//!
//! An interval at level `k` spans `2^(n+1-k)` cells, so its halves are told
//! apart by the highest bit below the offset bits, which is bit `n - k`. In
//! `d = 2` with layer `k = k_1` this is bit `n - k` of `i` and bit `k` of `j`.

use std::io::{Read, Write};

use fnv::FnvHasher;
use rayon::prelude::*;
use std::hash::Hasher;

use crate::dyadic::{check_grid_budget, layer_count, Layout};
use crate::error::{Error, Result};
use crate::signs::SignAssignment;

/// Materialized grids are capped at `2^30` cells (one byte each).
pub const MAX_FIELD_BITS: u32 = 30;

pub const DUMP_MAGIC: [u8; 4] = *b"HSBF";
pub const DUMP_VERSION: u32 = 1;

/// Number of cells in the `(2^(n+1))^d` grid, if it may be materialized.
pub fn grid_cells(n: u32, d: usize) -> Result<usize> {
    check_grid_budget(n, d)?;
    let bits = d as u32 * (n + 1);
    if bits > MAX_FIELD_BITS {
        return Err(Error::GridTooLarge {
            bits,
            limit: MAX_FIELD_BITS,
        });
    }
    if layer_count(n, d) > i8::MAX as u64 {
        return Err(Error::Overflow("cell values beyond the i8 range"));
    }
    Ok(1usize << bits)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridField {
    n: u32,
    d: usize,
    values: Vec<i8>,
}

impl GridField {
    pub fn from_values(n: u32, d: usize, values: Vec<i8>) -> Result<Self> {
        let cells = grid_cells(n, d)?;
        if values.len() != cells {
            return Err(Error::IdOutOfRange {
                id: values.len() as u64,
                count: cells as u64,
            });
        }
        let top = layer_count(n, d) as i32;
        if let Some(&v) = values
            .iter()
            .find(|&&v| (v as i32).abs() > top || (v as i32 - top) % 2 != 0)
        {
            return Err(Error::PreconditionViolated(format!(
                "cell value {v} is not in {{-{top}, .., {top}}} with the parity of the layer count"
            )));
        }
        Ok(GridField { n, d, values })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Cells per axis, `2^(n+1)`.
    pub fn side(&self) -> u64 {
        1u64 << (self.n + 1)
    }

    /// Largest possible `|F|`: the number of layers (`n + 1` in `d = 2`).
    pub fn max_value(&self) -> i32 {
        layer_count(self.n, self.d) as i32
    }

    pub fn cell_level(&self) -> u32 {
        self.n + 1
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [i8] {
        &mut self.values
    }

    pub fn index_of(&self, cell: &[u64]) -> Result<usize> {
        if cell.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: cell.len(),
            });
        }
        let side = self.side();
        let mut index = 0u64;
        for &c in cell {
            if c >= side {
                return Err(Error::IndexOutOfRange { index: c, side });
            }
            index = index * side + c;
        }
        Ok(index as usize)
    }

    pub fn get(&self, cell: &[u64]) -> Result<i32> {
        Ok(self.values[self.index_of(cell)?] as i32)
    }

    /// 64-bit FNV-1a over the cell values as bytes, in canonical order.
    pub fn digest(&self) -> u64 {
        let mut h = FnvHasher::default();
        h.write(bytes_of(&self.values));
        h.finish()
    }

    /// Binary dump: `HSBF`, version, n, d (little-endian u32 each), then one
    /// signed byte per cell.
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&DUMP_MAGIC)?;
        w.write_all(&DUMP_VERSION.to_le_bytes())?;
        w.write_all(&self.n.to_le_bytes())?;
        w.write_all(&(self.d as u32).to_le_bytes())?;
        w.write_all(bytes_of(&self.values))
    }

    pub fn read_dump<R: Read>(mut r: R) -> Result<Self> {
        let bad = |message: &str| Error::Parse {
            line: 0,
            message: message.to_string(),
        };
        let mut header = [0u8; 16];
        r.read_exact(&mut header).map_err(|_| bad("truncated header"))?;
        if header[..4] != DUMP_MAGIC {
            return Err(bad("bad magic"));
        }
        let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
        if word(4) != DUMP_VERSION {
            return Err(bad("unsupported version"));
        }
        let (n, d) = (word(8), word(12) as usize);
        let cells = grid_cells(n, d)?;
        let mut raw = vec![0u8; cells];
        r.read_exact(&mut raw).map_err(|_| bad("truncated cell data"))?;
        let values = raw.into_iter().map(|b| b as i8).collect();
        GridField::from_values(n, d, values)
    }
}

fn bytes_of(values: &[i8]) -> &[u8] {
    // SAFETY: i8 and u8 have identical size and alignment.
    unsafe { std::slice::from_raw_parts(values.as_ptr() as *const u8, values.len()) }
}

fn check_signs(n: u32, signs: &SignAssignment) -> Result<()> {
    if signs.n() != n {
        return Err(Error::ExponentMismatch {
            expected: n,
            got: signs.n(),
        });
    }
    Ok(())
}

/// Per-cell evaluation straight from the bit convention table.
struct CellEvaluator<'a> {
    n: u32,
    layout: Layout,
    signs: &'a [i8],
}

impl<'a> CellEvaluator<'a> {
    fn new(n: u32, signs: &'a SignAssignment) -> Result<Self> {
        check_signs(n, signs)?;
        Ok(CellEvaluator {
            n,
            layout: signs.layout(),
            signs: signs.as_slice(),
        })
    }

    fn value(&self, cell: &[u64]) -> i32 {
        let layer_len = self.layout.layer_len();
        let mut total = 0i32;
        for (l, layer) in self.layout.layers().iter().enumerate() {
            let mut within = 0u64;
            let mut sign = 1i32;
            for (&c, &k) in cell.iter().zip(layer.shape()) {
                within = (within << k) | (c >> (self.n + 1 - k));
                if (c >> (self.n - k)) & 1 == 0 {
                    sign = -sign;
                }
            }
            total += sign * self.signs[(l as u64 * layer_len + within) as usize] as i32;
        }
        total
    }
}

pub fn eval_cell(n: u32, signs: &SignAssignment, cell: &[u64]) -> Result<i32> {
    let eval = CellEvaluator::new(n, signs)?;
    if cell.len() != signs.dim() {
        return Err(Error::DimensionMismatch {
            expected: signs.dim(),
            got: cell.len(),
        });
    }
    let side = 1u64 << (n + 1);
    if let Some(&c) = cell.iter().find(|&&c| c >= side) {
        return Err(Error::IndexOutOfRange { index: c, side });
    }
    Ok(eval.value(cell))
}

/// Reference path: [`eval_cell`] on every cell.
pub fn eval_grid(n: u32, signs: &SignAssignment) -> Result<GridField> {
    let d = signs.dim();
    let cells = grid_cells(n, d)?;
    let eval = CellEvaluator::new(n, signs)?;
    let side = 1u64 << (n + 1);
    let slab = cells / side as usize;
    let mut values = vec![0i8; cells];
    values.par_chunks_mut(slab).enumerate().for_each(|(first, chunk)| {
        let mut cell = vec![0u64; d];
        for (rest, v) in chunk.iter_mut().enumerate() {
            cell[0] = first as u64;
            let mut r = rest as u64;
            for t in (1..d).rev() {
                cell[t] = r & (side - 1);
                r >>= n + 1;
            }
            *v = eval.value(&cell) as i8;
        }
    });
    Ok(GridField { n, d, values })
}

/// Layer-sweep path: for each layer, add its `±1` tensor pattern over
/// contiguous half-runs of cells.
pub fn eval_grid_fast(n: u32, signs: &SignAssignment) -> Result<GridField> {
    let d = signs.dim();
    let cells = grid_cells(n, d)?;
    check_signs(n, signs)?;
    let layout = signs.layout();
    let slab = cells >> (n + 1);
    let mut values = vec![0i8; cells];
    values
        .par_chunks_mut(slab)
        .enumerate()
        .for_each(|(first, chunk)| sweep_slab(chunk, first, n, &layout, signs));
    Ok(GridField { n, d, values })
}

/// Sequential [`eval_grid_fast`] into a caller-owned buffer of `grid_cells`
/// length.
pub(crate) fn eval_into(n: u32, signs: &SignAssignment, layout: &Layout, values: &mut [i8]) {
    let slab = values.len() >> (n + 1);
    values.fill(0);
    for (first, chunk) in values.chunks_exact_mut(slab).enumerate() {
        sweep_slab(chunk, first, n, layout, signs);
    }
}

fn sweep_slab(chunk: &mut [i8], first: usize, n: u32, layout: &Layout, signs: &SignAssignment) {
    for (l, layer) in layout.layers().iter().enumerate() {
        let k = layer.shape()[0];
        let offset = (first >> (n + 1 - k)) as u64;
        let sign = if (first >> (n - k)) & 1 == 0 { -1 } else { 1 };
        sweep(chunk, n, &layer.shape()[1..], offset, sign, signs.layer(l));
    }
}

/// Adds one layer's contribution to `slab`, the cells sharing all coordinates
/// before the axes listed in `shape`.
fn sweep(slab: &mut [i8], n: u32, shape: &[u32], prefix: u64, sign: i8, layer: &[i8]) {
    let Some((&k, rest)) = shape.split_first() else {
        slab[0] += sign * layer[prefix as usize];
        return;
    };
    let block = 1usize << (n + 1 - k);
    let half = block / 2;
    let sub = slab.len() >> (n + 1);
    if rest.is_empty() {
        for (o, run) in slab.chunks_exact_mut(block).enumerate() {
            let eps = sign * layer[((prefix << k) | o as u64) as usize];
            let (lo, hi) = run.split_at_mut(half);
            lo.iter_mut().for_each(|v| *v -= eps);
            hi.iter_mut().for_each(|v| *v += eps);
        }
        return;
    }
    for (o, run) in slab.chunks_exact_mut(block * sub).enumerate() {
        let id = (prefix << k) | o as u64;
        let (lo, hi) = run.split_at_mut(half * sub);
        for c in lo.chunks_exact_mut(sub) {
            sweep(c, n, rest, id, -sign, layer);
        }
        for c in hi.chunks_exact_mut(sub) {
            sweep(c, n, rest, id, sign, layer);
        }
    }
}

/// All-ones field value at cell `(i, j)` in `d = 2`:
/// `(n + 1) - 2 * popcount(bitreverse_{n+1}(i) XOR j)`.
pub fn allones_value(n: u32, i: u64, j: u64) -> Result<i32> {
    if n + 1 > 64 {
        return Err(Error::LevelOutOfRange(n + 1));
    }
    let side = 1u128 << (n + 1);
    for c in [i, j] {
        if c as u128 >= side {
            return Err(Error::IndexOutOfRange {
                index: c,
                side: side.min(u64::MAX as u128) as u64,
            });
        }
    }
    let reversed = i.reverse_bits() >> (63 - n);
    Ok(n as i32 + 1 - 2 * (reversed ^ j).count_ones() as i32)
}

/// The `d = 2` all-ones field built from [`allones_value`].
pub fn allones_grid(n: u32) -> Result<GridField> {
    let cells = grid_cells(n, 2)?;
    let side = 1usize << (n + 1);
    let mut values = vec![0i8; cells];
    values.par_chunks_mut(side).enumerate().for_each(|(i, row)| {
        for (j, v) in row.iter_mut().enumerate() {
            *v = allones_value(n, i as u64, j as u64).expect("in range") as i8;
        }
    });
    Ok(GridField { n, d: 2, values })
}

#[cfg(test)]
/// `h_R` of a rectangle at the finest-cell level `n + 1`: `-1`/`+1` on the
/// lower/upper half per axis, `0` off the support.
pub(crate) fn haar_rect_cell(layer: &crate::dyadic::LayerSpec, within: u64, cell: &[u64], n: u32) -> i32 {
    let rect = layer.rect(within);
    let mut sign = 1;
    for (iv, &c) in rect.coords().iter().zip(cell) {
        let h = crate::dyadic::haar_at(
            iv,
            crate::dyadic::DyadicPoint::new(c, n + 1).expect("cell index in range"),
        );
        if h == 0 {
            return 0;
        }
        sign *= h;
    }
    sign
}
