//! Constructive sign normalization in `d = 2`.
//!
//! Flipping the sign of a rectangle `R1` of layer `k` leaves the level-set
//! distribution on `Q` (levels `(a, b)`) unchanged in two situations:
//!
//! * **Low side**: `k <= n - b` and every layer below `k` is all `+1`. On
//!   `R1 ∩ Q` the higher layers do not depend on `y`, the normalized lower
//!   layers are periodic in `y` with a period dividing half the height of
//!   `R1`, and `h_R1` changes sign between the lower and upper halves. So
//!   translating the two `y`-halves of `R1 ∩ Q` onto each other maps the old
//!   field onto the flipped one.
//! * **High side**: `k >= a` and every layer above `k` is all `+1`; the same
//!   with the roles of `x` and `y` exchanged.
//!
//! Running the low side from layer 0 up to `n - b` and the high side from
//! layer `n` down to `a` reaches all `+1` whenever `a + b <= n + 1`. The
//! half-swaps recorded along the way form a [`RearrangementWitness`]: a
//! permutation of the cells of `Q` that carries the input field onto the
//! all-ones field cell for cell.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicRect, Layout};
use crate::error::{Error, Result};
use crate::field::{eval_grid_fast, grid_cells, GridField};
use crate::levelsets::histogram;
use crate::signs::SignAssignment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

fn q_levels(q: &DyadicRect, n: u32) -> Result<(u32, u32)> {
    let [a, b] = q.levels()[..] else {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: q.dim(),
        });
    };
    if let Some(level) = [a, b].into_iter().find(|&l| l > n + 1) {
        return Err(Error::RegionTooFine {
            level,
            cell_level: n + 1,
        });
    }
    Ok((a, b))
}

/// The two passes over layers for a region with levels `(a, b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    n: u32,
    a: u32,
    b: u32,
}

impl Schedule {
    pub fn levels(&self) -> (u32, u32) {
        (self.a, self.b)
    }

    /// Layers `0 ..= n - b`, processed on the low side. Empty when `b = n + 1`.
    pub fn ascending(&self) -> Vec<u32> {
        if self.b > self.n {
            Vec::new()
        } else {
            (0..=self.n - self.b).collect()
        }
    }

    /// Layers `n` down to `a`, processed on the high side.
    pub fn descending(&self) -> Vec<u32> {
        if self.a > self.n {
            Vec::new()
        } else {
            (self.a..=self.n).rev().collect()
        }
    }

    /// Both passes in order, including layers that appear in both.
    pub fn entries(&self) -> Vec<(u32, Side)> {
        self.ascending()
            .into_iter()
            .map(|k| (k, Side::Low))
            .chain(self.descending().into_iter().map(|k| (k, Side::High)))
            .collect()
    }

    /// One owner per layer: the ascending pass keeps every layer it covers and
    /// the descending pass stops where the ascending pass ended.
    pub fn steps(&self) -> Vec<(u32, Side)> {
        let asc = self.ascending();
        let owned_below = asc.len() as u32;
        asc.into_iter()
            .map(|k| (k, Side::Low))
            .chain(
                self.descending()
                    .into_iter()
                    .filter(|&k| k >= owned_below)
                    .map(|k| (k, Side::High)),
            )
            .collect()
    }
}

pub fn build_schedule(n: u32, q: &DyadicRect) -> Result<Schedule> {
    let (a, b) = q_levels(q, n)?;
    if a + b > n + 1 {
        return Err(Error::RegionTooSmall {
            level_sum: a + b,
            limit: n + 1,
        });
    }
    Ok(Schedule { n, a, b })
}

/// Swap the two halves of `rect` along `axis` by translation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub rect: DyadicRect,
    pub axis: Axis,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RearrangementWitness {
    n: u32,
    q: DyadicRect,
    moves: Vec<Move>,
}

#[derive(Serialize, Deserialize)]
struct RectJson {
    levels: Vec<u32>,
    offsets: Vec<u64>,
}

impl From<&DyadicRect> for RectJson {
    fn from(r: &DyadicRect) -> Self {
        RectJson {
            levels: r.levels(),
            offsets: r.offsets(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MoveJson {
    rect: RectJson,
    axis: Axis,
}

#[derive(Serialize, Deserialize)]
struct WitnessJson {
    v: u32,
    n: u32,
    q: RectJson,
    moves: Vec<MoveJson>,
}

impl RearrangementWitness {
    pub fn new(n: u32, q: DyadicRect, moves: Vec<Move>) -> Result<Self> {
        q_levels(&q, n)?;
        for m in &moves {
            check_move(n, &q, m)?;
        }
        Ok(RearrangementWitness { n, q, moves })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn region(&self) -> &DyadicRect {
        &self.q
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn is_identity(&self) -> bool {
        self.moves.is_empty()
    }

    /// For every grid cell `p`, the cell whose value lands on `p`.
    pub fn source_map(&self) -> Result<Vec<u32>> {
        let cells = grid_cells(self.n, 2)?;
        let mut map: Vec<u32> = (0..cells as u32).collect();
        let side = 1usize << (self.n + 1);
        for m in &self.moves {
            apply_move(&mut map, side, self.n, m);
        }
        Ok(map)
    }

    pub fn to_json(&self) -> String {
        let doc = WitnessJson {
            v: 1,
            n: self.n,
            q: (&self.q).into(),
            moves: self
                .moves
                .iter()
                .map(|m| MoveJson {
                    rect: (&m.rect).into(),
                    axis: m.axis,
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("witness serializes")
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(self.to_json().as_bytes())?;
        writeln!(w)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: WitnessJson = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        if doc.v != 1 {
            return Err(Error::Parse {
                line: 1,
                message: format!("unsupported witness version {}", doc.v),
            });
        }
        let q = DyadicRect::from_parts(&doc.q.levels, &doc.q.offsets)?;
        let moves = doc
            .moves
            .into_iter()
            .map(|m| {
                Ok(Move {
                    rect: DyadicRect::from_parts(&m.rect.levels, &m.rect.offsets)?,
                    axis: m.axis,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        RearrangementWitness::new(doc.n, q, moves)
    }

    pub fn read_json<R: Read>(mut r: R) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text).map_err(|e| Error::Parse {
            line: 0,
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }
}

fn check_move(n: u32, q: &DyadicRect, m: &Move) -> Result<()> {
    if m.rect.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: m.rect.dim(),
        });
    }
    if !q.contains(&m.rect) {
        return Err(Error::PreconditionViolated(format!(
            "move rectangle {} is not inside Q = {q}",
            m.rect
        )));
    }
    let level = m.rect.coord(m.axis.index()).level();
    if level > n {
        return Err(Error::RegionTooFine {
            level: level + 1,
            cell_level: n + 1,
        });
    }
    Ok(())
}

fn apply_move<T>(values: &mut [T], side: usize, n: u32, m: &Move) {
    let cell_level = n + 1;
    let xr = m.rect.coord(0).cell_range(cell_level).expect("checked move");
    let yr = m.rect.coord(1).cell_range(cell_level).expect("checked move");
    let (x0, x1, y0, y1) = (xr.start as usize, xr.end as usize, yr.start as usize, yr.end as usize);
    match m.axis {
        Axis::Y => {
            let half = (y1 - y0) / 2;
            for i in x0..x1 {
                let row = &mut values[i * side + y0..i * side + y1];
                let (lo, hi) = row.split_at_mut(half);
                lo.swap_with_slice(hi);
            }
        }
        Axis::X => {
            let half = (x1 - x0) / 2;
            for i in x0..x0 + half {
                let (head, tail) = values.split_at_mut((i + half) * side);
                head[i * side + y0..i * side + y1].swap_with_slice(&mut tail[y0..y1]);
            }
        }
    }
}

/// Permutes the cells of the witness region; cells outside it are untouched.
pub fn witness_apply(witness: &RearrangementWitness, field: &GridField) -> Result<GridField> {
    if field.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: field.dim(),
        });
    }
    if field.n() != witness.n {
        return Err(Error::ExponentMismatch {
            expected: witness.n,
            got: field.n(),
        });
    }
    let mut out = field.clone();
    let side = field.side() as usize;
    for m in &witness.moves {
        apply_move(out.values_mut(), side, witness.n, m);
    }
    Ok(out)
}

fn check_signs_2d(n: u32, signs: &SignAssignment) -> Result<()> {
    if signs.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: signs.dim(),
        });
    }
    if signs.n() != n {
        return Err(Error::ExponentMismatch {
            expected: n,
            got: signs.n(),
        });
    }
    Ok(())
}

/// Layer index of a volume-`2^-n` rectangle in `d = 2` (its x-level).
fn layer_of(n: u32, r1: &DyadicRect) -> Result<u32> {
    let [k, m] = r1.levels()[..] else {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: r1.dim(),
        });
    };
    if k + m != n {
        return Err(Error::WrongVolume {
            got: k + m,
            expected: n,
        });
    }
    Ok(k)
}

fn side_range(n: u32, q: (u32, u32), side: Side) -> (i64, i64) {
    match side {
        Side::Low => (0, n as i64 - q.1 as i64),
        Side::High => (q.0 as i64, n as i64),
    }
}

fn pending_layers(n: u32, k: u32, side: Side) -> std::ops::Range<u32> {
    match side {
        Side::Low => 0..k,
        Side::High => k + 1..n + 1,
    }
}

fn move_for(q: &DyadicRect, r1: &DyadicRect, side: Side) -> Option<Move> {
    r1.intersect(q).map(|rect| Move {
        rect,
        axis: match side {
            Side::Low => Axis::Y,
            Side::High => Axis::X,
        },
    })
}

/// Negates `ε_{R1}` after checking that the flip cannot change the
/// level-set distribution on `q`.
pub fn flip_step(
    n: u32,
    signs: &SignAssignment,
    q: &DyadicRect,
    r1: &DyadicRect,
    side: Side,
) -> Result<SignAssignment> {
    check_signs_2d(n, signs)?;
    let levels = q_levels(q, n)?;
    let k = layer_of(n, r1)?;
    let (lo, hi) = side_range(n, levels, side);
    if (k as i64) < lo || (k as i64) > hi {
        return Err(Error::LayerOutOfRange { layer: k, lo, hi });
    }
    if let Some(l) = pending_layers(n, k, side).find(|&l| signs.layer(l as usize).iter().any(|&s| s != 1)) {
        return Err(Error::PreconditionViolated(format!(
            "layer {l} still has negative signs; it must be normalized before flipping in layer {k} on the {side:?} side"
        )));
    }
    let id = signs.layout().rect_id(r1)?;
    let mut out = signs.clone();
    out.negate(id)?;
    Ok(out)
}

/// One executed flip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipEvent {
    pub index: usize,
    pub layer: u32,
    pub side: Side,
    pub rect: DyadicRect,
    /// `None` when the rectangle misses `Q`.
    pub mv: Option<Move>,
}

pub fn normalize(n: u32, signs: &SignAssignment, q: &DyadicRect) -> Result<(SignAssignment, RearrangementWitness)> {
    normalize_traced(n, signs, q, |_, _| Ok(()))
}

/// [`normalize`], calling `observer` with the signs after every flip.
pub fn normalize_traced(
    n: u32,
    signs: &SignAssignment,
    q: &DyadicRect,
    mut observer: impl FnMut(&FlipEvent, &SignAssignment) -> Result<()>,
) -> Result<(SignAssignment, RearrangementWitness)> {
    check_signs_2d(n, signs)?;
    let schedule = build_schedule(n, q)?;
    grid_cells(n, 2)?;
    let layout = Layout::new(n, 2)?;
    let levels = schedule.levels();
    let mut current = signs.clone();
    let mut negatives: Vec<usize> = (0..=n as usize)
        .map(|l| current.layer(l).iter().filter(|&&s| s != 1).count())
        .collect();
    let mut moves = Vec::new();
    let mut index = 0;
    for (k, side) in schedule.steps() {
        let (lo, hi) = side_range(n, levels, side);
        assert!(
            lo <= k as i64 && k as i64 <= hi,
            "schedule produced layer {k} outside {lo}..={hi}"
        );
        let layer = &layout.layers()[k as usize];
        for within in 0..layer.len() {
            let id = k as u64 * layout.layer_len() + within;
            if current.get(id)? == 1 {
                continue;
            }
            if let Some(l) = pending_layers(n, k, side).find(|&l| negatives[l as usize] > 0) {
                return Err(Error::PreconditionViolated(format!(
                    "layer {l} not normalized before layer {k} ({side:?} side)"
                )));
            }
            let rect = layer.rect(within);
            current.negate(id)?;
            negatives[k as usize] -= 1;
            let mv = move_for(q, &rect, side);
            if let Some(m) = &mv {
                moves.push(m.clone());
            }
            let event = FlipEvent {
                index,
                layer: k,
                side,
                rect,
                mv,
            };
            observer(&event, &current)?;
            index += 1;
        }
    }
    debug_assert!(current.is_all_ones());
    Ok((current, RearrangementWitness::new(n, q.clone(), moves)?))
}

/// Result of replaying a witness against an input assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayOutcome {
    /// Cells of `Q` where the permuted input differs from the all-ones field.
    pub mismatched_cells: u64,
    pub cells_in_q: u64,
}

impl ReplayOutcome {
    pub fn ok(&self) -> bool {
        self.mismatched_cells == 0
    }
}

pub fn replay(witness: &RearrangementWitness, signs: &SignAssignment) -> Result<ReplayOutcome> {
    let n = witness.n;
    check_signs_2d(n, signs)?;
    let input = eval_grid_fast(n, signs)?;
    let target = eval_grid_fast(n, &SignAssignment::all_ones(n, 2)?)?;
    let moved = witness_apply(witness, &input)?;
    let ranges = witness.q.cell_ranges(n + 1)?;
    let side = input.side() as usize;
    let mut mismatched_cells = 0;
    for i in ranges[0].clone() {
        let row = i as usize * side;
        let (y0, y1) = (ranges[1].start as usize, ranges[1].end as usize);
        mismatched_cells += moved.values()[row + y0..row + y1]
            .iter()
            .zip(&target.values()[row + y0..row + y1])
            .filter(|(a, b)| a != b)
            .count() as u64;
    }
    Ok(ReplayOutcome {
        mismatched_cells,
        cells_in_q: witness.q.cell_count(n + 1)?,
    })
}

/// Normalizes while re-evaluating the field after every flip and checking that
/// the histogram on `q` never changes. Returns the number of flips.
pub fn normalize_verified(
    n: u32,
    signs: &SignAssignment,
    q: &DyadicRect,
) -> Result<(SignAssignment, RearrangementWitness, usize)> {
    let initial = histogram(&eval_grid_fast(n, signs)?, q)?;
    let mut flips = 0;
    let (out, witness) = normalize_traced(n, signs, q, |event, current| {
        flips += 1;
        let now = histogram(&eval_grid_fast(n, current)?, q)?;
        if now != initial {
            return Err(Error::PreconditionViolated(format!(
                "histogram on Q changed after flip {} (layer {}, {:?} side)",
                event.index, event.layer, event.side
            )));
        }
        Ok(())
    })?;
    Ok((out, witness, flips))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::eval_grid;
    use crate::signs::SignSampler;

    fn rect(levels: [u32; 2], offsets: [u64; 2]) -> DyadicRect {
        DyadicRect::from_parts(&levels, &offsets).unwrap()
    }

    fn hist(n: u32, s: &SignAssignment, q: &DyadicRect) -> crate::levelsets::LevelHistogram {
        histogram(&eval_grid(n, s).unwrap(), q).unwrap()
    }

    #[test]
    fn schedule_examples() {
        let s = build_schedule(2, &DyadicRect::unit(2)).unwrap();
        assert_eq!(s.ascending(), vec![0, 1, 2]);
        assert_eq!(s.descending(), vec![2, 1, 0]);
        assert_eq!(s.steps(), vec![(0, Side::Low), (1, Side::Low), (2, Side::Low)]);

        let s = build_schedule(1, &rect([0, 2], [0, 0])).unwrap();
        assert!(s.ascending().is_empty());
        assert_eq!(s.steps(), vec![(1, Side::High), (0, Side::High)]);

        let s = build_schedule(3, &rect([2, 2], [1, 3])).unwrap();
        assert_eq!(
            s.steps(),
            vec![(0, Side::Low), (1, Side::Low), (3, Side::High), (2, Side::High)]
        );

        assert_eq!(
            build_schedule(1, &rect([2, 1], [0, 0])),
            Err(Error::RegionTooSmall { level_sum: 3, limit: 2 })
        );
    }

    #[test]
    fn schedule_covers_every_layer() {
        for n in 0..8 {
            for a in 0..=n + 1 {
                for b in 0..=n + 1 - a {
                    let s = build_schedule(n, &rect([a, b], [0, 0])).unwrap();
                    let mut layers: Vec<u32> = s.steps().iter().map(|&(k, _)| k).collect();
                    layers.sort();
                    assert_eq!(layers, (0..=n).collect::<Vec<_>>());
                }
            }
        }
    }

    #[test]
    fn flip_step_examples() {
        let q = DyadicRect::unit(2);
        let mixed = SignAssignment::parse("n=1 d=2\n-+-+").unwrap();
        let lower = rect([0, 1], [0, 0]);
        let flipped = flip_step(1, &mixed, &q, &lower, Side::Low).unwrap();
        assert_eq!(flipped.sign_string(), "++-+");
        assert_eq!(hist(1, &mixed, &q), hist(1, &flipped, &q));
        assert_eq!(hist(1, &mixed, &q).key(), vec![(-2, 4), (0, 8), (2, 4)]);

        let minus = SignAssignment::all_minus(0, 2).unwrap();
        let one = flip_step(0, &minus, &q, &DyadicRect::unit(2), Side::Low).unwrap();
        assert_eq!(hist(0, &one, &q).key(), vec![(-1, 2), (1, 2)]);
        assert_eq!(hist(0, &minus, &q), hist(0, &one, &q));

        // Layer 1 on the low side while layer 0 still has a negative sign.
        let r = flip_step(1, &mixed, &q, &rect([1, 0], [0, 0]), Side::Low);
        assert!(matches!(r, Err(Error::PreconditionViolated(_))));
        // Q with b = 2 leaves no low-side layers at n = 1.
        let r = flip_step(1, &mixed, &rect([0, 2], [0, 0]), &lower, Side::Low);
        assert_eq!(
            r,
            Err(Error::LayerOutOfRange {
                layer: 0,
                lo: 0,
                hi: -1
            })
        );
    }

    #[test]
    fn normalize_examples() {
        let q = DyadicRect::unit(2);
        let (s, w) = normalize(3, &SignAssignment::all_ones(3, 2).unwrap(), &q).unwrap();
        assert!(s.is_all_ones());
        assert!(w.is_identity());

        let (s, w) = normalize(0, &SignAssignment::all_minus(0, 2).unwrap(), &q).unwrap();
        assert!(s.is_all_ones());
        assert_eq!(
            w.moves(),
            &[Move {
                rect: DyadicRect::unit(2),
                axis: Axis::Y
            }]
        );
        // Either axis maps -h to h at n = 0; the low side is the fixed choice.
        let g = eval_grid(0, &SignAssignment::all_minus(0, 2).unwrap()).unwrap();
        let target = eval_grid(0, &SignAssignment::all_ones(0, 2).unwrap()).unwrap();
        for axis in [Axis::X, Axis::Y] {
            let w = RearrangementWitness::new(0, q.clone(), vec![Move { rect: q.clone(), axis }]).unwrap();
            assert_eq!(witness_apply(&w, &g).unwrap(), target);
        }
        assert!(matches!(
            normalize(1, &SignAssignment::all_ones(1, 2).unwrap(), &rect([2, 1], [0, 0])),
            Err(Error::RegionTooSmall { .. })
        ));
    }

    #[test]
    fn witness_apply_basics() {
        let s = SignSampler::new(3, 2, 4).unwrap().next_assignment();
        let g = eval_grid(3, &s).unwrap();
        let id = RearrangementWitness::new(3, DyadicRect::unit(2), vec![]).unwrap();
        assert_eq!(witness_apply(&id, &g).unwrap(), g);
        for axis in [Axis::X, Axis::Y] {
            let m = Move {
                rect: rect([1, 2], [1, 2]),
                axis,
            };
            let w = RearrangementWitness::new(3, DyadicRect::unit(2), vec![m.clone(), m]).unwrap();
            assert_eq!(witness_apply(&w, &g).unwrap(), g);
        }
        let other = eval_grid(2, &SignAssignment::all_ones(2, 2).unwrap()).unwrap();
        assert!(matches!(
            witness_apply(&id, &other),
            Err(Error::ExponentMismatch { .. })
        ));
        let bad = RearrangementWitness::new(
            3,
            rect([1, 0], [0, 0]),
            vec![Move {
                rect: rect([1, 0], [1, 0]),
                axis: Axis::X,
            }],
        );
        assert!(matches!(bad, Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn normalize_sound_on_subregions() {
        for n in 0..=4u32 {
            let mut sampler = SignSampler::new(n, 2, 77 + n as u64).unwrap();
            for _ in 0..5 {
                let s = sampler.next_assignment();
                for a in 0..=n + 1 {
                    for b in 0..=n + 1 - a {
                        let q = rect([a, b], [(1u64 << a) - 1, 0]);
                        let (out, w, flips) = normalize_verified(n, &s, &q).unwrap();
                        assert!(out.is_all_ones());
                        assert!(flips <= ((n as usize) + 1) << n);
                        assert!(replay(&w, &s).unwrap().ok(), "n={n} q={q}");
                        let map = w.source_map().unwrap();
                        let mut sorted = map.clone();
                        sorted.sort();
                        assert!(sorted.iter().enumerate().all(|(i, &v)| i as u32 == v));
                        let side = 1u64 << (n + 1);
                        for (p, &src) in map.iter().enumerate() {
                            let cell = [p as u64 / side, p as u64 % side];
                            let inside = q
                                .cell_ranges(n + 1)
                                .unwrap()
                                .iter()
                                .zip(cell)
                                .all(|(r, c)| r.contains(&c));
                            if !inside {
                                assert_eq!(p as u32, src);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn witness_json_round_trip() {
        let s = SignSampler::new(3, 2, 9).unwrap().next_assignment();
        let (_, w) = normalize(3, &s, &DyadicRect::unit(2)).unwrap();
        let back = RearrangementWitness::from_json(&w.to_json()).unwrap();
        assert_eq!(back, w);
        let v: serde_json::Value = serde_json::from_str(&w.to_json()).unwrap();
        assert_eq!(v["v"], 1);
        assert_eq!(v["q"]["levels"], serde_json::json!([0, 0]));
        assert!(v["moves"][0]["axis"] == "x" || v["moves"][0]["axis"] == "y");
        assert!(RearrangementWitness::from_json("{").is_err());
    }
}
