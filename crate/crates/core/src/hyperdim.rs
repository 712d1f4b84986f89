//! Searches over sign assignments in general dimension.
//!
//! Two assignments are in the same class when their global level-set
//! histograms over the whole cube are equal. In `d = 2` there is only one
//! class. In `d >= 3` with `n = 1` there is still a single class, since each
//! layer's term depends on a finest-level bit no other layer reads, so the
//! terms are independent fair signs for every assignment. From `n = 2` on
//! several classes appear. Every class count produced here is an
//! experimental enumeration result.
//!
//! Exhaustive enumeration visits assignment indices `0 .. 2^rects`, where
//! bit `r` of the index set means `ε_r = -1` (see
//! [`SignAssignment::from_index`]).

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use num_integer::binomial;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dyadic::{layer_count, Dyadic, DyadicRect, Layout};
use crate::error::{Error, Result};
use crate::field::{eval_grid_fast, eval_into, grid_cells};
use crate::levelsets::{histogram, LevelHistogram};
use crate::signs::{SignAssignment, SignSampler};

/// Exhaustive class counting is limited to `2^24` assignments.
pub const EXHAUSTIVE_CAP_BITS: u32 = 24;

/// Assignments between two checkpoint writes.
pub const CHECKPOINT_INTERVAL: u64 = 1 << 20;

fn check_dim(n: u32, d: usize, signs: &SignAssignment) -> Result<()> {
    if signs.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
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

/// Histogram of the field over the whole `(2^(n+1))^d` grid.
pub fn global_histogram_d(n: u32, d: usize, signs: &SignAssignment) -> Result<LevelHistogram> {
    check_dim(n, d, signs)?;
    let field = eval_grid_fast(n, signs)?;
    histogram(&field, &DyadicRect::unit(d))
}

type Key = Vec<(i32, u64)>;

/// Reusable per-thread evaluation of global histogram keys.
struct KeyEval {
    n: u32,
    top: i32,
    layout: Layout,
    buf: Vec<i8>,
    bins: Vec<u64>,
}

impl KeyEval {
    fn new(n: u32, d: usize) -> Result<Self> {
        let cells = grid_cells(n, d)?;
        let top = layer_count(n, d) as i32;
        Ok(KeyEval {
            n,
            top,
            layout: Layout::new(n, d)?,
            buf: vec![0; cells],
            bins: vec![0; 2 * top as usize + 1],
        })
    }

    fn key(&mut self, signs: &SignAssignment) -> Key {
        eval_into(self.n, signs, &self.layout, &mut self.buf);
        self.bins.fill(0);
        let top = self.top;
        for &v in &self.buf {
            self.bins[(v as i32 + top) as usize] += 1;
        }
        self.bins
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c > 0)
            .map(|(i, &c)| (i as i32 - top, c))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct ClassEntry {
    size: u64,
    first: u64,
}

type ClassTable = HashMap<Key, ClassEntry>;

fn merge(mut a: ClassTable, b: ClassTable) -> ClassTable {
    for (k, e) in b {
        a.entry(k)
            .and_modify(|x| {
                x.size += e.size;
                x.first = x.first.min(e.first);
            })
            .or_insert(e);
    }
    a
}

fn classify_range(n: u32, d: usize, range: std::ops::Range<u64>) -> Result<ClassTable> {
    KeyEval::new(n, d)?;
    Ok(range
        .into_par_iter()
        .fold(
            || (KeyEval::new(n, d).expect("checked above"), ClassTable::new()),
            |(mut eval, mut table), idx| {
                let signs = SignAssignment::from_index(n, d, idx).expect("index in range");
                let key = eval.key(&signs);
                table
                    .entry(key)
                    .and_modify(|e| {
                        e.size += 1;
                        e.first = e.first.min(idx);
                    })
                    .or_insert(ClassEntry { size: 1, first: idx });
                (eval, table)
            },
        )
        .map(|(_, t)| t)
        .reduce(ClassTable::new, merge))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Sampled { seed: u64, count: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignClass {
    pub size: u64,
    pub representative: SignAssignment,
    pub histogram: LevelHistogram,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassReport {
    pub n: u32,
    pub d: usize,
    pub mode: Mode,
    pub enumerated: u64,
    /// Sorted by histogram `(value, count)` sequence.
    pub classes: Vec<SignClass>,
}

impl ClassReport {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let classes: Vec<_> = self
            .classes
            .iter()
            .map(|c| {
                let hist: BTreeMap<String, u64> =
                    c.histogram.counts().iter().map(|(v, n)| (v.to_string(), *n)).collect();
                json!({
                    "size": c.size,
                    "representative": c.representative.sign_string(),
                    "histogram": hist,
                })
            })
            .collect();
        let mut doc = json!({
            "v": 1,
            "n": self.n,
            "d": self.d,
            "mode": match self.mode { Mode::Exhaustive => "exhaustive", Mode::Sampled { .. } => "sampled" },
            "enumerated": self.enumerated,
            "classCount": self.classes.len(),
            "classes": classes,
        });
        if let Mode::Sampled { seed, count } = self.mode {
            doc["seed"] = json!(seed);
            doc["count"] = json!(count);
        }
        doc
    }
}

fn finish(
    n: u32,
    d: usize,
    mode: Mode,
    enumerated: u64,
    table: ClassTable,
    rep: impl Fn(u64) -> SignAssignment,
) -> ClassReport {
    let mut entries: Vec<(Key, ClassEntry)> = table.into_iter().collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let unit = DyadicRect::unit(d);
    let classes = entries
        .into_iter()
        .map(|(key, e)| SignClass {
            size: e.size,
            representative: rep(e.first),
            histogram: LevelHistogram::new(n, unit.clone(), key.into_iter().collect()),
        })
        .collect();
    ClassReport {
        n,
        d,
        mode,
        enumerated,
        classes,
    }
}

fn exhaustive_size(n: u32, d: usize) -> Result<u64> {
    let rects = SignAssignment::rect_count(n, d)?;
    if rects > EXHAUSTIVE_CAP_BITS as u64 {
        return Err(Error::SearchSpaceTooLarge {
            rects,
            cap: EXHAUSTIVE_CAP_BITS,
        });
    }
    Ok(1u64 << rects)
}

pub fn count_classes(n: u32, d: usize, mode: Mode) -> Result<ClassReport> {
    count_classes_checkpointed(n, d, mode, None)
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Checkpoint {
    v: u32,
    n: u32,
    d: usize,
    next_index: u64,
    classes: Vec<(Key, ClassEntry)>,
}

/// [`count_classes`]; in exhaustive mode the partial class table is written to
/// `checkpoint` every [`CHECKPOINT_INTERVAL`] assignments, and an existing
/// checkpoint for the same `(n, d)` is resumed.
pub fn count_classes_checkpointed(n: u32, d: usize, mode: Mode, checkpoint: Option<&Path>) -> Result<ClassReport> {
    match mode {
        Mode::Exhaustive => {
            let total = exhaustive_size(n, d)?;
            grid_cells(n, d)?;
            let (mut next, mut table) = match checkpoint.filter(|p| p.exists()) {
                Some(path) => load_checkpoint(path, n, d)?,
                None => (0, ClassTable::new()),
            };
            while next < total {
                let end = (next + CHECKPOINT_INTERVAL).min(total);
                table = merge(table, classify_range(n, d, next..end)?);
                next = end;
                if let Some(path) = checkpoint {
                    save_checkpoint(path, n, d, next, &table)?;
                }
            }
            Ok(finish(n, d, mode, total, table, |i| {
                SignAssignment::from_index(n, d, i).expect("index in range")
            }))
        }
        Mode::Sampled { seed, count } => {
            let samples: Vec<SignAssignment> = SignSampler::new(n, d, seed)?.take(count as usize).collect();
            KeyEval::new(n, d)?;
            let table = samples
                .par_iter()
                .enumerate()
                .fold(
                    || (KeyEval::new(n, d).expect("checked above"), ClassTable::new()),
                    |(mut eval, mut table), (i, s)| {
                        let key = eval.key(s);
                        table
                            .entry(key)
                            .and_modify(|e| {
                                e.size += 1;
                                e.first = e.first.min(i as u64);
                            })
                            .or_insert(ClassEntry {
                                size: 1,
                                first: i as u64,
                            });
                        (eval, table)
                    },
                )
                .map(|(_, t)| t)
                .reduce(ClassTable::new, merge);
            Ok(finish(n, d, mode, count, table, |i| samples[i as usize].clone()))
        }
    }
}

fn checkpoint_err(message: String) -> Error {
    Error::Parse { line: 0, message }
}

fn save_checkpoint(path: &Path, n: u32, d: usize, next_index: u64, table: &ClassTable) -> Result<()> {
    let mut classes: Vec<(Key, ClassEntry)> = table.iter().map(|(k, e)| (k.clone(), *e)).collect();
    classes.sort_by(|a, b| a.0.cmp(&b.0));
    let doc = Checkpoint {
        v: 1,
        n,
        d,
        next_index,
        classes,
    };
    let text = serde_json::to_string(&doc).expect("checkpoint serializes");
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text)
        .and_then(|_| fs::rename(&tmp, path))
        .map_err(|e| checkpoint_err(format!("writing checkpoint {}: {e}", path.display())))
}

fn load_checkpoint(path: &Path, n: u32, d: usize) -> Result<(u64, ClassTable)> {
    let text = fs::read_to_string(path).map_err(|e| checkpoint_err(format!("reading {}: {e}", path.display())))?;
    let doc: Checkpoint =
        serde_json::from_str(&text).map_err(|e| checkpoint_err(format!("checkpoint {}: {e}", path.display())))?;
    if doc.n != n || doc.d != d {
        return Err(checkpoint_err(format!(
            "checkpoint {} is for n={} d={}, not n={n} d={d}",
            path.display(),
            doc.n,
            doc.d
        )));
    }
    Ok((doc.next_index, doc.classes.into_iter().collect()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Divergence {
    Found {
        first: SignAssignment,
        second: SignAssignment,
        first_histogram: LevelHistogram,
        second_histogram: LevelHistogram,
    },
    NotFound {
        examined: u64,
    },
}

/// Two assignments with different global histograms: an exhaustive scan from
/// index 0 when `2^rects <= budget`, otherwise `budget` seeded samples
/// compared against the first sample.
pub fn find_divergent_pair(n: u32, d: usize, budget: u64, seed: u64) -> Result<Divergence> {
    let rects = SignAssignment::rect_count(n, d)?;
    let mut eval = KeyEval::new(n, d)?;
    let exhaustive = rects < 64 && (1u64 << rects) <= budget;
    let mut candidates: Box<dyn Iterator<Item = SignAssignment>> = if exhaustive {
        Box::new((0..1u64 << rects).map(move |i| SignAssignment::from_index(n, d, i).expect("index in range")))
    } else {
        Box::new(SignSampler::new(n, d, seed)?.take(budget as usize))
    };
    let Some(first) = candidates.next() else {
        return Ok(Divergence::NotFound { examined: 0 });
    };
    let reference = eval.key(&first);
    let mut examined = 1;
    for s in candidates {
        examined += 1;
        if eval.key(&s) != reference {
            return Ok(Divergence::Found {
                first_histogram: global_histogram_d(n, d, &first)?,
                second_histogram: global_histogram_d(n, d, &s)?,
                first,
                second: s,
            });
        }
    }
    Ok(Divergence::NotFound { examined })
}

/// A region just below the size threshold whose histogram is not the rescaled
/// binomial law.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TightnessWitness {
    pub signs: SignAssignment,
    pub region: DyadicRect,
    pub got: LevelHistogram,
    /// `|Q| / 2^(n+1) * C(n+1, k)` in cells, i.e. `C(n+1, k) / 2`, keyed by value.
    pub expected: BTreeMap<i32, Dyadic>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TightnessOutcome {
    Found(TightnessWitness),
    NotFound { assignments: u64, regions: u64 },
}

/// Scans every `Q` with level sum `n + 2`, first with all-ones signs, then
/// with up to `samples` seeded random assignments.
pub fn tightness_counterexample(n: u32, samples: u64, seed: u64) -> Result<TightnessOutcome> {
    let expected: BTreeMap<i32, Dyadic> = (0..=n + 1)
        .map(|k| {
            (
                n as i32 + 1 - 2 * k as i32,
                Dyadic::new(binomial(n as u128 + 1, k as u128), 1),
            )
        })
        .collect();
    let regions: Vec<DyadicRect> = (1..=n + 1)
        .flat_map(|a| {
            let b = n + 2 - a;
            (0..1u64 << a).flat_map(move |ox| {
                (0..1u64 << b).map(move |oy| DyadicRect::from_parts(&[a, b], &[ox, oy]).expect("valid"))
            })
        })
        .collect();
    let candidates =
        std::iter::once(SignAssignment::all_ones(n, 2)?).chain(SignSampler::new(n, 2, seed)?.take(samples as usize));
    let mut assignments = 0;
    for signs in candidates {
        assignments += 1;
        let field = eval_grid_fast(n, &signs)?;
        for q in &regions {
            let got = histogram(&field, q)?;
            let deviates = expected
                .iter()
                .any(|(&v, e)| Dyadic::new(got.count(v) as u128, 0) != *e);
            if deviates {
                return Ok(TightnessOutcome::Found(TightnessWitness {
                    signs,
                    region: q.clone(),
                    got,
                    expected,
                }));
            }
        }
    }
    Ok(TightnessOutcome::NotFound {
        assignments,
        regions: regions.len() as u64,
    })
}
