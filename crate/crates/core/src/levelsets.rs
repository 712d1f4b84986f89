//! Level-set histograms on dyadic regions, the closed-form binomial law, the
//! exhaustive verifier, and even-`p` moments.
//!
//! Measures are always finest-cell counts. A region `Q` with levels `(a, b)`
//! holds `2^(2(n+1) - a - b)` cells; when `a + b <= n + 1` exactly
//! `2^(n+1-a-b) * C(n+1, k)` of them carry the value `n + 1 - 2k`, whatever
//! the signs.

use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::{Dyadic, DyadicRect};
use crate::error::{Error, Result};
use crate::field::{eval_grid_fast, GridField};
use crate::signs::SignAssignment;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelHistogram {
    n: u32,
    region: DyadicRect,
    counts: BTreeMap<i32, u64>,
}

impl LevelHistogram {
    pub fn new(n: u32, region: DyadicRect, counts: BTreeMap<i32, u64>) -> Self {
        let counts = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        LevelHistogram { n, region, counts }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn region(&self) -> &DyadicRect {
        &self.region
    }

    /// Nonzero counts keyed by field value, ascending.
    pub fn counts(&self) -> &BTreeMap<i32, u64> {
        &self.counts
    }

    pub fn count(&self, value: i32) -> u64 {
        self.counts.get(&value).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Measure of the level set `{F = value} ∩ region`.
    pub fn measure(&self, value: i32) -> Dyadic {
        let d = self.region.dim() as u32;
        Dyadic::new(self.count(value) as u128, d * (self.n + 1))
    }

    /// The histogram of `-F`.
    pub fn mirrored(&self) -> LevelHistogram {
        LevelHistogram {
            n: self.n,
            region: self.region.clone(),
            counts: self.counts.iter().map(|(&v, &c)| (-v, c)).collect(),
        }
    }

    /// Counts as a `(value, count)` sequence; the class key in searches.
    pub fn key(&self) -> Vec<(i32, u64)> {
        self.counts.iter().map(|(&v, &c)| (v, c)).collect()
    }
}

/// Counts per `k`, where bin `k` holds value `L - 2k` for `L` layers
/// (`L = n + 1` in `d = 2`).
pub(crate) fn region_bins(field: &GridField, region: &DyadicRect) -> Result<Vec<u64>> {
    if region.dim() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: region.dim(),
        });
    }
    let ranges = region.cell_ranges(field.cell_level())?;
    let top = field.max_value();
    let mut bins = vec![0u64; top as usize + 1];
    let mut raw = vec![0u64; 2 * top as usize + 1];
    for_each_run(field, &ranges, |run| {
        for &v in run {
            raw[(top + v as i32) as usize] += 1;
        }
    });
    for (k, b) in bins.iter_mut().enumerate() {
        *b = raw[(2 * top - 2 * k as i32) as usize];
    }
    debug_assert_eq!(bins.iter().sum::<u64>(), raw.iter().sum::<u64>());
    Ok(bins)
}

/// Calls `f` on every contiguous last-axis run of cells inside `ranges`.
fn for_each_run(field: &GridField, ranges: &[std::ops::Range<u64>], mut f: impl FnMut(&[i8])) {
    fn rec(values: &[i8], side: u64, base: u64, ranges: &[std::ops::Range<u64>], f: &mut impl FnMut(&[i8])) {
        let (first, rest) = ranges.split_first().expect("d >= 1");
        if rest.is_empty() {
            f(&values[(base + first.start) as usize..(base + first.end) as usize]);
            return;
        }
        for c in first.clone() {
            rec(values, side, (base + c) * side, rest, f);
        }
    }
    rec(field.values(), field.side(), 0, ranges, &mut f);
}

pub fn histogram(field: &GridField, region: &DyadicRect) -> Result<LevelHistogram> {
    let bins = region_bins(field, region)?;
    let top = field.max_value();
    let counts = bins.iter().enumerate().map(|(k, &c)| (top - 2 * k as i32, c)).collect();
    Ok(LevelHistogram::new(field.n(), region.clone(), counts))
}

fn square_levels(region: &DyadicRect) -> Result<(u32, u32)> {
    match region.levels()[..] {
        [a, b] => Ok((a, b)),
        _ => Err(Error::DimensionMismatch {
            expected: 2,
            got: region.dim(),
        }),
    }
}

/// Predicted cell count at value `n + 1 - 2k` on `region`:
/// `2^(n+1-a-b) * C(n+1, k)`.
pub fn binomial_expected(n: u32, region: &DyadicRect, k: u32) -> Result<u64> {
    let (a, b) = square_levels(region)?;
    if a + b > n + 1 {
        return Err(Error::RegionTooSmall {
            level_sum: a + b,
            limit: n + 1,
        });
    }
    if k > n + 1 {
        return Err(Error::PreconditionViolated(format!(
            "k = {k} exceeds n + 1 = {}",
            n + 1
        )));
    }
    let c = binomial(n as u64 + 1, k as u64);
    c.checked_shl(n + 1 - a - b)
        .filter(|v| v >> (n + 1 - a - b) == c)
        .ok_or(Error::Overflow("binomial_expected"))
}

/// `Σ_{s=0}^{n+1} (s+1) 2^s`: dyadic rectangles with level sum at most `n + 1`.
pub fn total_q_count(n: u32) -> u64 {
    (0..=n as u64 + 1).map(|s| (s + 1) << s).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub value: i32,
    pub got: u64,
    pub expected: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QOutcome {
    pub region: DyadicRect,
    /// First mismatching value in ascending value order, if any.
    pub mismatch: Option<Mismatch>,
}

impl QOutcome {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub n: u32,
    pub signs_digest: u64,
    pub outcomes: Vec<QOutcome>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ReportHeader<'a> {
    v: u32,
    n: u32,
    signs_digest: String,
    total_q: u64,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a serde_json::Value>,
}

#[derive(Serialize)]
struct ReportLine {
    a: u32,
    b: u32,
    ox: u64,
    oy: u64,
    pass: bool,
    mismatches: Vec<Mismatch>,
}

impl VerifyReport {
    pub fn total_q(&self) -> u64 {
        self.outcomes.len() as u64
    }

    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(QOutcome::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &QOutcome> {
        self.outcomes.iter().filter(|o| !o.passed())
    }

    /// Line-oriented JSON: a header object, then one object per region.
    pub fn write_jsonl<W: Write>(&self, mut w: W, config: Option<&serde_json::Value>) -> std::io::Result<()> {
        let header = ReportHeader {
            v: 1,
            n: self.n,
            signs_digest: format!("{:016x}", self.signs_digest),
            total_q: self.total_q(),
            passed: self.passed(),
            config,
        };
        serde_json::to_writer(&mut w, &header)?;
        writeln!(w)?;
        for o in &self.outcomes {
            let levels = o.region.levels();
            let offsets = o.region.offsets();
            let line = ReportLine {
                a: levels[0],
                b: levels[1],
                ox: offsets[0],
                oy: offsets[1],
                pass: o.passed(),
                mismatches: o.mismatch.into_iter().collect(),
            };
            serde_json::to_writer(&mut w, &line)?;
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Checks the binomial law on every dyadic `Q` with level sum at most `n + 1`.
/// Shapes `(a, b)` are enumerated by level sum then `a`; positions `ox`-major.
pub fn verify_theorem(n: u32, signs: &SignAssignment) -> Result<VerifyReport> {
    if signs.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: signs.dim(),
        });
    }
    let field = eval_grid_fast(n, signs)?;
    verify_field(&field, signs.digest())
}

pub fn verify_field(field: &GridField, signs_digest: u64) -> Result<VerifyReport> {
    if field.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: field.dim(),
        });
    }
    let n = field.n();
    let mut outcomes = Vec::with_capacity(total_q_count(n) as usize);
    let top = n as i32 + 1;
    for s in 0..=n + 1 {
        for a in 0..=s {
            let b = s - a;
            let expected: Vec<u64> = (0..=n + 1)
                .map(|k| binomial(n as u64 + 1, k as u64) << (n + 1 - s))
                .collect();
            let shape: Vec<QOutcome> = (0..1u64 << a)
                .into_par_iter()
                .flat_map_iter(|ox| (0..1u64 << b).map(move |oy| (ox, oy)))
                .map(|(ox, oy)| {
                    let region = DyadicRect::from_parts(&[a, b], &[ox, oy])?;
                    let bins = region_bins(field, &region)?;
                    let mismatch = (0..bins.len())
                        .rev()
                        .find(|&k| bins[k] != expected[k])
                        .map(|k| Mismatch {
                            value: top - 2 * k as i32,
                            got: bins[k],
                            expected: expected[k],
                        });
                    Ok(QOutcome { region, mismatch })
                })
                .collect::<Result<_>>()?;
            outcomes.extend(shape);
        }
    }
    Ok(VerifyReport {
        n,
        signs_digest,
        outcomes,
    })
}

/// An exact non-negative rational `numerator / denominator`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactRatio {
    pub numerator: BigUint,
    pub denominator: BigUint,
}

impl ExactRatio {
    pub fn to_f64(&self) -> f64 {
        // Scale both down together so huge values keep their ratio.
        let bits = self.numerator.bits().max(self.denominator.bits());
        let shift = bits.saturating_sub(1000);
        let num = (&self.numerator >> shift).to_f64().unwrap_or(f64::INFINITY);
        let den = (&self.denominator >> shift).to_f64().unwrap_or(f64::INFINITY);
        num / den
    }

    /// The value if it is an integer.
    pub fn as_integer(&self) -> Option<BigUint> {
        if self.denominator.is_zero() || !(&self.numerator % &self.denominator).is_zero() {
            return None;
        }
        Some(&self.numerator / &self.denominator)
    }
}

fn check_even(p: u32) -> Result<()> {
    if p == 0 || p % 2 == 1 {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

/// `‖F‖_p^p` over the unit cube, as `Σ_cells F^p / #cells`.
pub fn lp_norm_pth_power(n: u32, signs: &SignAssignment, p: u32) -> Result<ExactRatio> {
    check_even(p)?;
    let field = eval_grid_fast(n, signs)?;
    let bins = region_bins(&field, &DyadicRect::unit(field.dim()))?;
    let top = field.max_value() as i64;
    let numerator = bins
        .iter()
        .enumerate()
        .map(|(k, &c)| BigUint::from((top - 2 * k as i64).unsigned_abs()).pow(p) * c)
        .sum();
    Ok(ExactRatio {
        numerator,
        denominator: BigUint::from(field.values().len()),
    })
}

/// `E[(n+1-2K)^p]` for `K ~ Binomial(n+1, 1/2)`, as `Σ_k C(n+1,k)(n+1-2k)^p / 2^(n+1)`.
pub fn binomial_moment(n: u32, p: u32) -> ExactRatio {
    let m = n as u64 + 1;
    let mut c = BigUint::one();
    let mut numerator = BigUint::zero();
    for k in 0..=m {
        let v = (m as i64 - 2 * k as i64).unsigned_abs();
        numerator += &c * BigUint::from(v).pow(p);
        c = c * (m - k) / (k + 1);
    }
    ExactRatio {
        numerator,
        denominator: BigUint::one() << m,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CpRow {
    pub n: u32,
    /// `‖F‖_p / sqrt(n + 1)`.
    pub normalized: f64,
}

/// Normalized `L^p` norms for `n = 0..=n_max` from the closed-form moments.
pub fn cp_scan(p: u32, n_max: u32) -> Result<Vec<CpRow>> {
    check_even(p)?;
    Ok((0..=n_max)
        .map(|n| {
            let moment = binomial_moment(n, p);
            let scaled = ExactRatio {
                denominator: moment.denominator * BigUint::from(n as u64 + 1).pow(p / 2),
                numerator: moment.numerator,
            };
            CpRow {
                n,
                normalized: scaled.to_f64().powf(1.0 / p as f64),
            }
        })
        .collect())
}
