//! Sign assignments: one `±1` per rectangle of volume `2^-n`, in canonical
//! rect-id order.
//!
//! Text file format:
//!
//! ```text
//! n=<n> d=<d>
//! <string over '+'/'-' of length rect_count, in rect-id order>
//! ```
//!
//! The trailing newline is optional.
//!
//! Random assignments come from SplitMix64 seeded with the user seed. Each
//! assignment consumes `ceil(rect_count / 64)` consecutive outputs; rect `r`
//! takes bit `r % 64` (least significant first) of output `r / 64`, with a
//! set bit meaning `+1`. Sample `s` of a stream is the `s`-th such block.

use std::fmt;
use std::str::FromStr;

use fnv::FnvHasher;
use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use std::hash::Hasher;

use crate::dyadic::{layer_count, Layout};
use crate::error::{Error, Result};

/// Signs stored in memory are capped at `2^30` entries.
pub const MAX_SIGN_BITS: u32 = 30;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignAssignment {
    n: u32,
    d: usize,
    signs: Vec<i8>,
}

impl SignAssignment {
    /// Number of rectangles of volume `2^-n` in dimension `d`.
    pub fn rect_count(n: u32, d: usize) -> Result<u64> {
        crate::dyadic::check_grid_budget(n, d)?;
        let count = layer_count(n, d)
            .checked_shl(n)
            .filter(|c| c >> n == layer_count(n, d))
            .ok_or(Error::Overflow("rectangle count"))?;
        if count > 1u64 << MAX_SIGN_BITS {
            return Err(Error::GridTooLarge {
                bits: 64 - count.leading_zeros(),
                limit: MAX_SIGN_BITS,
            });
        }
        Ok(count)
    }

    /// Every sign equal to `sign` (which must be `1` or `-1`).
    pub fn constant(n: u32, d: usize, sign: i8) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::PreconditionViolated(format!("sign must be ±1, got {sign}")));
        }
        let len = Self::rect_count(n, d)? as usize;
        Ok(SignAssignment {
            n,
            d,
            signs: vec![sign; len],
        })
    }

    pub fn all_ones(n: u32, d: usize) -> Result<Self> {
        Self::constant(n, d, 1)
    }

    pub fn all_minus(n: u32, d: usize) -> Result<Self> {
        Self::constant(n, d, -1)
    }

    pub fn from_signs(n: u32, d: usize, signs: Vec<i8>) -> Result<Self> {
        let len = Self::rect_count(n, d)?;
        if signs.len() as u64 != len {
            return Err(Error::IdOutOfRange {
                id: signs.len() as u64,
                count: len,
            });
        }
        if let Some(bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::PreconditionViolated(format!("sign must be ±1, got {bad}")));
        }
        Ok(SignAssignment { n, d, signs })
    }

    /// The assignment whose rect `r` is `-1` exactly when bit `r` of `index`
    /// is set; index 0 is all-ones. Used by exhaustive searches.
    pub fn from_index(n: u32, d: usize, index: u64) -> Result<Self> {
        let len = Self::rect_count(n, d)?;
        if len < 64 && index >> len != 0 {
            return Err(Error::IdOutOfRange {
                id: index,
                count: 1u64 << len,
            });
        }
        let signs = (0..len)
            .map(|r| if r < 64 && (index >> r) & 1 == 1 { -1 } else { 1 })
            .collect();
        Ok(SignAssignment { n, d, signs })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.signs
    }

    pub fn get(&self, id: u64) -> Result<i8> {
        self.signs.get(id as usize).copied().ok_or(Error::IdOutOfRange {
            id,
            count: self.signs.len() as u64,
        })
    }

    pub fn negate(&mut self, id: u64) -> Result<()> {
        let count = self.signs.len() as u64;
        let s = self
            .signs
            .get_mut(id as usize)
            .ok_or(Error::IdOutOfRange { id, count })?;
        *s = -*s;
        Ok(())
    }

    pub fn negated(&self) -> SignAssignment {
        SignAssignment {
            n: self.n,
            d: self.d,
            signs: self.signs.iter().map(|s| -s).collect(),
        }
    }

    /// The signs of layer `layer` (in layer order).
    pub fn layer(&self, layer: usize) -> &[i8] {
        let len = 1usize << self.n;
        &self.signs[layer * len..(layer + 1) * len]
    }

    pub fn is_all_ones(&self) -> bool {
        self.signs.iter().all(|&s| s == 1)
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.n, self.d).expect("validated at construction")
    }

    /// The `+`/`-` line of the file format.
    pub fn sign_string(&self) -> String {
        self.signs.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
    }

    /// 64-bit FNV-1a over the bytes of [`SignAssignment::sign_string`].
    pub fn digest(&self) -> u64 {
        let mut h = FnvHasher::default();
        for &s in &self.signs {
            h.write_u8(if s > 0 { b'+' } else { b'-' });
        }
        h.finish()
    }

    pub fn digest_hex(&self) -> String {
        format!("{:016x}", self.digest())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.split('\n');
        let header = lines.next().unwrap_or("");
        let (n, d) = parse_header(header.trim_end_matches('\r'))?;
        let body = lines
            .next()
            .ok_or_else(|| parse_err(2, "missing sign line"))?
            .trim_end_matches('\r');
        for (i, rest) in lines.enumerate() {
            if !rest.trim().is_empty() {
                return Err(parse_err(i + 3, "unexpected content after the sign line"));
            }
        }
        let expected = Self::rect_count(n, d).map_err(|e| parse_err(1, &e.to_string()))?;
        if body.len() as u64 != expected {
            return Err(parse_err(
                2,
                &format!("expected {expected} signs for n={n} d={d}, found {}", body.len()),
            ));
        }
        let signs = body
            .chars()
            .enumerate()
            .map(|(i, c)| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(parse_err(
                    2,
                    &format!("invalid character {other:?} at column {}", i + 1),
                )),
            })
            .collect::<Result<Vec<i8>>>()?;
        Ok(SignAssignment { n, d, signs })
    }
}

fn parse_err(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}

fn parse_header(header: &str) -> Result<(u32, usize)> {
    let mut n = None;
    let mut d = None;
    for token in header.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| parse_err(1, &format!("expected key=value, found {token:?}")))?;
        let slot = match key {
            "n" => &mut n,
            "d" => &mut d,
            _ => return Err(parse_err(1, &format!("unknown key {key:?}"))),
        };
        if slot.is_some() {
            return Err(parse_err(1, &format!("duplicate key {key:?}")));
        }
        *slot = Some(
            value
                .parse::<u32>()
                .map_err(|_| parse_err(1, &format!("invalid value for {key}: {value:?}")))?,
        );
    }
    match (n, d) {
        (Some(n), Some(d)) if d >= 1 => Ok((n, d as usize)),
        (Some(_), Some(_)) => Err(parse_err(1, "d must be at least 1")),
        _ => Err(parse_err(1, "header must be `n=<n> d=<d>`")),
    }
}

impl fmt::Display for SignAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={} d={}", self.n, self.d)?;
        writeln!(f, "{}", self.sign_string())
    }
}

impl FromStr for SignAssignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SignAssignment::parse(s)
    }
}

/// Deterministic stream of random assignments for a fixed `(n, d, seed)`.
pub struct SignSampler {
    n: u32,
    d: usize,
    len: usize,
    rng: SplitMix64,
}

impl SignSampler {
    pub fn new(n: u32, d: usize, seed: u64) -> Result<Self> {
        let len = SignAssignment::rect_count(n, d)? as usize;
        Ok(SignSampler {
            n,
            d,
            len,
            rng: SplitMix64::seed_from_u64(seed),
        })
    }

    pub fn next_assignment(&mut self) -> SignAssignment {
        let mut signs = Vec::with_capacity(self.len);
        while signs.len() < self.len {
            let word = self.rng.next_u64();
            let take = (self.len - signs.len()).min(64);
            signs.extend((0..take).map(|b| if (word >> b) & 1 == 1 { 1i8 } else { -1 }));
        }
        SignAssignment {
            n: self.n,
            d: self.d,
            signs,
        }
    }
}

impl Iterator for SignSampler {
    type Item = SignAssignment;

    fn next(&mut self) -> Option<SignAssignment> {
        Some(self.next_assignment())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lengths() {
        assert_eq!(SignAssignment::all_ones(1, 2).unwrap().len(), 4);
        assert_eq!(SignAssignment::all_ones(2, 2).unwrap().len(), 12);
        assert_eq!(SignAssignment::all_ones(1, 3).unwrap().len(), 6);
        assert_eq!(SignAssignment::all_ones(2, 3).unwrap().len(), 24);
        assert!(matches!(
            SignAssignment::all_ones(20, 2),
            Err(Error::GridTooLarge { .. })
        ));
    }

    #[test]
    fn parse_and_format() {
        let s: SignAssignment = "n=1 d=2\n+-+-".parse().unwrap();
        assert_eq!(s.as_slice(), &[1, -1, 1, -1]);
        assert_eq!(s.to_string(), "n=1 d=2\n+-+-\n");
        assert_eq!(SignAssignment::parse(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let cases = [
            ("", 1),
            ("n=1\n++++\n", 1),
            ("n=1 d=2 x=3\n++++\n", 1),
            ("n=1 d=2", 2),
            ("n=1 d=2\n+++\n", 2),
            ("n=1 d=2\n++x+\n", 2),
            ("n=1 d=2\n++++\n\n--\n", 4),
        ];
        for (text, line) in cases {
            match SignAssignment::parse(text) {
                Err(Error::Parse { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn fnv_digest_reference() {
        let s = SignAssignment::from_signs(0, 1, vec![1]).unwrap();
        assert_eq!(s.digest(), 0xaf63_a64c_8601_90ca);
        let mut h = FnvHasher::default();
        h.write(b"+");
        assert_eq!(s.digest(), h.finish());
    }

    #[test]
    fn sampler_is_deterministic() {
        let a: Vec<_> = SignSampler::new(3, 2, 42).unwrap().take(5).collect();
        let b: Vec<_> = SignSampler::new(3, 2, 42).unwrap().take(5).collect();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
        let c = SignSampler::new(3, 2, 43).unwrap().next_assignment();
        assert_ne!(a[0], c);
    }

    #[test]
    fn sampler_bit_layout() {
        // SplitMix64 reference first output for seed 0.
        let first = 0xe220_a839_7b1d_cdaf_u64;
        let s = SignSampler::new(0, 1, 0).unwrap().next_assignment();
        assert_eq!(s.as_slice(), &[if first & 1 == 1 { 1 } else { -1 }]);
        let s = SignSampler::new(5, 2, 0).unwrap().next_assignment();
        for r in 0..64 {
            let expect = if (first >> r) & 1 == 1 { 1 } else { -1 };
            assert_eq!(s.get(r).unwrap(), expect);
        }
    }

    #[test]
    fn from_index_bits() {
        let s = SignAssignment::from_index(1, 2, 0b0101).unwrap();
        assert_eq!(s.sign_string(), "-+-+");
        assert_eq!(
            SignAssignment::from_index(1, 2, 0).unwrap(),
            SignAssignment::all_ones(1, 2).unwrap()
        );
        assert!(SignAssignment::from_index(1, 2, 16).is_err());
    }

    proptest! {
        #[test]
        fn file_round_trip(seed in any::<u64>(), n in 0u32..5, d in 1usize..4) {
            let s = SignSampler::new(n, d, seed).unwrap().next_assignment();
            prop_assert_eq!(SignAssignment::parse(&s.to_string()).unwrap(), s.clone());
            let trimmed = s.to_string().trim_end().to_string();
            prop_assert_eq!(SignAssignment::parse(&trimmed).unwrap(), s);
        }
    }
}
