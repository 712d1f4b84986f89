use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hsb_core::field::allones_grid;
use hsb_core::hyperdim::{
    count_classes_checkpointed, find_divergent_pair, tightness_counterexample, Divergence, Mode, TightnessOutcome,
};
use hsb_core::levelsets::{binomial_moment, cp_scan, histogram, lp_norm_pth_power, verify_theorem, LevelHistogram};
use hsb_core::normalize::{normalize_verified, replay, RearrangementWitness};
use hsb_core::{eval_grid, eval_grid_fast, DyadicRect, Error, SignAssignment, SignSampler};

/// Exact level sets of signed hyperbolic Haar sums.
#[derive(Parser, Debug)]
#[command(name = "hsb", version)]
struct Cli {
    /// Worker threads for parallel evaluation
    #[arg(long, global = true, env = "HSB_WORKERS", value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the binomial level-set law on every admissible region
    Verify {
        #[command(flatten)]
        signs: SignArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Level-set histogram of the field on a region
    Hist {
        #[command(flatten)]
        signs: SignArgs,
        /// Region as levels then offsets, e.g. `1,0,0,0`
        #[arg(long)]
        q: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Flip every sign to +1 on a region and record the rearrangement witness
    Normalize {
        #[command(flatten)]
        signs: SignArgs,
        #[arg(long)]
        q: Option<String>,
        /// Where to write the witness JSON (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a witness against an input assignment
    Replay {
        #[command(flatten)]
        signs: SignArgs,
        #[arg(long)]
        witness: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Partition assignments by their global histogram
    Classes {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Assignments drawn in sampled mode
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        /// Resume file for exhaustive runs
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Search for two assignments with different global histograms
    Divergent {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 1 << 16)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Find a region one level too fine where the binomial law fails
    Tightness {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Normalized L^p norms from the binomial moments
    Lp {
        #[arg(long, default_value_t = 4)]
        p: u32,
        #[arg(long, default_value_t = 20)]
        n_max: u32,
        /// Largest n at which moments are also checked on the grid
        #[arg(long, default_value_t = 8)]
        grid_max: u32,
        /// all-ones, all-minus or random
        #[arg(long, default_value = "all-ones")]
        signs: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        samples: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Time the reference, fast and closed-form evaluators
    Bench {
        #[arg(long, default_value_t = 12)]
        n: u32,
        /// Size at which the reference path is compared
        #[arg(long, default_value_t = 8)]
        spot: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the fast field at size n as a binary dump
        #[arg(long)]
        dump: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Write a sign file
    Gen {
        #[command(flatten)]
        signs: SignArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct SignArgs {
    /// Rectangles have area 2^-n
    #[arg(long)]
    n: Option<u32>,
    /// Dimension (default 2, or the sign file's)
    #[arg(long)]
    d: Option<usize>,
    /// all-ones, all-minus, random or file:PATH
    #[arg(long, default_value = "all-ones")]
    signs: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random assignments to draw
    #[arg(long, default_value_t = 1)]
    samples: u64,
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    /// Report path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum SignSource {
    AllOnes,
    AllMinus,
    Random,
    File(PathBuf),
}

impl FromStr for SignSource {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-ones" => Ok(SignSource::AllOnes),
            "all-minus" => Ok(SignSource::AllMinus),
            "random" => Ok(SignSource::Random),
            _ => match s.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(SignSource::File(PathBuf::from(path))),
                _ => bail!("unknown sign source `{s}` (expected all-ones, all-minus, random or file:PATH)"),
            },
        }
    }
}

impl SignSource {
    fn generate(&self, n: u32, d: usize, seed: u64, samples: u64) -> Result<Vec<SignAssignment>> {
        Ok(match self {
            SignSource::AllOnes => vec![SignAssignment::all_ones(n, d)?],
            SignSource::AllMinus => vec![SignAssignment::all_minus(n, d)?],
            SignSource::Random => SignSampler::new(n, d, seed)?.take(samples as usize).collect(),
            SignSource::File(_) => bail!("a sign file fixes n; use all-ones, all-minus or random here"),
        })
    }
}

/// Assignments resolved from the sign flags, with their `n` and `d`.
struct Resolved {
    n: u32,
    d: usize,
    assignments: Vec<SignAssignment>,
    config: Value,
}

impl SignArgs {
    fn resolve(&self, default_n: Option<u32>) -> Result<Resolved> {
        let source: SignSource = self.signs.parse()?;
        if self.samples == 0 {
            bail!("--samples must be at least 1");
        }
        let (n, d, assignments) = match &source {
            SignSource::File(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading sign file {}", path.display()))?;
                let s =
                    SignAssignment::parse(&text).with_context(|| format!("parsing sign file {}", path.display()))?;
                if let Some(n) = self.n.or(default_n) {
                    if n != s.n() {
                        bail!("--n {n} does not match the sign file (n={})", s.n());
                    }
                }
                if let Some(d) = self.d {
                    if d != s.dim() {
                        bail!("--d {d} does not match the sign file (d={})", s.dim());
                    }
                }
                (s.n(), s.dim(), vec![s])
            }
            _ => {
                let n = self
                    .n
                    .or(default_n)
                    .ok_or_else(|| anyhow!("--n is required unless --signs file:PATH is given"))?;
                let d = self.d.unwrap_or(2);
                (n, d, source.generate(n, d, self.seed, self.samples)?)
            }
        };
        let mut config = json!({ "n": n, "d": d, "signs": self.signs });
        if source == SignSource::Random {
            config["seed"] = json!(self.seed);
            config["samples"] = json!(self.samples);
        }
        Ok(Resolved {
            n,
            d,
            assignments,
            config,
        })
    }
}

impl Resolved {
    fn single(mut self) -> Result<(u32, usize, SignAssignment, Value)> {
        if self.assignments.len() != 1 {
            bail!("this command takes a single assignment; use --samples 1");
        }
        Ok((self.n, self.d, self.assignments.remove(0), self.config))
    }

    fn require_2d(&self) -> Result<()> {
        if self.d != 2 {
            bail!("this command is defined for d = 2 only, got d = {}", self.d);
        }
        Ok(())
    }
}

enum Verdict {
    Pass,
    Fail,
}

fn with_command(command: &str, mut config: Value, extra: Value) -> Value {
    config["command"] = json!(command);
    if let (Some(obj), Value::Object(extra)) = (config.as_object_mut(), extra) {
        obj.extend(extra);
    }
    config
}

fn parse_region(text: Option<&str>, d: usize) -> Result<DyadicRect> {
    let Some(text) = text else {
        return Ok(DyadicRect::unit(d));
    };
    let parts = text
        .split(',')
        .map(|p| p.trim().parse::<u64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .with_context(|| format!("--q `{text}` must be comma-separated integers"))?;
    if parts.len() != 2 * d {
        bail!(
            "--q needs {} numbers (levels then offsets) for d = {d}, got {}",
            2 * d,
            parts.len()
        );
    }
    let levels = parts[..d]
        .iter()
        .map(|&l| u32::try_from(l).map_err(|_| anyhow!("level {l} out of range")))
        .collect::<Result<Vec<_>>>()?;
    Ok(DyadicRect::from_parts(&levels, &parts[d..])?)
}

fn region_json(q: &DyadicRect) -> Value {
    json!({ "levels": q.levels(), "offsets": q.offsets() })
}

fn histogram_json(h: &LevelHistogram) -> Value {
    let counts: serde_json::Map<String, Value> = h.counts().iter().map(|(v, c)| (v.to_string(), json!(c))).collect();
    Value::Object(counts)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, doc: &Value) -> Result<()> {
    emit(out, &format!("{}\n", serde_json::to_string_pretty(doc)?))
}

fn cmd_verify(signs: &SignArgs, out: &OutArgs) -> Result<Verdict> {
    let r = signs.resolve(None)?;
    r.require_2d()?;
    let config = with_command("verify", r.config.clone(), json!({}));
    let mut buf = Vec::new();
    if out.format == Format::Csv {
        writeln!(buf, "sample,signs_digest,total_q,passed")?;
    }
    let mut failed = 0;
    for (i, s) in r.assignments.iter().enumerate() {
        let report = verify_theorem(r.n, s)?;
        match out.format {
            Format::Json => {
                let mut c = config.clone();
                c["sample"] = json!(i);
                report.write_jsonl(&mut buf, Some(&c))?;
            }
            Format::Csv => writeln!(
                buf,
                "{i},{:016x},{},{}",
                report.signs_digest,
                report.total_q(),
                report.passed()
            )?,
        }
        if !report.passed() {
            failed += 1;
            for o in report.failures().take(5) {
                let m = o.mismatch.expect("failed region has a mismatch");
                eprintln!(
                    "sample {i}: region {} value {} has {} cells, expected {}",
                    o.region, m.value, m.got, m.expected
                );
            }
        }
    }
    emit(out.out.as_deref(), std::str::from_utf8(&buf)?)?;
    let total_q = hsb_core::levelsets::total_q_count(r.n);
    if failed > 0 {
        eprintln!(
            "FAIL: {failed} of {} assignments violate the binomial law; the law holds for every sign choice, \
             so this indicates an implementation bug",
            r.assignments.len()
        );
        return Ok(Verdict::Fail);
    }
    eprintln!(
        "OK: {} assignments x {total_q} regions at n={}",
        r.assignments.len(),
        r.n
    );
    Ok(Verdict::Pass)
}

fn cmd_hist(signs: &SignArgs, q: Option<&str>, out: &OutArgs) -> Result<Verdict> {
    let r = signs.resolve(None)?;
    let (n, d, s, config) = r.single()?;
    let region = parse_region(q, d)?;
    let config = with_command("hist", config, json!({ "q": region_json(&region) }));
    let h = histogram(&eval_grid_fast(n, &s)?, &region)?;
    let text = match out.format {
        Format::Csv => {
            let mut t = String::from("value,count\n");
            for (v, c) in h.counts() {
                t.push_str(&format!("{v},{c}\n"));
            }
            t
        }
        Format::Json => {
            let rows: Vec<Value> = h
                .counts()
                .iter()
                .map(|(&v, &c)| json!({ "value": v, "count": c, "measure": h.measure(v).to_string() }))
                .collect();
            let doc = json!({
                "v": 1,
                "config": config,
                "signsDigest": s.digest_hex(),
                "n": n,
                "d": d,
                "region": region_json(&region),
                "total": h.total(),
                "rows": rows,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc)?)
        }
    };
    emit(out.out.as_deref(), &text)?;
    Ok(Verdict::Pass)
}

fn cmd_normalize(signs: &SignArgs, q: Option<&str>, out: Option<&Path>) -> Result<Verdict> {
    let r = signs.resolve(None)?;
    r.require_2d()?;
    let (n, _, s, _) = r.single()?;
    let region = parse_region(q, 2)?;
    let (normalized, witness, flips) = match normalize_verified(n, &s, &region) {
        Ok(v) => v,
        Err(Error::PreconditionViolated(m)) => {
            eprintln!("FAIL: {m}");
            return Ok(Verdict::Fail);
        }
        Err(e) => return Err(e.into()),
    };
    emit(out, &format!("{}\n", witness.to_json()))?;
    let outcome = replay(&witness, &s)?;
    eprintln!("flips: {flips}, histogram on Q unchanged after each");
    eprintln!("moves: {}", witness.moves().len());
    eprintln!(
        "replay: {} of {} cells differ from the all-ones field",
        outcome.mismatched_cells, outcome.cells_in_q
    );
    if normalized.is_all_ones() && outcome.ok() {
        eprintln!("verdict: OK");
        Ok(Verdict::Pass)
    } else {
        eprintln!("verdict: FAIL");
        Ok(Verdict::Fail)
    }
}

fn cmd_replay(signs: &SignArgs, witness_path: &Path, out: &OutArgs) -> Result<Verdict> {
    let file = fs::File::open(witness_path).with_context(|| format!("opening {}", witness_path.display()))?;
    let witness = RearrangementWitness::read_json(std::io::BufReader::new(file))
        .with_context(|| format!("reading witness {}", witness_path.display()))?;
    let r = signs.resolve(Some(witness.n()))?;
    r.require_2d()?;
    let (n, _, s, config) = r.single()?;
    if n != witness.n() {
        bail!("witness is for n={}, signs are for n={n}", witness.n());
    }
    let outcome = replay(&witness, &s)?;
    let config = with_command("replay", config, json!({ "witness": witness_path }));
    match out.format {
        Format::Json => emit_json(
            out.out.as_deref(),
            &json!({
                "v": 1,
                "config": config,
                "signsDigest": s.digest_hex(),
                "region": region_json(witness.region()),
                "moves": witness.moves().len(),
                "mismatchedCells": outcome.mismatched_cells,
                "cellsInQ": outcome.cells_in_q,
                "ok": outcome.ok(),
            }),
        )?,
        Format::Csv => emit(
            out.out.as_deref(),
            &format!(
                "mismatched_cells,cells_in_q,ok\n{},{},{}\n",
                outcome.mismatched_cells,
                outcome.cells_in_q,
                outcome.ok()
            ),
        )?,
    }
    if outcome.ok() {
        eprintln!("verdict: OK");
        Ok(Verdict::Pass)
    } else {
        eprintln!("verdict: FAIL ({} cells differ)", outcome.mismatched_cells);
        Ok(Verdict::Fail)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_classes(
    n: u32,
    d: usize,
    mode: ModeArg,
    seed: u64,
    samples: u64,
    checkpoint: Option<&Path>,
    out: &OutArgs,
) -> Result<Verdict> {
    let mode = match mode {
        ModeArg::Exhaustive => Mode::Exhaustive,
        ModeArg::Sampled => Mode::Sampled { seed, count: samples },
    };
    let report = count_classes_checkpointed(n, d, mode, checkpoint)?;
    let mut extra = json!({ "mode": report.to_json()["mode"] });
    if let Mode::Sampled { seed, count } = mode {
        extra["seed"] = json!(seed);
        extra["samples"] = json!(count);
    }
    let config = with_command("classes", json!({ "n": n, "d": d }), extra);
    match out.format {
        Format::Json => {
            let mut doc = report.to_json();
            doc["config"] = config;
            emit_json(out.out.as_deref(), &doc)?;
        }
        Format::Csv => {
            let mut t = String::from("class,size,representative\n");
            for (i, c) in report.classes.iter().enumerate() {
                t.push_str(&format!("{i},{},{}\n", c.size, c.representative.sign_string()));
            }
            emit(out.out.as_deref(), &t)?;
        }
    }
    eprintln!(
        "classes: {} over {} assignments (n={n}, d={d})",
        report.class_count(),
        report.enumerated
    );
    Ok(Verdict::Pass)
}

fn cmd_divergent(n: u32, d: usize, budget: u64, seed: u64, out: &OutArgs) -> Result<Verdict> {
    let config = with_command(
        "divergent",
        json!({ "n": n, "d": d }),
        json!({ "budget": budget, "seed": seed }),
    );
    let result = find_divergent_pair(n, d, budget, seed)?;
    let doc = match &result {
        Divergence::Found {
            first,
            second,
            first_histogram,
            second_histogram,
        } => json!({
            "v": 1,
            "config": config,
            "found": true,
            "first": { "signs": first.sign_string(), "digest": first.digest_hex(), "histogram": histogram_json(first_histogram) },
            "second": { "signs": second.sign_string(), "digest": second.digest_hex(), "histogram": histogram_json(second_histogram) },
        }),
        Divergence::NotFound { examined } => json!({
            "v": 1,
            "config": config,
            "found": false,
            "examined": examined,
        }),
    };
    match out.format {
        Format::Json => emit_json(out.out.as_deref(), &doc)?,
        Format::Csv => {
            let mut t = String::from("assignment,value,count\n");
            if let Divergence::Found {
                first_histogram,
                second_histogram,
                ..
            } = &result
            {
                for (name, h) in [("first", first_histogram), ("second", second_histogram)] {
                    for (v, c) in h.counts() {
                        t.push_str(&format!("{name},{v},{c}\n"));
                    }
                }
            }
            emit(out.out.as_deref(), &t)?;
        }
    }
    match result {
        Divergence::Found { .. } => eprintln!("found a divergent pair"),
        Divergence::NotFound { examined } => eprintln!("no divergent pair among {examined} assignments"),
    }
    Ok(Verdict::Pass)
}

fn cmd_tightness(n: u32, samples: u64, seed: u64, out: &OutArgs) -> Result<Verdict> {
    let config = with_command(
        "tightness",
        json!({ "n": n, "d": 2 }),
        json!({ "samples": samples, "seed": seed }),
    );
    match tightness_counterexample(n, samples, seed)? {
        TightnessOutcome::Found(w) => {
            let expected: serde_json::Map<String, Value> = w
                .expected
                .iter()
                .map(|(v, m)| (v.to_string(), json!(m.to_string())))
                .collect();
            match out.format {
                Format::Json => emit_json(
                    out.out.as_deref(),
                    &json!({
                        "v": 1,
                        "config": config,
                        "found": true,
                        "signs": w.signs.sign_string(),
                        "signsDigest": w.signs.digest_hex(),
                        "region": region_json(&w.region),
                        "got": histogram_json(&w.got),
                        "expected": expected,
                    }),
                )?,
                Format::Csv => {
                    let mut t = String::from("value,count,expected\n");
                    for (v, e) in &w.expected {
                        t.push_str(&format!("{v},{},{e}\n", w.got.count(*v)));
                    }
                    emit(out.out.as_deref(), &t)?;
                }
            }
            eprintln!("region {} deviates from the rescaled binomial law", w.region);
            Ok(Verdict::Pass)
        }
        TightnessOutcome::NotFound { assignments, regions } => {
            eprintln!("FAIL: no deviation on {regions} regions over {assignments} assignments");
            Ok(Verdict::Fail)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_lp(p: u32, n_max: u32, grid_max: u32, signs: &str, seed: u64, samples: u64, out: &OutArgs) -> Result<Verdict> {
    let source: SignSource = signs.parse()?;
    let rows = cp_scan(p, n_max)?;
    let config = with_command(
        "lp",
        json!({ "p": p, "nMax": n_max, "gridMax": grid_max, "signs": signs }),
        if source == SignSource::Random {
            json!({ "seed": seed, "samples": samples })
        } else {
            json!({})
        },
    );
    let mut mismatches = 0;
    let mut json_rows = Vec::new();
    for row in &rows {
        let moment = binomial_moment(row.n, p);
        let checked = row.n <= grid_max;
        if checked {
            for s in source.generate(row.n, 2, seed, samples)? {
                let got = lp_norm_pth_power(row.n, &s, p)?;
                if &got.numerator * &moment.denominator != &moment.numerator * &got.denominator {
                    mismatches += 1;
                    eprintln!(
                        "n={}: grid moment {}/{} differs from the binomial moment",
                        row.n, got.numerator, got.denominator
                    );
                }
            }
        }
        json_rows.push(json!({
            "n": row.n,
            "normalized": row.normalized,
            "momentNumerator": moment.numerator.to_string(),
            "momentDenominator": moment.denominator.to_string(),
            "gridChecked": checked,
        }));
    }
    match out.format {
        Format::Json => emit_json(
            out.out.as_deref(),
            &json!({ "v": 1, "config": config, "p": p, "rows": json_rows }),
        )?,
        Format::Csv => {
            let mut t = String::from("n,normalized\n");
            for row in &rows {
                t.push_str(&format!("{},{}\n", row.n, row.normalized));
            }
            emit(out.out.as_deref(), &t)?;
        }
    }
    if mismatches > 0 {
        eprintln!("FAIL: {mismatches} grid moments differ from the closed form");
        return Ok(Verdict::Fail);
    }
    Ok(Verdict::Pass)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed().as_secs_f64() * 1e3)
}

fn cmd_bench(n: u32, spot: u32, seed: u64, dump: Option<&Path>, out: &OutArgs) -> Result<Verdict> {
    if spot > 8 {
        bail!("--spot must be at most 8 (reference evaluation is quadratic in the grid), got {spot}");
    }
    let config = with_command(
        "bench",
        json!({ "n": n, "d": 2 }),
        json!({ "spot": spot, "seed": seed }),
    );
    let spot_signs = SignSampler::new(spot, 2, seed)?.next_assignment();
    let (reference, reference_ms) = timed(|| eval_grid(spot, &spot_signs));
    let (fast_spot, fast_spot_ms) = timed(|| eval_grid_fast(spot, &spot_signs));
    let (reference, fast_spot) = (reference?, fast_spot?);
    let spot_equal = reference.digest() == fast_spot.digest();

    let signs = SignSampler::new(n, 2, seed)?.next_assignment();
    let (fast, fast_ms) = timed(|| eval_grid_fast(n, &signs));
    let fast = fast?;
    if let Some(path) = dump {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = std::io::BufWriter::new(file);
        fast.write_dump(&mut w)?;
        w.flush()?;
    }
    let ones = SignAssignment::all_ones(n, 2)?;
    let (closed, closed_ms) = timed(|| allones_grid(n));
    let (fast_ones, fast_ones_ms) = timed(|| eval_grid_fast(n, &ones));
    let (closed, fast_ones) = (closed?, fast_ones?);
    let ones_equal = closed.digest() == fast_ones.digest();

    let doc = json!({
        "v": 1,
        "config": config,
        "spot": {
            "n": spot,
            "signsDigest": spot_signs.digest_hex(),
            "referenceDigest": format!("{:016x}", reference.digest()),
            "fastDigest": format!("{:016x}", fast_spot.digest()),
            "equal": spot_equal,
            "referenceMs": reference_ms,
            "fastMs": fast_spot_ms,
        },
        "full": {
            "n": n,
            "signsDigest": signs.digest_hex(),
            "fastDigest": format!("{:016x}", fast.digest()),
            "fastMs": fast_ms,
        },
        "allones": {
            "n": n,
            "closedFormDigest": format!("{:016x}", closed.digest()),
            "fastDigest": format!("{:016x}", fast_ones.digest()),
            "equal": ones_equal,
            "closedFormMs": closed_ms,
            "fastMs": fast_ones_ms,
        },
    });
    match out.format {
        Format::Json => emit_json(out.out.as_deref(), &doc)?,
        Format::Csv => emit(
            out.out.as_deref(),
            &format!(
                "path,n,digest,ms\nreference,{spot},{:016x},{reference_ms:.3}\nfast,{spot},{:016x},{fast_spot_ms:.3}\n\
                 fast,{n},{:016x},{fast_ms:.3}\nallones,{n},{:016x},{closed_ms:.3}\nfast-allones,{n},{:016x},{fast_ones_ms:.3}\n",
                reference.digest(),
                fast_spot.digest(),
                fast.digest(),
                closed.digest(),
                fast_ones.digest()
            ),
        )?,
    }
    if spot_equal && ones_equal {
        Ok(Verdict::Pass)
    } else {
        eprintln!("FAIL: digests differ (spot equal: {spot_equal}, all-ones equal: {ones_equal})");
        Ok(Verdict::Fail)
    }
}

fn cmd_gen(signs: &SignArgs, out: Option<&Path>) -> Result<Verdict> {
    let (_, _, s, _) = signs.resolve(None)?.single()?;
    emit(out, &s.to_string())?;
    eprintln!("digest {}", s.digest_hex());
    Ok(Verdict::Pass)
}

fn run(cli: Cli) -> Result<Verdict> {
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers as usize)
            .build_global()
            .context("starting the worker pool")?;
    }
    match &cli.command {
        Command::Verify { signs, out } => cmd_verify(signs, out),
        Command::Hist { signs, q, out } => cmd_hist(signs, q.as_deref(), out),
        Command::Normalize { signs, q, out } => cmd_normalize(signs, q.as_deref(), out.as_deref()),
        Command::Replay { signs, witness, out } => cmd_replay(signs, witness, out),
        Command::Classes {
            n,
            d,
            mode,
            seed,
            samples,
            checkpoint,
            out,
        } => cmd_classes(*n, *d, *mode, *seed, *samples, checkpoint.as_deref(), out),
        Command::Divergent {
            n,
            d,
            budget,
            seed,
            out,
        } => cmd_divergent(*n, *d, *budget, *seed, out),
        Command::Tightness { n, samples, seed, out } => cmd_tightness(*n, *samples, *seed, out),
        Command::Lp {
            p,
            n_max,
            grid_max,
            signs,
            seed,
            samples,
            out,
        } => cmd_lp(*p, *n_max, *grid_max, signs, *seed, *samples, out),
        Command::Bench {
            n,
            spot,
            seed,
            dump,
            out,
        } => cmd_bench(*n, *spot, *seed, dump.as_deref(), out),
        Command::Gen { signs, out } => cmd_gen(signs, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
