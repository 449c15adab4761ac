//! Random-pair generation and the sweep harness comparing one-step
//! capacity changes and the bound hierarchy over many random symmetric
//! pairs.
//!
//! Sampling law: each half-row is drawn uniformly from the probability
//! simplex (flat Dirichlet), then floored at 1e-6 and renormalized so all
//! metrics stay finite. Delta statistics depend on this choice; the
//! reference experiments do not pin one down.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::capacity::{bound_profile, delta};
use crate::channel::{Channel, PairFile, SymmetricPair};
use crate::error::{Error, Result};
use crate::polar::TransformOptions;

pub const ENTRY_FLOOR: f64 = 1e-6;
/// Absolute tolerance used to classify C(W, V) as zero.
pub const ZERO_TOL: f64 = 1e-9;

/// One random-pair trial: capacities, one-step delta, and the bound
/// profile, plus classification flags.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub seed: u64,
    pub l: usize,
    pub c_wv: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    pub delta: f64,
    pub bound_profile: Vec<f64>,
    pub c_wv_zero: bool,
    pub improvement: bool,
    pub loss: bool,
}

impl ExperimentRecord {
    fn classify(&mut self) {
        self.c_wv_zero = self.c_wv < ZERO_TOL;
        self.improvement = self.delta > ZERO_TOL;
        self.loss = self.delta < -ZERO_TOL;
    }
}

/// Draws a reversal-symmetric pair with both half-rows uniform on the
/// simplex, entries floored at 1e-6.
pub fn random_symmetric_pair(l: usize, rng: &mut impl Rng) -> SymmetricPair {
    assert!(l >= 2, "need at least two outputs");
    let draw = |rng: &mut dyn rand::RngCore| -> Vec<f64> {
        // Normalized exponentials are uniform on the simplex.
        let mut row: Vec<f64> = (0..l)
            .map(|_| {
                let u: f64 = rand::Rng::gen_range(rng, f64::MIN_POSITIVE..1.0);
                -u.ln()
            })
            .collect();
        let sum: f64 = row.iter().sum();
        for v in row.iter_mut() {
            *v = (*v / sum).max(ENTRY_FLOOR);
        }
        let sum: f64 = row.iter().sum();
        for v in row.iter_mut() {
            *v /= sum;
        }
        row
    };
    let w0 = draw(rng);
    let v0 = draw(rng);
    let w1: Vec<f64> = w0.iter().rev().copied().collect();
    let v1: Vec<f64> = v0.iter().rev().copied().collect();
    SymmetricPair {
        w: Channel::new_unchecked(w0, w1),
        v: Channel::new_unchecked(v0, v1),
        pi: (0..l).rev().collect(),
    }
}

/// Aggregate statistics over one sweep.
#[derive(Debug, Clone, Default)]
pub struct SweepSummary {
    pub trials: usize,
    pub max_delta: f64,
    pub improvements: usize,
    pub losses: usize,
    pub neutral: usize,
    /// Records with C(W, V) > 1e-6 where some bound entry exceeds
    /// C(W, V) + 1e-8.
    pub conjecture_violations: usize,
}

fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 step over the combined value
    let mut z = seed ^ index.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Runs `delta` and `bound_profile` on `trials` random pairs, sorted by
/// C(W, V).
pub fn sweep(
    l: usize,
    trials: usize,
    depth: usize,
    seed: u64,
    opts: &TransformOptions,
) -> Result<(Vec<ExperimentRecord>, SweepSummary)> {
    let mut records: Vec<ExperimentRecord> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let pair_seed = derive_seed(seed, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(pair_seed);
            let pair = random_symmetric_pair(l, &mut rng);
            let d = delta(&pair)?;
            let profile = bound_profile(&pair, depth, opts)?;
            let mut rec = ExperimentRecord {
                seed: pair_seed,
                l,
                c_wv: d.c,
                c_minus: d.c_minus,
                c_plus: d.c_plus,
                delta: d.delta,
                bound_profile: profile.per_depth_bounds,
                c_wv_zero: false,
                improvement: false,
                loss: false,
            };
            rec.classify();
            Ok(rec)
        })
        .collect::<Result<_>>()?;
    records.sort_by(|a, b| a.c_wv.partial_cmp(&b.c_wv).unwrap().then(a.seed.cmp(&b.seed)));
    let mut summary = SweepSummary { trials, max_delta: f64::NEG_INFINITY, ..Default::default() };
    for r in &records {
        summary.max_delta = summary.max_delta.max(r.delta);
        if r.improvement {
            summary.improvements += 1;
        } else if r.loss {
            summary.losses += 1;
        } else {
            summary.neutral += 1;
        }
        if r.c_wv > 1e-6 && r.bound_profile.iter().any(|&b| b > r.c_wv + 1e-8) {
            summary.conjecture_violations += 1;
        }
    }
    Ok((records, summary))
}

fn fmt_sig(v: f64) -> String {
    // 12 significant digits
    format!("{v:.11e}")
}

/// CSV schema: seed,L,C_WV,C_minus,C_plus,delta,bound0,...,boundn
pub fn records_to_csv(records: &[ExperimentRecord]) -> String {
    let depth = records.first().map_or(0, |r| r.bound_profile.len().saturating_sub(1));
    let mut out = String::from("seed,L,C_WV,C_minus,C_plus,delta");
    for k in 0..=depth {
        out.push_str(&format!(",bound{k}"));
    }
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            r.seed,
            r.l,
            fmt_sig(r.c_wv),
            fmt_sig(r.c_minus),
            fmt_sig(r.c_plus),
            fmt_sig(r.delta)
        ));
        for b in &r.bound_profile {
            out.push(',');
            out.push_str(&fmt_sig(*b));
        }
        out.push('\n');
    }
    out
}

pub fn records_from_csv(text: &str) -> Result<Vec<ExperimentRecord>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty CSV".into()))?;
    if !header.starts_with("seed,L,C_WV") {
        return Err(Error::Format(format!("unexpected CSV header: {header}")));
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 7 {
            return Err(Error::Format(format!("line {}: too few fields", lineno + 2)));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 2)))
        };
        let mut rec = ExperimentRecord {
            seed: fields[0]
                .parse()
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 2)))?,
            l: fields[1]
                .parse()
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 2)))?,
            c_wv: parse_f(fields[2])?,
            c_minus: parse_f(fields[3])?,
            c_plus: parse_f(fields[4])?,
            delta: parse_f(fields[5])?,
            bound_profile: fields[6..]
                .iter()
                .map(|s| parse_f(s))
                .collect::<Result<_>>()?,
            c_wv_zero: false,
            improvement: false,
            loss: false,
        };
        rec.classify();
        records.push(rec);
    }
    Ok(records)
}

/// A pair whose bound profile exceeds its capacity: publishable output,
/// not a test failure.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub seed: u64,
    pub c_wv: f64,
    pub bounds: Vec<f64>,
    pub pair: PairFile,
}

#[derive(Debug, Default)]
pub struct ConjectureReport {
    pub pairs_checked: usize,
    pub pairs_skipped: usize,
    pub counterexamples: Vec<Counterexample>,
}

/// Checks the conjectured inequality bound_profile[k] <= C(W, V) for pairs
/// with positive capacity, at depths up to `max_depth` (<= 3).
pub fn conjecture_check(
    l: usize,
    trials: usize,
    max_depth: usize,
    seed: u64,
    opts: &TransformOptions,
) -> Result<ConjectureReport> {
    if max_depth > 3 {
        return Err(Error::Validation(
            "conjecture check is only exercised for depths up to 3".into(),
        ));
    }
    let results: Vec<(bool, Option<Counterexample>)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let pair_seed = derive_seed(seed, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(pair_seed);
            let pair = random_symmetric_pair(l, &mut rng);
            let (c, _) = crate::capacity::capacity_of_pair(&pair)?;
            if c <= 1e-6 {
                return Ok((false, None));
            }
            let profile = bound_profile(&pair, max_depth, opts)?;
            let ce = if profile.per_depth_bounds.iter().any(|&b| b > c + 1e-8) {
                Some(Counterexample {
                    seed: pair_seed,
                    c_wv: c,
                    bounds: profile.per_depth_bounds,
                    pair: PairFile::from_pair(&pair),
                })
            } else {
                None
            };
            Ok((true, ce))
        })
        .collect::<Result<_>>()?;
    let mut report = ConjectureReport::default();
    for (checked, ce) in results {
        if checked {
            report.pairs_checked += 1;
            if let Some(c) = ce {
                report.counterexamples.push(c);
            }
        } else {
            report.pairs_skipped += 1;
        }
    }
    Ok(report)
}
