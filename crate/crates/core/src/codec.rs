//! Polar encoder and mismatched successive-cancellation decoder, with
//! Monte Carlo frame-error-rate estimation.
//!
//! Index conventions (natural order, no bit reversal): input index i in
//! 1..=N maps to the sign sequence given by the bits of i-1, most
//! significant first, 0 = minus and 1 = plus. The decoder works on
//! log-likelihood ratios ln(V(y|0)/V(y|1)) so blocklengths up to 2^10 and
//! beyond stay clear of underflow.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::capacity::mismatched_info;
use crate::channel::{Channel, SymmetricPair};
use crate::error::{Error, Result};
use crate::polar::{enumerate_depth, TransformOptions};

/// Code description: depth n (N = 2^n), information set, and the values of
/// the frozen positions.
#[derive(Debug, Clone)]
pub struct PolarCodeConfig {
    pub n: usize,
    /// info[i] is true when 0-based input index i carries data.
    pub info: Vec<bool>,
    /// Frozen bit values; entries at information positions are ignored.
    pub frozen_values: Vec<u8>,
}

impl PolarCodeConfig {
    pub fn block_len(&self) -> usize {
        1 << self.n
    }

    pub fn info_len(&self) -> usize {
        self.info.iter().filter(|&&b| b).count()
    }
}

/// Applies the recursive (u1 xor u2, u2) kernel in natural order. The map
/// is an involution: encoding twice returns the input.
pub fn polar_encode(u: &[u8]) -> Result<Vec<u8>> {
    if u.is_empty() || !u.len().is_power_of_two() {
        return Err(Error::Validation(format!(
            "blocklength {} is not a power of two",
            u.len()
        )));
    }
    let mut x = u.to_vec();
    encode_in_place(&mut x);
    Ok(x)
}

fn encode_in_place(x: &mut [u8]) {
    let n = x.len();
    if n == 1 {
        return;
    }
    let (a, b) = x.split_at_mut(n / 2);
    for j in 0..n / 2 {
        a[j] ^= b[j];
    }
    encode_in_place(a);
    encode_in_place(b);
}

/// Check-node update: LLR of the xor of two bits.
fn llr_minus(a: f64, b: f64) -> f64 {
    let s = a.signum() * b.signum();
    let m = a.abs().min(b.abs());
    if m.is_infinite() {
        return s * m;
    }
    let big = a.abs().max(b.abs());
    s * m + (-(big + m)).exp().ln_1p() - (-(big - m)).exp().ln_1p()
}

/// Variable-node update given the known first-use input bit.
fn llr_plus(a: f64, b: f64, u: u8) -> f64 {
    let t = if u == 0 { a } else { -a };
    let r = b + t;
    if r.is_nan() {
        0.0 // conflicting infinite evidence
    } else {
        r
    }
}

fn leaf_llrs(y: &[usize], v: &Channel) -> Result<Vec<f64>> {
    let l = v.num_outputs();
    y.iter()
        .map(|&sym| {
            if sym >= l {
                return Err(Error::Validation(format!(
                    "received symbol {sym} outside alphabet of size {l}"
                )));
            }
            let p0 = v.prob(0, sym);
            let p1 = v.prob(1, sym);
            Ok(match (p0 > 0.0, p1 > 0.0) {
                (true, true) => p0.ln() - p1.ln(),
                (false, true) => f64::NEG_INFINITY,
                (true, false) => f64::INFINITY,
                (false, false) => 0.0,
            })
        })
        .collect()
}

enum DecodeMode<'a> {
    Standard,
    /// Record each index's raw decision, then continue with the true bit.
    Genie { true_u: &'a [u8], correct: Vec<bool> },
}

struct ScDecoder<'a> {
    cfg: &'a PolarCodeConfig,
    u_hat: Vec<u8>,
    mode: DecodeMode<'a>,
}

impl<'a> ScDecoder<'a> {
    /// Decodes one block; returns the codeword bits of the (sub-)block so
    /// callers can form partial sums. Ties decide toward bit 0.
    fn run(&mut self, llr: &[f64]) -> Vec<u8> {
        if llr.len() == 1 {
            let i = self.u_hat.len();
            let decision = if llr[0] >= 0.0 { 0u8 } else { 1u8 };
            let bit = if self.cfg.info[i] {
                match &mut self.mode {
                    DecodeMode::Standard => decision,
                    DecodeMode::Genie { true_u, correct } => {
                        correct.push(decision == true_u[i]);
                        true_u[i]
                    }
                }
            } else {
                if let DecodeMode::Genie { correct, .. } = &mut self.mode {
                    correct.push(true);
                }
                self.cfg.frozen_values[i]
            };
            self.u_hat.push(bit);
            return vec![bit];
        }
        let half = llr.len() / 2;
        let lminus: Vec<f64> = (0..half).map(|j| llr_minus(llr[j], llr[j + half])).collect();
        let cw1 = self.run(&lminus);
        let lplus: Vec<f64> = (0..half)
            .map(|j| llr_plus(llr[j], llr[j + half], cw1[j]))
            .collect();
        let cw2 = self.run(&lplus);
        let mut cw = Vec::with_capacity(llr.len());
        for j in 0..half {
            cw.push(cw1[j] ^ cw2[j]);
        }
        cw.extend_from_slice(&cw2);
        cw
    }
}

/// Mismatched successive-cancellation decoding: the estimator follows the
/// ML rule of the synthetic channels of `metric_channel` (V), whatever the
/// true channel was.
pub fn sc_decode(y: &[usize], cfg: &PolarCodeConfig, metric_channel: &Channel) -> Result<Vec<u8>> {
    let n = cfg.block_len();
    if y.len() != n || cfg.info.len() != n || cfg.frozen_values.len() != n {
        return Err(Error::Validation(format!(
            "dimension mismatch: blocklength {n}, received {}, info {}, frozen {}",
            y.len(),
            cfg.info.len(),
            cfg.frozen_values.len()
        )));
    }
    let llrs = leaf_llrs(y, metric_channel)?;
    let mut dec = ScDecoder { cfg, u_hat: Vec::with_capacity(n), mode: DecodeMode::Standard };
    dec.run(&llrs);
    Ok(dec.u_hat)
}

/// Genie-aided pass: per-index correctness of the raw decisions when all
/// previous bits are supplied correctly.
pub fn sc_decode_genie(
    y: &[usize],
    cfg: &PolarCodeConfig,
    metric_channel: &Channel,
    true_u: &[u8],
) -> Result<Vec<bool>> {
    let llrs = leaf_llrs(y, metric_channel)?;
    let mut dec = ScDecoder {
        cfg,
        u_hat: Vec::with_capacity(cfg.block_len()),
        mode: DecodeMode::Genie { true_u, correct: Vec::with_capacity(cfg.block_len()) },
    };
    dec.run(&llrs);
    match dec.mode {
        DecodeMode::Genie { correct, .. } => Ok(correct),
        _ => unreachable!(),
    }
}

/// Construction settings for `select_info_set`.
#[derive(Debug, Clone)]
pub struct ConstructionOptions {
    /// Exact synthetic-channel ranking is used up to this depth.
    pub exact_depth: usize,
    /// Genie-aided Monte Carlo trials for deeper codes.
    pub mc_trials: usize,
    pub transform: TransformOptions,
}

impl Default for ConstructionOptions {
    fn default() -> Self {
        Self { exact_depth: 4, mc_trials: 20_000, transform: TransformOptions::default() }
    }
}

/// Ranks input indices by synthetic-channel quality and freezes the rest to
/// zero. Up to `exact_depth` the ranking is by exact I(W^s, V^s); beyond
/// that by genie-aided Monte Carlo error frequency.
pub fn select_info_set(
    pair: &SymmetricPair,
    n: usize,
    rate: f64,
    seed: u64,
    opts: &ConstructionOptions,
) -> Result<PolarCodeConfig> {
    let nn = 1usize << n;
    let k = (rate * nn as f64).ceil() as usize;
    if k > nn {
        return Err(Error::Validation(format!("rate {rate} needs {k} > {nn} indices")));
    }
    // Higher score = better channel; ties break toward the smaller index.
    let scores: Vec<f64> = if n <= opts.exact_depth {
        enumerate_depth(pair, n, &opts.transform)?
            .iter()
            .map(|(_, p)| mismatched_info(p))
            .collect()
    } else {
        let cfg_all = PolarCodeConfig { n, info: vec![true; nn], frozen_values: vec![0; nn] };
        let errors = genie_error_counts(pair, &cfg_all, opts.mc_trials, seed)?;
        errors.iter().map(|&e| -(e as f64)).collect()
    };
    let mut order: Vec<usize> = (0..nn).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    let mut info = vec![false; nn];
    for &i in order.iter().take(k) {
        info[i] = true;
    }
    Ok(PolarCodeConfig { n, info, frozen_values: vec![0; nn] })
}

/// Per-index genie-aided error counts over `trials` random transmissions.
pub fn genie_error_counts(
    pair: &SymmetricPair,
    cfg: &PolarCodeConfig,
    trials: usize,
    seed: u64,
) -> Result<Vec<u64>> {
    let nn = cfg.block_len();
    let counts = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let mut u = vec![0u8; nn];
            for (i, b) in u.iter_mut().enumerate() {
                *b = if cfg.info[i] { rng.gen_range(0..2) as u8 } else { cfg.frozen_values[i] };
            }
            let x = polar_encode(&u)?;
            let y = transmit(&x, &pair.w, &mut rng);
            let correct = sc_decode_genie(&y, cfg, &pair.v, &u)?;
            Ok(correct)
        })
        .try_fold(
            || vec![0u64; nn],
            |mut acc, correct: Result<Vec<bool>>| {
                for (a, c) in acc.iter_mut().zip(correct?) {
                    if !c {
                        *a += 1;
                    }
                }
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(
            || vec![0u64; nn],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;
    Ok(counts)
}

fn transmit(x: &[u8], w: &Channel, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let l = w.num_outputs();
    x.iter()
        .map(|&bit| {
            let r: f64 = rng.gen();
            let mut acc = 0.0;
            for y in 0..l {
                acc += w.prob(bit as usize, y);
                if r < acc {
                    return y;
                }
            }
            l - 1
        })
        .collect()
}

/// Stream-separated RNG: identical results regardless of how trials are
/// scheduled across threads.
fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Outcome of a Monte Carlo FER run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub trials: u64,
    pub block_errors: u64,
    pub fer: f64,
    /// Histogram over input indices of the first erroneous information bit.
    pub per_index_first_error: Vec<u64>,
}

/// Transmits random information bits through W and decodes with the
/// mismatched SC decoder for V, counting block errors. Reproducible for a
/// fixed seed independent of parallelism.
pub fn simulate_fer(
    pair: &SymmetricPair,
    cfg: &PolarCodeConfig,
    trials: u64,
    seed: u64,
) -> Result<SimulationResult> {
    if trials == 0 {
        return Err(Error::Validation("trials must be >= 1".into()));
    }
    let nn = cfg.block_len();
    let (block_errors, hist) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let mut u = vec![0u8; nn];
            for (i, b) in u.iter_mut().enumerate() {
                *b = if cfg.info[i] { rng.gen_range(0..2) as u8 } else { cfg.frozen_values[i] };
            }
            let x = polar_encode(&u)?;
            let y = transmit(&x, &pair.w, &mut rng);
            let u_hat = sc_decode(&y, cfg, &pair.v)?;
            let first_err = (0..nn).find(|&i| cfg.info[i] && u_hat[i] != u[i]);
            Ok(first_err)
        })
        .try_fold(
            || (0u64, vec![0u64; nn]),
            |(mut errs, mut hist), first_err: Result<Option<usize>>| {
                if let Some(i) = first_err? {
                    errs += 1;
                    hist[i] += 1;
                }
                Ok::<_, Error>((errs, hist))
            },
        )
        .try_reduce(
            || (0u64, vec![0u64; nn]),
            |(ea, mut ha), (eb, hb)| {
                for (x, y) in ha.iter_mut().zip(hb) {
                    *x += y;
                }
                Ok((ea + eb, ha))
            },
        )?;
    Ok(SimulationResult {
        trials,
        block_errors,
        fer: block_errors as f64 / trials as f64,
        per_index_first_error: hist,
    })
}
