//! Arikan's one-step channel transforms applied jointly to a symmetric
//! (W, V) pair, plus sign-sequence folding and depth enumeration.
//!
//! Both channels always traverse identical output relabelings and merges so
//! the V-derived decoding metric stays aligned with W. Output index layout
//! before merging is fixed: the minus channel output (y1, y2) sits at
//! y1*L + y2, the plus channel output (y1, y2, u1) at (y1*L + y2)*2 + u1.

use crate::channel::{merge_outputs, Channel, SymmetricPair, MERGE_TOL};
use crate::error::{Error, Result};

/// One polar transform choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Minus,
    Plus,
}

/// A word over {+, -} addressing a synthesized channel in the polarization
/// tree. '-' sorts before '+'.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SignSequence(pub Vec<Sign>);

impl SignSequence {
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '-' => Ok(Sign::Minus),
                '+' => Ok(Sign::Plus),
                _ => Err(Error::Validation(format!(
                    "invalid character {c:?} in sign sequence, expected '+' or '-'"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The sequence for 0-based channel index `i` at depth `n`: bit j of i,
    /// most significant first, maps 0 to minus and 1 to plus.
    pub fn from_index(i: usize, n: usize) -> Self {
        Self(
            (0..n)
                .rev()
                .map(|b| if (i >> b) & 1 == 0 { Sign::Minus } else { Sign::Plus })
                .collect(),
        )
    }
}

impl std::fmt::Display for SignSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for s in &self.0 {
            write!(f, "{}", if *s == Sign::Minus { '-' } else { '+' })?;
        }
        Ok(())
    }
}

/// Caps and optional quantization for repeated transforms.
#[derive(Debug, Clone)]
pub struct TransformOptions {
    /// Maximum merged alphabet size allowed after each step.
    pub alphabet_cap: usize,
    /// Optional uniform binning of the decision statistic, for deep
    /// sequences where exact merging is not enough. Off by default; it is
    /// an approximation.
    pub quant_bins: Option<usize>,
}

impl Default for TransformOptions {
    fn default() -> Self {
        Self { alphabet_cap: 4096, quant_bins: None }
    }
}

/// Synthesizes (W-, V-) over output pairs (y1, y2), merged and canonical.
pub fn minus_transform(pair: &SymmetricPair) -> Result<SymmetricPair> {
    let l = pair.num_outputs();
    let build = |ch: &Channel| {
        let mut r0 = Vec::with_capacity(l * l);
        let mut r1 = Vec::with_capacity(l * l);
        for y1 in 0..l {
            for y2 in 0..l {
                // u1 = 0: inputs (u2, u2); u1 = 1: inputs (1+u2, u2)
                r0.push(0.5 * (ch.prob(0, y1) * ch.prob(0, y2) + ch.prob(1, y1) * ch.prob(1, y2)));
                r1.push(0.5 * (ch.prob(1, y1) * ch.prob(0, y2) + ch.prob(0, y1) * ch.prob(1, y2)));
            }
        }
        Channel::new_unchecked(r0, r1)
    };
    let pi = (0..l * l)
        .map(|idx| pair.pi[idx / l] * l + idx % l)
        .collect();
    let raw = SymmetricPair {
        w: build(&pair.w),
        v: build(&pair.v),
        pi,
    };
    merge_outputs(&raw)
}

/// Synthesizes (W+, V+) over outputs (y1, y2, u1), merged and canonical.
pub fn plus_transform(pair: &SymmetricPair) -> Result<SymmetricPair> {
    let l = pair.num_outputs();
    let build = |ch: &Channel| {
        let mut r0 = Vec::with_capacity(l * l * 2);
        let mut r1 = Vec::with_capacity(l * l * 2);
        for y1 in 0..l {
            for y2 in 0..l {
                for u1 in 0..2 {
                    r0.push(0.5 * ch.prob(u1, y1) * ch.prob(0, y2));
                    r1.push(0.5 * ch.prob(u1 ^ 1, y1) * ch.prob(1, y2));
                }
            }
        }
        Channel::new_unchecked(r0, r1)
    };
    let pi = (0..l * l * 2)
        .map(|idx| {
            let u1 = idx & 1;
            let y2 = (idx >> 1) % l;
            let y1 = (idx >> 1) / l;
            (pair.pi[y1] * l + pair.pi[y2]) * 2 + u1
        })
        .collect();
    let raw = SymmetricPair {
        w: build(&pair.w),
        v: build(&pair.v),
        pi,
    };
    merge_outputs(&raw)
}

fn apply_sign(pair: &SymmetricPair, sign: Sign) -> Result<SymmetricPair> {
    match sign {
        Sign::Minus => minus_transform(pair),
        Sign::Plus => plus_transform(pair),
    }
}

/// Folds the transforms of `seq` left to right, merging after every step
/// and enforcing the alphabet cap.
pub fn transform_by_sequence(
    pair: &SymmetricPair,
    seq: &SignSequence,
    opts: &TransformOptions,
) -> Result<SymmetricPair> {
    let mut cur = merge_outputs(pair)?;
    for (step, &sign) in seq.0.iter().enumerate() {
        cur = apply_sign(&cur, sign)?;
        if let Some(bins) = opts.quant_bins {
            cur = quantize_decision_statistic(&cur, bins)?;
        }
        let size = cur.num_outputs();
        if size > opts.alphabet_cap {
            return Err(Error::AlphabetCap { step: step + 1, size, cap: opts.alphabet_cap });
        }
    }
    Ok(cur)
}

/// All 2^n synthesized pairs at depth `n`, in lexicographic sequence order
/// (minus before plus).
pub fn enumerate_depth(
    pair: &SymmetricPair,
    n: usize,
    opts: &TransformOptions,
) -> Result<Vec<(SignSequence, SymmetricPair)>> {
    let root = merge_outputs(pair)?;
    let mut out = Vec::with_capacity(1 << n);
    expand(&root, n, &mut Vec::new(), opts, &mut out)?;
    Ok(out)
}

fn expand(
    pair: &SymmetricPair,
    remaining: usize,
    prefix: &mut Vec<Sign>,
    opts: &TransformOptions,
    out: &mut Vec<(SignSequence, SymmetricPair)>,
) -> Result<()> {
    if remaining == 0 {
        out.push((SignSequence(prefix.clone()), pair.clone()));
        return Ok(());
    }
    for sign in [Sign::Minus, Sign::Plus] {
        let mut child = apply_sign(pair, sign)?;
        if let Some(bins) = opts.quant_bins {
            child = quantize_decision_statistic(&child, bins)?;
        }
        let size = child.num_outputs();
        if size > opts.alphabet_cap {
            return Err(Error::AlphabetCap {
                step: prefix.len() + 1,
                size,
                cap: opts.alphabet_cap,
            });
        }
        prefix.push(sign);
        expand(&child, remaining - 1, prefix, opts, out)?;
        prefix.pop();
    }
    Ok(())
}

/// Bins the finite decision statistic uniformly by magnitude into `bins`
/// bins per sign and merges within each bin. Infinite and undefined
/// classes are kept apart. Approximate; behind an explicit flag.
pub fn quantize_decision_statistic(pair: &SymmetricPair, bins: usize) -> Result<SymmetricPair> {
    if bins == 0 {
        return Err(Error::Validation("quantization bins must be positive".into()));
    }
    let pair = merge_outputs(pair)?;
    let l = pair.num_outputs();
    let stat = |y: usize| -> f64 {
        let v0 = pair.v.prob(0, y);
        let v1 = pair.v.prob(1, y);
        match (v0 > 0.0, v1 > 0.0) {
            (true, true) => v1.log2() - v0.log2(),
            (false, true) => f64::INFINITY,
            (true, false) => f64::NEG_INFINITY,
            (false, false) => f64::NAN,
        }
    };
    let max_mag = (0..l)
        .map(stat)
        .filter(|d| d.is_finite())
        .fold(0.0_f64, |m, d| m.max(d.abs()));
    if max_mag == 0.0 {
        return Ok(pair);
    }
    // Bin indices are symmetric in sign, so the quotient permutation stays
    // an involution.
    let key = |y: usize| -> i64 {
        let d = stat(y);
        if d.is_nan() {
            i64::MAX
        } else if d == f64::INFINITY {
            i64::MAX - 1
        } else if d == f64::NEG_INFINITY {
            -(i64::MAX - 1)
        } else if d.abs() <= MERGE_TOL {
            0
        } else {
            let b = ((d.abs() / max_mag) * bins as f64).ceil().min(bins as f64) as i64;
            if d > 0.0 {
                b
            } else {
                -b
            }
        }
    };
    let mut keys: Vec<i64> = (0..l).map(key).collect();
    // Enforce exact antisymmetry across pi.
    for y in 0..l {
        let z = pair.pi[y];
        if y < z {
            keys[z] = if keys[y] == i64::MAX { i64::MAX } else { -keys[y] };
        }
    }
    let mut uniq: Vec<i64> = keys.clone();
    uniq.sort_unstable();
    uniq.dedup();
    uniq.reverse(); // descending statistic, positives first
    let class_of = |y: usize| uniq.iter().position(|&k| k == keys[y]).unwrap();
    let l_new = uniq.len();
    let mut w0 = vec![0.0; l_new];
    let mut w1 = vec![0.0; l_new];
    let mut v0 = vec![0.0; l_new];
    let mut v1 = vec![0.0; l_new];
    for y in 0..l {
        let c = class_of(y);
        w0[c] += pair.w.prob(0, y);
        w1[c] += pair.w.prob(1, y);
        v0[c] += pair.v.prob(0, y);
        v1[c] += pair.v.prob(1, y);
    }
    let pi: Vec<usize> = uniq
        .iter()
        .map(|&k| {
            let mk = if k == i64::MAX { k } else { -k };
            uniq.iter().position(|&q| q == mk).unwrap()
        })
        .collect();
    merge_outputs(&SymmetricPair {
        w: Channel::new_unchecked(w0, w1),
        v: Channel::new_unchecked(v0, v1),
        pi,
    })
}
