//! Information measures for symmetric B-DMC pairs: entropies, the
//! mismatched mutual-information functional I(W, V), Balakirsky's closed
//! form for the mismatched capacity of symmetric binary-input channels, a
//! desk-scale constrained-minimization oracle for cross-checking it, and
//! the bound hierarchy over the polarization tree.
//!
//! All logarithms are base 2; capacities are in bits.

use crate::channel::{
    metric_from_channel, Channel, DecodingMetric, InputDistribution, SymmetricPair,
};
use crate::error::{Error, Result};
use crate::polar::{enumerate_depth, minus_transform, plus_transform, TransformOptions};

fn xlog2(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// H(PW): entropy of the output distribution.
pub fn output_entropy(p: InputDistribution, w: &Channel) -> f64 {
    (0..w.num_outputs())
        .map(|y| -xlog2(p.p0() * w.prob(0, y) + p.p1() * w.prob(1, y)))
        .sum()
}

/// H(W|P): conditional output entropy given the input.
pub fn conditional_entropy(p: InputDistribution, w: &Channel) -> f64 {
    let mut h = 0.0;
    for x in 0..2 {
        for y in 0..w.num_outputs() {
            h -= p.prob(x) * xlog2(w.prob(x, y));
        }
    }
    h
}

/// I(P, W) = H(PW) - H(W|P).
pub fn mutual_information(p: InputDistribution, w: &Channel) -> f64 {
    output_entropy(p, w) - conditional_entropy(p, w)
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    -xlog2(p) - xlog2(1.0 - p)
}

/// The conserved mismatched functional
/// I(W, V) = sum_y sum_x (1/2) W(y|x) log2( V(y|x) / ((V(y|0)+V(y|1))/2) ).
/// Returns -infinity iff some term has W(y|x) > 0 with V(y|x) = 0.
pub fn mismatched_info(pair: &SymmetricPair) -> f64 {
    let mut total = 0.0;
    for y in 0..pair.num_outputs() {
        let vbar = 0.5 * (pair.v.prob(0, y) + pair.v.prob(1, y));
        for x in 0..2 {
            let w = pair.w.prob(x, y);
            if w == 0.0 {
                continue;
            }
            let v = pair.v.prob(x, y);
            if v == 0.0 {
                return f64::NEG_INFINITY;
            }
            total += 0.5 * w * (v / vbar).log2();
        }
    }
    total
}

/// Positive part.
pub fn positive_part(x: f64) -> f64 {
    x.max(0.0)
}

/// Balakirsky's minimizer: the source channel's paired masses reweighted by
/// the exponential tilt e^{-alpha d}.
#[derive(Debug, Clone)]
pub struct TiltedChannel {
    pub wprime: Channel,
    pub alpha: f64,
}

const ALPHA_MAX: f64 = (1u64 << 40) as f64;

/// Closed-form mismatched capacity of a canonical symmetric pair under a
/// symmetric additive metric, at uniform input. Returns the capacity in
/// bits together with the minimizing tilted channel.
pub fn balakirsky_capacity(
    pair: &SymmetricPair,
    metric: &DecodingMetric,
) -> Result<(f64, TiltedChannel)> {
    let l = pair.num_outputs();
    if !pair.is_canonical() {
        return Err(Error::Validation(
            "balakirsky_capacity requires a canonical (reversal-form) pair".into(),
        ));
    }
    if metric.num_outputs() != l || !metric.is_symmetric(&pair.pi) {
        return Err(Error::Validation(
            "metric must be symmetric under the pair's permutation".into(),
        ));
    }
    let w = pair.w.row(0);
    let d = metric.row(0);

    // Paired outputs (y, pi(y)) with y <= pi(y). Pairs where both metric
    // entries are infinite are excluded from the alpha condition and their
    // mass split evenly; pairs with exactly one infinite entry put all mass
    // on the finite side.
    struct TiltPair {
        y: usize,
        z: usize,
        mass: f64,
        dy: f64,
        dz: f64,
    }
    let mut tilt_pairs = Vec::new();
    let mut fixed_part = vec![f64::NAN; l]; // entries decided independent of alpha
    let mut g_const = 0.0;
    let mut target = 0.0;
    for y in 0..l {
        let z = pair.pi[y];
        if z < y {
            continue;
        }
        let mass = if z == y { w[y] } else { w[y] + w[z] };
        let (dy, dz) = (d[y], d[z]);
        if dy.is_finite() {
            target += w[y] * dy;
        }
        if z != y && dz.is_finite() {
            target += w[z] * dz;
        }
        match (dy.is_finite(), dz.is_finite()) {
            (true, true) if z != y => {
                tilt_pairs.push(TiltPair { y, z, mass, dy, dz });
            }
            (true, true) => {
                // fixed point: the tilt cancels
                fixed_part[y] = w[y];
                g_const += w[y] * dy;
            }
            (true, false) => {
                fixed_part[y] = mass;
                fixed_part[z] = 0.0;
                g_const += mass * dy;
            }
            (false, true) => {
                fixed_part[y] = 0.0;
                fixed_part[z] = mass;
                g_const += mass * dz;
            }
            (false, false) => {
                if z == y {
                    fixed_part[y] = w[y];
                } else {
                    fixed_part[y] = mass / 2.0;
                    fixed_part[z] = mass / 2.0;
                }
            }
        }
    }

    // g(alpha) = sum over the finite-metric support of w'_y(alpha) d_y,
    // monotone non-increasing in alpha.
    let split = |tp: &TiltPair, alpha: f64| -> (f64, f64) {
        let sigma = 1.0 / (1.0 + (-(alpha * (tp.dz - tp.dy))).exp());
        (tp.mass * sigma, tp.mass * (1.0 - sigma))
    };
    let g = |alpha: f64| -> f64 {
        g_const
            + tilt_pairs
                .iter()
                .map(|tp| {
                    let (wy, wz) = split(tp, alpha);
                    wy * tp.dy + wz * tp.dz
                })
                .sum::<f64>()
    };
    let g_deriv = |alpha: f64| -> f64 {
        -tilt_pairs
            .iter()
            .map(|tp| {
                let delta = tp.dz - tp.dy;
                let sigma = 1.0 / (1.0 + (-(alpha * delta)).exp());
                tp.mass * delta * delta * sigma * (1.0 - sigma)
            })
            .sum::<f64>()
    };

    let scale = 1.0 + target.abs();
    let alpha = if g(0.0) <= target + 1e-15 * scale {
        // Constraint already slack with an even split: the minimizer sits at
        // alpha = 0.
        0.0
    } else {
        let mut hi = 1.0;
        let mut iters = 0;
        while g(hi) > target {
            hi *= 2.0;
            iters += 1;
            if hi > ALPHA_MAX {
                return Err(Error::NonConvergence(format!(
                    "no alpha <= 2^40 satisfies the tilt condition (residual {:.3e})",
                    g(ALPHA_MAX) - target
                )));
            }
            if iters > 64 {
                return Err(Error::NonConvergence("alpha bracketing failed".into()));
            }
        }
        let mut lo = hi / 2.0;
        if hi == 1.0 {
            lo = 0.0;
        }
        while hi - lo > 1e-13 * (1.0 + hi) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break; // interval below one ulp
            }
            if g(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Newton polish for a machine-precision residual.
        let mut a = 0.5 * (lo + hi);
        for _ in 0..4 {
            let gp = g_deriv(a);
            if gp.abs() < 1e-300 {
                break;
            }
            let step = (g(a) - target) / gp;
            let next = a - step;
            if next.is_finite() && next >= 0.0 {
                a = next;
            } else {
                break;
            }
        }
        a
    };

    let mut wprime0 = fixed_part;
    for tp in &tilt_pairs {
        let (wy, wz) = split(tp, alpha);
        wprime0[tp.y] = wy;
        wprime0[tp.z] = wz;
    }
    let wprime1: Vec<f64> = (0..l).map(|y| wprime0[pair.pi[y]]).collect();

    // C = H(PW) - H(W'|P) at uniform input; row 1 of W' is a permutation of
    // row 0, so H(W'|P) collapses to the row-0 entropy.
    let h_out: f64 = (0..l)
        .map(|y| -xlog2(0.5 * (w[y] + w[pair.pi[y]])))
        .sum();
    let h_cond: f64 = wprime0.iter().map(|&p| -xlog2(p)).sum();
    let raw = h_out - h_cond;
    let c = raw.clamp(0.0, 1.0);
    if (c - raw).abs() > 1e-9 {
        log::warn!("capacity clamped from {raw} to {c}");
    }
    Ok((
        c,
        TiltedChannel {
            wprime: Channel::new_unchecked(wprime0, wprime1),
            alpha,
        },
    ))
}

/// Binary-output fast path: full capacity when the metric is in harmony
/// with the channel, zero otherwise.
pub fn binary_harmony_capacity(pair: &SymmetricPair, metric: &DecodingMetric) -> Result<f64> {
    if pair.num_outputs() != 2 {
        return Err(Error::Validation("harmony rule applies to binary outputs only".into()));
    }
    let chan_bias = pair.w.prob(0, 0) + pair.w.prob(1, 1) - 1.0;
    // Positive when the metric favors the diagonal, matching a positive
    // channel bias.
    let metric_bias =
        metric.value(0, 1) + metric.value(1, 0) - metric.value(0, 0) - metric.value(1, 1);
    if metric_bias.is_nan() {
        return Ok(0.0);
    }
    let harmony = chan_bias * metric_bias > 0.0;
    if harmony {
        Ok(mutual_information(InputDistribution::uniform(), &pair.w))
    } else {
        Ok(0.0)
    }
}

const ORACLE_MAX_OUTPUTS: usize = 6;

/// Settings for the numerical minimization oracle.
#[derive(Debug, Clone)]
pub struct OracleOptions {
    pub grid_points: usize,
    pub descent_iters: usize,
    pub random_starts: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { grid_points: 400_000, descent_iters: 3000, random_starts: 4 }
    }
}

impl OracleOptions {
    /// Cheaper settings for inner loops such as the input-distribution sweep.
    pub fn fast() -> Self {
        Self { grid_points: 20_000, descent_iters: 800, random_starts: 2 }
    }
}

/// Direct numerical evaluation of the constrained minimum
/// min { I(P, W') : PW' = PW, d(P, W') <= d(P, W) } over 2xL row-stochastic
/// W'. Desk-scale oracle, independent of the closed form.
pub fn id_oracle(
    p: InputDistribution,
    w: &Channel,
    metric: &DecodingMetric,
) -> Result<(f64, Channel)> {
    id_oracle_with(p, w, metric, &OracleOptions::default())
}

pub fn id_oracle_with(
    p: InputDistribution,
    w: &Channel,
    metric: &DecodingMetric,
    opts: &OracleOptions,
) -> Result<(f64, Channel)> {
    let l = w.num_outputs();
    if l > ORACLE_MAX_OUTPUTS {
        return Err(Error::Validation(format!(
            "oracle limited to {ORACLE_MAX_OUTPUTS} outputs, got {l}"
        )));
    }
    let (p0, p1) = (p.p0(), p.p1());
    let marginal: Vec<f64> = (0..l)
        .map(|y| p0 * w.prob(0, y) + p1 * w.prob(1, y))
        .collect();
    let flat = Channel::new_unchecked(marginal.clone(), marginal.clone());
    if p0 < 1e-12 || p1 < 1e-12 {
        return Ok((0.0, flat));
    }

    // d(P, W) over the support of P x W; an infinite value makes the
    // constraint vacuous and the flat channel optimal.
    let mut target = 0.0;
    for x in 0..2 {
        for y in 0..l {
            let mass = p.prob(x) * w.prob(x, y);
            if mass > 0.0 {
                let dv = metric.value(x, y);
                if dv.is_infinite() {
                    return Ok((0.0, flat));
                }
                target += mass * dv;
            }
        }
    }
    let metric_cost = |a: &[f64]| -> f64 {
        let mut c = 0.0;
        for y in 0..l {
            let b = (marginal[y] - p0 * a[y]) / p1;
            for (mass, dv) in [(p0 * a[y], metric.value(0, y)), (p1 * b, metric.value(1, y))] {
                if mass > 1e-300 {
                    if dv.is_infinite() {
                        return f64::INFINITY;
                    }
                    c += mass * dv;
                }
            }
        }
        c
    };
    let ctol = 1e-11 * (1.0 + target.abs());
    if metric_cost(&marginal) <= target + ctol {
        return Ok((0.0, flat));
    }

    // Free coordinates: a_y = W'(y|0); the second row follows from the
    // marginal constraint. Box bounds keep both rows in [0, 1].
    let lo: Vec<f64> = (0..l).map(|y| ((marginal[y] - p1) / p0).max(0.0)).collect();
    let hi: Vec<f64> = (0..l).map(|y| (marginal[y] / p0).min(1.0)).collect();
    let objective = |a: &[f64]| -> f64 {
        let mut f = 0.0;
        for y in 0..l {
            let b = ((marginal[y] - p0 * a[y]) / p1).max(0.0);
            if marginal[y] > 0.0 {
                f += p0 * a[y] * safe_log2_ratio(a[y], marginal[y])
                    + p1 * b * safe_log2_ratio(b, marginal[y]);
            }
        }
        f
    };
    let gradient = |a: &[f64], out: &mut [f64]| {
        for y in 0..l {
            let b = ((marginal[y] - p0 * a[y]) / p1).max(1e-300);
            let av = a[y].max(1e-300);
            out[y] = (p0 * (av / b).log2()).clamp(-1e6, 1e6);
        }
    };

    // Coarse feasibility-filtered grid over the first L-1 coordinates.
    let mut best_f = f64::INFINITY;
    let mut best_a: Vec<f64> = w.row(0).to_vec();
    let per_dim = ((opts.grid_points as f64).powf(1.0 / (l as f64 - 1.0)).ceil() as usize).max(2);
    let mut idx = vec![0usize; l - 1];
    'grid: loop {
        let mut a = vec![0.0; l];
        let mut sum = 0.0;
        let mut ok = true;
        for y in 0..l - 1 {
            a[y] = lo[y] + (hi[y] - lo[y]) * idx[y] as f64 / (per_dim as f64 - 1.0);
            sum += a[y];
        }
        let last = 1.0 - sum;
        if last < lo[l - 1] - 1e-12 || last > hi[l - 1] + 1e-12 {
            ok = false;
        }
        if ok {
            a[l - 1] = last.clamp(lo[l - 1], hi[l - 1]);
            if metric_cost(&a) <= target + ctol {
                let f = objective(&a);
                if f < best_f {
                    best_f = f;
                    best_a = a;
                }
            }
        }
        for y in 0..l - 1 {
            idx[y] += 1;
            if idx[y] < per_dim {
                continue 'grid;
            }
            idx[y] = 0;
        }
        break;
    }

    // Constrained descent on the binding face d(P, W') = d(P, W).
    let coeff: Vec<f64> = (0..l)
        .map(|y| p0 * (metric.value(0, y) - metric.value(1, y)))
        .collect();
    let face_ok = coeff.iter().all(|c| c.is_finite());
    if face_ok {
        let t2 = target
            - (0..l)
                .map(|y| marginal[y] * metric.value(1, y))
                .sum::<f64>();
        let mut starts: Vec<Vec<f64>> = vec![w.row(0).to_vec(), marginal.clone(), best_a.clone()];
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        for _ in 0..opts.random_starts {
            let mut a = vec![0.0; l];
            let mut s = 0.0;
            for v in a.iter_mut() {
                rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
                *v = ((rng_state >> 11) as f64 / (1u64 << 53) as f64).max(1e-6);
                s += *v;
            }
            for v in a.iter_mut() {
                *v /= s;
            }
            starts.push(a);
        }
        let mut grad = vec![0.0; l];
        for start in starts {
            let mut a = project_face(&start, &lo, &hi, &coeff, t2);
            let mut f = objective(&a);
            let mut eta = 0.05;
            for _ in 0..opts.descent_iters {
                gradient(&a, &mut grad);
                let mut accepted = false;
                for _ in 0..30 {
                    let trial: Vec<f64> =
                        a.iter().zip(&grad).map(|(&x, &g)| x - eta * g).collect();
                    let proj = project_face(&trial, &lo, &hi, &coeff, t2);
                    let pf = objective(&proj);
                    if pf < f {
                        a = proj;
                        f = pf;
                        eta *= 1.25;
                        accepted = true;
                        break;
                    }
                    eta *= 0.5;
                }
                if !accepted {
                    break;
                }
            }
            // Reject descent results that drifted off the feasible set.
            if metric_cost(&a) <= target + 1e-7 * (1.0 + target.abs()) && f < best_f {
                best_f = f;
                best_a = a;
            }
        }
    }

    let b_row: Vec<f64> = (0..l)
        .map(|y| ((marginal[y] - p0 * best_a[y]) / p1).clamp(0.0, 1.0))
        .collect();
    Ok((best_f.max(0.0), Channel::new_unchecked(best_a, b_row)))
}

fn safe_log2_ratio(num: f64, den: f64) -> f64 {
    if num <= 0.0 {
        0.0
    } else {
        (num / den).log2()
    }
}

/// Dykstra projection onto {sum a = 1, coeff . a = t2} intersected with the
/// box [lo, hi].
fn project_face(a: &[f64], lo: &[f64], hi: &[f64], coeff: &[f64], t2: f64) -> Vec<f64> {
    let l = a.len();
    let n = l as f64;
    let csum: f64 = coeff.iter().sum();
    let c2: f64 = coeff.iter().map(|c| c * c).sum();
    let det = n * c2 - csum * csum;
    let affine = |x: &mut [f64]| {
        let r1: f64 = x.iter().sum::<f64>() - 1.0;
        let r2: f64 = x.iter().zip(coeff).map(|(a, c)| a * c).sum::<f64>() - t2;
        let (l1, l2) = if det.abs() > 1e-300 {
            ((r1 * c2 - r2 * csum) / det, (n * r2 - csum * r1) / det)
        } else {
            // coeff is a multiple of the all-ones vector; a single
            // constraint remains.
            (r1 / n, 0.0)
        };
        for (xi, c) in x.iter_mut().zip(coeff) {
            *xi -= l1 + l2 * c;
        }
    };
    let mut x = a.to_vec();
    let mut p_corr = vec![0.0; l];
    let mut q_corr = vec![0.0; l];
    for _ in 0..300 {
        let mut y: Vec<f64> = x.iter().zip(&p_corr).map(|(a, p)| a + p).collect();
        affine(&mut y);
        for i in 0..l {
            p_corr[i] = x[i] + p_corr[i] - y[i];
        }
        let mut z: Vec<f64> = y.iter().zip(&q_corr).map(|(a, q)| a + q).collect();
        for i in 0..l {
            z[i] = z[i].clamp(lo[i], hi[i]);
        }
        for i in 0..l {
            q_corr[i] = y[i] + q_corr[i] - z[i];
        }
        let moved: f64 = x.iter().zip(&z).map(|(a, b)| (a - b).abs()).sum();
        x = z;
        if moved < 1e-15 {
            break;
        }
    }
    x
}

/// C_d(W) = max_P I_d(P, W): dense grid over P(0) plus golden-section
/// refinement. Oracle-grade; meant for tests, not sweeps.
pub fn general_d_capacity(w: &Channel, metric: &DecodingMetric) -> Result<f64> {
    let fast = OracleOptions::fast();
    let eval = |p0: f64, opts: &OracleOptions| -> Result<f64> {
        let p = InputDistribution::new(p0)?;
        Ok(id_oracle_with(p, w, metric, opts)?.0)
    };
    let mut best = (0.0_f64, 0.5_f64);
    let mut p0 = 0.0_f64;
    while p0 <= 1.0 + 1e-12 {
        let v = eval(p0.min(1.0), &fast)?;
        if v > best.0 {
            best = (v, p0.min(1.0));
        }
        p0 += 1e-3;
    }
    // Golden-section refinement around the best grid point.
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut a = (best.1 - 2e-3).max(0.0);
    let mut b = (best.1 + 2e-3).min(1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = eval(x1, &fast)?;
    let mut f2 = eval(x2, &fast)?;
    for _ in 0..40 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = eval(x2, &fast)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = eval(x1, &fast)?;
        }
    }
    let refined = eval(0.5 * (a + b), &OracleOptions::default())?;
    Ok(best.0.max(f1).max(f2).max(refined))
}

/// The per-depth lower bounds 2^{-k} sum_s I(W^s, V^s)^*, k = 0..=depth.
#[derive(Debug, Clone)]
pub struct BoundProfile {
    pub depth: usize,
    pub per_depth_bounds: Vec<f64>,
}

pub fn bound_profile(
    pair: &SymmetricPair,
    n: usize,
    opts: &TransformOptions,
) -> Result<BoundProfile> {
    let mut per_depth_bounds = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let level = enumerate_depth(pair, k, opts)?;
        let sum: f64 = level
            .iter()
            .map(|(_, p)| positive_part(mismatched_info(p)))
            .sum();
        per_depth_bounds.push(sum / (1u64 << k) as f64);
    }
    Ok(BoundProfile { depth: n, per_depth_bounds })
}

/// One-step capacity change under the polar transforms,
/// Delta = C(W+, V+) + C(W-, V-) - 2 C(W, V), with the ML-for-V metric at
/// each node.
#[derive(Debug, Clone)]
pub struct DeltaBreakdown {
    pub c: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    pub delta: f64,
}

pub fn capacity_of_pair(pair: &SymmetricPair) -> Result<(f64, TiltedChannel)> {
    let (canon, _) = crate::channel::canonicalize(pair)?;
    balakirsky_capacity(&canon, &metric_from_channel(&canon.v))
}

pub fn delta(pair: &SymmetricPair) -> Result<DeltaBreakdown> {
    let (c, _) = capacity_of_pair(pair)?;
    let minus = minus_transform(pair)?;
    let plus = plus_transform(pair)?;
    let (c_minus, _) = capacity_of_pair(&minus)?;
    let (c_plus, _) = capacity_of_pair(&plus)?;
    Ok(DeltaBreakdown {
        c,
        c_minus,
        c_plus,
        delta: c_plus + c_minus - 2.0 * c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{canonicalize, merge_outputs, metric_from_channel};
    use crate::experiments::random_symmetric_pair;
    use crate::polar::{minus_transform, plus_transform, TransformOptions};
    use crate::{Channel, SymmetricPair};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seeded_pair(l: usize, seed: u64) -> SymmetricPair {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_symmetric_pair(l, &mut rng)
    }

    fn ternary_pair() -> SymmetricPair {
        let w = Channel::new(vec![0.6, 0.3, 0.1], vec![0.1, 0.3, 0.6]).unwrap();
        let v = Channel::new(vec![0.5, 0.3, 0.2], vec![0.2, 0.3, 0.5]).unwrap();
        SymmetricPair::new(w, v, vec![2, 1, 0]).unwrap()
    }

    #[test]
    fn output_entropy_examples() {
        let p = InputDistribution::uniform();
        assert_abs_diff_eq!(output_entropy(p, &Channel::bsc(0.11)), 1.0, epsilon = 1e-15);
        let noiseless = Channel::new(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        let p_all0 = InputDistribution::new(1.0).unwrap();
        assert_eq!(output_entropy(p_all0, &noiseless), 0.0);
        let w = Channel::new(vec![0.6, 0.3, 0.1], vec![0.1, 0.3, 0.6]).unwrap();
        let expect = -(0.35f64 * 0.35f64.log2() + 0.3 * 0.3f64.log2() + 0.35 * 0.35f64.log2());
        assert_abs_diff_eq!(output_entropy(p, &w), expect, epsilon = 1e-15);
    }

    #[test]
    fn conditional_entropy_and_mi_examples() {
        let p = InputDistribution::uniform();
        assert_abs_diff_eq!(
            conditional_entropy(p, &Channel::bsc(0.11)),
            binary_entropy(0.11),
            epsilon = 1e-15
        );
        let noiseless = Channel::new(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(conditional_entropy(p, &noiseless), 0.0);
        assert_abs_diff_eq!(
            mutual_information(p, &Channel::bsc(0.11)),
            1.0 - binary_entropy(0.11),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(1.0 - binary_entropy(0.11), 0.50008, epsilon = 5e-6);
    }

    #[test]
    fn mismatched_info_examples() {
        let matched = SymmetricPair::bsc_pair(0.11, 0.11);
        assert_abs_diff_eq!(
            mismatched_info(&matched),
            1.0 - binary_entropy(0.11),
            epsilon = 1e-15
        );
        let pair = SymmetricPair::bsc_pair(0.11, 0.89);
        let expect = 1.0 + 0.89 * 0.11f64.log2() + 0.11 * 0.89f64.log2();
        assert_abs_diff_eq!(mismatched_info(&pair), expect, epsilon = 1e-12);
        assert!(expect < -1.85 && expect > -1.86);
        let w = Channel::bsc(0.11);
        let v = Channel::new(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        let zeroed = SymmetricPair::new(w, v, vec![1, 0]).unwrap();
        assert_eq!(mismatched_info(&zeroed), f64::NEG_INFINITY);
    }

    #[test]
    fn balakirsky_bsc_mismatch_is_zero() {
        let pair = SymmetricPair::bsc_pair(0.11, 0.89);
        let metric = metric_from_channel(&pair.v);
        let (c, tilted) = balakirsky_capacity(&pair, &metric).unwrap();
        assert_eq!(c, 0.0);
        assert_eq!(tilted.alpha, 0.0);
        // pre-clamp residual: slack case yields H(PW) = H(W'|P) exactly
        let h_out = output_entropy(InputDistribution::uniform(), &pair.w);
        let h_cond: f64 = tilted.wprime.row(0).iter().map(|&p| -xlog2(p)).sum();
        assert!((h_out - h_cond).abs() < 1e-9);
    }

    #[test]
    fn balakirsky_matched_metric_attains_capacity() {
        let pair = SymmetricPair::bsc_pair(0.11, 0.11);
        let metric = metric_from_channel(&pair.w);
        let (c, tilted) = balakirsky_capacity(&pair, &metric).unwrap();
        assert_abs_diff_eq!(c, 1.0 - binary_entropy(0.11), epsilon = 1e-9);
        // with d = -log2 V the matched tilt is alpha = ln 2
        assert_abs_diff_eq!(tilted.alpha, std::f64::consts::LN_2, epsilon = 1e-9);
        for y in 0..2 {
            assert_abs_diff_eq!(tilted.wprime.prob(0, y), pair.w.prob(0, y), epsilon = 1e-9);
        }
    }

    #[test]
    fn balakirsky_ternary_matches_oracle() {
        let pair = ternary_pair();
        let metric = metric_from_channel(&pair.v);
        let (c, _) = balakirsky_capacity(&pair, &metric).unwrap();
        assert_abs_diff_eq!(c, 0.285829054992371, epsilon = 1e-12);
        let (oracle, _) = id_oracle(InputDistribution::uniform(), &pair.w, &metric).unwrap();
        assert_abs_diff_eq!(c, oracle, epsilon = 1e-6);
    }

    #[test]
    fn balakirsky_rejects_non_canonical() {
        let w = Channel::new(vec![0.5, 0.3, 0.2], vec![0.3, 0.5, 0.2]).unwrap();
        let v = w.clone();
        let pair = SymmetricPair::new(w, v, vec![1, 0, 2]).unwrap();
        let metric = metric_from_channel(&pair.v);
        assert!(balakirsky_capacity(&pair, &metric).is_err());
    }

    #[test]
    fn tilted_channel_invariants() {
        let pair = ternary_pair();
        let metric = metric_from_channel(&pair.v);
        let (_, tilted) = balakirsky_capacity(&pair, &metric).unwrap();
        for x in 0..2 {
            let sum: f64 = tilted.wprime.row(x).iter().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-10);
        }
        // output marginal is preserved at uniform input
        for y in 0..3 {
            let m_w = 0.5 * (pair.w.prob(0, y) + pair.w.prob(1, y));
            let m_t = 0.5 * (tilted.wprime.prob(0, y) + tilted.wprime.prob(1, y));
            assert_abs_diff_eq!(m_w, m_t, epsilon = 1e-10);
        }
    }

    #[test]
    fn harmony_examples() {
        let anti = SymmetricPair::bsc_pair(0.11, 0.89);
        let metric = metric_from_channel(&anti.v);
        assert_eq!(binary_harmony_capacity(&anti, &metric).unwrap(), 0.0);
        let harm = SymmetricPair::bsc_pair(0.11, 0.2);
        let metric = metric_from_channel(&harm.v);
        assert_abs_diff_eq!(
            binary_harmony_capacity(&harm, &metric).unwrap(),
            1.0 - binary_entropy(0.11),
            epsilon = 1e-12
        );
        let (c, _) = balakirsky_capacity(&harm, &metric).unwrap();
        assert_abs_diff_eq!(c, 1.0 - binary_entropy(0.11), epsilon = 1e-9);
        let noise = SymmetricPair::bsc_pair(0.5, 0.3);
        let metric = metric_from_channel(&noise.v);
        assert_eq!(binary_harmony_capacity(&noise, &metric).unwrap(), 0.0);
    }

    #[test]
    fn id_oracle_harmony_and_feasibility() {
        let p = InputDistribution::uniform();
        let harm = SymmetricPair::bsc_pair(0.11, 0.2);
        let metric = metric_from_channel(&harm.v);
        let (val, _) = id_oracle(p, &harm.w, &metric).unwrap();
        assert_abs_diff_eq!(val, mutual_information(p, &harm.w), epsilon = 1e-6);
        // W' = W always feasible: oracle never exceeds I(P, W)
        let pair = ternary_pair();
        let metric = metric_from_channel(&pair.v);
        let (val, _) = id_oracle(p, &pair.w, &metric).unwrap();
        assert!(val <= mutual_information(p, &pair.w) + 1e-9);
    }

    #[test]
    fn general_d_capacity_examples() {
        let pair = ternary_pair();
        let metric = metric_from_channel(&pair.v);
        let c = general_d_capacity(&pair.w, &metric).unwrap();
        // symmetric pair: maximum at uniform P, equal to the closed form
        assert_abs_diff_eq!(c, 0.285829054992371, epsilon = 1e-5);
        let harm = SymmetricPair::bsc_pair(0.11, 0.2);
        let metric = metric_from_channel(&harm.v);
        let c = general_d_capacity(&harm.w, &metric).unwrap();
        assert_abs_diff_eq!(c, 1.0 - binary_entropy(0.11), epsilon = 1e-5);
        let flat = DecodingMetric::new(vec![1.0, 1.0], vec![1.0, 1.0]);
        let c = general_d_capacity(&Channel::bsc(0.11), &flat).unwrap();
        assert_abs_diff_eq!(c, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn bound_profile_bsc_example() {
        let pair = SymmetricPair::bsc_pair(0.11, 0.89);
        let opts = TransformOptions::default();
        let profile = bound_profile(&pair, 1, &opts).unwrap();
        // k=0: I(W,V) < 0, positive part 0
        assert_eq!(profile.per_depth_bounds[0], 0.0);
        assert_abs_diff_eq!(
            profile.per_depth_bounds[1],
            0.5 * (1.0 - binary_entropy(0.1958)),
            epsilon = 1e-12
        );
    }

    #[test]
    fn bound_profile_matched_is_flat() {
        let pair = SymmetricPair::bsc_pair(0.11, 0.11);
        let opts = TransformOptions::default();
        let profile = bound_profile(&pair, 3, &opts).unwrap();
        let i = mismatched_info(&pair);
        for b in &profile.per_depth_bounds {
            assert_abs_diff_eq!(*b, i, epsilon = 1e-10);
        }
    }

    #[test]
    fn delta_examples() {
        let pair = SymmetricPair::bsc_pair(0.11, 0.89);
        let d = delta(&pair).unwrap();
        assert_eq!(d.c, 0.0);
        assert_abs_diff_eq!(d.c_minus, 1.0 - binary_entropy(0.1958), epsilon = 1e-9);
        assert!(d.delta > 0.0);
        let matched = SymmetricPair::bsc_pair(0.11, 0.11);
        let d = delta(&matched).unwrap();
        assert_abs_diff_eq!(d.delta, 0.0, epsilon = 1e-8);
    }

    #[test]
    fn negative_delta_exists_at_l4() {
        let mut found = false;
        for seed in 0..200u64 {
            let pair = seeded_pair(4, seed);
            if delta(&pair).unwrap().delta < -1e-6 {
                found = true;
                break;
            }
        }
        assert!(found, "no L=4 pair with delta < -1e-6 in 200 draws");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn info_lower_bounds_capacity(seed in any::<u64>(), l in 2usize..5) {
            let pair = seeded_pair(l, seed);
            let (c, _) = capacity_of_pair(&pair).unwrap();
            prop_assert!(mismatched_info(&pair) <= c + 1e-8);
        }

        #[test]
        fn conservation_of_info(seed in any::<u64>(), l in 2usize..5) {
            let pair = seeded_pair(l, seed);
            let i = mismatched_info(&pair);
            prop_assume!(i.is_finite());
            let im = mismatched_info(&minus_transform(&pair).unwrap());
            let ip = mismatched_info(&plus_transform(&pair).unwrap());
            prop_assert!((im + ip - 2.0 * i).abs() <= 1e-10);
        }

        #[test]
        fn profile_non_decreasing(seed in any::<u64>(), l in 2usize..4) {
            let pair = seeded_pair(l, seed);
            let opts = TransformOptions::default();
            let profile = bound_profile(&pair, 2, &opts).unwrap();
            for k in 1..profile.per_depth_bounds.len() {
                prop_assert!(profile.per_depth_bounds[k] >= profile.per_depth_bounds[k - 1] - 1e-12);
            }
        }

        #[test]
        fn matched_metric_equals_mutual_information(seed in any::<u64>(), l in 2usize..5) {
            let pair = seeded_pair(l, seed);
            let matched = SymmetricPair::new(pair.w.clone(), pair.w.clone(), pair.pi.clone()).unwrap();
            let (c, _) = capacity_of_pair(&matched).unwrap();
            let mi = mutual_information(InputDistribution::uniform(), &pair.w);
            prop_assert!((c - mi).abs() <= 1e-9, "c={c} mi={mi}");
        }

        #[test]
        fn capacity_invariant_under_merge(seed in any::<u64>(), l in 2usize..5) {
            let pair = seeded_pair(l, seed);
            let (c1, _) = capacity_of_pair(&pair).unwrap();
            let (c2, _) = capacity_of_pair(&merge_outputs(&pair).unwrap()).unwrap();
            prop_assert!((c1 - c2).abs() <= 1e-8);
        }

        #[test]
        fn alpha_condition_residual(seed in any::<u64>(), l in 2usize..5) {
            let pair = seeded_pair(l, seed);
            let (canon, _) = canonicalize(&pair).unwrap();
            let metric = metric_from_channel(&canon.v);
            let (_, tilted) = balakirsky_capacity(&canon, &metric).unwrap();
            prop_assume!(tilted.alpha > 0.0);
            let ln = canon.num_outputs();
            let lhs: f64 = (0..ln).map(|y| tilted.wprime.prob(0, y) * metric.value(0, y)).sum();
            let rhs: f64 = (0..ln).map(|y| canon.w.prob(0, y) * metric.value(0, y)).sum();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()), "residual {}", (lhs - rhs).abs());
        }
    }
}
