//! End-to-end acceptance checks, one line of output per criterion.
//!
//! Each criterion prints `criterion N: PASS/FAIL — detail`; the test fails
//! at the end if any criterion failed.

use mispolar::capacity::{
    balakirsky_capacity, binary_entropy, bound_profile, capacity_of_pair, conditional_entropy,
    delta, id_oracle_with, mismatched_info, mutual_information, output_entropy, positive_part,
    OracleOptions,
};
use mispolar::channel::{canonicalize, merge_outputs, metric_from_channel, validate_pair};
use mispolar::codec::{select_info_set, simulate_fer, ConstructionOptions};
use mispolar::experiments::{conjecture_check, random_symmetric_pair, sweep};
use mispolar::polar::{
    minus_transform, plus_transform, transform_by_sequence, SignSequence, TransformOptions,
};
use mispolar::{Channel, InputDistribution, SymmetricPair};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn bsc(eps: f64) -> Channel {
    Channel::new(vec![1.0 - eps, eps], vec![eps, 1.0 - eps]).unwrap()
}

fn bsc_pair(ew: f64, ev: f64) -> SymmetricPair {
    SymmetricPair::new(bsc(ew), bsc(ev), vec![1, 0]).unwrap()
}

type Outcome = Result<String, String>;

fn criterion1() -> Outcome {
    let pair = bsc_pair(0.11, 0.89);
    let (c, tilt) = capacity_of_pair(&pair).map_err(|e| e.to_string())?;
    let (canon, _) = canonicalize(&pair).map_err(|e| e.to_string())?;
    let u = InputDistribution::uniform();
    let pre_clamp = output_entropy(u, &canon.w) - conditional_entropy(u, &tilt.wprime);
    let info = positive_part(mismatched_info(&pair));
    if c != 0.0 {
        return Err(format!("C(W,V) = {c}, expected exactly 0"));
    }
    if pre_clamp.abs() >= 1e-9 {
        return Err(format!("pre-clamp residual {pre_clamp:.3e} >= 1e-9"));
    }
    if info != 0.0 {
        return Err(format!("I(W,V)* = {info}, expected 0"));
    }
    Ok(format!("C(W,V) = 0, pre-clamp residual {:.1e}, I* = 0", pre_clamp.abs()))
}

fn criterion2() -> Outcome {
    let minus = minus_transform(&bsc_pair(0.11, 0.89)).map_err(|e| e.to_string())?;
    let (c, _) = capacity_of_pair(&minus).map_err(|e| e.to_string())?;
    let info = mismatched_info(&minus);
    let closed = 1.0 - binary_entropy(2.0 * 0.11 * 0.89);
    if (c - closed).abs() >= 1e-9 {
        return Err(format!("C(W-,V-) = {c}, closed form {closed}"));
    }
    if (info - closed).abs() >= 1e-9 {
        return Err(format!("I(W-,V-) = {info}, closed form {closed}"));
    }
    Ok(format!("C(W-,V-) = I(W-,V-) = {c:.12} = 1 - h(0.1958)"))
}

fn criterion3() -> Outcome {
    let pair = bsc_pair(0.11, 0.89);
    let opts = TransformOptions::default();
    let profile = bound_profile(&pair, 4, &opts).map_err(|e| e.to_string())?;
    let b = &profile.per_depth_bounds;
    for k in 1..b.len() {
        if b[k] < b[k - 1] - 1e-12 {
            return Err(format!("profile decreases at depth {k}: {} -> {}", b[k - 1], b[k]));
        }
    }
    // independent per-branch evaluation via explicit sign sequences
    for k in 0..=4usize {
        let mut sum = 0.0;
        let mut all_plus_info = f64::NEG_INFINITY;
        for i in 0..(1usize << k) {
            let seq = SignSequence::from_index(i, k);
            let branch = transform_by_sequence(&pair, &seq, &opts).map_err(|e| e.to_string())?;
            let info = mismatched_info(&branch);
            if i == (1usize << k) - 1 {
                all_plus_info = info;
            }
            sum += positive_part(info);
        }
        let independent = sum / (1u64 << k) as f64;
        if (independent - b[k]).abs() >= 1e-12 {
            return Err(format!(
                "depth {k}: profile {} vs per-branch {independent}",
                b[k]
            ));
        }
        if k > 0 && positive_part(all_plus_info) != 0.0 {
            return Err(format!("all-plus branch at depth {k} contributes {all_plus_info}"));
        }
    }
    let target = 0.9 * (1.0 - binary_entropy(0.11));
    if b[4] <= target {
        return Err(format!(
            "profile at depth 4 is {:.12}, not above 0.9*(1-h(0.11)) = {:.12}",
            b[4], target
        ));
    }
    Ok(format!("profile(4) = {:.6} > {:.6}, monotone, branch-verified", b[4], target))
}

fn criterion4() -> Outcome {
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for (l, n) in [(2usize, 334usize), (3, 333), (4, 333)] {
        let mut rng = ChaCha8Rng::seed_from_u64(0x41 + l as u64);
        for _ in 0..n {
            let pair = random_symmetric_pair(l, &mut rng);
            let i0 = mismatched_info(&pair);
            let im = mismatched_info(&minus_transform(&pair).map_err(|e| e.to_string())?);
            let ip = mismatched_info(&plus_transform(&pair).map_err(|e| e.to_string())?);
            if i0.is_finite() && im.is_finite() && ip.is_finite() {
                let resid = (im + ip - 2.0 * i0).abs();
                worst = worst.max(resid);
                checked += 1;
                if resid >= 1e-10 {
                    return Err(format!("conservation residual {resid:.3e} at L={l}"));
                }
            }
        }
    }
    Ok(format!("{checked} finite pairs, worst residual {worst:.2e} < 1e-10"))
}

fn criterion5() -> Outcome {
    let oracle_opts = OracleOptions::default();
    let mut worst = 0.0f64;
    for (l, n) in [(2usize, 34usize), (3, 33), (4, 33)] {
        let mut rng = ChaCha8Rng::seed_from_u64(0x51 + l as u64);
        for _ in 0..n {
            let pair = random_symmetric_pair(l, &mut rng);
            let (canon, _) = canonicalize(&pair).map_err(|e| e.to_string())?;
            let metric = metric_from_channel(&canon.v);
            let (closed, _) =
                balakirsky_capacity(&canon, &metric).map_err(|e| e.to_string())?;
            let (oracle, _) =
                id_oracle_with(InputDistribution::uniform(), &canon.w, &metric, &oracle_opts)
                    .map_err(|e| e.to_string())?;
            let gap = (closed - positive_part(oracle)).abs();
            worst = worst.max(gap);
            if gap >= 1e-6 {
                return Err(format!("closed form {closed} vs oracle {oracle} at L={l}"));
            }
        }
    }
    Ok(format!("100 pairs, worst |closed - oracle| = {worst:.2e} < 1e-6"))
}

fn criterion6() -> Outcome {
    let opts = TransformOptions::default();
    let mut max_delta = f64::NEG_INFINITY;
    let mut min_delta = f64::INFINITY;
    let mut any_large = false;
    for l in [2usize, 3] {
        let (records, _) = sweep(l, 2000, 0, 0x600 + l as u64, &opts).map_err(|e| e.to_string())?;
        for r in &records {
            max_delta = max_delta.max(r.delta);
            min_delta = min_delta.min(r.delta);
            if r.delta < -1e-9 {
                return Err(format!("loss record: delta = {} at L={l} seed {}", r.delta, r.seed));
            }
            if r.delta > 1e-9 && r.c_wv >= 1e-9 {
                return Err(format!(
                    "improvement with positive capacity: C = {}, delta = {}",
                    r.c_wv, r.delta
                ));
            }
            if r.delta > 0.4 {
                any_large = true;
            }
        }
    }
    if !any_large {
        return Err(format!("no record with delta > 0.4 (max {max_delta})"));
    }
    if max_delta > 0.5 + 1e-6 {
        return Err(format!("max delta {max_delta:.6} exceeds 0.5 + 1e-6"));
    }
    Ok(format!("4000 records, delta in [{min_delta:.1e}, {max_delta:.4}]"))
}

fn criterion7() -> Outcome {
    let opts = TransformOptions::default();
    let (records, _) = sweep(4, 5000, 0, 0x700, &opts).map_err(|e| e.to_string())?;
    let losses = records.iter().filter(|r| r.delta < -1e-6).count();
    let gains = records
        .iter()
        .filter(|r| r.delta > 1e-6 && r.c_wv > 1e-3)
        .count();
    if losses == 0 {
        return Err("no record with delta < -1e-6".into());
    }
    if gains == 0 {
        return Err("no record with delta > 1e-6 and C(W,V) > 1e-3".into());
    }
    Ok(format!("{losses} losses, {gains} positive-capacity gains among 5000"))
}

fn criterion8() -> Outcome {
    let opts = TransformOptions::default();
    let mut checked = 0usize;
    let mut violations = 0usize;
    for l in [2usize, 3, 4] {
        let report =
            conjecture_check(l, 500, 3, 0x800 + l as u64, &opts).map_err(|e| e.to_string())?;
        checked += report.pairs_checked;
        violations += report.counterexamples.len();
        for cx in &report.counterexamples {
            eprintln!(
                "counterexample: seed {} L={} C={} bounds {:?}",
                cx.seed, cx.pair.l, cx.c_wv, cx.bounds
            );
        }
    }
    Ok(format!("{checked} positive-capacity pairs checked, {violations} violations reported"))
}

fn criterion9() -> Outcome {
    let pair = bsc_pair(0.11, 0.89);
    let ctor = ConstructionOptions::default();
    let mut fers = Vec::new();
    for n in [8usize, 9, 10] {
        let cfg = select_info_set(&pair, n, 0.25, (n as u64) ^ 0xc0ffee, &ctor)
            .map_err(|e| e.to_string())?;
        let res = simulate_fer(&pair, &cfg, 10_000, 0x900 + n as u64).map_err(|e| e.to_string())?;
        fers.push((1usize << n, res.fer));
    }
    for w in fers.windows(2) {
        if w[1].1 >= w[0].1 {
            return Err(format!("FER not decreasing: {fers:?}"));
        }
    }
    if fers[2].1 >= 0.05 {
        return Err(format!("FER(N=1024) = {} >= 0.05", fers[2].1));
    }
    Ok(format!(
        "R=0.25 FER: N=256 {:.4}, N=512 {:.4}, N=1024 {:.4}",
        fers[0].1, fers[1].1, fers[2].1
    ))
}

fn criterion10() -> Outcome {
    // Representative randomized invariant pass; the full property suites run
    // in the library unit tests with >= 500 cases each.
    let opts = TransformOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xa00);
    for i in 0..500 {
        let l = 2 + (i % 3);
        let pair = random_symmetric_pair(l, &mut rng);
        if !validate_pair(&pair).is_valid() {
            return Err(format!("random pair {i} invalid"));
        }
        let merged = merge_outputs(&pair).map_err(|e| e.to_string())?;
        let (c, _) = capacity_of_pair(&pair).map_err(|e| e.to_string())?;
        let (cm, _) = capacity_of_pair(&merged).map_err(|e| e.to_string())?;
        if (c - cm).abs() >= 1e-8 {
            return Err(format!("merge changed capacity: {c} vs {cm}"));
        }
        let info = mismatched_info(&pair);
        if info.is_finite() && info > c + 1e-8 {
            return Err(format!("I(W,V) = {info} exceeds C(W,V) = {c}"));
        }
        let d = delta(&pair).map_err(|e| e.to_string())?;
        if (d.delta - (d.c_plus + d.c_minus - 2.0 * d.c)).abs() >= 1e-12 {
            return Err("delta identity broken".into());
        }
        if i % 50 == 0 {
            let profile = bound_profile(&pair, 2, &opts).map_err(|e| e.to_string())?;
            let b = &profile.per_depth_bounds;
            if !(b[0] <= b[1] + 1e-12 && b[1] <= b[2] + 1e-12) {
                return Err(format!("profile not monotone: {b:?}"));
            }
        }
        let u = InputDistribution::uniform();
        let mi = mutual_information(u, &pair.w);
        if !(0.0..=1.0 + 1e-12).contains(&mi) {
            return Err(format!("mutual information {mi} out of range"));
        }
    }
    Ok("500 randomized cases across core invariants".into())
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("criterion 1", criterion1),
        ("criterion 2", criterion2),
        ("criterion 3", criterion3),
        ("criterion 4", criterion4),
        ("criterion 5", criterion5),
        ("criterion 6", criterion6),
        ("criterion 7", criterion7),
        ("criterion 8", criterion8),
        ("criterion 9", criterion9),
        ("criterion 10", criterion10),
    ];
    let mut failures = Vec::new();
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("{name}: PASS — {detail} ({secs:.1}s)"),
            Err(detail) => {
                println!("{name}: FAIL — {detail} ({secs:.1}s)");
                failures.push(name);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
