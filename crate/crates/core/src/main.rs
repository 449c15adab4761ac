use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use mispolar::capacity::{
    balakirsky_capacity, binary_harmony_capacity, bound_profile, capacity_of_pair, id_oracle,
    mismatched_info, mutual_information,
};
use mispolar::channel::{canonicalize, metric_from_channel, read_pair, validate_pair, write_pair};
use mispolar::codec::{select_info_set, simulate_fer, ConstructionOptions};
use mispolar::experiments::{conjecture_check, records_to_csv, sweep};
use mispolar::polar::{transform_by_sequence, SignSequence, TransformOptions};
use mispolar::{Error, InputDistribution};

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_RESOURCE_CAP: u8 = 3;
const EXIT_NON_CONVERGENCE: u8 = 4;

#[derive(Parser)]
#[command(name = "mispolar", version, about = "Mismatched capacity of B-DMC pairs under polar transforms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct CapArgs {
    /// Maximum merged alphabet size per transform step.
    #[arg(long, default_value_t = 4096)]
    cap: usize,
    /// Approximate deep transforms by binning the decision statistic.
    #[arg(long)]
    quant_bins: Option<usize>,
}

impl CapArgs {
    fn to_options(&self) -> TransformOptions {
        if self.cap != 4096 {
            eprintln!("warning: alphabet cap overridden to {}", self.cap);
        }
        if let Some(b) = self.quant_bins {
            eprintln!("warning: decision-statistic quantization enabled ({b} bins); results are approximate");
        }
        TransformOptions { alphabet_cap: self.cap, quant_bins: self.quant_bins }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Report C(W,V), alpha, I(W,V) and the matched capacity of a pair file.
    Capacity {
        pair_file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Apply a sign sequence of polar transforms and write the result.
    Transform {
        pair_file: PathBuf,
        /// Sequence over '+' and '-', applied left to right.
        #[arg(long, default_value = "")]
        seq: String,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Print the per-depth lower-bound profile.
    Bound {
        pair_file: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Random-pair sweep; writes one CSV row per pair plus a summary.
    Sweep {
        #[arg(short = 'L', long, default_value_t = 2)]
        alphabet: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
        /// Also run the conjecture check at this depth (<= 3).
        #[arg(long)]
        conjecture_depth: Option<usize>,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Monte Carlo FER of mismatched polar coding over a pair.
    Simulate {
        pair_file: PathBuf,
        #[arg(long, default_value_t = 256)]
        blocklen: usize,
        #[arg(long, default_value_t = 0.25)]
        rate: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Append the CSV row to this file (header written when new).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Self-check one pair: closed form vs oracle, conservation, symmetry.
    Verify { pair_file: PathBuf },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version output is not a usage error
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(EXIT_USAGE);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::AlphabetCap { .. } => EXIT_RESOURCE_CAP,
                Error::NonConvergence(_) => EXIT_NON_CONVERGENCE,
                _ => EXIT_VALIDATION,
            })
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Capacity { pair_file, json } => {
            let pair = read_pair(&pair_file)?;
            let (canon, _) = canonicalize(&pair)?;
            let metric = metric_from_channel(&canon.v);
            let (c, tilted) = balakirsky_capacity(&canon, &metric)?;
            let i_wv = mismatched_info(&canon);
            let matched = mutual_information(InputDistribution::uniform(), &canon.w);
            let harmony = if canon.num_outputs() == 2 {
                Some(binary_harmony_capacity(&canon, &metric)? > 0.0)
            } else {
                None
            };
            if json {
                let mut obj = json!({
                    "C_WV": c,
                    "alpha": tilted.alpha,
                    "I_WV": i_wv,
                    "C_W": matched,
                });
                if let Some(h) = harmony {
                    obj["harmony"] = json!(h);
                }
                println!("{}", serde_json::to_string_pretty(&obj)?);
            } else {
                println!("C(W,V)  = {c:.12}");
                println!("alpha   = {:.12}", tilted.alpha);
                println!("I(W,V)  = {i_wv:.12}");
                println!("C(W)    = {matched:.12}  (matched)");
                if let Some(h) = harmony {
                    println!("harmony = {}", if h { "yes" } else { "no" });
                }
            }
            Ok(())
        }
        Command::Transform { pair_file, seq, out, caps } => {
            let pair = read_pair(&pair_file)?;
            let seq = SignSequence::parse(&seq)?;
            let opts = caps.to_options();
            let before = pair.num_outputs();
            let raw_after = raw_size_after(before, &seq);
            let result = transform_by_sequence(&pair, &seq, &opts)?;
            println!(
                "alphabet: {} -> {} (raw {} before merging)",
                before,
                result.num_outputs(),
                raw_after
            );
            write_pair(&out, &result)?;
            Ok(())
        }
        Command::Bound { pair_file, depth, json, caps } => {
            let pair = read_pair(&pair_file)?;
            let opts = caps.to_options();
            let profile = bound_profile(&pair, depth, &opts)?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "depth": profile.depth,
                        "per_depth_bounds": profile.per_depth_bounds,
                    }))?
                );
            } else {
                for (k, b) in profile.per_depth_bounds.iter().enumerate() {
                    println!("bound[{k}] = {b:.12}");
                }
            }
            Ok(())
        }
        Command::Sweep { alphabet, trials, depth, seed, out, conjecture_depth, caps } => {
            let opts = caps.to_options();
            let (records, summary) = sweep(alphabet, trials, depth, seed, &opts)?;
            std::fs::write(&out, records_to_csv(&records))?;
            println!("trials        = {}", summary.trials);
            println!("max delta     = {:.9}", summary.max_delta);
            println!("improvements  = {}", summary.improvements);
            println!("losses        = {}", summary.losses);
            println!("neutral       = {}", summary.neutral);
            println!("conjecture violations = {}", summary.conjecture_violations);
            if let Some(d) = conjecture_depth {
                let report = conjecture_check(alphabet, trials, d, seed, &opts)?;
                println!(
                    "conjecture: {} checked, {} skipped (C = 0), {} counterexamples",
                    report.pairs_checked,
                    report.pairs_skipped,
                    report.counterexamples.len()
                );
                for ce in &report.counterexamples {
                    println!(
                        "counterexample seed={} C={} bounds={:?} pair={}",
                        ce.seed,
                        ce.c_wv,
                        ce.bounds,
                        serde_json::to_string(&ce.pair)?
                    );
                }
            }
            Ok(())
        }
        Command::Simulate { pair_file, blocklen, rate, trials, seed, out } => {
            let pair = read_pair(&pair_file)?;
            if !blocklen.is_power_of_two() || blocklen < 2 {
                return Err(Error::Validation(format!(
                    "blocklen {blocklen} must be a power of two >= 2"
                )));
            }
            let n = blocklen.trailing_zeros() as usize;
            let cfg = select_info_set(&pair, n, rate, seed ^ 0xc0ffee, &ConstructionOptions::default())?;
            let result = simulate_fer(&pair, &cfg, trials, seed)?;
            let row = format!(
                "{},{},{},{},{},{}",
                blocklen, rate, result.trials, result.block_errors, result.fer, seed
            );
            println!("N,rate,trials,block_errors,fer,seed");
            println!("{row}");
            if let Some(path) = out {
                let mut text = if path.exists() {
                    std::fs::read_to_string(&path)?
                } else {
                    String::from("N,rate,trials,block_errors,fer,seed\n")
                };
                text.push_str(&row);
                text.push('\n');
                std::fs::write(&path, text)?;
            }
            Ok(())
        }
        Command::Verify { pair_file } => verify(&pair_file),
    }
}

fn raw_size_after(l: usize, seq: &SignSequence) -> usize {
    use mispolar::polar::Sign;
    let mut size = l;
    for s in &seq.0 {
        let sq = size.saturating_mul(size);
        size = match s {
            Sign::Minus => sq,
            Sign::Plus => sq.saturating_mul(2),
        };
    }
    size
}

fn verify(path: &std::path::Path) -> Result<(), Error> {
    let pair = read_pair(path)?;
    let report = validate_pair(&pair);
    if !report.is_valid() {
        return Err(Error::Validation(report.to_string()));
    }
    println!("validate: OK");

    let (c, tilted) = capacity_of_pair(&pair)?;
    println!("C(W,V) = {c:.12} (alpha = {:.6})", tilted.alpha);

    let (canon, _) = canonicalize(&pair)?;
    if canon.num_outputs() <= 6 {
        let metric = metric_from_channel(&canon.v);
        let (oracle, _) = id_oracle(InputDistribution::uniform(), &canon.w, &metric)?;
        let residual = (c - oracle).abs();
        println!("oracle residual = {residual:.3e}");
        if residual > 1e-6 {
            return Err(Error::NonConvergence(format!(
                "closed form and oracle disagree by {residual:.3e}"
            )));
        }
    } else {
        println!("oracle skipped (L > 6)");
    }

    let i_root = mismatched_info(&pair);
    let minus = mispolar::polar::minus_transform(&pair)?;
    let plus = mispolar::polar::plus_transform(&pair)?;
    let i_minus = mismatched_info(&minus);
    let i_plus = mismatched_info(&plus);
    if i_root.is_finite() {
        let residual = (i_minus + i_plus - 2.0 * i_root).abs();
        println!("conservation residual = {residual:.3e}");
        if residual > 1e-10 {
            return Err(Error::NonConvergence(format!(
                "conservation violated by {residual:.3e}"
            )));
        }
    } else {
        println!("conservation skipped (I(W,V) = -inf)");
    }
    println!("OK");
    Ok(())
}
