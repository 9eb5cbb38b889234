//! `penkey`: bounds, protocol simulation and verification suites for
//! pair-entangled quantum networks, from network files on disk.
//!
//! Exit codes: 0 success (and all assertions passed), 1 input or verification
//! failure, 2 capability/size-limit errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use penkey::bb84;
use penkey::bounds::{self, BoundReport};
use penkey::gme;
use penkey::network::{self, PenNetwork, WeightKind};
use penkey::packing;
use penkey::partition::Partition;
use penkey::Error;

/// Default RNG seed, fixed for reproducible runs.
const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Parser)]
#[command(name = "penkey", version, about = "Conference-key bounds and tree-packing protocols for pair-entangled networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Human,
    Structured,
}

#[derive(Args)]
struct CommonArgs {
    /// Network file (JSON)
    #[arg(long)]
    network: PathBuf,
    /// Override the seeker set, e.g. 1,2,3
    #[arg(long, value_delimiter = ',')]
    seekers: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Every applicable key-rate bound, with witnesses
    Bounds {
        #[command(flatten)]
        common: CommonArgs,
        /// Reference vertex for the Devetak-Winter bound (default: vertex 1)
        #[arg(long, default_value_t = 1)]
        reference: usize,
    },
    /// Integer tree packing plus conference-key simulation and audit
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1)]
        rounds: u32,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Seeded repetitions for the statistical secrecy audit
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Biseparable relative-entropy verification suite
    VerifyGme {
        #[command(flatten)]
        common: CommonArgs,
        /// Biseparable competitor samples for the identity check
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Random directions for the derivative inequality
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Tripartite BB84: rate ceiling search, or evaluation of given correlators
    Bb84 {
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
        #[arg(long, default_value_t = 1000)]
        resolution: usize,
        /// <X_A X_B X_C>; together with the z-correlators switches to
        /// evaluation mode
        #[arg(long)]
        xxx: Option<f64>,
        #[arg(long, requires = "xxx")]
        zab: Option<f64>,
        #[arg(long, requires = "xxx")]
        zac: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        zb: f64,
        #[arg(long, default_value_t = 0.0)]
        zc: f64,
    },
    /// Combined machine-readable report (bounds plus protocol values)
    Report {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1)]
        reference: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load(common: &CommonArgs) -> penkey::Result<PenNetwork> {
    let net = network::load_network_file(&common.network)?;
    match &common.seekers {
        Some(s) => net.with_seekers(s.iter().copied()),
        None => Ok(net),
    }
}

fn emit(format: Format, doc: &Value) {
    match format {
        Format::Structured => {
            println!("{}", serde_json::to_string_pretty(doc).expect("serializable"))
        }
        Format::Human => {
            let mut out = String::new();
            render_human(doc, 0, &mut out);
            print!("{out}");
        }
    }
}

/// Human output is a plain-text rendering of the structured document, never a
/// separate computation.
fn render_human(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                match val {
                    Value::Object(_) | Value::Array(_) if !is_short(val) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_human(val, indent + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", render_inline(val))),
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                match item {
                    Value::Object(_) | Value::Array(_) if !is_short(item) => {
                        out.push_str(&format!("{pad}-\n"));
                        render_human(item, indent + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}- {}\n", render_inline(item))),
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", render_inline(other))),
    }
}

fn is_short(v: &Value) -> bool {
    match v {
        Value::Array(items) => {
            items.len() <= 12 && items.iter().all(|i| !matches!(i, Value::Object(_)))
        }
        Value::Object(_) => false,
        _ => true,
    }
}

fn render_inline(v: &Value) -> String {
    match v {
        Value::Array(items) => {
            let inner: Vec<String> = items.iter().map(render_inline).collect();
            format!("[{}]", inner.join(", "))
        }
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn bound_to_json(rep: &BoundReport) -> Value {
    serde_json::to_value(rep).expect("serializable")
}

/// Every bound that applies to the network, in a fixed order.
fn collect_bounds(net: &PenNetwork, reference: usize) -> penkey::Result<Vec<Value>> {
    let mut out = Vec::new();

    let pure_weights = network::derive_weights(net, WeightKind::EntropyS);
    let mixed_weights = network::derive_weights(net, WeightKind::EofEf);

    let weighting = match (&pure_weights, &mixed_weights) {
        (Ok(w), _) => Some(w.clone()),
        (Err(_), Ok(w)) => Some(w.clone()),
        _ => None,
    };
    if let Some(w) = &weighting {
        out.push(bound_to_json(&bounds::weakest_cut_bound(net, w)?));
        match bounds::partition_bound(net, w) {
            Ok(rep) => out.push(bound_to_json(&rep)),
            Err(Error::LimitExceeded(msg)) => {
                out.push(json!({"kind": "partition", "skipped": msg}))
            }
            Err(e) => return Err(e),
        }
    }
    // a mixed-weight partition bound is worth a second row when it differs
    if pure_weights.is_ok() {
        if let Ok(w) = &mixed_weights {
            if w.weights != weighting.as_ref().expect("set above").weights {
                if let Ok(rep) = bounds::partition_bound(net, w) {
                    out.push(bound_to_json(&rep));
                }
            }
        }
    }
    match bounds::devetak_winter_bound(net, reference) {
        Ok(rep) => out.push(bound_to_json(&rep)),
        Err(e) => out.push(json!({"kind": "devetak_winter", "skipped": e.to_string()})),
    }
    if net.is_tree() {
        if let Some(w) = &weighting {
            out.push(bound_to_json(&bounds::tree_exact_rate(net, w)?));
        }
    }
    Ok(out)
}

fn run(command: Command) -> penkey::Result<ExitCode> {
    match command {
        Command::Bounds { common, reference } => {
            let net = load(&common)?;
            let doc = json!({
                "command": "bounds",
                "network": common.network.display().to_string(),
                "n_vertices": net.n_vertices(),
                "seekers": net.seekers().iter().copied().collect::<Vec<_>>(),
                "bounds": collect_bounds(&net, reference)?,
            });
            emit(common.format, &doc);
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { common, rounds, seed, trials } => {
            let net = load(&common)?;
            let (packing, bound) = if net.all_seekers() {
                let w = network::derive_weights(&net, WeightKind::EntropyS)?;
                let packing = packing::pack_trees_integer(&net, rounds)?;
                let bound = bounds::partition_bound(&net, &w)?.value;
                (packing, bound)
            } else if net.is_tree() {
                let w = network::derive_weights(&net, WeightKind::EntropyS)?;
                let packing = packing::steiner_relay_packing(&net, rounds)?;
                let bound = bounds::tree_exact_rate(&net, &w)?.value;
                (packing, bound)
            } else {
                return Err(Error::Precondition(
                    "simulation needs every vertex seeking, or a tree network".into(),
                ));
            };
            let transcript = packing::simulate_conference_key(&net, &packing, seed)?;
            let structural = packing::audit_secrecy(std::slice::from_ref(&transcript));
            let batch: Vec<_> = (0..trials as u64)
                .map(|i| packing::simulate_conference_key(&net, &packing, seed.wrapping_add(i)))
                .collect::<penkey::Result<_>>()?;
            let statistical = packing::audit_secrecy(&batch);
            let bits = transcript.agreed_key().map_or(0, <[u8]>::len);
            let rate = bits as f64 / f64::from(rounds);
            let doc = json!({
                "command": "simulate",
                "network": common.network.display().to_string(),
                "rounds": rounds,
                "seed": seed,
                "conference_bits": bits,
                "achieved_rate": rate,
                "bound": bound,
                "bound_gap": bound - rate,
                "packing_value": packing.value,
                "audit": {
                    "structural_pass": structural.pass,
                    "statistical_pass": statistical.pass,
                    "trials": trials,
                    "max_abs_correlation": statistical.max_abs_correlation,
                    "correlation_threshold": statistical.correlation_threshold,
                },
                "transcript": transcript.export(),
            });
            emit(common.format, &doc);
            Ok(if structural.pass && statistical.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::VerifyGme { common, samples, trials, seed } => {
            let net = load(&common)?;
            let identity = gme::verify_gme_identity(
                &net,
                &gme::GmeVerifyConfig { samples, seed, ..Default::default() },
            )?;
            let derivative = match gme::directional_derivative_check(&net, trials, seed) {
                Ok(rep) => Some(rep),
                Err(Error::Precondition(_)) => None,
                Err(e) => return Err(e),
            };
            let singletons =
                Partition::new((1..=net.n_vertices()).map(|v| vec![v]).collect());
            let correlation = gme::total_correlation_check(&net, &singletons)?;

            let mut pass = identity.pass && correlation.pass;
            if let Some(d) = &derivative {
                pass &= d.pass;
            }
            let doc = json!({
                "command": "verify-gme",
                "network": common.network.display().to_string(),
                "identity": serde_json::to_value(&identity).expect("serializable"),
                "derivative": derivative
                    .as_ref()
                    .map(|d| serde_json::to_value(d).expect("serializable"))
                    .unwrap_or(json!("skipped: edges not maximally entangled")),
                "total_correlation_singletons":
                    serde_json::to_value(&correlation).expect("serializable"),
                "pass": pass,
            });
            emit(common.format, &doc);
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Bb84 { format, resolution, xxx, zab, zac, zb, zc } => {
            if let Some(x) = xxx {
                let c = bb84::CorrelatorSet::new(
                    x,
                    zab.unwrap_or(0.0),
                    zac.unwrap_or(0.0),
                    zb,
                    zc,
                )?;
                let rate = bb84::bb84_rate(&c);
                let feas = bb84::pen3_feasible(&c, 1e-9);
                let doc = json!({
                    "command": "bb84",
                    "mode": "evaluate",
                    "correlators": serde_json::to_value(c).expect("serializable"),
                    "rate": rate,
                    "no_key": rate <= 0.0,
                    "feasible_in_pen3": feas.feasible,
                    "inflation_slack": feas.inflation_slack,
                    "combined_slack": feas.combined_slack,
                });
                emit(format, &doc);
                return Ok(ExitCode::SUCCESS);
            }
            let search = bb84::bb84_ceiling_search(resolution)?;
            let carrara =
                bb84::bb84_rate(&bb84::correlators_from_state(&bb84::carrara_state())?);
            let ceiling = bb84::bb84_ceiling_exact();
            let pass = (search.rate - ceiling).abs() <= 1e-4
                && (carrara - ceiling).abs() <= 1e-9;
            let doc = json!({
                "command": "bb84",
                "mode": "ceiling",
                "resolution": resolution,
                "ceiling_search_rate": search.rate,
                "ceiling_exact": ceiling,
                "argmax": serde_json::to_value(search.argmax).expect("serializable"),
                "carrara_rate": carrara,
                "pass": pass,
            });
            emit(format, &doc);
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Report { common, reference, seed } => {
            let net = load(&common)?;
            let mut doc = json!({
                "command": "report",
                "network": common.network.display().to_string(),
                "n_vertices": net.n_vertices(),
                "seekers": net.seekers().iter().copied().collect::<Vec<_>>(),
                "seed": seed,
                "bounds": collect_bounds(&net, reference)?,
            });
            if net.all_seekers() {
                if let Ok(w) = network::derive_weights(&net, WeightKind::EntropyS) {
                    match packing::pack_trees_fractional(&net, &w) {
                        Ok(p) => {
                            doc["fractional_packing_value"] = json!(p.value);
                            doc["packing_trees"] = json!(p.trees.len());
                        }
                        Err(Error::LimitExceeded(msg)) => {
                            doc["fractional_packing_value"] = json!(format!("skipped: {msg}"));
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
            emit(common.format, &doc);
            Ok(ExitCode::SUCCESS)
        }
    }
}
