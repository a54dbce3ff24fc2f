//! Command-line front end: JSON system configs in, CSV/JSON artifacts plus a
//! digest manifest out.
//!
//! Every subcommand loads a system file, runs one pipeline, writes its
//! result files into `--out-dir`, and finishes with a `manifest.json`
//! recording the command, the fully resolved configuration, the master seed,
//! the tool version, the wall time, and a SHA-256 digest per output. Results
//! are parallelism-invariant: `--threads` changes the schedule, never the
//! bytes. Errors print as a single JSON object on standard error and map to
//! exit codes 2 (configuration), 3 (validation), 4 (estimation).

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::harmonic::{asi_report_harmonic, estimate_direct, WalkerConfig, DEFAULT_APPROX_MARGIN};
use crate::io::{load_system, write_output, OutputDigest, RunManifest};
use crate::perturb::{continuity_experiment, ContinuityConfig, PerturbMode};
use crate::symbolic::{asi_report, BernoulliMeasure, DerivProxyDiameter, UniformMeasure};
use crate::thermo::dimension_report;
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "nacifs",
    version,
    about = "Conformal Cantor systems in the disk: validation, harmonic measure, \
             dimension proxies, perturbation continuity"
)]
pub struct Cli {
    /// Worker threads (0 = one per core). Outputs do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Directory result files and the run manifest are written into.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check every generation: contraction band, image containment,
    /// pairwise separation.
    Validate {
        system: PathBuf,
        /// Generations to check (default: the full horizon).
        #[arg(long)]
        upto: Option<usize>,
    },
    /// Estimate cylinder harmonic measures with walk-on-spheres walkers.
    Measure {
        system: PathBuf,
        /// First generation of the estimated subtree.
        #[arg(long, default_value_t = 0)]
        offset: usize,
        /// Depth of the disk approximation the walkers are absorbed on.
        #[arg(long)]
        depth: usize,
        /// Depth the cylinder counts are recorded at.
        #[arg(long)]
        assign: usize,
        #[arg(long, default_value_t = 10_000)]
        walkers: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Entropy/contraction records by depth and the dimension interval.
    Dims {
        system: PathBuf,
        /// Cylinder measure: `harmonic`, `uniform`, or `bernoulli:p0,p1,...`.
        #[arg(long)]
        measure: String,
        /// Deepest record; records run over depths 1..=nmax.
        #[arg(long)]
        nmax: usize,
        /// Trailing records the dimension extremes are taken over.
        #[arg(long, default_value_t = 3)]
        window: usize,
        /// Walker budget (only used by `--measure harmonic`).
        #[arg(long, default_value_t = 10_000)]
        walkers: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sibling-influence decay: how fast conditionals forget the prefix
    /// across a shared buffer.
    Asi {
        system: PathBuf,
        /// `diam` (exact conditionals, sampled quadruples) or `harmonic`
        /// (one Monte-Carlo run probed exhaustively).
        #[arg(long)]
        functional: String,
        /// Largest buffer length; rows run over 0..=kmax.
        #[arg(long)]
        kmax: usize,
        /// Probe-extension depth beyond the buffer (`diam` only).
        #[arg(long, default_value_t = 2)]
        tail: usize,
        /// Sampled quadruples per buffer length (`diam` only).
        #[arg(long, default_value_t = 4_000)]
        budget: u64,
        /// Walker budget (`harmonic` only).
        #[arg(long, default_value_t = 10_000)]
        walkers: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Displace the maps along one ray and tabulate how the distances decay.
    Perturb {
        system: PathBuf,
        /// `translate-b`, `scale-a`, or `jiggle-c`.
        #[arg(long)]
        mode: String,
        /// Comma-separated step sizes, one table row each.
        #[arg(long, value_delimiter = ',', required = true)]
        epsilons: Vec<f64>,
        /// Depth of the compared harmonic count tables.
        #[arg(long, default_value_t = 3)]
        assign: usize,
        /// Longest parent word in the diameter-conditional sup.
        #[arg(long, default_value_t = 3)]
        diam_depth: usize,
        /// Trailing records behind the dimension columns.
        #[arg(long, default_value_t = 2)]
        window: usize,
        #[arg(long, default_value_t = 10_000)]
        walkers: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seed of the shared per-branch displacement directions.
        #[arg(long, default_value_t = 0)]
        directions_seed: u64,
    },
    /// Summarize a run manifest in plain text.
    Report { manifest: PathBuf },
}

/// Parses and executes a full command line, returning the process exit code.
/// All failures are also printed as one JSON object on standard error.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            emit_error_json("config", &e.to_string(), 2);
            return 2;
        }
    };
    if cli.threads > 0 {
        // Effective once per process; a later call against an existing pool
        // is a no-op, which is fine for the CLI's single-run lifetime.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            let code = e.exit_code();
            emit_error_json(e.kind(), &e.to_string(), code);
            code
        }
    }
}

fn emit_error_json(kind: &str, message: &str, exit: i32) {
    eprintln!(
        "{}",
        serde_json::json!({ "error": { "kind": kind, "message": message, "exit": exit } })
    );
}

/// Runs one parsed command to completion, writing outputs and the manifest.
pub fn execute(cli: Cli) -> Result<()> {
    let started = Instant::now();
    let out_dir = cli.out_dir.clone();
    match cli.command {
        Command::Validate { system, upto } => {
            let sys = load_system(&system)?;
            let upto = upto.unwrap_or_else(|| sys.horizon());
            let reports = sys.validate(upto)?;
            for rep in &reports {
                let worst = rep
                    .separation_gaps
                    .iter()
                    .map(|&(_, _, g)| g)
                    .fold(f64::INFINITY, f64::min);
                println!(
                    "generation {}: degree {}, {}, min separation gap {:.6}",
                    rep.generation,
                    rep.degree,
                    if rep.ok { "ok" } else { "FAIL" },
                    worst
                );
            }
            let json = to_json_bytes(&reports)?;
            let outputs = vec![write_output(&out_dir, "validation.json", &json)?];
            let config = serde_json::json!({ "system": sys.config(), "upto": upto });
            finish(&out_dir, "validate", config, 0, started, outputs)?;
            if let Some(bad) = reports.iter().find(|r| !r.ok) {
                return Err(Error::ValidationFailed {
                    generation: bad.generation,
                    detail: bad
                        .first_defect()
                        .unwrap_or_else(|| "unspecified defect".into()),
                });
            }
            println!("all {upto} generations valid");
            Ok(())
        }
        Command::Measure {
            system,
            offset,
            depth,
            assign,
            walkers,
            seed,
        } => {
            let sys = load_system(&system)?;
            let cfg = WalkerConfig {
                walkers,
                seed,
                ..WalkerConfig::default()
            };
            let est = estimate_direct(&sys, offset, depth, assign, &cfg)?;
            let mut csv = Vec::new();
            est.to_csv(&mut csv)?;
            let outputs = vec![write_output(&out_dir, "measure.csv", &csv)?];
            println!(
                "wrote measure.csv: {} cylinders at depth {assign}, {walkers} walkers, {} total steps",
                est.counts.len(),
                est.total_steps
            );
            let config = serde_json::json!({
                "system": sys.config(),
                "offset": offset, "depth": depth, "assign": assign, "walker_config": cfg,
            });
            finish(&out_dir, "measure", config, seed, started, outputs)
        }
        Command::Dims {
            system,
            measure,
            nmax,
            window,
            walkers,
            seed,
        } => {
            let sys = load_system(&system)?;
            if nmax == 0 {
                return Err(Error::Config("nmax must be at least 1".into()));
            }
            let kind = parse_measure(&measure)?;
            let diam = DerivProxyDiameter::new(&sys, 0, nmax)?;
            let depths: Vec<usize> = (1..=nmax).collect();
            let report = match &kind {
                MeasureKind::Uniform => {
                    let mu = UniformMeasure::new(0, sys.degrees(0, nmax)?);
                    dimension_report(&mu, &diam, &depths, window)?
                }
                MeasureKind::Bernoulli(probs) => {
                    let mu = BernoulliMeasure::new(0, vec![probs.clone(); nmax])?;
                    dimension_report(&mu, &diam, &depths, window)?
                }
                MeasureKind::Harmonic => {
                    let cfg = WalkerConfig {
                        walkers,
                        seed,
                        ..WalkerConfig::default()
                    };
                    let est =
                        estimate_direct(&sys, 0, nmax + DEFAULT_APPROX_MARGIN, nmax, &cfg)?;
                    dimension_report(&est, &diam, &depths, window)?
                }
            };
            let outputs = write_report_pair(&out_dir, "dims", &report, |w| report.to_csv(w))?;
            println!(
                "wrote dims.csv: ratio interval [{:.6}, {:.6}] over trailing window {}",
                report.hd_estimate, report.pd_estimate, report.window
            );
            let config = serde_json::json!({
                "system": sys.config(),
                "measure": measure, "nmax": nmax, "window": window,
                "walkers": walkers,
            });
            finish(&out_dir, "dims", config, seed, started, outputs)
        }
        Command::Asi {
            system,
            functional,
            kmax,
            tail,
            budget,
            walkers,
            seed,
        } => {
            let sys = load_system(&system)?;
            let ks: Vec<usize> = (0..=kmax).collect();
            let (outputs, summary) = match functional.as_str() {
                "diam" => {
                    // Leave the sampler room to vary the prefix length.
                    let depth = (kmax + tail + 2).min(sys.horizon());
                    let diam = DerivProxyDiameter::new(&sys, 0, depth)?;
                    let report = asi_report(&diam, &ks, tail, budget, seed)?;
                    let outputs =
                        write_report_pair(&out_dir, "asi", &report, |w| report.to_csv(w))?;
                    let summary = format!(
                        "decay fit q = {}, {} buffer lengths",
                        fmt_ratio(report.fit.q),
                        report.rows.len()
                    );
                    (outputs, summary)
                }
                "harmonic" => {
                    let cfg = WalkerConfig {
                        walkers,
                        seed,
                        ..WalkerConfig::default()
                    };
                    let report = asi_report_harmonic(&sys, &ks, &cfg)?;
                    let outputs =
                        write_report_pair(&out_dir, "asi", &report, |w| report.to_csv(w))?;
                    let summary = format!(
                        "decay fit q = {}, {} buffer lengths, {} walkers",
                        fmt_ratio(report.fit.q),
                        report.rows.len(),
                        walkers
                    );
                    (outputs, summary)
                }
                other => {
                    return Err(Error::Config(format!(
                        "unknown functional '{other}': use 'diam' or 'harmonic'"
                    )));
                }
            };
            println!("wrote asi.csv: {summary}");
            let config = serde_json::json!({
                "system": sys.config(),
                "functional": functional, "kmax": kmax, "tail": tail,
                "budget": budget, "walkers": walkers,
            });
            finish(&out_dir, "asi", config, seed, started, outputs)
        }
        Command::Perturb {
            system,
            mode,
            epsilons,
            assign,
            diam_depth,
            window,
            walkers,
            seed,
            directions_seed,
        } => {
            let sys = load_system(&system)?;
            let cfg = ContinuityConfig {
                mode: parse_mode(&mode)?,
                directions_seed,
                walkers: WalkerConfig {
                    walkers,
                    seed,
                    ..WalkerConfig::default()
                },
                assign_depth: assign,
                diam_depth,
                dim_depths: (1..=assign).collect(),
                dim_window: window,
            };
            let table = continuity_experiment(&sys, &epsilons, &cfg)?;
            let outputs =
                write_report_pair(&out_dir, "continuity", &table, |w| table.to_csv(w))?;
            println!(
                "wrote continuity.csv: {} steps, coefficient distances up to {:.6}",
                table.rows.len(),
                table.rows.iter().map(|r| r.d_hat).fold(0.0, f64::max)
            );
            let config = serde_json::json!({ "system": sys.config(), "experiment": cfg });
            finish(&out_dir, "perturb", config, seed, started, outputs)
        }
        Command::Report { manifest } => {
            let m = RunManifest::load(&manifest)?;
            println!("command:   {}", m.command);
            println!("version:   {}", m.version);
            println!("seed:      {}", m.seed);
            println!("wall time: {:.3} s", m.wall_time_secs);
            println!("outputs:");
            for o in &m.outputs {
                println!("  {}  {} bytes  sha256={}", o.path, o.bytes, o.sha256);
            }
            let config = serde_json::to_string_pretty(&m.config)
                .map_err(|e| Error::Format(e.to_string()))?;
            println!("config:\n{config}");
            Ok(())
        }
    }
}

#[derive(Debug)]
enum MeasureKind {
    Harmonic,
    Uniform,
    Bernoulli(Vec<f64>),
}

/// Renders an optional decay ratio; absent when too few rows were usable.
fn fmt_ratio(q: Option<f64>) -> String {
    match q {
        Some(v) => format!("{v:.4}"),
        None => "n/a".to_string(),
    }
}

fn parse_measure(s: &str) -> Result<MeasureKind> {
    match s {
        "harmonic" => Ok(MeasureKind::Harmonic),
        "uniform" => Ok(MeasureKind::Uniform),
        _ => {
            if let Some(list) = s.strip_prefix("bernoulli:") {
                let probs = list
                    .split(',')
                    .map(|p| {
                        p.trim().parse::<f64>().map_err(|_| {
                            Error::Config(format!("bad branch probability '{p}' in '{s}'"))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Ok(MeasureKind::Bernoulli(probs))
            } else {
                Err(Error::Config(format!(
                    "unknown measure '{s}': use 'harmonic', 'uniform', or 'bernoulli:p0,p1,...'"
                )))
            }
        }
    }
}

fn parse_mode(s: &str) -> Result<PerturbMode> {
    match s.replace('-', "_").as_str() {
        "translate_b" => Ok(PerturbMode::TranslateB),
        "scale_a" => Ok(PerturbMode::ScaleA),
        "jiggle_c" => Ok(PerturbMode::JiggleC),
        _ => Err(Error::Config(format!(
            "unknown mode '{s}': use 'translate-b', 'scale-a', or 'jiggle-c'"
        ))),
    }
}

fn to_json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Format(format!("result serialization: {e}")))?;
    text.push('\n');
    Ok(text.into_bytes())
}

/// Writes `<stem>.csv` (via the given writer closure) and `<stem>.json`
/// (full serialization) and returns both digest records.
fn write_report_pair<T, F>(
    dir: &Path,
    stem: &str,
    value: &T,
    mut csv: F,
) -> Result<Vec<OutputDigest>>
where
    T: serde::Serialize,
    F: FnMut(&mut Vec<u8>) -> Result<()>,
{
    let mut buf = Vec::new();
    csv(&mut buf)?;
    Ok(vec![
        write_output(dir, &format!("{stem}.csv"), &buf)?,
        write_output(dir, &format!("{stem}.json"), &to_json_bytes(value)?)?,
    ])
}

fn finish(
    out_dir: &Path,
    command: &str,
    config: serde_json::Value,
    seed: u64,
    started: Instant,
    outputs: Vec<OutputDigest>,
) -> Result<()> {
    RunManifest {
        command: command.to_string(),
        config,
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_secs: started.elapsed().as_secs_f64(),
        outputs,
    }
    .write(out_dir)?;
    Ok(())
}
