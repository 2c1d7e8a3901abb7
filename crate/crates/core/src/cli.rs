//! Command-line experiment runner.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::montecarlo::simulate_secrecy;
use crate::optimizer::{benchmark_suite, sweep_lproc, sweep_target_rate, SweepPoint, SweepResult};
use crate::scenario::{apply_override, parse_document, read_document, Resolved, Scenario, SEED_ENV};
use crate::selfcheck;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_SELF_CHECK: u8 = 2;

pub const CSV_HEADER: [&str; 7] = [
    "parameter",
    "sop_mean",
    "sop_stderr",
    "throughput_mean",
    "throughput_stderr",
    "n_trials",
    "seed",
];

#[derive(Debug, Parser)]
#[command(name = "relay-secrecy", version, about = "Secrecy outage and secure throughput of a full-duplex AF relay wiretap link with cyclic-prefix artificial noise")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (TOML, or a JSON sidecar from a previous run).
    #[arg(long, value_name = "FILE")]
    pub scenario: Option<PathBuf>,
    /// Override a scenario key, e.g. `--set system.theta=0.25`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output path prefix.
    #[arg(long, value_name = "PREFIX")]
    pub output: Option<String>,
    /// Monte Carlo trials per point.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the scenario as configured.
    Single(Common),
    /// Sweep the processing delay with N_cp = L_proc.
    SweepLproc {
        #[command(flatten)]
        common: Common,
        /// Comma-separated grid, overriding run.lproc_grid.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
    },
    /// Sweep the target secrecy rate.
    SweepRate {
        #[command(flatten)]
        common: Common,
        /// Comma-separated rates, overriding run.rate_grid.
        #[arg(long, value_delimiter = ',')]
        rates: Option<Vec<f64>>,
    },
    /// Proposed scheme against the three reference schemes.
    Benchmarks {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
    },
    /// Run the numerical consistency suites.
    SelfCheck {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Builds the scenario: file values, then the seed environment variable,
/// then `--set` overrides, then dedicated flags.
pub fn resolve(common: &Common) -> Result<Resolved, String> {
    let mut doc = match &common.scenario {
        Some(path) => read_document(path)?,
        None => toml::Table::new(),
    };
    if let Ok(raw) = std::env::var(SEED_ENV) {
        let seed: u64 = raw
            .trim()
            .parse()
            .map_err(|_| format!("{SEED_ENV}={raw} is not an unsigned integer"))?;
        apply_override(&mut doc, &format!("run.seed={seed}"))?;
    }
    for assignment in &common.overrides {
        apply_override(&mut doc, assignment)?;
    }
    if let Some(n) = common.trials {
        apply_override(&mut doc, &format!("run.n_trials={n}"))?;
    }
    if let Some(seed) = common.seed {
        apply_override(&mut doc, &format!("run.seed={seed}"))?;
    }
    if let Some(out) = &common.output {
        let mut run = doc
            .remove("run")
            .and_then(|v| v.as_table().cloned())
            .unwrap_or_default();
        run.insert("output".into(), toml::Value::String(out.clone()));
        doc.insert("run".into(), toml::Value::Table(run));
    }
    parse_document(doc)?.resolve()
}

pub fn write_csv(path: &Path, sweep: &SweepResult, seed: u64) -> Result<(), String> {
    let err = |e: csv::Error| format!("cannot write {}: {e}", path.display());
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(CSV_HEADER).map_err(err)?;
    for p in &sweep.points {
        w.write_record(csv_row(p, seed)).map_err(err)?;
    }
    w.flush().map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn csv_row(p: &SweepPoint, seed: u64) -> [String; 7] {
    [
        p.parameter.to_string(),
        p.sop.mean.to_string(),
        p.sop.stderr.to_string(),
        p.throughput.mean.to_string(),
        p.throughput.stderr.to_string(),
        p.sop.n_trials.to_string(),
        seed.to_string(),
    ]
}

pub fn write_sidecar(path: &Path, resolved: &Resolved) -> Result<(), String> {
    let json = serde_json::to_string_pretty(&Scenario::from_resolved(resolved))
        .map_err(|e| format!("cannot serialise scenario: {e}"))?;
    std::fs::write(path, json + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn prepare_prefix(prefix: &str) -> Result<(), String> {
    match Path::new(prefix).parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir)
            .map_err(|e| format!("cannot create {}: {e}", dir.display())),
        _ => Ok(()),
    }
}

fn print_sweep(label: &str, sweep: &SweepResult) {
    println!("{label}");
    println!("  {:>10} {:>10} {:>10} {:>12} {:>10}", "parameter", "sop", "±se", "throughput", "±se");
    for p in &sweep.points {
        println!(
            "  {:>10} {:>10.4} {:>10.4} {:>12.4} {:>10.4}",
            p.parameter, p.sop.mean, p.sop.stderr, p.throughput.mean, p.throughput.stderr
        );
    }
    println!("  argmax {} with throughput {:.4}", sweep.argmax, sweep.max_throughput.mean);
}

fn finish(resolved: &Resolved, outputs: &[(&str, &SweepResult)]) -> Result<(), String> {
    let prefix = &resolved.run.output;
    prepare_prefix(prefix)?;
    for (label, sweep) in outputs {
        let path = if label.is_empty() {
            PathBuf::from(format!("{prefix}.csv"))
        } else {
            PathBuf::from(format!("{prefix}.{label}.csv"))
        };
        write_csv(&path, sweep, resolved.run.seed)?;
        println!("wrote {}", path.display());
    }
    let sidecar = PathBuf::from(format!("{prefix}.json"));
    write_sidecar(&sidecar, resolved)?;
    println!("wrote {}", sidecar.display());
    Ok(())
}

fn run_command(command: Command) -> Result<u8, String> {
    let lib = |e: crate::Error| e.to_string();
    match command {
        Command::Single(common) => {
            let r = resolve(&common)?;
            let cfg = &r.config;
            let samples = simulate_secrecy(cfg, r.run.n_trials, r.run.seed).map_err(lib)?;
            let point = SweepPoint {
                parameter: cfg.l_proc as f64,
                throughput: samples.throughput(cfg.target_rate).map_err(lib)?,
                sop: samples.sop(cfg.target_rate).map_err(lib)?,
            };
            let sweep = SweepResult::from_points(vec![point]).map_err(lib)?;
            print_sweep("single", &sweep);
            println!("  mean secrecy rate {:.4}", samples.mean_secrecy_rate());
            finish(&r, &[("", &sweep)])?;
        }
        Command::SweepLproc { common, grid } => {
            let r = resolve(&common)?;
            let grid = grid.unwrap_or_else(|| r.run.lproc_grid.clone());
            let sweep = sweep_lproc(&r.config, &grid, r.run.n_trials, r.run.seed).map_err(lib)?;
            print_sweep("sweep-lproc", &sweep);
            finish(&r, &[("", &sweep)])?;
        }
        Command::SweepRate { common, rates } => {
            let r = resolve(&common)?;
            let rates = rates.unwrap_or_else(|| r.run.rate_grid.clone());
            let sweep = sweep_target_rate(&r.config, &rates, r.run.n_trials, r.run.seed).map_err(lib)?;
            print_sweep("sweep-rate", &sweep);
            finish(&r, &[("", &sweep)])?;
        }
        Command::Benchmarks { common, grid } => {
            let r = resolve(&common)?;
            let grid = grid.unwrap_or_else(|| r.run.lproc_grid.clone());
            let suite = benchmark_suite(&r.config, &grid, r.run.n_trials, r.run.seed).map_err(lib)?;
            let labeled = suite.labeled();
            for (label, sweep) in &labeled {
                print_sweep(label, sweep);
            }
            finish(&r, &labeled)?;
        }
        Command::SelfCheck { seed } => {
            let reports = selfcheck::run_all(seed).map_err(lib)?;
            let mut ok = true;
            for rep in &reports {
                ok &= rep.passed();
                println!(
                    "{:<20} {:>4} cases  max residual {:.3e}  threshold {:.0e}  {}",
                    rep.name,
                    rep.cases,
                    rep.max_residual,
                    rep.threshold,
                    if rep.passed() { "PASS" } else { "FAIL" }
                );
            }
            return Ok(if ok { EXIT_OK } else { EXIT_SELF_CHECK });
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run_command(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}
