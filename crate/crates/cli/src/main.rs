//! `fiberloom` command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fiberloom::circuits::{build_named, derive_all_byproducts, CircuitParams, CATALOG};
use fiberloom::resources::{estimate_resources, EstimateConfig, LossModel, Strategy};
use fiberloom::scenario::{parse_scenario, run_scenario};
use fiberloom::selftest;

#[derive(Parser)]
#[command(name = "fiberloom", version, about = "Time-bin photonic cluster-state simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its results.
    Run {
        scenario: PathBuf,
        /// Output directory (created if missing).
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Estimate seed consumption for growing a linear cluster.
    Estimate {
        /// Target chain length (at least 2).
        #[arg(long)]
        target: usize,
        /// TYPE1_GREEDY or TYPE2_REDUNDANT.
        #[arg(long, value_parser = parse_strategy)]
        strategy: Strategy,
        /// Loss probability of every active component (switches, phase modulators).
        #[arg(long, default_value_t = 0.0)]
        loss: f64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// Also write `estimate.json` into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the named circuits.
    Catalog,
    /// Run the built-in oracle checks.
    Selftest,
    /// Print freshly derived fusion byproduct tables.
    Byproducts,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    Strategy::from_name(s).ok_or_else(|| format!("unknown strategy `{s}` (TYPE1_GREEDY, TYPE2_REDUNDANT)"))
}

fn write_files(dir: &Path, files: &[(String, String)]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, body) in files {
        std::fs::write(dir.join(name), body)?;
    }
    Ok(())
}

fn run(scenario: &Path, out: &Path) -> ExitCode {
    let text = match std::fs::read_to_string(scenario) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", scenario.display());
            return ExitCode::from(1);
        }
    };
    let s = match parse_scenario(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", scenario.display());
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let output = match run_scenario(&s) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Err(e) = write_files(out, &output.files) {
        eprintln!("error: cannot write to {}: {e}", out.display());
        return ExitCode::from(1);
    }
    println!("{}: {} trials", s.name, s.trials);
    if let Some(sx) = &output.summary.success {
        println!("success exact={:.6} empirical={:.6} sigma={:.6}", sx.exact, sx.empirical, sx.sigma);
    }
    for (name, _) in &output.files {
        println!("wrote {}", out.join(name).display());
    }
    ExitCode::SUCCESS
}

fn estimate(cfg: EstimateConfig, out: Option<&Path>) -> ExitCode {
    let report = match estimate_resources(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    println!("target {} strategy {}", report.target, report.strategy.name());
    println!("heralding probability {:.6}", report.heralding_probability);
    println!("expected seeds {:.4} +- {:.4}", report.expected_seeds, report.std_error);
    println!(
        "percentiles p50={} p90={} p99={} max={}",
        report.p50, report.p90, report.p99, report.max
    );
    if report.censored > 0 {
        println!("censored trials {}", report.censored);
    }
    if let Some(dir) = out {
        let json = serde_json::to_string_pretty(&report).expect("report serialises") + "\n";
        if let Err(e) = write_files(dir, &[("estimate.json".into(), json)]) {
            eprintln!("error: cannot write to {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    }
    ExitCode::SUCCESS
}

fn catalog() -> ExitCode {
    for entry in CATALOG {
        let counts = match build_named(entry.name, &CircuitParams::default()) {
            Ok(c) => c
                .component_counts()
                .iter()
                .map(|(k, n)| format!("{}x{n}", k.name()))
                .collect::<Vec<_>>()
                .join(" "),
            Err(e) => format!("({e})"),
        };
        println!("{:<13} {}\n{:<13} [{counts}]", entry.name, entry.summary, "");
    }
    ExitCode::SUCCESS
}

fn run_selftest() -> ExitCode {
    let checks = selftest::run_all();
    let mut failed = 0;
    for c in &checks {
        println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, out } => run(&scenario, &out),
        Command::Estimate {
            target,
            strategy,
            loss,
            trials,
            seed,
            out,
        } => {
            let cfg = EstimateConfig {
                target,
                strategy,
                loss: LossModel::active(loss),
                trials,
                seed,
                success_override: None,
            };
            estimate(cfg, out.as_deref())
        }
        Command::Catalog => catalog(),
        Command::Selftest => run_selftest(),
        Command::Byproducts => match derive_all_byproducts() {
            Ok(t) => {
                print!("{t}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}
