use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use landau_cli::acceptance::{run_suite, select, Context};
use landau_cli::artifacts::{to_json, Artifacts};
use landau_cli::config::{parse_config, Scenario, SimConfig};
use landau_cli::scenarios::{run_named, write_kernel_table};

/// Weakly collisional Vlasov-Poisson scenarios and acceptance checks.
#[derive(Parser)]
#[command(name = "landau", version)]
struct Cli {
    /// Output directory (overrides the config and LANDAU_OUT).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for randomized fields and cases (overrides the config).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Only print failures and errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario named in a config file.
    Run { config: PathBuf },
    /// Run the acceptance criteria: `all`, or names/numbers separated by commas.
    Acceptance { suite: Option<String> },
    /// Stability margin over the configured modes.
    ScanStability { config: PathBuf },
    /// Echo kernel table on the configured time grid.
    KernelTable { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load(cli: &Cli, path: &Path) -> Result<(SimConfig, String, PathBuf), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut cfg = parse_config(path).map_err(|e| e.to_string())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = output_dir(cli, Some(&cfg));
    Ok((cfg, text, out))
}

fn output_dir(cli: &Cli, cfg: Option<&SimConfig>) -> PathBuf {
    if let Some(o) = &cli.out {
        return o.clone();
    }
    if let Some(o) = std::env::var_os("LANDAU_OUT") {
        return PathBuf::from(o);
    }
    cfg.map_or_else(|| PathBuf::from("out/acceptance"), |c| c.output.clone())
}

fn execute(cli: &Cli) -> Result<bool, String> {
    match &cli.command {
        Command::Run { config } => {
            let (cfg, text, out) = load(cli, config)?;
            scenario(cli, cfg.scenario, &cfg, &text, &out)
        }
        Command::ScanStability { config } => {
            let (cfg, text, out) = load(cli, config)?;
            scenario(cli, Scenario::StabilityScan, &cfg, &text, &out)
        }
        Command::KernelTable { config } => {
            let (cfg, _, out) = load(cli, config)?;
            let mut art = Artifacts::new(&out).map_err(|e| e.to_string())?;
            let checks = write_kernel_table(&cfg, &mut art).map_err(|e| e.to_string())?;
            let passed = checks.iter().all(|c| c.passed);
            for c in &checks {
                if !cli.quiet || !c.passed {
                    println!("{}", c.summary());
                }
            }
            if !cli.quiet {
                println!("wrote {}", out.join("kernel_table.csv").display());
            }
            Ok(passed)
        }
        Command::Acceptance { suite } => {
            let selected = select(suite.as_deref().unwrap_or("all"))?;
            let ctx = Context::new(cli.seed);
            let report = run_suite(&selected, &ctx, |o| {
                if !cli.quiet || !o.passed {
                    println!("{}", o.line());
                }
            });
            let out = output_dir(cli, None);
            std::fs::create_dir_all(&out).map_err(|e| e.to_string())?;
            let json = to_json(&report).map_err(|e| e.to_string())?;
            std::fs::write(out.join("acceptance.json"), json).map_err(|e| e.to_string())?;
            if !cli.quiet {
                let n = report.outcomes.iter().filter(|o| o.passed).count();
                println!("{n}/{} criteria passed in {:.1}s", report.outcomes.len(), report.wall_time_s);
            }
            Ok(report.passed)
        }
    }
}

fn scenario(cli: &Cli, which: Scenario, cfg: &SimConfig, text: &str, out: &Path) -> Result<bool, String> {
    let report = run_named(which, cfg, text, out).map_err(|e| e.to_string())?;
    for c in &report.criteria {
        if !cli.quiet || !c.passed {
            println!("{}", c.summary());
        }
    }
    if !cli.quiet {
        println!(
            "{} {} in {:.2}s, {} files in {}",
            if report.passed { "passed" } else { "FAILED" },
            which,
            report.wall_time_s,
            report.files.len() + 1,
            out.display()
        );
    }
    Ok(report.passed)
}
