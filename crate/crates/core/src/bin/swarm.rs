use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use swarm_reshape::config::SimMode;
use swarm_reshape::output::reformation_difference;
use swarm_reshape::{
    load_scenario, run, verify, write_comparison, write_outputs, SimulationResult,
};

#[derive(Parser)]
#[command(
    name = "swarm",
    version,
    about = "V-formation swarm simulator with gap reshaping"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write trajectories, distances, events and a summary.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, env = "SWARM_OUT_DIR")]
        out: PathBuf,
        /// Overrides the mode in the scenario file.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(["dfrpsr", "baseline"]))]
        mode: Option<String>,
    },
    /// Run both modes and write comparison.json.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, env = "SWARM_OUT_DIR")]
        out: PathBuf,
    },
    /// Run the built-in oracle suites.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn fmt_time(t: Option<f64>) -> String {
    t.map_or_else(|| "never".to_string(), |t| format!("{t:.1} s"))
}

fn report(r: &SimulationResult) {
    println!(
        "{}: completed={} formation restored {} destination {}",
        r.mode.as_str(),
        r.completed,
        fmt_time(r.reformation_time()),
        fmt_time(r.mission_time())
    );
}

fn execute(command: Command) -> swarm_reshape::Result<bool> {
    match command {
        Command::Run {
            scenario,
            out,
            mode,
        } => {
            let mut config = load_scenario(&scenario)?;
            if let Some(mode) = mode {
                config.mode = mode.parse::<SimMode>().expect("clap restricts the values");
            }
            let result = run(&config)?;
            write_outputs(&result, &out)?;
            report(&result);
            Ok(true)
        }
        Command::Compare { scenario, out } => {
            let mut config = load_scenario(&scenario)?;
            config.mode = SimMode::Dfrpsr;
            let dfrpsr = run(&config)?;
            config.mode = SimMode::BaselineSenseAvoid;
            let baseline = run(&config)?;
            let path = write_comparison(&dfrpsr, &baseline, &out)?;
            report(&dfrpsr);
            report(&baseline);
            if let Some(d) = reformation_difference(&dfrpsr, &baseline) {
                println!("baseline restores {d:.1} s later");
            }
            println!("wrote {}", path.display());
            Ok(true)
        }
        Command::Verify { seed } => {
            let mut ok = true;
            for suite in verify::run_all(seed) {
                let status = if suite.passed() { "ok" } else { "FAILED" };
                println!(
                    "{:<20} {status} ({} checked, {} skipped)",
                    suite.name, suite.checked, suite.skipped
                );
                for f in &suite.failures {
                    println!("    {f}");
                }
                ok &= suite.passed();
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
