use clap::{Args, Parser, Subcommand};
use memtrans_core::config::{Overrides, Scenario};
use memtrans_core::io::{write_run, Summary};
use memtrans_core::plot::plot_run;
use memtrans_core::run::simulate;
use memtrans_core::verify::{run_suite, Suite};
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 1;
const EXIT_SOLVER: u8 = 2;

/// Memristor charge-transport simulator with free-energy diagnostics.
#[derive(Parser)]
#[command(name = "memtrans", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its step log, dumps and summary.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
        /// Write into this directory instead of the configured one.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and print its pass/fail table.
    Verify {
        /// appendix-a, lemma-2-4, lemma-2-6, poincare, statistics-roundtrip or all
        suite: String,
    },
    /// Render SVG figures for a run directory.
    Plot { dir: PathBuf },
    /// Run every combination of the listed variants in parallel.
    Sweep {
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long, value_delimiter = ',')]
        dts: Vec<f64>,
        #[arg(long = "cells", value_delimiter = ',')]
        cells: Vec<usize>,
        #[arg(long)]
        tend: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct OverrideArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    tend: Option<f64>,
}

impl From<&OverrideArgs> for Overrides {
    fn from(a: &OverrideArgs) -> Self {
        Overrides {
            seed: a.seed,
            dt: a.dt,
            cells: a.cells,
            final_time: a.tend,
        }
    }
}

enum Outcome {
    Completed(Summary),
    SolverFailed(Summary),
}

fn print_summary(dir: &Path, s: &Summary) {
    println!("{}: {} in {}", s.name, s.status, dir.display());
    println!("  steps {} (rejected {}), t = {}", s.steps, s.rejected_steps, s.final_time);
    println!("  E: {} -> {}, total dissipation {}", s.initial_energy, s.final_energy, s.total_dissipation);
    println!(
        "  energy_decay: {} (lambda {}, {} pass / {} fail)",
        s.energy_decay, s.lambda, s.verdicts_passed, s.verdicts_failed
    );
    println!("  mass_D drift {:e}, bounds {}", s.mass_d_drift, s.bounds);
    if let Some(e) = &s.error {
        println!("  error: {e}");
    }
}

fn execute(scenario: &Scenario, dir: &Path) -> Result<Outcome, String> {
    let (out, error) = match simulate(scenario) {
        Ok(out) => (out, None),
        Err(f) => (*f.partial, Some(f.error.to_string())),
    };
    let failed = error.is_some();
    let summary = write_run(dir, scenario, &out, error).map_err(|e| e.to_string())?;
    Ok(if failed {
        Outcome::SolverFailed(summary)
    } else {
        Outcome::Completed(summary)
    })
}

fn cmd_run(config: &Path, overrides: Overrides, out: Option<PathBuf>) -> ExitCode {
    let scenario = match Scenario::load(config, &overrides) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error in {}: {e}", config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let dir = out.unwrap_or_else(|| scenario.output_dir());
    match execute(&scenario, &dir) {
        Ok(Outcome::Completed(s)) => {
            print_summary(&dir, &s);
            ExitCode::SUCCESS
        }
        Ok(Outcome::SolverFailed(s)) => {
            print_summary(&dir, &s);
            eprintln!("solver failure: {}", s.error.as_deref().unwrap_or("unknown"));
            ExitCode::from(EXIT_SOLVER)
        }
        Err(e) => {
            eprintln!("cannot write results: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn cmd_verify(name: &str) -> ExitCode {
    let suite: Suite = match name.parse() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    let report = run_suite(suite);
    print!("{report}");
    if report.pass() {
        println!("verify {suite}: PASS");
        ExitCode::SUCCESS
    } else {
        println!("verify {suite}: FAIL");
        ExitCode::from(1)
    }
}

fn cmd_plot(dir: &Path) -> ExitCode {
    match plot_run(dir) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}

/// Variant label used as the sub-directory name.
fn label(o: &Overrides) -> String {
    let mut parts = Vec::new();
    if let Some(s) = o.seed {
        parts.push(format!("seed-{s}"));
    }
    if let Some(dt) = o.dt {
        parts.push(format!("dt-{dt}"));
    }
    if let Some(c) = o.cells {
        parts.push(format!("cells-{c}"));
    }
    if parts.is_empty() {
        "base".into()
    } else {
        parts.join("_")
    }
}

fn cmd_sweep(
    config: &Path,
    seeds: &[u64],
    dts: &[f64],
    cells: &[usize],
    tend: Option<f64>,
    out: Option<PathBuf>,
) -> ExitCode {
    fn axis<T: Copy>(v: &[T]) -> Vec<Option<T>> {
        if v.is_empty() {
            vec![None]
        } else {
            v.iter().copied().map(Some).collect()
        }
    }
    let mut variants = Vec::new();
    for seed in axis(seeds) {
        for dt in axis(dts) {
            for c in axis(cells) {
                variants.push(Overrides {
                    seed,
                    dt,
                    cells: c,
                    final_time: tend,
                });
            }
        }
    }
    let mut scenarios = Vec::new();
    for o in &variants {
        match Scenario::load(config, o) {
            Ok(s) => scenarios.push((label(o), s)),
            Err(e) => {
                eprintln!("config error in {} ({}): {e}", config.display(), label(o));
                return ExitCode::from(EXIT_CONFIG);
            }
        }
    }
    let root = out.unwrap_or_else(|| scenarios[0].1.output_dir());
    let results: Vec<(String, Result<Outcome, String>)> = scenarios
        .par_iter()
        .map(|(l, s)| (l.clone(), execute(s, &root.join(l))))
        .collect();
    let mut code = ExitCode::SUCCESS;
    for (l, r) in results {
        match r {
            Ok(Outcome::Completed(s)) => println!("{l}: completed, energy_decay {}, bounds {}", s.energy_decay, s.bounds),
            Ok(Outcome::SolverFailed(s)) => {
                println!("{l}: failed: {}", s.error.unwrap_or_default());
                code = ExitCode::from(EXIT_SOLVER);
            }
            Err(e) => {
                eprintln!("{l}: cannot write results: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        }
    }
    code
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            // usage errors share the config-error code; 2 is kept for solver failures
            return if usage { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match &cli.command {
        Command::Run { config, overrides, out } => cmd_run(config, overrides.into(), out.clone()),
        Command::Verify { suite } => cmd_verify(suite),
        Command::Plot { dir } => cmd_plot(dir),
        Command::Sweep {
            config,
            seeds,
            dts,
            cells,
            tend,
            out,
        } => cmd_sweep(config, seeds, dts, cells, *tend, out.clone()),
    }
}
