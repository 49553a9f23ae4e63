//! Thin command-line front end: `run`, `sweep`, `enumerate`, and `check`.
//! All the work happens in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use qkd_relay::acceptance;
use qkd_relay::analytics::{enumerate_patterns, naive_end_to_end_fraction, useful_fraction};
use qkd_relay::config::{mode_tag, parse_config, ModeName, Overrides};
use qkd_relay::run::{persist, run, run_sweep, summary_document, sweep_index};

#[derive(Parser)]
#[command(name = "qkd-relay", version, about = "BB84 relay-chain simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one simulation run and print (or write) its summary.
    Run(RunArgs),
    /// Expand the config's sweep axes and execute every child run.
    Sweep(SweepArgs),
    /// Print the exhaustive basis-pattern table for an n-node chain.
    Enumerate(EnumerateArgs),
    /// Run the acceptance suite and print one line per criterion.
    Check,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    slots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-hop transmittance: one value, or one per hop (comma separated).
    #[arg(long, value_delimiter = ',')]
    transmittance: Option<Vec<f64>>,
    /// Relay mode: naive, padding, or delay.
    #[arg(long)]
    mode: Option<String>,
    /// Delay-mode batch size.
    #[arg(long)]
    batch_size: Option<usize>,
    /// Receiver viability threshold in [0, 1].
    #[arg(long)]
    threshold: Option<f64>,
    /// Attach the intercept/resend eavesdropper to this link.
    #[arg(long)]
    eve_link: Option<usize>,
    /// Also write the per-slot CSV trace (needs --out).
    #[arg(long)]
    trace: bool,
    /// Write summary, records, and announcements into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML config file with a [sweep] table.
    #[arg(long)]
    config: PathBuf,
    /// Write child documents and the sweep index into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    /// Chain length, 2..=12 nodes.
    #[arg(long, default_value_t = 3)]
    nodes: usize,
}

fn overrides_from(args: &RunArgs) -> Result<Overrides> {
    let mode = match args.mode.as_deref() {
        None => None,
        Some("naive") => Some(ModeName::Naive),
        Some("padding") => Some(ModeName::Padding),
        Some("delay") => Some(ModeName::Delay),
        Some(other) => bail!("unknown mode {other:?}; expected naive, padding, or delay"),
    };
    Ok(Overrides {
        n_nodes: args.nodes,
        slots: args.slots,
        seed: args.seed,
        transmittance: args.transmittance.clone(),
        mode,
        batch_size: args.batch_size,
        threshold: args.threshold,
        eve_link: args.eve_link,
        trace: args.trace.then_some(true),
        out_dir: args.out.clone(),
    })
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let overrides = overrides_from(&args)?;
    let parsed = parse_config(args.config.as_deref(), &overrides)?;
    let output = run(&parsed.run);
    print!("{}", summary_document(&output));
    if let Some(dir) = &output.config.out_dir {
        let paths = persist(&output, dir, "")
            .with_context(|| format!("writing outputs under {}", dir.display()))?;
        eprintln!("wrote {}", paths.summary.display());
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let overrides = Overrides {
        out_dir: args.out.clone(),
        ..Overrides::default()
    };
    let parsed = parse_config(Some(&args.config), &overrides)?;
    let Some(axes) = parsed.sweep else {
        bail!("config {} has no [sweep] table", args.config.display());
    };
    let results = run_sweep(&parsed.run, &axes);
    println!(
        "{:>5} {:>3} {:>6} {:>8} {:>10} {:>10} {:>8}",
        "child", "n", "xi", "mode", "naive", "bridged", "qber"
    );
    for r in &results {
        let s = &r.output.summary;
        println!(
            "{:>5} {:>3} {:>6.3} {:>8} {:>10} {:>10} {:>8}",
            r.child.index,
            r.child.config.n_nodes,
            r.child.config.transmittance[0],
            mode_tag(r.child.config.mode),
            s.naive_fraction
                .map_or("absent".into(), |v| format!("{v:.4}")),
            s.bridged_fraction
                .map_or("absent".into(), |v| format!("{v:.4}")),
            s.qber.map_or("absent".into(), |v| format!("{v:.4}")),
        );
    }
    if let Some(dir) = &parsed.run.out_dir {
        std::fs::create_dir_all(dir)?;
        for r in &results {
            persist(&r.output, dir, &r.prefix)
                .with_context(|| format!("writing child {}", r.child.index))?;
        }
        let index_path = dir.join("sweep-index.txt");
        std::fs::write(&index_path, sweep_index(&results))?;
        eprintln!(
            "wrote {} children and {}",
            results.len(),
            index_path.display()
        );
    }
    Ok(())
}

fn cmd_enumerate(args: EnumerateArgs) -> Result<()> {
    let table = enumerate_patterns(args.nodes)?;
    println!("basis patterns for a {}-node chain:", args.nodes);
    for outcome in &table.outcomes {
        let pattern: String = outcome.bases.iter().map(|b| b.to_string()).collect();
        let runs = if outcome.key_runs.is_empty() {
            "no key".to_string()
        } else {
            outcome
                .key_runs
                .iter()
                .map(|&(s, e)| format!("nodes {s}..={e}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        println!("  {pattern}  {runs}");
    }
    println!(
        "useful fraction: {} (formula {}); end-to-end fraction: {} (formula {})",
        table.useful_fraction(),
        useful_fraction(args.nodes)?,
        table.end_to_end_fraction(),
        naive_end_to_end_fraction(args.nodes)?,
    );
    Ok(())
}

fn cmd_check() -> ExitCode {
    let reports = acceptance::run_all();
    let mut failures = 0;
    for report in &reports {
        println!("{}", report.line());
        if !report.passed {
            failures += 1;
        }
    }
    if failures == 0 {
        println!("all {} criteria passed", reports.len());
        ExitCode::SUCCESS
    } else {
        println!("{failures} of {} criteria failed", reports.len());
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Check => return cmd_check(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
