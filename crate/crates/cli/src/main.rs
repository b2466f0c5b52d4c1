use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use finex_cli::config::{parse_group_sizes, parse_mode};
use finex_cli::survey::parse_label_list;
use finex_cli::{parse_survey, run_command, Command, OutputFormat, RunConfig};

/// Predict the make-up of a finite population from a survey of it.
///
/// The default prior is uniform over population histograms. Under it the
/// add-one (HT) approximation is exact.
#[derive(Parser)]
#[command(name = "finex", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact predictive distribution of the next respondent, with approximations.
    Predict(Args),
    /// Expected population proportions.
    Population(Args),
    /// Stratified population proportions from group samples of known size.
    Groups(Args),
    /// Compare predicting merged labels before and after merging.
    MergeDemo(Args),
    /// β, γ and their certificates.
    Beta(Args),
    /// Run the randomized verification suites.
    Verify(Args),
    /// Draw a sample from the prior.
    Simulate(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Survey CSV with header `label[,group]`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Label list, one per line or comma-separated, fixing order and k.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Population size.
    #[arg(long)]
    m: Option<u64>,
    /// Group sizes as `g=size,...`.
    #[arg(long)]
    group_sizes: Option<String>,
    /// uniform | iid:p1,p2,... | atoms:PATH
    #[arg(long, default_value = "uniform")]
    prior: String,
    /// rational | float
    #[arg(long, default_value = "rational")]
    mode: String,
    /// json | text
    #[arg(long, default_value = "json")]
    output: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Label merge as `1->1,2->1,3->2`.
    #[arg(long)]
    merge: Option<String>,
    /// Exact prediction under the prior instead of the HT approximation.
    #[arg(long)]
    exact: bool,
    /// Number of items to simulate.
    #[arg(long)]
    n: Option<u64>,
    /// Verification suite name.
    #[arg(long)]
    suite: Option<String>,
    /// Number of generated cases per suite when `--seed` is given.
    #[arg(long, default_value_t = 20)]
    cases: usize,
    /// Write CSV data for external plotting to this path.
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

fn split(cmd: Cmd) -> (Command, Args) {
    match cmd {
        Cmd::Predict(a) => (Command::Predict, a),
        Cmd::Population(a) => (Command::Population, a),
        Cmd::Groups(a) => (Command::Groups, a),
        Cmd::MergeDemo(a) => (Command::MergeDemo, a),
        Cmd::Beta(a) => (Command::Beta, a),
        Cmd::Verify(a) => (Command::Verify, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
    }
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn config(args: &Args) -> Result<RunConfig> {
    let explicit_labels = args.labels.as_ref().map(|p| parse_label_list(&read(p)?)).transpose()?;
    Ok(RunConfig {
        m: args.m,
        group_sizes: args.group_sizes.as_deref().map(parse_group_sizes).transpose()?,
        prior: args.prior.parse()?,
        mode: parse_mode(&args.mode)?,
        output: args.output.parse()?,
        seed: args.seed,
        merge: args.merge.clone(),
        exact: args.exact,
        n: args.n,
        suite: args.suite.as_deref().map(str::parse).transpose()?,
        cases: args.cases,
        explicit_labels,
    })
}

fn run(command: Command, args: Args) -> Result<bool> {
    let cfg = config(&args)?;
    let data = match &args.input {
        Some(path) => Some(parse_survey(&read(path)?, cfg.explicit_labels.clone()).with_context(|| path.display().to_string())?),
        None if command.needs_survey() => anyhow::bail!("{command} needs --input"),
        None => None,
    };
    let report = run_command(command, &cfg, data.as_ref())?;
    match cfg.output {
        OutputFormat::Json => println!("{}", serde_json::to_string_pretty(&report.json)?),
        OutputFormat::Text => print!("{}", report.text),
    }
    if let (Some(path), Some(plot)) = (&args.plot_data, &report.plot) {
        std::fs::write(path, plot).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(report.success)
}

fn zero_probability(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        matches!(
            c.downcast_ref::<finex_core::Error>(),
            Some(finex_core::Error::ZeroProbabilitySample)
        )
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = split(cli.command);
    match run(command, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if zero_probability(&e) { 3 } else { 2 })
        }
    }
}
