use std::path::PathBuf;
use std::process::ExitCode;

use ackhold_cli::csvout::Table;
use ackhold_cli::{cmd_rto_curve, cmd_run, cmd_schedule, cmd_sweep, load_scenario, CliError, SweepParam};
use ackhold_core::schedule::{SchedulerInput, DEFAULT_GUARD_FRACTION, MAX_DUPLICATES_PER_ACK};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ackhold", version, about = "ACK holding experiments for TCP over fading wireless links")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Overrides the scenario's RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Release timetable for a predicted outage.
    Schedule(ScheduleArgs),
    /// Final RTO versus split point.
    RtoCurve(ScheduleArgs),
    /// Run a scenario file under both sender variants.
    Run { scenario: PathBuf },
    /// Vary one scenario parameter.
    Sweep {
        scenario: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated values; an empty list yields an empty table.
        #[arg(long, default_value = "")]
        values: String,
    },
}

#[derive(Args)]
struct ScheduleArgs {
    /// Predicted outage T, seconds.
    #[arg(short = 'T', long)]
    outage: f64,
    /// Held ACKs N.
    #[arg(short = 'N', long)]
    acks: usize,
    #[arg(long, default_value_t = 1.0)]
    mu0: f64,
    #[arg(long, default_value_t = 0.3)]
    sigma0: f64,
    /// Safety margin as a fraction of the RTO. Defaults to 0.1 for
    /// `schedule` and 0 for `rto-curve`.
    #[arg(long)]
    guard: Option<f64>,
    #[arg(long, default_value_t = MAX_DUPLICATES_PER_ACK)]
    max_duplicates: u8,
    #[arg(long, default_value_t = 0.0)]
    rtt_fixed: f64,
    #[arg(long, default_value_t = 0.0)]
    rtt_mobile: f64,
}

impl ScheduleArgs {
    fn input(&self, default_guard: f64) -> SchedulerInput {
        SchedulerInput::new(self.acks, self.outage, self.mu0, self.sigma0)
            .with_guard(self.guard.unwrap_or(default_guard))
            .with_duplicates(self.max_duplicates)
            .with_rtts(self.rtt_fixed, self.rtt_mobile)
    }
}

fn emit(cli: &Cli, name: &str, table: &Table) -> Result<(), CliError> {
    let path = cli.out.join(name);
    table.write(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn parse_values(list: &str) -> Result<Vec<f64>, CliError> {
    list.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse().map_err(|_| CliError::Input(format!("not a number in --values: {v:?}"))))
        .collect()
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let Format::Csv = cli.format;
    match &cli.command {
        Command::Schedule(args) => {
            let (schedule, table) = cmd_schedule(&args.input(DEFAULT_GUARD_FRACTION))?;
            emit(cli, "schedule.csv", &table)?;
            println!(
                "split n={} theta={} predicted final RTO={} covered={} of {}{}",
                schedule.split_n,
                schedule.theta,
                schedule.predicted_final_rto,
                schedule.covered_time,
                schedule.outage,
                if schedule.truncated { " (truncated)" } else { "" }
            );
        }
        Command::RtoCurve(args) => {
            let (_, table) = cmd_rto_curve(&args.input(0.0))?;
            emit(cli, "rto_curve.csv", &table)?;
        }
        Command::Run { scenario } => {
            let spec = load_scenario(scenario)?;
            let report = cmd_run(&spec, cli.seed, &cli.out)?;
            println!("{}", report.description());
            for m in [&report.baseline, &report.holding] {
                println!(
                    "  {:<14} delivered {:>7}  throughput {:>9.2}/s  timeouts {}",
                    m.variant.as_str(),
                    m.segments_delivered,
                    m.throughput,
                    m.timeout_count
                );
            }
            println!("  improvement ratio {:.3}", report.improvement_ratio);
        }
        Command::Sweep { scenario, param, values } => {
            let spec = load_scenario(scenario)?;
            let param: SweepParam = param.parse()?;
            let values = parse_values(values)?;
            let (_, table) = cmd_sweep(&spec, param, &values, cli.seed)?;
            emit(cli, &format!("sweep_{}.csv", param.name()), &table)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
