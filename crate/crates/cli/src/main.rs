//! `czgate`: sums, gate diagnostics, failure-probability sweeps and
//! verification suites for the quantized-laser CNOT model.

mod commands;
mod config;
mod verify;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use config::{ExperimentConfig, Format, Precision};
use czgate::channel::{ChannelError, QuantizedMask};
use czgate::dynamics::DynamicsError;
use czgate::field::FieldError;
use czgate::metrics::{MetricsError, PRESETS};
use std::path::PathBuf;
use std::process::ExitCode;

const INVALID_INPUT: u8 = 1;
const VERIFICATION_FAILED: u8 = 2;
const CERTIFICATION_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "czgate", version, about = "CNOT gate under a quantized driving field")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the ten Poisson sums S1..S10 with certified error bounds
    Sums {
        #[arg(long, default_value_t = 1e4, allow_negative_numbers = true)]
        nbar: f64,
        /// Pulse-area multiplier of S4
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, value_enum, default_value_t = Precision::Double)]
        precision: Precision,
        /// Absolute error target (double precision)
        #[arg(long, default_value_t = 1e-14)]
        tail_eps: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the one-gate channel and write its diagnostics as JSON
    Gate {
        #[arg(long, default_value_t = 1e4, allow_negative_numbers = true)]
        nbar: f64,
        /// Five flags, 1 = quantized step (e.g. 01110), or all / ideal / sideband
        #[arg(long, default_value = "11111")]
        mask: String,
        #[arg(long, default_value_t = 1e-14)]
        tail_eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Failure probability for one mean photon number and initial state
    Run(ExperimentArgs),
    /// Failure probabilities over grids of mean photon numbers and initial states
    Sweep(ExperimentArgs),
    /// Run the built-in verification suite
    Verify {
        #[arg(long, value_enum, default_value_t = verify::Level::Fast)]
        level: verify::Level,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// Mean photon numbers, comma-separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    nbar: Vec<f64>,
    /// Gate counts: values and inclusive ranges such as 0,10..100
    #[arg(long)]
    t: Option<String>,
    /// Preset names, comma-separated, or eight reals re/im of the four amplitudes
    #[arg(long)]
    initial: Option<String>,
    #[arg(long, default_value = "11111")]
    mask: String,
    #[arg(long, default_value_t = 1e-14)]
    tail_eps: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ExperimentArgs {
    fn config(&self, nbar: &[f64], t: &str, initial: &str) -> Result<ExperimentConfig> {
        let nbar = if self.nbar.is_empty() { nbar } else { &self.nbar };
        ExperimentConfig::new(
            nbar,
            self.t.as_deref().unwrap_or(t),
            self.initial.as_deref().unwrap_or(initial),
            &self.mask,
            self.tail_eps,
            self.out.clone(),
            self.format,
        )
    }
}

fn experiment(config: ExperimentConfig) -> Result<()> {
    let rows = commands::experiment(&config)?;
    commands::emit(config.out.as_deref(), &commands::render_rows(&rows, config.format)?)
}

fn execute(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Sums { nbar, k, precision, tail_eps, format, out } => {
            commands::emit(out.as_deref(), &commands::sums(nbar, k, precision, tail_eps, format)?)?;
        }
        Command::Gate { nbar, mask, tail_eps, out } => {
            let mask: QuantizedMask = mask.parse()?;
            commands::emit(out.as_deref(), &commands::gate(nbar, mask, tail_eps)?)?;
        }
        Command::Run(args) => {
            let config = args.config(&[1e4], "100", "10")?;
            if config.nbar.len() != 1 || config.initial.len() != 1 {
                anyhow::bail!("run takes one --nbar and one --initial; use sweep for grids");
            }
            experiment(config)?;
        }
        Command::Sweep(args) => experiment(args.config(&[1e6, 1e8], "1..100", &PRESETS.join(","))?)?,
        Command::Verify { level } => {
            if !verify::run(level) {
                return Ok(VERIFICATION_FAILED);
            }
        }
    }
    Ok(0)
}

fn field_certification(e: &FieldError) -> bool {
    matches!(e, FieldError::PrecisionUnreachable { .. })
}

fn dynamics_certification(e: &DynamicsError) -> bool {
    matches!(e, DynamicsError::Field(f) if field_certification(f))
}

fn channel_certification(e: &ChannelError) -> bool {
    match e {
        ChannelError::IncompleteKraus { .. } => true,
        ChannelError::Dynamics(d) => dynamics_certification(d),
        _ => false,
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let certification = err.chain().any(|e| {
        if let Some(f) = e.downcast_ref::<FieldError>() {
            field_certification(f)
        } else if let Some(d) = e.downcast_ref::<DynamicsError>() {
            dynamics_certification(d)
        } else if let Some(c) = e.downcast_ref::<ChannelError>() {
            channel_certification(c)
        } else if let Some(MetricsError::Channel(c)) = e.downcast_ref::<MetricsError>() {
            channel_certification(c)
        } else {
            false
        }
    });
    if certification {
        CERTIFICATION_FAILED
    } else {
        INVALID_INPUT
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(INVALID_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
