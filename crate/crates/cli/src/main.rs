//! `betabeta`: finite-blocklength bound curves as CSV.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "betabeta",
    version,
    about = "Finite-blocklength channel coding bounds from Neyman-Pearson β functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimum Eb/N0 versus rate for the complex AWGN channel.
    AwgnEbn0(EbN0Args),
    /// Minimum Eb/N0 versus rate for the SISO Rayleigh fading channel.
    FadingEbn0(EbN0Args),
    /// Rate versus blocklength for the additive exponential-noise channel.
    ExpChannel(ExpArgs),
    /// Rate versus blocklength for the MIMO Rayleigh block-fading channel.
    Mimo(MimoArgs),
    /// Compare −log₂β of a peaky codeword with the joint test.
    #[command(name = "mimo-735")]
    Mimo735(Mimo735Args),
    /// β_α(N(d,1), N(0,1)) in closed form and by Monte Carlo.
    Npbeta(NpArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Target error probability.
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// Monte Carlo samples per β (command-specific default).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Root seed; each grid point uses its own child stream.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Use the 3σ edge of every Monte Carlo term in the bound's favour.
    #[arg(long)]
    pub conservative: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EbN0Args {
    /// Information bits.
    #[arg(long, default_value_t = 2000.0)]
    pub k: f64,
    /// Rate grid min:max:steps in bits per channel use.
    #[arg(long, default_value = "0.02:0.4:20")]
    pub grid: String,
    /// Comma-separated curves: ach, conv (AWGN only), approx, wideband, capacity.
    #[arg(long)]
    pub bounds: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct ExpArgs {
    /// Mean input budget σ.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Blocklength grid min:max:steps.
    #[arg(long, default_value = "100:2000:20")]
    pub grid: String,
    /// Comma-separated curves: ach, conv, approx, jazi, kappa_beta, cost_dt.
    #[arg(long, default_value = "ach,conv,approx")]
    pub bounds: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct MimoDims {
    /// Transmit antennas.
    #[arg(long, default_value_t = 4)]
    pub mt: usize,
    /// Receive antennas.
    #[arg(long, default_value_t = 4)]
    pub mr: usize,
    /// Coherence interval in channel uses.
    #[arg(long, default_value_t = 4)]
    pub nc: usize,
    /// SNR in dB.
    #[arg(long, default_value_t = 0.0)]
    pub snr_db: f64,
}

#[derive(Debug, Clone, Args)]
pub struct MimoArgs {
    #[command(flatten)]
    pub dims: MimoDims,
    /// Blocklength grid min:max:steps, rounded up to multiples of nc.
    #[arg(long, default_value = "40:1600:5")]
    pub grid: String,
    /// Comma-separated curves: bb, feinstein, cost_dt, approx, capacity.
    #[arg(long, default_value = "bb,feinstein,cost_dt,approx,capacity")]
    pub bounds: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Mimo735Args {
    #[command(flatten)]
    pub dims: MimoDims,
    /// Blocklength (a multiple of nc).
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    /// τ of the achievability bound (default ε/2).
    #[arg(long)]
    pub tau: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct NpArgs {
    /// Mean shift d of P = N(d,1) against Q = N(0,1).
    #[arg(long)]
    pub shift: f64,
    /// Power α of the test.
    #[arg(long)]
    pub alpha: f64,
    #[command(flatten)]
    pub common: Common,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (table, out) = match cli.command {
        Command::AwgnEbn0(a) => (commands::awgn_ebn0(&a)?, a.common.out),
        Command::FadingEbn0(a) => (commands::fading_ebn0(&a)?, a.common.out),
        Command::ExpChannel(a) => (commands::exp_channel(&a)?, a.common.out),
        Command::Mimo(a) => (commands::mimo(&a)?, a.common.out),
        Command::Mimo735(a) => (commands::mimo_735(&a)?, a.common.out),
        Command::Npbeta(a) => (commands::npbeta(&a)?, a.common.out),
    };
    table
        .emit(out.as_deref())
        .map_err(|e| CliError::Io(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
