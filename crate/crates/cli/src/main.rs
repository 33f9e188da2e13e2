//! charpoly: sample log characteristic polynomials of Haar-random unitary
//! and SO(2n) matrices, query the exact joint moments, and run the
//! validation suites that pit samplers against analytic and matrix oracles.
//!
//! Exit codes: 0 success (and, for validate, every check passed);
//! 1 validation failure or numerical failure; 2 usage, domain, or config
//! error; 3 I/O error.

mod commands;
mod output;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use charpoly::samplers::{Group, SamplerId};
use charpoly::suites::SuiteId;

#[derive(Debug)]
pub enum CliError {
    Core(charpoly::Error),
    Io { path: String, source: std::io::Error },
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{path}: {source}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<charpoly::Error> for CliError {
    fn from(e: charpoly::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Core(charpoly::Error::Domain { .. } | charpoly::Error::Config(_)) => 2,
            CliError::Core(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "charpoly",
    version,
    about = "Characteristic polynomial statistics of Haar-random unitary and SO(2n) matrices",
    propagate_version = true
)]
struct Cli {
    #[command(flatten)]
    globals: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// RNG seed; each worker derives its own substream from it
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker substream count (CHARPOLY_WORKERS overrides the default of 1)
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Append records to this file instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,

    /// Skip the timestamped header record so identical runs produce identical bytes
    #[arg(long, global = true)]
    pub no_header: bool,

    /// TOML config file mirroring these flags; explicit flags win
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupArg {
    Unitary,
    #[value(name = "so2n")]
    So2n,
}

impl GroupArg {
    pub fn to_group(self) -> Group {
        match self {
            GroupArg::Unitary => Group::Unitary,
            GroupArg::So2n => Group::SpecialOrthogonalEven,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GroupArg::Unitary => "unitary",
            GroupArg::So2n => "so2n",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerArg {
    /// unitary product of independent factors, O(n) per draw
    Product,
    /// independent-sum representation of (log |Z|, arg Z)
    Joint,
    /// SO(2n) product of independent factors
    #[value(name = "so2n-product")]
    So2nProduct,
    /// explicit Haar unitary via QR of a Ginibre matrix
    MatrixQr,
    /// explicit Haar unitary via the recursive construction
    MatrixRecursive,
    /// explicit Haar SO(2n) matrix
    #[value(name = "matrix-so2n")]
    MatrixSo2n,
}

impl SamplerArg {
    pub fn to_id(self) -> SamplerId {
        match self {
            SamplerArg::Product => SamplerId::UnitaryProduct,
            SamplerArg::Joint => SamplerId::UnitaryJoint,
            SamplerArg::So2nProduct => SamplerId::So2nProduct,
            SamplerArg::MatrixQr => SamplerId::MatrixQr,
            SamplerArg::MatrixRecursive => SamplerId::MatrixRecursive,
            SamplerArg::MatrixSo2n => SamplerId::MatrixSo2n,
        }
    }

    pub fn group(self) -> GroupArg {
        match self {
            SamplerArg::So2nProduct | SamplerArg::MatrixSo2n => GroupArg::So2n,
            _ => GroupArg::Unitary,
        }
    }

    pub fn is_matrix(self) -> bool {
        matches!(
            self,
            SamplerArg::MatrixQr | SamplerArg::MatrixRecursive | SamplerArg::MatrixSo2n
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            SamplerArg::Product => "product",
            SamplerArg::Joint => "joint",
            SamplerArg::So2nProduct => "so2n-product",
            SamplerArg::MatrixQr => "matrix-qr",
            SamplerArg::MatrixRecursive => "matrix-recursive",
            SamplerArg::MatrixSo2n => "matrix-so2n",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Mellin,
    Joint,
    #[value(name = "so2n")]
    So2n,
    Offcircle,
    Eigenrec,
    Barnes,
    Betagamma,
    Clt,
    Rates,
    All,
}

impl SuiteArg {
    pub fn ids(self) -> Vec<SuiteId> {
        match self {
            SuiteArg::Mellin => vec![SuiteId::Mellin],
            SuiteArg::Joint => vec![SuiteId::Joint],
            SuiteArg::So2n => vec![SuiteId::So2n],
            SuiteArg::Offcircle => vec![SuiteId::Offcircle],
            SuiteArg::Eigenrec => vec![SuiteId::Eigenrec],
            SuiteArg::Barnes => vec![SuiteId::Barnes],
            SuiteArg::Betagamma => vec![SuiteId::Betagamma],
            SuiteArg::Clt => vec![SuiteId::Clt],
            SuiteArg::Rates => vec![SuiteId::Rates],
            SuiteArg::All => SuiteId::ALL.to_vec(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SuiteArg::All => "all",
            SuiteArg::Mellin => "mellin",
            SuiteArg::Joint => "joint",
            SuiteArg::So2n => "so2n",
            SuiteArg::Offcircle => "offcircle",
            SuiteArg::Eigenrec => "eigenrec",
            SuiteArg::Barnes => "barnes",
            SuiteArg::Betagamma => "betagamma",
            SuiteArg::Clt => "clt",
            SuiteArg::Rates => "rates",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw log det(I - V) samples; one record per draw
    Sample {
        #[arg(long, value_enum, default_value_t = GroupArg::Unitary)]
        group: GroupArg,
        /// Half-dimension: U(n) for the unitary group, SO(2n) otherwise
        #[arg(long, default_value_t = 10)]
        n: u32,
        /// Number of draws (default 1000)
        #[arg(long)]
        samples: Option<u64>,
        /// Sampling route (default: the product sampler of the chosen group)
        #[arg(long, value_enum)]
        sampler: Option<SamplerArg>,
        /// Evaluate log det(I - x V) off the unit circle; matrix samplers only
        #[arg(long)]
        x: Option<f64>,
    },
    /// Exact log E[|Z|^t e^(i s arg Z)], optionally cross-checked by Monte Carlo
    Moments {
        #[arg(long, value_enum, default_value_t = GroupArg::Unitary)]
        group: GroupArg,
        /// Dimension or comma-separated dimensions
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u32>,
        /// Modulus exponent
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        t: f64,
        /// Angular frequency (unitary group only)
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        s: f64,
        /// Also estimate the moment from this many product-sampler draws
        #[arg(long, value_name = "SAMPLES")]
        empirical: Option<u64>,
    },
    /// Run a validation suite; exit 0 only if every check passes
    Validate {
        /// Suite name, or "all"
        #[arg(value_enum)]
        suite: SuiteArg,
        /// Monte Carlo sample count per batch (suites pick their defaults)
        #[arg(long)]
        samples: Option<u64>,
        /// KS significance level (default 1e-3)
        #[arg(long)]
        significance: Option<f64>,
        /// z-score acceptance threshold for moment checks (default 5)
        #[arg(long)]
        z_threshold: Option<f64>,
    },
    /// Running log det sums along growing dimension with iterated-logarithm normalizations
    Lil {
        /// Largest dimension per trajectory (at least 100)
        #[arg(long, default_value_t = 10_000)]
        n_max: u64,
        /// Checkpoint dimensions, comma separated (default: powers of ten up to n-max)
        #[arg(long, value_delimiter = ',')]
        checkpoints: Option<Vec<u64>>,
        /// Independent trajectories to draw
        #[arg(long, default_value_t = 1)]
        trajectories: u64,
    },
    /// Per-draw timing of the product sampler, and of the matrix oracle for n <= 64
    Bench {
        /// Dimensions, comma separated
        #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
        n: Vec<u32>,
        /// Timed draws per dimension (default 200)
        #[arg(long)]
        samples: Option<u64>,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let settings = settings::resolve(&cli.globals)?;
    let mut writer = output::Writer::create(settings.out.as_deref(), settings.format)
        .map_err(|(path, source)| CliError::Io { path, source })?;

    let ok = match cli.command {
        Command::Sample { group, n, samples, sampler, x } => {
            commands::sample(group, n, samples, sampler, x, &settings, &mut writer)?
        }
        Command::Moments { group, n, t, s, empirical } => {
            commands::moments(group, &n, t, s, empirical, &settings, &mut writer)?
        }
        Command::Validate { suite, samples, significance, z_threshold } => {
            commands::validate(suite, samples, significance, z_threshold, &settings, &mut writer)?
        }
        Command::Lil { n_max, checkpoints, trajectories } => {
            commands::lil(n_max, checkpoints, trajectories, &settings, &mut writer)?
        }
        Command::Bench { n, samples } => commands::bench(&n, samples, &settings, &mut writer)?,
    };

    writer
        .flush()
        .map_err(|source| CliError::Io { path: writer.path_label(), source })?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
