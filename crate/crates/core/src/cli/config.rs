//! Argument parsing and validation into a [`ScanConfig`].

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::mode_sum::FieldKind;
use crate::real::{set_working_digits, Real};

pub const DEFAULT_PRECISION: usize = 50;
pub const PRECISION_ENV: &str = "CASIMIR_PRECISION";

/// `start:stop:count` with inclusive endpoints, or a single value.
#[derive(Clone, Debug, PartialEq)]
pub struct RangeSpec {
    start: String,
    stop: String,
    count: usize,
}

impl RangeSpec {
    pub fn single(v: &str) -> Self {
        RangeSpec {
            start: v.to_string(),
            stop: v.to_string(),
            count: 1,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// The grid values at the current working precision.
    pub fn values(&self) -> Vec<Real> {
        let start = Real::parse(&self.start).expect("validated at parse time");
        if self.count == 1 {
            return vec![start];
        }
        let stop = Real::parse(&self.stop).expect("validated at parse time");
        let step = (&stop - &start) / Real::from_int(self.count as i64 - 1);
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    stop.clone()
                } else {
                    &start + &(&step * Real::from_int(i as i64))
                }
            })
            .collect()
    }

    fn bounds(&self) -> (f64, f64) {
        let s: f64 = self.start.parse().expect("validated at parse time");
        let e: f64 = self.stop.parse().expect("validated at parse time");
        (s.min(e), s.max(e))
    }
}

impl FromStr for RangeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let number = |t: &str| -> Result<String, String> {
            let t = t.trim();
            match t.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(t.to_string()),
                _ => Err(format!("{t:?} is not a finite number")),
            }
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => Ok(RangeSpec::single(&number(v)?)),
            [start, stop, count] => {
                let count: usize = count
                    .trim()
                    .parse()
                    .map_err(|_| format!("range count {count:?} is not a positive integer"))?;
                if count == 0 {
                    return Err("range count must be at least 1".into());
                }
                Ok(RangeSpec {
                    start: number(start)?,
                    stop: number(stop)?,
                    count,
                })
            }
            _ => Err(format!("{s:?} is neither a number nor start:stop:count")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Em,
    Scalar,
}

impl From<FieldArg> for FieldKind {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Em => FieldKind::Electromagnetic,
            FieldArg::Scalar => FieldKind::Scalar,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "casimir",
    version,
    about = "Parallel-plate Casimir energies, pressures and stress tensors under a two-parameter cutoff"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Regularized energy per unit area as a truncated mode sum.
    EnergySum(Common),
    /// Subtracted small-epsilon expansion of the energy.
    EnergyExpansion(Common),
    /// Finite and 1/eps^2 parts of the pressure.
    Pressure(Common),
    /// Point-split stress tensor decomposition.
    Stress(Common),
    /// Lorentz-covariance residuals for random transforms.
    Covariance(Common),
    /// Energy, pressure and stress summary over an (a, lambda) grid.
    Scan(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Plate separation (value or start:stop:count)
    #[arg(long, default_value = "1")]
    a: RangeSpec,
    /// Shape parameter in [0, 1)
    #[arg(long, default_value = "0")]
    lambda: RangeSpec,
    /// Cutoff length (or separation length for stress and covariance)
    #[arg(long, default_value = "0.1")]
    epsilon: RangeSpec,
    /// Separation four-vector t,x,y,z; z must be 0
    #[arg(long, value_name = "T,X,Y,Z")]
    eps_vec: Option<String>,
    /// Height between the plates (scalar stress); defaults to a/2
    #[arg(long)]
    z: Option<RangeSpec>,
    #[arg(long, value_enum, default_value = "em")]
    field: FieldArg,
    /// Fixed mode cutoff; without it the sum is carried to 1e-10 relative
    #[arg(long)]
    n_max: Option<u64>,
    /// Highest retained power of eps in expansions
    #[arg(long, default_value_t = crate::expansion::DEFAULT_ORDER)]
    order: i32,
    /// Significant digits (overrides CASIMIR_PRECISION)
    #[arg(long)]
    precision: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest boost rapidity in covariance trials
    #[arg(long, default_value_t = 2.0)]
    rapidity: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    EnergySum,
    EnergyExpansion,
    Pressure,
    Stress,
    Covariance,
    Scan,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::EnergySum => "energy-sum",
            CommandKind::EnergyExpansion => "energy-expansion",
            CommandKind::Pressure => "pressure",
            CommandKind::Stress => "stress",
            CommandKind::Covariance => "covariance",
            CommandKind::Scan => "scan",
        }
    }
}

/// A validated run description. Numeric ranges stay textual until the
/// working precision has been set.
#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub command: CommandKind,
    pub a: RangeSpec,
    pub lambda: RangeSpec,
    pub epsilon: RangeSpec,
    pub eps_vec: Option<[String; 3]>,
    pub z: Option<RangeSpec>,
    pub field: FieldKind,
    pub n_max: Option<u64>,
    pub order: i32,
    pub precision: usize,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub rapidity: f64,
    pub trials: usize,
}

impl ScanConfig {
    /// Sets the global working precision to the configured digit count.
    pub fn apply_precision(&self) {
        set_working_digits(self.precision);
    }
}

/// Why parsing stopped.
#[derive(Debug)]
pub enum ParseOutcome {
    /// Help or version text, printed with exit code 0.
    Info(String),
    /// Usage error, exit code 1.
    Usage(String),
}

/// Parses argv (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<ScanConfig, ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ParseOutcome::Info(e.to_string()),
            _ => ParseOutcome::Usage(e.to_string()),
        }
    })?;
    let (command, c) = match cli.command {
        Command::EnergySum(c) => (CommandKind::EnergySum, c),
        Command::EnergyExpansion(c) => (CommandKind::EnergyExpansion, c),
        Command::Pressure(c) => (CommandKind::Pressure, c),
        Command::Stress(c) => (CommandKind::Stress, c),
        Command::Covariance(c) => (CommandKind::Covariance, c),
        Command::Scan(c) => (CommandKind::Scan, c),
    };
    validate(command, c)
}

fn usage(flag: &str, msg: impl std::fmt::Display) -> ParseOutcome {
    ParseOutcome::Usage(format!("error: invalid value for '--{flag}': {msg}"))
}

fn precision_from(flag: Option<usize>) -> Result<usize, ParseOutcome> {
    let p = match flag {
        Some(p) => p,
        None => match std::env::var(PRECISION_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| ParseOutcome::Usage(format!("error: {PRECISION_ENV}={v:?} is not a digit count")))?,
            Err(_) => DEFAULT_PRECISION,
        },
    };
    if !(5..=10_000).contains(&p) {
        return Err(usage("precision", format!("{p} digits is outside 5..=10000")));
    }
    Ok(p)
}

fn validate(command: CommandKind, c: Common) -> Result<ScanConfig, ParseOutcome> {
    let (lo, hi) = c.lambda.bounds();
    if lo < 0.0 || hi >= 1.0 {
        return Err(usage("lambda", "lambda must lie in [0, 1)"));
    }
    if c.a.bounds().0 <= 0.0 {
        return Err(usage("a", "plate separation must be positive"));
    }
    if c.epsilon.bounds().0 <= 0.0 {
        return Err(usage("epsilon", "epsilon must be positive"));
    }
    if c.order < 1 {
        return Err(usage("order", "order must be at least 1"));
    }
    if !(c.rapidity.is_finite() && c.rapidity >= 0.0) {
        return Err(usage("rapidity", "rapidity bound must be a non-negative number"));
    }
    let eps_vec = match &c.eps_vec {
        None => None,
        Some(text) => Some(parse_eps_vec(text)?),
    };
    if command == CommandKind::Covariance && (c.a.count() != 1 || c.lambda.count() != 1 || c.epsilon.count() != 1) {
        return Err(usage(
            "a",
            "covariance takes single values of --a, --lambda and --epsilon",
        ));
    }
    Ok(ScanConfig {
        command,
        a: c.a,
        lambda: c.lambda,
        epsilon: c.epsilon,
        eps_vec,
        z: c.z,
        field: c.field.into(),
        n_max: c.n_max,
        order: c.order,
        precision: precision_from(c.precision)?,
        format: c.format,
        output: c.output,
        seed: c.seed,
        rapidity: c.rapidity,
        trials: c.trials,
    })
}

fn parse_eps_vec(text: &str) -> Result<[String; 3], ParseOutcome> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(usage("eps-vec", "expected four comma-separated components t,x,y,z"));
    }
    let mut vals = [0.0f64; 4];
    for (v, p) in vals.iter_mut().zip(&parts) {
        *v = p
            .parse()
            .map_err(|_| usage("eps-vec", format!("{p:?} is not a number")))?;
    }
    if vals[3] != 0.0 {
        return Err(usage("eps-vec", "the z component must be 0"));
    }
    if -vals[0] * vals[0] + vals[1] * vals[1] + vals[2] * vals[2] <= 0.0 {
        return Err(usage("eps-vec", "the separation must be spacelike"));
    }
    Ok([parts[0].to_string(), parts[1].to_string(), parts[2].to_string()])
}
