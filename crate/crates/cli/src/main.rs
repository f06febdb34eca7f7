mod model;
mod paper;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mdtds::cesaro::cesaro_scan;
use mdtds::engine::{Action, Mdtds, PeriodicityVerdict};
use mdtds::scalar::{Rational, Scalar};
use mdtds::subgroup::SubgroupSpec;
use mdtds::word::Word;
use mdtds::{Error, DEFAULT_NODE_CAP};
use serde::{Deserialize, Serialize};

use model::{Model, ModelKind};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NodeCap { .. } => 2,
            Error::Domain { .. } | Error::Map { .. } => 3,
            _ => 1,
        };
        CliError { code, message: e.to_string() }
    }
}

#[derive(Parser, Debug)]
#[command(name = "mdtds", version, about = "Dynamical systems indexed by a free group")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads for ball traversals (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write data here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Reserved for batch runs from a key=value file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the ball V_n of the Cayley tree.
    Ball(BallArgs),
    /// D_t(x) for every t in V_n.
    Orbit(OrbitArgs),
    /// Cesàro means C_0 … C_nmax.
    Cesaro(CesaroArgs),
    /// H-periodicity: set-level for bank and circle, pointwise with --x.
    Periodic(PeriodicArgs),
    /// Fixed points: set-level for bank and circle, pointwise with --x.
    Fixed(FixedArgs),
    /// Run the bundled worked examples and checks.
    Paper(paper::PaperArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ActionArg {
    Right,
    Left,
}

#[derive(Args, Debug)]
struct BallArgs {
    /// Number of generators |S|.
    #[arg(long)]
    s: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    cap: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Number of generators; inferred from --q or --theta when omitted.
    #[arg(long)]
    s: Option<usize>,
    /// Bank rates, e.g. 2,3 or 1.05,3/2.
    #[arg(long)]
    q: Option<String>,
    /// Circle angles, e.g. 1/2,1/3; a trailing :approx selects floating point.
    #[arg(long)]
    theta: Option<String>,
    /// Use floating point instead of exact rationals.
    #[arg(long)]
    float: bool,
    /// Letter order: right means the leftmost letter acts first.
    #[arg(long, value_enum, default_value = "right")]
    action: ActionArg,
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    cap: u64,
}

impl ModelArgs {
    fn float(&self) -> bool {
        let approx = |t: &Option<String>| t.as_deref().is_some_and(|t| model::strip_approx(t).1);
        self.float || approx(&self.q) || approx(&self.theta)
    }

    fn system<T: Scalar>(&self) -> Result<Mdtds<Model<T>>, CliError> {
        let m = model::build::<T>(self.model, self.s, self.q.as_deref(), self.theta.as_deref())?;
        let action = match self.action {
            ActionArg::Right => Action::Right,
            ActionArg::Left => Action::Left,
        };
        Ok(Mdtds::new(m).with_action(action).with_node_cap(self.cap))
    }
}

#[derive(Args, Debug)]
struct OrbitArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    x: String,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug)]
struct CesaroArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    x: String,
    #[arg(long)]
    nmax: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug)]
struct PeriodicArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// full, cyclic:s1*s2, bal:, bal:1,2, even:1,2, ker:1,2 or and(…;…).
    #[arg(long)]
    subgroup: String,
    /// Check this point with the generic engine instead of classifying.
    #[arg(long)]
    x: Option<String>,
    /// Radius of the subgroup search for set-level classification.
    #[arg(long, default_value_t = 4)]
    depth: usize,
    #[arg(long, default_value_t = 4)]
    depth_t: usize,
    #[arg(long, default_value_t = 4)]
    depth_r: usize,
}

#[derive(Args, Debug)]
struct FixedArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    x: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BallRow {
    word: Word,
    length: usize,
    parent: Option<Word>,
}

#[derive(Debug, Serialize, Deserialize)]
struct OrbitRow<T: Scalar> {
    word: Word,
    #[serde(with = "mdtds::scalar::text")]
    value: T,
}

/// Output of `periodic` for a single point.
#[derive(Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct PointPeriodicity<T> {
    pub subgroup: String,
    #[serde(with = "mdtds::scalar::text")]
    pub x: T,
    pub result: PeriodicityVerdict<T>,
}

/// Output of `periodic` for a whole model.
#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct SetPeriodicity<V> {
    pub subgroup: String,
    pub depth: usize,
    pub result: V,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct PointFixed<T> {
    #[serde(with = "mdtds::scalar::text")]
    pub x: T,
    #[serde(with = "mdtds::scalar::text")]
    pub residual: T,
    pub fixed: bool,
}

fn json<V: Serialize>(value: &V) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::usage(e.to_string()))
}

fn parse_x<T: Scalar>(text: &str) -> Result<T, CliError> {
    T::parse_text(text).map_err(|e| CliError::usage(e.to_string()))
}

fn cmd_ball(args: &BallArgs) -> Result<String, CliError> {
    if args.s == 0 {
        return Err(CliError::usage("--s must be at least 1"));
    }
    let rows: Vec<BallRow> = mdtds::ball::BallCursor::new(args.n, args.s, args.cap)?
        .map(|node| BallRow {
            length: node.word.len(),
            word: node.word,
            parent: node.parent,
        })
        .collect();
    match args.format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut out = String::from("word,length,parent\n");
            for r in rows {
                let parent = r.parent.map(|p| p.to_string()).unwrap_or_default();
                writeln!(out, "{},{},{}", r.word, r.length, parent).unwrap();
            }
            Ok(out)
        }
    }
}

fn cmd_orbit<T: Scalar>(args: &OrbitArgs) -> Result<String, CliError> {
    let sys = args.model.system::<T>()?;
    let x = parse_x::<T>(&args.x)?;
    let orbit = sys.orbit_ball(&x, args.n)?;
    match args.format {
        Format::Json => {
            let rows: Vec<OrbitRow<T>> = orbit.values.into_iter().map(|(word, value)| OrbitRow { word, value }).collect();
            json(&rows)
        }
        Format::Csv => {
            let mut out = String::from("word,value\n");
            for (word, value) in &orbit.values {
                writeln!(out, "{},{}", word, value.to_text()).unwrap();
            }
            Ok(out)
        }
    }
}

fn cmd_cesaro<T: Scalar>(args: &CesaroArgs) -> Result<String, CliError> {
    let sys = args.model.system::<T>()?;
    let x = parse_x::<T>(&args.x)?;
    let report = cesaro_scan(&sys, &x, args.nmax)?;
    match args.format {
        Format::Json => json(&report),
        Format::Csv => Ok(report.to_csv()),
    }
}

fn cmd_periodic<T: Scalar>(args: &PeriodicArgs) -> Result<String, CliError> {
    let sys = args.model.system::<T>()?;
    let spec = SubgroupSpec::parse(&args.subgroup, sys.rank())?;
    if let Some(x) = &args.x {
        let x = parse_x::<T>(x)?;
        let result = sys.is_h_periodic(&spec, &x, args.depth_t, args.depth_r)?;
        return json(&PointPeriodicity {
            subgroup: spec.to_string(),
            x,
            result,
        });
    }
    let subgroup = spec.to_string();
    let depth = args.depth;
    match sys.family() {
        Model::Bank(b) => json(&SetPeriodicity {
            subgroup,
            depth,
            result: b.classify_periodicity(&spec, depth, args.model.cap)?,
        }),
        Model::Circle(c) => json(&SetPeriodicity {
            subgroup,
            depth,
            result: c.periodic_set(&spec, depth, args.model.cap)?,
        }),
        Model::Family(_) => Err(CliError::usage("set-level classification needs --model bank or circle; pass --x to check a point")),
    }
}

fn cmd_fixed<T: Scalar>(args: &FixedArgs) -> Result<String, CliError> {
    let sys = args.model.system::<T>()?;
    if let Some(x) = &args.x {
        let x = parse_x::<T>(x)?;
        let residual = sys.fixed_point_residual(&x)?;
        let fixed = residual <= *sys.tolerance();
        return json(&PointFixed { x, residual, fixed });
    }
    match sys.family() {
        Model::Bank(b) => json(&b.classify_periodicity(&SubgroupSpec::Full, 1, args.model.cap)?),
        Model::Circle(c) => json(&c.fixed_set()),
        Model::Family(_) => Err(CliError::usage("set-level fixed points need --model bank or circle; pass --x to check a point")),
    }
}

fn dispatch<T: Scalar>(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Ball(a) => cmd_ball(a),
        Command::Orbit(a) => cmd_orbit::<T>(a),
        Command::Cesaro(a) => cmd_cesaro::<T>(a),
        Command::Periodic(a) => cmd_periodic::<T>(a),
        Command::Fixed(a) => cmd_fixed::<T>(a),
        Command::Paper(a) => paper::run(a),
    }
}

fn float_mode(command: &Command) -> bool {
    match command {
        Command::Orbit(a) => a.model.float(),
        Command::Cesaro(a) => a.model.float(),
        Command::Periodic(a) => a.model.float(),
        Command::Fixed(a) => a.model.float(),
        Command::Ball(_) | Command::Paper(_) => false,
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if cli.config.is_some() {
        return Err(CliError::usage("--config is reserved and not implemented yet"));
    }
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    let output = if float_mode(&cli.command) {
        dispatch::<f64>(&cli.command)?
    } else {
        dispatch::<Rational>(&cli.command)?
    };
    match &cli.out {
        Some(path) => std::fs::write(path, output).map_err(|e| CliError::usage(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(output.as_bytes())
            .map_err(|e| CliError::usage(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
