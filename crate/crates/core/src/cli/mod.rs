//! Command-line front end.
//!
//! Every subcommand writes a CSV document (manifest lines, header, rows) to
//! `--output` or to stdout. Exit codes: 0 success, 2 usage or validation
//! error, 3 I/O error.

pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bounds::{argmax_upper_bound, asymptotic_peak, lower_bound, lower_bound_peak, upper_bound, BoundsPoint};
use crate::error::Error;
use crate::model::{gamma_db_to_linear, linear_to_db, SystemConfig};
use crate::montecarlo::{simulate, sweep, SweepAxis};
use crate::oracle::{exact_throughput, MAX_ORACLE_LEVELS};
use crate::rng::{mix_seed, RNG_ALGORITHM};
use crate::sic::Decoder;

pub use output::{Cell, Manifest, Table};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Tolerance on `λ_Q` when locating the upper bound's maximiser.
pub const ARGMAX_TOL: f64 = 1e-6;

const SEED_DERIVATION: &str = "point i uses splitmix64(seed + (i+1)*0x9E3779B97F4A7C15)";

#[derive(Debug, Parser)]
#[command(
    name = "noma-aloha",
    version,
    about = "Throughput bounds, exact enumeration and simulation for NOMA-ALOHA"
)]
pub struct Cli {
    /// Worker threads for simulation and enumeration (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the SIC power ladder.
    Ladder(LadderArgs),
    /// Evaluate the closed-form throughput bounds and their maxima.
    Bounds(BoundsArgs),
    /// Exact expected throughput by truncated enumeration (Q <= 6).
    Oracle(OracleArgs),
    /// Monte Carlo throughput estimate.
    Simulate(SimulateArgs),
    /// Throughput against traffic intensity at fixed Q.
    Figure1(Figure1Args),
    /// Throughput against the number of power levels at the two optimal intensities.
    Figure2(Figure2Args),
}

#[derive(Debug, Args)]
pub struct Common {
    /// SINR target in dB.
    #[arg(long = "gamma-db", default_value_t = 4.0, allow_negative_numbers = true)]
    pub gamma_db: f64,

    /// Write CSV here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LadderArgs {
    #[arg(long)]
    pub q: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub q: usize,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1)]
    pub channels: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub q: usize,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub epsilon: f64,
    #[arg(long, default_value = "paper")]
    pub decoder: Decoder,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub slots: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "paper")]
    pub decoder: Decoder,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub q: usize,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1)]
    pub channels: usize,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Figure1Args {
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    /// `start:stop:step` (inclusive) or a comma-separated list.
    #[arg(long = "lambda-grid", default_value = "0.25:8:0.25")]
    pub lambda_grid: String,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Figure2Args {
    /// `a..b` (inclusive) or a comma-separated list.
    #[arg(long = "q-list", default_value = "1..8")]
    pub q_list: String,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub common: Common,
}

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `start:stop:step` (inclusive of `stop`) or `a,b,c`.
pub fn parse_lambda_grid(spec: &str) -> crate::Result<Vec<f64>> {
    let bad = |reason: String| Error::arg("lambda-grid", reason);
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(format!("`{s}` is not a number")))
    };
    let values = if let [start, stop, step] = spec.split(':').collect::<Vec<_>>()[..] {
        let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
        if !(step > 0.0 && step.is_finite() && start.is_finite() && stop.is_finite()) || stop < start {
            return Err(bad(format!("`{spec}` is not an increasing range")));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| {
                let v = start + i as f64 * step;
                // Trim accumulated binary noise such as 0.30000000000000004.
                format!("{v:.12}").parse::<f64>().expect("formatted float")
            })
            .collect()
    } else {
        spec.split(',').map(parse).collect::<crate::Result<Vec<_>>>()?
    };
    if values.is_empty() {
        return Err(bad("grid is empty".into()));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(bad(format!("λ = {v} is not a non-negative number")));
    }
    Ok(values)
}

/// Parses `a..b` (inclusive) or `a,b,c` into positive level counts.
pub fn parse_q_list(spec: &str) -> crate::Result<Vec<usize>> {
    let bad = |reason: String| Error::arg("q-list", reason);
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| bad(format!("`{s}` is not a positive integer")))
    };
    let values: Vec<usize> = if let Some((a, b)) = spec.split_once("..") {
        let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
        (a..=b).collect()
    } else {
        spec.split(',').map(parse).collect::<crate::Result<_>>()?
    };
    if values.is_empty() {
        return Err(bad("list is empty".into()));
    }
    if values.contains(&0) {
        return Err(bad("Q must be at least 1".into()));
    }
    Ok(values)
}

fn gamma_manifest(m: &mut Manifest, gamma_db: f64, gamma: f64) {
    m.push("gamma_db", gamma_db).push("gamma_linear", gamma);
}

fn sim_manifest(m: &mut Manifest, sim: &SimArgs) {
    m.push("slots", sim.slots)
        .push("seed", sim.seed)
        .push("decoder", sim.decoder)
        .push("rng", RNG_ALGORITHM);
}

pub fn ladder(args: &LadderArgs) -> crate::Result<Table> {
    let gamma = gamma_db_to_linear(args.common.gamma_db)?;
    let ladder = crate::model::PowerLadder::new(gamma, args.q)?;
    let mut m = Manifest::new("ladder");
    gamma_manifest(&mut m, args.common.gamma_db, gamma);
    m.push("q", args.q);
    let mut t = Table::new(m, &["q", "v", "v_db"]);
    for (i, &v) in ladder.levels().iter().enumerate() {
        t.push_row(vec![(i + 1).into(), v.into(), linear_to_db(v).into()]);
    }
    Ok(t)
}

pub fn bounds(args: &BoundsArgs) -> crate::Result<Table> {
    let cfg = SystemConfig::new(
        args.channels,
        args.q,
        gamma_db_to_linear(args.common.gamma_db)?,
        args.lambda,
    )
    .validate()?;
    let point = BoundsPoint::new(cfg.traffic_intensity, cfg.num_levels)?;
    let peak = lower_bound_peak(cfg.num_levels)?;
    let lambda_q = argmax_upper_bound(cfg.num_levels, ARGMAX_TOL)?;
    let mut m = Manifest::new("bounds");
    gamma_manifest(&mut m, args.common.gamma_db, cfg.sinr_target);
    m.push("q", cfg.num_levels)
        .push("lambda", cfg.traffic_intensity)
        .push("channels", cfg.num_channels)
        .push("argmax_tol", ARGMAX_TOL)
        .push(
            "asymptotic_peak",
            "approximation sqrt(Q)*exp(-1/sqrt(Q)); overstates the true peak",
        );
    let mut t = Table::new(
        m,
        &[
            "lambda",
            "q",
            "upper",
            "lower",
            "upper_total",
            "lower_total",
            "lambda_lb_peak",
            "lower_peak",
            "lambda_ub_peak",
            "upper_peak",
            "asymptotic_peak_approx",
        ],
    );
    let l = cfg.num_channels as f64;
    t.push_row(vec![
        point.lambda.into(),
        point.q.into(),
        point.upper.into(),
        point.lower.into(),
        (l * point.upper).into(),
        (l * point.lower).into(),
        peak.lambda.into(),
        peak.value.into(),
        lambda_q.into(),
        upper_bound(lambda_q, cfg.num_levels)?.into(),
        asymptotic_peak(cfg.num_levels)?.into(),
    ]);
    Ok(t)
}

pub fn oracle(args: &OracleArgs) -> crate::Result<Table> {
    let gamma = gamma_db_to_linear(args.common.gamma_db)?;
    if args.q > MAX_ORACLE_LEVELS {
        return Err(Error::StateSpaceTooLarge {
            q: args.q,
            max: MAX_ORACLE_LEVELS,
        });
    }
    let r = exact_throughput(args.lambda, args.q, gamma, args.epsilon, args.decoder)?;
    let mut m = Manifest::new("oracle");
    gamma_manifest(&mut m, args.common.gamma_db, gamma);
    m.push("q", args.q)
        .push("lambda", args.lambda)
        .push("epsilon", args.epsilon)
        .push("decoder", args.decoder);
    let mut t = Table::new(
        m,
        &[
            "lambda",
            "q",
            "value",
            "truncation_error_bound",
            "m_max",
            "enumerated_states",
            "upper",
            "lower",
        ],
    );
    t.push_row(vec![
        args.lambda.into(),
        args.q.into(),
        r.value.into(),
        r.truncation_error_bound.into(),
        r.m_max.into(),
        r.enumerated_states.into(),
        upper_bound(args.lambda, args.q)?.into(),
        lower_bound(args.lambda, args.q)?.into(),
    ]);
    Ok(t)
}

pub fn simulate_cmd(args: &SimulateArgs) -> crate::Result<Table> {
    let cfg = SystemConfig::new(
        args.channels,
        args.q,
        gamma_db_to_linear(args.common.gamma_db)?,
        args.lambda,
    )
    .validate()?;
    let est = simulate(&cfg, args.sim.slots, args.sim.seed, args.sim.decoder)?;
    let mut m = Manifest::new("simulate");
    gamma_manifest(&mut m, args.common.gamma_db, cfg.sinr_target);
    m.push("q", cfg.num_levels)
        .push("lambda", cfg.traffic_intensity)
        .push("channels", cfg.num_channels);
    sim_manifest(&mut m, &args.sim);
    let mut t = Table::new(
        m,
        &[
            "lambda",
            "q",
            "channels",
            "sim_mean",
            "sim_se",
            "n_slots",
            "total_mean",
            "total_se",
        ],
    );
    let l = cfg.num_channels as f64;
    t.push_row(vec![
        cfg.traffic_intensity.into(),
        cfg.num_levels.into(),
        cfg.num_channels.into(),
        est.mean.into(),
        est.std_error.into(),
        est.num_slots.into(),
        est.total(cfg.num_channels).into(),
        (l * est.std_error).into(),
    ]);
    Ok(t)
}

pub fn figure1(args: &Figure1Args) -> crate::Result<Table> {
    let gamma = gamma_db_to_linear(args.common.gamma_db)?;
    let grid = parse_lambda_grid(&args.lambda_grid)?;
    let template = SystemConfig::new(1, args.q, gamma, 0.0).validate()?;
    template.ladder()?;
    let points = sweep(
        &template,
        SweepAxis::Lambda,
        &grid,
        args.sim.slots,
        args.sim.seed,
        args.sim.decoder,
    )?;

    let mut m = Manifest::new("figure1");
    gamma_manifest(&mut m, args.common.gamma_db, gamma);
    m.push("q", args.q).push("lambda_grid", &args.lambda_grid);
    sim_manifest(&mut m, &args.sim);
    m.push("seed_derivation", SEED_DERIVATION).push("units", "per channel");
    let mut t = Table::new(m, &["lambda", "upper", "lower", "sim_mean", "sim_se", "n_slots"]);
    for p in points {
        let (est, b) = p.outcome?;
        t.push_row(vec![
            p.value.into(),
            b.upper.into(),
            b.lower.into(),
            est.mean.into(),
            est.std_error.into(),
            est.num_slots.into(),
        ]);
    }
    Ok(t)
}

pub fn figure2(args: &Figure2Args) -> crate::Result<Table> {
    let gamma = gamma_db_to_linear(args.common.gamma_db)?;
    let qs = parse_q_list(&args.q_list)?;
    let mut m = Manifest::new("figure2");
    gamma_manifest(&mut m, args.common.gamma_db, gamma);
    m.push("q_list", &args.q_list);
    sim_manifest(&mut m, &args.sim);
    m.push("argmax_tol", ARGMAX_TOL)
        .push(
            "seed_derivation",
            "row i simulates lambda_ub with splitmix64 point 2i and lambda_lb with point 2i+1; point j uses splitmix64(seed + (j+1)*0x9E3779B97F4A7C15)",
        )
        .push("units", "per channel");
    let mut t = Table::new(
        m,
        &[
            "q",
            "lambda_ub",
            "lambda_lb",
            "upper_at_lub",
            "lower_at_llb",
            "sim_at_lub",
            "se_ub",
            "sim_at_llb",
            "se_lb",
        ],
    );
    for (i, &q) in qs.iter().enumerate() {
        let lambda_ub = argmax_upper_bound(q, ARGMAX_TOL)?;
        let lambda_lb = (q as f64).sqrt();
        let cfg_ub = SystemConfig::new(1, q, gamma, lambda_ub).validate()?;
        let cfg_lb = SystemConfig::new(1, q, gamma, lambda_lb).validate()?;
        let i = i as u64;
        let at_ub = simulate(
            &cfg_ub,
            args.sim.slots,
            mix_seed(args.sim.seed, 2 * i),
            args.sim.decoder,
        )?;
        let at_lb = simulate(
            &cfg_lb,
            args.sim.slots,
            mix_seed(args.sim.seed, 2 * i + 1),
            args.sim.decoder,
        )?;
        t.push_row(vec![
            q.into(),
            lambda_ub.into(),
            lambda_lb.into(),
            upper_bound(lambda_ub, q)?.into(),
            lower_bound(lambda_lb, q)?.into(),
            at_ub.mean.into(),
            at_ub.std_error.into(),
            at_lb.mean.into(),
            at_lb.std_error.into(),
        ]);
    }
    Ok(t)
}

fn emit(table: &Table, path: Option<&PathBuf>) -> CliResult<()> {
    let doc = table.render();
    match path {
        Some(path) => std::fs::write(path, doc).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(doc.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// Executes one parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    let work = || -> CliResult<()> {
        let (table, path) = match &cli.command {
            Command::Ladder(a) => (ladder(a)?, a.common.output.as_ref()),
            Command::Bounds(a) => (bounds(a)?, a.common.output.as_ref()),
            Command::Oracle(a) => (oracle(a)?, a.common.output.as_ref()),
            Command::Simulate(a) => (simulate_cmd(a)?, a.common.output.as_ref()),
            Command::Figure1(a) => (figure1(a)?, a.common.output.as_ref()),
            Command::Figure2(a) => (figure2(a)?, a.common.output.as_ref()),
        };
        emit(&table, path)
    };
    match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::arg("threads", e.to_string()))?;
            pool.install(work)
        }
        None => work(),
    }
}
