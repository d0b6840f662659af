use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use bilinear_taylor::lag1::lag1_report;
use bilinear_taylor::moments::{check_stationarity, moment_table, ModelSpec};
use bilinear_taylor::monte_carlo::{
    self, replication_experiment, CiMethod, ReplicationOptions, SimConfig, SuccessRule,
};
use bilinear_taylor::reference::{self, cross_validate, ReferenceFamily, Role};
use bilinear_taylor::region::{self, fmt_num, DeltaSource, DEFAULT_GRID_POINTS};
use bilinear_taylor::{Error, InnovationSpec};

#[derive(Parser)]
#[command(name = "bilinear-taylor", version, about = "Lag-1 Taylor property of the bilinear model X_t = beta X_{t-k} eps_{t-k} + eps_t")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Moments E(X^n eps^n), E(X^n), variance and excess kurtosis.
    Moments(PointArgs),
    /// rho_X(1), rho_{X^2}(1) and their difference.
    Acf1(SourcedPointArgs),
    /// Excess kurtosis of X.
    Kurtosis(SourcedPointArgs),
    /// Certified intervals of r where rho_X(1) > rho_{X^2}(1).
    Region(RegionArgs),
    /// delta(r) and K(r) on a grid, as CSV.
    Sweep(SweepArgs),
    /// Simulate one path.
    Simulate(SimulateArgs),
    /// Replication experiment over the symmetric laws.
    Table1(Table1Args),
    /// Cross-check the generic analytics against the closed forms.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// uniform0a, exp, pareto<nu>, unif-sym, normal or t<nu>.
    #[arg(long)]
    family: String,
    /// Reduced coordinate r = alpha * beta with alpha = 1 (scale families).
    #[arg(long, conflicts_with_all = ["alpha", "beta"], allow_negative_numbers = true)]
    r: Option<f64>,
    /// Scale of the innovation law (scale families).
    #[arg(long, requires = "beta")]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
}

impl ModelArgs {
    fn resolve(&self) -> Result<(InnovationSpec, ModelSpec), Error> {
        let spec = InnovationSpec::from_name(&self.family)?;
        let (spec, beta) = match (self.r, self.alpha, self.beta) {
            (Some(r), ..) => {
                if spec.scale().is_none() {
                    return Err(Error::Domain(format!(
                        "--r needs a scale family; use --beta for {}",
                        spec.name()
                    )));
                }
                (spec, r)
            }
            (None, Some(alpha), Some(beta)) => (spec.with_scale(alpha)?, beta),
            (None, None, Some(beta)) => (spec, beta),
            _ => return Err(Error::Domain("one of --r or --beta is required".into())),
        };
        Ok((spec, ModelSpec::first_order(beta)?))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Generic,
    Printed,
}

impl From<Source> for DeltaSource {
    fn from(s: Source) -> Self {
        match s {
            Source::Generic => DeltaSource::Generic,
            Source::Printed => DeltaSource::Printed,
        }
    }
}

#[derive(Args)]
struct Output {
    /// Write to a file instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl Output {
    fn emit(&self, text: &str) -> io::Result<()> {
        match &self.output {
            Some(path) => fs::write(path, text),
            None => io::stdout().lock().write_all(text.as_bytes()),
        }
    }
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct SourcedPointArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Closed forms are available for uniform0a, exp, pareto12 and pareto9.
    #[arg(long, value_enum, default_value = "generic")]
    source: Source,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct RegionArgs {
    #[arg(long)]
    family: String,
    /// Half-width of the bracket around each root.
    #[arg(long, default_value_t = 5e-9)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid: usize,
    #[arg(long, value_enum, default_value = "generic")]
    source: Source,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, required_unless_present = "pareto_nus", conflicts_with = "pareto_nus")]
    family: Option<String>,
    /// Pareto shapes swept on one shared grid.
    #[arg(long, value_delimiter = ',')]
    pareto_nus: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1000)]
    grid: usize,
    #[arg(long, value_enum, default_value = "generic")]
    source: Source,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 1)]
    lag: usize,
    #[arg(long, default_value_t = monte_carlo::DEFAULT_N_OBS)]
    n_obs: usize,
    #[arg(long, default_value_t = monte_carlo::DEFAULT_BURN_IN)]
    burn_in: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ci {
    Wald,
    ClopperPearson,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Text,
    Csv,
    Json,
}

#[derive(Args)]
struct Table1Args {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = monte_carlo::DEFAULT_N_REPS)]
    reps: usize,
    #[arg(long, default_value_t = monte_carlo::DEFAULT_N_OBS)]
    n_obs: usize,
    #[arg(long, default_value_t = monte_carlo::DEFAULT_BURN_IN)]
    burn_in: usize,
    #[arg(long, value_enum, default_value = "wald")]
    ci: Ci,
    /// Count a replication when the inequality holds at most of lags
    /// 1..=N instead of at lag 1 only.
    #[arg(long, value_name = "N")]
    majority_lags: Option<usize>,
    /// Restrict to one law.
    #[arg(long)]
    family: Option<String>,
    /// Restrict to one coefficient.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: TableFormat,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct VerifyArgs {
    /// Interior grid points per family.
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Largest accepted relative error.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

enum Failure {
    Model(Error),
    Io(io::Error),
    Threshold(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Model(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Model(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_domain() { 2 } else { 3 })
        }
        Err(Failure::Threshold(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Moments(a) => moments(a),
        Command::Acf1(a) => acf1(a),
        Command::Kurtosis(a) => kurtosis(a),
        Command::Region(a) => region(a),
        Command::Sweep(a) => sweep(a),
        Command::Simulate(a) => simulate(a),
        Command::Table1(a) => table1(a),
        Command::Verify(a) => verify(a),
    }
}

/// Name of the coordinate column and its value: `r` for scale families,
/// `beta` otherwise.
fn coordinate(spec: &InnovationSpec, model: &ModelSpec) -> (&'static str, f64) {
    match spec.scale() {
        Some(alpha) => ("r", alpha * model.beta),
        None => ("beta", model.beta),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes") + "\n"
}

fn moments(a: PointArgs) -> Result<(), Failure> {
    let (spec, model) = a.model.resolve()?;
    let table = moment_table(&spec, &model)?;
    let stat = check_stationarity(&model, &spec.raw_moments(), &spec);
    let gamma = stat.lyapunov_gamma.unwrap_or(f64::NAN);
    let text = match a.format {
        Format::Csv => {
            let mut out = String::from("quantity,value\n");
            for n in 1..=4 {
                let _ = writeln!(out, "exe{n},{}", fmt_num(table.exe[n]));
            }
            for n in 1..=4 {
                let _ = writeln!(out, "ex{n},{}", fmt_num(table.ex[n]));
            }
            let _ = writeln!(out, "variance,{}", fmt_num(table.variance));
            let _ = writeln!(out, "excess_kurtosis,{}", fmt_num(table.excess_kurtosis));
            let _ = writeln!(out, "lyapunov_gamma,{}", fmt_num(gamma));
            let _ = writeln!(out, "stationarity_margin,{}", fmt_num(stat.margin));
            out
        }
        Format::Json => pretty(&json!({
            "family": spec.to_string(),
            "beta": model.beta,
            "exe": &table.exe[1..],
            "ex": &table.ex[1..],
            "variance": table.variance,
            "excess_kurtosis": table.excess_kurtosis,
            "stationarity": stat,
        })),
    };
    Ok(a.out.emit(&text)?)
}

/// Lag-1 report for either source. Closed forms use the reduced coordinate.
fn lag1_values(spec: &InnovationSpec, model: &ModelSpec, source: Source) -> Result<[f64; 4], Error> {
    match source {
        Source::Generic => {
            let rep = lag1_report(spec, model)?;
            Ok([rep.rho1, rep.rho1_sq, rep.delta, rep.excess_kurtosis])
        }
        Source::Printed => {
            let family = ReferenceFamily::for_innovation(spec)
                .ok_or_else(|| Error::Domain(format!("no closed-form formulas for {}", spec.name())))?;
            bilinear_taylor::moments::check_model(spec, model)?;
            let r = coordinate(spec, model).1;
            let f = |role| reference::eval_formula(family.formula(role), r);
            let (rho1, rho1_sq) = (f(Role::Rho1)?, f(Role::Rho1Sq)?);
            Ok([rho1, rho1_sq, rho1 - rho1_sq, f(Role::Kurtosis)?])
        }
    }
}

fn acf1(a: SourcedPointArgs) -> Result<(), Failure> {
    let (spec, model) = a.model.resolve()?;
    let [rho1, rho1_sq, delta, k] = lag1_values(&spec, &model, a.source)?;
    let (name, coord) = coordinate(&spec, &model);
    let text = match a.format {
        Format::Csv => format!(
            "family,{name},rho1,rho1_sq,delta,excess_kurtosis,taylor\n{},{},{},{},{},{},{}\n",
            spec.name(),
            fmt_num(coord),
            fmt_num(rho1),
            fmt_num(rho1_sq),
            fmt_num(delta),
            fmt_num(k),
            delta > 0.0
        ),
        Format::Json => pretty(&json!({
            "family": spec.name(),
            (name): coord,
            "rho1": rho1,
            "rho1_sq": rho1_sq,
            "delta": delta,
            "excess_kurtosis": k,
            "taylor": delta > 0.0,
        })),
    };
    Ok(a.out.emit(&text)?)
}

fn kurtosis(a: SourcedPointArgs) -> Result<(), Failure> {
    let (spec, model) = a.model.resolve()?;
    let k = lag1_values(&spec, &model, a.source)?[3];
    let (name, coord) = coordinate(&spec, &model);
    let text = match a.format {
        Format::Csv => format!("family,{name},excess_kurtosis\n{},{},{}\n", spec.name(), fmt_num(coord), fmt_num(k)),
        Format::Json => pretty(&json!({ "family": spec.name(), (name): coord, "excess_kurtosis": k })),
    };
    Ok(a.out.emit(&text)?)
}

fn region(a: RegionArgs) -> Result<(), Failure> {
    let spec = InnovationSpec::from_name(&a.family)?;
    let found = region::find_regions(&spec, a.source.into(), a.grid, a.tol)?;
    let text = match a.format {
        Format::Json => found.to_json() + "\n",
        Format::Csv => {
            let mut out = String::from("family,lo,hi,lo_radius,hi_radius\n");
            for iv in &found.intervals {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    found.family,
                    fmt_num(iv.lo),
                    fmt_num(iv.hi),
                    fmt_num(iv.lo_radius),
                    fmt_num(iv.hi_radius)
                );
            }
            out
        }
    };
    Ok(a.out.emit(&text)?)
}

fn sweep(a: SweepArgs) -> Result<(), Failure> {
    let rows = match (&a.family, &a.pareto_nus) {
        (Some(name), _) => {
            region::sweep_delta(&InnovationSpec::from_name(name)?, a.source.into(), a.grid)?
        }
        (None, Some(nus)) => region::sweep_pareto_shapes(nus, a.grid)?,
        (None, None) => return Err(Error::Domain("--family or --pareto-nus is required".into()).into()),
    };
    let mut buf = Vec::new();
    region::write_sweep_csv(&rows, &mut buf)?;
    Ok(a.out.emit(&String::from_utf8(buf).expect("csv is utf-8"))?)
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let (spec, model) = a.model.resolve()?;
    let model = ModelSpec::new(model.beta, a.lag)?;
    let config = SimConfig::new(model, spec, a.n_obs, a.burn_in, a.seed)?;
    if !config.is_stationary() {
        eprintln!("warning: beta^4 mu_4 >= 1, X^2 is not weakly stationary");
    }
    let path = monte_carlo::simulate_path(&config)?;
    let text = match a.format {
        Format::Csv => {
            let mut out = String::from("t,x,eps\n");
            for (t, (x, e)) in path.x.iter().zip(&path.eps).enumerate() {
                let _ = writeln!(out, "{t},{},{}", fmt_num(*x), fmt_num(*e));
            }
            out
        }
        Format::Json => pretty(&json!({
            "config": config,
            "stationary": path.stationary,
            "x": path.x,
            "eps": path.eps,
        })),
    };
    Ok(a.out.emit(&text)?)
}

fn table1(a: Table1Args) -> Result<(), Failure> {
    let options = ReplicationOptions {
        n_obs: a.n_obs,
        n_reps: a.reps,
        burn_in: a.burn_in,
        seed: a.seed,
        ci: match a.ci {
            Ci::Wald => CiMethod::Wald,
            Ci::ClopperPearson => CiMethod::ClopperPearson,
        },
        rule: match a.majority_lags {
            Some(max_lag) => SuccessRule::Majority { max_lag },
            None => SuccessRule::Lag1,
        },
    };
    let reports = match (&a.family, a.beta) {
        (None, None) => monte_carlo::run_table1(&options)?,
        (family, beta) => {
            let families = match family {
                Some(name) => vec![InnovationSpec::from_name(name)?],
                None => monte_carlo::TABLE1_FAMILIES
                    .iter()
                    .map(|n| InnovationSpec::from_name(n))
                    .collect::<Result<_, _>>()?,
            };
            let betas = beta.map_or(monte_carlo::TABLE1_BETAS.to_vec(), |b| vec![b]);
            let mut out = Vec::new();
            for b in &betas {
                for f in &families {
                    out.push(replication_experiment(*b, f, &options)?);
                }
            }
            out
        }
    };
    let text = match a.format {
        TableFormat::Text => monte_carlo::render_table1(&reports),
        TableFormat::Csv => {
            let mut buf = Vec::new();
            monte_carlo::write_replication_csv(&reports, &mut buf)?;
            String::from_utf8(buf).expect("csv is utf-8")
        }
        TableFormat::Json => pretty(&json!(reports)),
    };
    Ok(a.out.emit(&text)?)
}

fn verify(a: VerifyArgs) -> Result<(), Failure> {
    let rows = cross_validate(a.points)?;
    let mut out = String::from("family,role,max_rel_error,at_r\n");
    let mut worst: f64 = 0.0;
    for d in &rows {
        worst = worst.max(d.max_rel_error);
        let _ = writeln!(
            out,
            "{},{},{},{}",
            d.family.name(),
            d.role.name(),
            fmt_num(d.max_rel_error),
            fmt_num(d.at_r)
        );
    }
    let _ = writeln!(out, "max relative error: {worst:.3e}");
    io::stdout().lock().write_all(out.as_bytes())?;
    if worst >= a.tol {
        return Err(Failure::Threshold(format!("max relative error {worst:.3e} not below {:e}", a.tol)));
    }
    Ok(())
}
