mod config;
mod emit;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand};

use config::{ConfigError, RunConfig, Settings};
use lrosc::classical::CATALOG;
use lrosc::simulation::spaced_grid;

const SIMULATE_ABOUT: &str = "\
Evaluate the exact closed-form motion on a time grid and write CSV.

Output starts with `#` metadata lines (version, settings), then one row per
output time with columns:
  t           time
  q_mean      <q>
  p_mean      <p>
  var_q       variance of q
  var_p       variance of p
  cov_qp      symmetrised covariance <qp + pq>/2 - <q><p>
  theta       invariant phase Theta(t)
  re_beta     Re beta(t), the c-number part of the forced invariant
  im_beta     Im beta(t)
  omega_I_sq  g+ g- - g0^2 as sampled (constant for a correct invariant)
  energy      <H(t)>

With --ellipse-every, covariance ellipses follow after a `#` separator line
(or go to --ellipse-out) with columns:
  t           time
  axis_major  major semi-axis (sqrt of the larger covariance eigenvalue)
  axis_minor  minor semi-axis
  tilt        angle of the major axis from the q axis, in (-pi/2, pi/2]

Values can also come from --config FILE (key = value lines, optional
[section] headers, a [params] section for extra model parameters); flags
override the file. Numeric values accept constant expressions such as 1/3.";

const VERIFY_ABOUT: &str = "\
Compare the closed form against direct numerical integration of the moment
equations and print a deviation table (CSV).

Exit status: 0 when every quantity is within --tol, 1 when some deviation
exceeds it or the computation fails, 2 for invalid input. The five moments
are judged on absolute deviation; energy on deviation / max(1, |energy|).";

#[derive(Parser)]
#[command(
    name = "lrosc",
    version,
    about = "Driven time-dependent harmonic oscillator via its quadratic invariant"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the closed-form trajectory as CSV
    #[command(long_about = SIMULATE_ABOUT)]
    Simulate(SimulateArgs),
    /// Check the closed form against an independent integration
    #[command(long_about = VERIFY_ABOUT)]
    Verify(VerifyArgs),
    /// Built-in models
    #[command(subcommand)]
    Catalog(CatalogCommand),
}

#[derive(Subcommand)]
enum CatalogCommand {
    /// List built-in models and their parameters
    List,
}

#[derive(Args, Default)]
struct RunArgs {
    /// Settings file (key = value); flags override it
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// constant, pulsating or expr
    #[arg(long)]
    model: Option<String>,
    /// Mass of the constant model (also a parameter for expr)
    #[arg(long)]
    m: Option<String>,
    /// Frequency: a number for the constant model, omega(t) for expr
    #[arg(long)]
    omega: Option<String>,
    /// Pulsating model: initial mass
    #[arg(long)]
    m0: Option<String>,
    /// Pulsating model: invariant frequency
    #[arg(long = "Omega", value_name = "OMEGA")]
    big_omega: Option<String>,
    /// Pulsating model: damping rate
    #[arg(long)]
    gamma: Option<String>,
    /// Pulsating model: modulation depth
    #[arg(long)]
    mu: Option<String>,
    /// Pulsating model: modulation frequency (rationals like 1/3 accepted)
    #[arg(long)]
    nu: Option<String>,
    /// Constant model: force per unit mass
    #[arg(long = "F", value_name = "F")]
    big_f: Option<String>,
    /// expr model: M(t)
    #[arg(long)]
    mass: Option<String>,
    /// expr model: omega(t)^2, instead of --omega
    #[arg(long = "omega-sq")]
    omega_sq: Option<String>,
    /// Force per unit mass F(t); replaces the model's own force
    #[arg(long)]
    force: Option<String>,
    /// Extra model parameter, repeatable
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// vacuum, number:N or coherent:MAG,DELTA (alpha = MAG e^{-i DELTA}) [default: vacuum]
    #[arg(long)]
    state: Option<String>,
    /// matched, zero or RE,IM [default: matched]
    #[arg(long)]
    beta0: Option<String>,
    /// c1,c2,c3 | hamiltonian | initial:g-,g0,g+ [default: 1,0,1]
    #[arg(long)]
    invariant: Option<String>,
    /// auto (closed-form solutions when known) or numeric [default: auto]
    #[arg(long)]
    basis: Option<String>,
    /// Start time [default: 0]
    #[arg(long)]
    t0: Option<String>,
    /// End time
    #[arg(long)]
    t1: Option<String>,
    /// Output spacing [default: (t1 - t0)/100]
    #[arg(long)]
    dt: Option<String>,
    /// Absolute tolerance of the classical solver
    #[arg(long = "abs-tol")]
    abs_tol: Option<String>,
    /// Relative tolerance of the classical solver
    #[arg(long = "rel-tol")]
    rel_tol: Option<String>,
    /// Tolerance per panel of the phase and drift quadratures
    #[arg(long = "quad-tol")]
    quad_tol: Option<String>,
    /// Largest quadrature panel
    #[arg(long = "max-panel")]
    max_panel: Option<String>,
    /// adaptive or simpson
    #[arg(long = "drift-rule")]
    drift_rule: Option<String>,
    /// Output file [default: stdout]
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

impl RunArgs {
    fn flags(&self) -> Result<Settings, ConfigError> {
        let mut s = Settings::default();
        let pairs = [
            ("model", &self.model),
            ("m", &self.m),
            ("omega", &self.omega),
            ("m0", &self.m0),
            ("Omega", &self.big_omega),
            ("gamma", &self.gamma),
            ("mu", &self.mu),
            ("nu", &self.nu),
            ("F", &self.big_f),
            ("mass", &self.mass),
            ("omega-sq", &self.omega_sq),
            ("force", &self.force),
            ("state", &self.state),
            ("beta0", &self.beta0),
            ("invariant", &self.invariant),
            ("basis", &self.basis),
            ("t0", &self.t0),
            ("t1", &self.t1),
            ("dt", &self.dt),
            ("abs-tol", &self.abs_tol),
            ("rel-tol", &self.rel_tol),
            ("quad-tol", &self.quad_tol),
            ("max-panel", &self.max_panel),
            ("drift-rule", &self.drift_rule),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                s.set(k, v.clone())?;
            }
        }
        if let Some(p) = &self.output {
            s.set("output", p.display().to_string())?;
        }
        for p in &self.params {
            s.set_param(p)?;
        }
        Ok(s)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Emit a covariance ellipse every this many time units
    #[arg(long = "ellipse-every", value_name = "DT")]
    ellipse_every: Option<String>,
    /// Write ellipses to this file instead of appending them
    #[arg(long = "ellipse-out", value_name = "FILE")]
    ellipse_out: Option<PathBuf>,
    /// Run several config files in parallel, one CSV each (flags apply to all)
    #[arg(long, num_args = 1.., value_name = "CONFIG")]
    sweep: Vec<PathBuf>,
    /// Directory for --sweep outputs, named after each config [default: .]
    #[arg(long = "out-dir", value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Largest accepted deviation [default: 1e-6]
    #[arg(long)]
    tol: Option<String>,
    /// Tolerance of the reference integration [default: 1e-14]
    #[arg(long = "oracle-tol")]
    oracle_tol: Option<String>,
}

enum Failure {
    Input(anyhow::Error),
    Run(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Input(e.into())
    }
}

fn run_err<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Run(e.into())
}

fn layered(
    run: &RunArgs,
    base: Option<&Path>,
    extra: &[(&str, &Option<String>)],
) -> Result<Settings, Failure> {
    let mut s = match base.or(run.config.as_deref()) {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let mut flags = run.flags()?;
    for (k, v) in extra {
        if let Some(v) = v {
            flags.set(k, v.clone())?;
        }
    }
    s.merge(&flags);
    Ok(s)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text)
            .with_context(|| format!("cannot write {}", p.display()))
            .map_err(Failure::Run),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(run_err)
        }
    }
}

/// Runs one simulation and returns the main CSV text (and ellipse text when
/// it goes to its own file).
fn simulate_one(settings: &Settings) -> Result<(RunConfig, String, Option<String>), Failure> {
    let cfg = RunConfig::resolve(settings)?;
    let scenario = cfg.scenario()?;
    let sim = scenario
        .build()
        .context("building the invariant")
        .map_err(Failure::Run)?;
    let mut meta = settings.echo();
    meta.push(format!("omega_I = {}", emit::num(sim.frame().omega_i())));
    let b0 = sim.beta0();
    meta.push(format!("beta0 = {},{}", emit::num(b0.re), emit::num(b0.im)));
    let header = emit::metadata(&meta);
    let mut text = header.clone();
    text.push_str(&emit::trajectory(&sim, &cfg.state, cfg.t0, cfg.t1, cfg.dt).map_err(run_err)?);
    let mut separate = None;
    if let Some(every) = cfg.ellipse_every {
        let table = emit::ellipses(&sim, &cfg.state, cfg.t0, cfg.t1, every).map_err(run_err)?;
        if cfg.ellipse_out.is_some() {
            separate = Some(header + &table);
        } else {
            text.push_str("# ellipses\n");
            text.push_str(&table);
        }
    }
    Ok((cfg, text, separate))
}

fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let ellipse_out = args
        .ellipse_out
        .as_ref()
        .map(|p| Some(p.display().to_string()));
    let extra = [
        ("ellipse-every", &args.ellipse_every),
        ("ellipse-out", ellipse_out.as_ref().unwrap_or(&None)),
    ];
    if args.sweep.is_empty() {
        let settings = layered(&args.run, None, &extra)?;
        let (cfg, text, ellipses) = simulate_one(&settings)?;
        if let (Some(path), Some(table)) = (&cfg.ellipse_out, ellipses) {
            write_out(Some(path), &table)?;
        }
        return write_out(cfg.output.as_deref(), &text);
    }

    if args.run.output.is_some() || args.ellipse_out.is_some() {
        return Err(Failure::Input(anyhow::anyhow!(
            "--sweep writes one file per config; use --out-dir instead of -o/--ellipse-out"
        )));
    }
    let dir = args.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut jobs = Vec::new();
    for path in &args.sweep {
        let settings = layered(&args.run, Some(path), &extra)?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into());
        jobs.push((dir.join(format!("{stem}.csv")), settings));
    }
    let results: Vec<Result<(), Failure>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(out, settings)| {
                scope.spawn(move || {
                    let (_, text, _) = simulate_one(settings)?;
                    write_out(Some(out), &text)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    for (r, (out, _)) in results.into_iter().zip(&jobs) {
        match r {
            Ok(()) => {}
            Err(Failure::Input(e)) => {
                return Err(Failure::Input(
                    e.context(format!("sweep job {}", out.display())),
                ))
            }
            Err(Failure::Run(e)) => {
                return Err(Failure::Run(
                    e.context(format!("sweep job {}", out.display())),
                ))
            }
        }
    }
    Ok(())
}

/// Returns whether every deviation passed.
fn verify(args: &VerifyArgs) -> Result<bool, Failure> {
    let settings = layered(
        &args.run,
        None,
        &[("tol", &args.tol), ("oracle-tol", &args.oracle_tol)],
    )?;
    let cfg = RunConfig::resolve(&settings)?;
    let sim = cfg
        .scenario()?
        .build()
        .context("building the invariant")
        .map_err(Failure::Run)?;
    let grid = spaced_grid(cfg.t0, cfg.t1, cfg.dt);
    let report = sim
        .verify(&cfg.state, &grid, cfg.tol, &cfg.oracle)
        .context("comparing against the reference integration")
        .map_err(Failure::Run)?;
    let mut text = emit::metadata(&settings.echo());
    text.push_str(&report.to_csv());
    write_out(cfg.output.as_deref(), &text)?;
    Ok(report.passed())
}

fn catalog_list() -> String {
    let mut out = String::new();
    for e in CATALOG {
        out.push_str(&format!(
            "{}\n  parameters: {}\n",
            e.name,
            e.params.join(", ")
        ));
        if !e.optional.is_empty() {
            out.push_str(&format!("  optional:   {}\n", e.optional.join(", ")));
        }
        out.push_str(&format!("  {}\n", e.description));
    }
    out.push_str("expr\n  parameters: mass, omega | omega-sq, force (expressions in t; extra names via --param)\n");
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate(args) => simulate(args).map(|_| true),
        Command::Verify(args) => verify(args),
        Command::Catalog(CatalogCommand::List) => write_out(None, &catalog_list()).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
