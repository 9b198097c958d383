//! `legnet`: builds and verifies Legendrian nets, tabulates bounds and runs
//! the curve-section experiments.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use legnet::net::{self, Mode, NetError, NetOptions};
use legnet::sections::{self, SectionError};
use legnet::selftest::{self, SelftestOptions};
use legnet::{par, Exec, Sampling, Tolerances};

#[derive(Parser, Debug)]
#[command(name = "legnet", version, about = "Legendrian nets on the unit sphere in C²")]
struct Cli {
    /// Worker threads (0 = one per core, 1 = sequential).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Pointwise tolerance for lifted arcs.
    #[arg(long, global = true)]
    lift_tol: Option<f64>,
    /// Endpoint tolerance for closure checks.
    #[arg(long, global = true)]
    closure_tol: Option<f64>,
    /// Relative tolerance for adaptive quadrature.
    #[arg(long, global = true)]
    quad_tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the net for one ε, verify it and write the outputs.
    Net(NetArgs),
    /// Net sizes and lower bounds over a range of ε.
    Sweep(RangeArgs),
    /// Lengths of {w² = a·z(z−1)} ∩ S³ over a range of a.
    Quadric(QuadricArgs),
    /// Run the built-in invariant suites.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
struct NetArgs {
    #[arg(long)]
    epsilon: f64,
    /// full or sampled; defaults to full for ε ≥ 0.2.
    #[arg(long)]
    mode: Option<Mode>,
    /// Net JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the verification report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Planar picture of the net.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Outermost colatitude drawn in the SVG.
    #[arg(long, default_value_t = 1.2)]
    clip: f64,
    /// List every cell in the JSON, not only j = 0 of each ring.
    #[arg(long)]
    all_cells: bool,
}

#[derive(Args, Debug)]
struct RangeArgs {
    #[arg(long)]
    min: f64,
    #[arg(long)]
    max: f64,
    /// Number of rows, endpoints included.
    #[arg(long)]
    steps: usize,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct QuadricArgs {
    #[command(flatten)]
    range: RangeArgs,
    /// Samples per component.
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    /// Sampled components of every row as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Only suites whose name contains this.
    #[arg(long)]
    filter: Option<String>,
    /// Also write the report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Settings read from the file named by `LEGNET_CONFIG`. Command-line flags
/// take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    tolerances: Tolerances,
    sampling: Sampling,
    mode: Option<Mode>,
    /// Relative output paths are resolved against this directory.
    output_dir: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Verification(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl From<legnet::Error> for Failure {
    fn from(e: legnet::Error) -> Self {
        match e {
            legnet::Error::Net(NetError::EpsilonOutOfRange(_)) | legnet::Error::Config(_) => Failure::Usage(e.to_string()),
            legnet::Error::Section(SectionError::Degenerate(_)) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.into()),
        }
    }
}

fn load_config() -> Result<RunConfig, Failure> {
    let Ok(path) = std::env::var("LEGNET_CONFIG") else { return Ok(RunConfig::default()) };
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("cannot read LEGNET_CONFIG={path}: {e}")))?;
    toml::from_str(&text).map_err(|e| Failure::Usage(format!("invalid config {path}: {e}")))
}

struct Ctx {
    config: RunConfig,
    exec: Exec,
}

impl Ctx {
    fn path(&self, p: &Path) -> PathBuf {
        match &self.config.output_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn create(&self, p: &Path) -> Result<BufWriter<File>, Failure> {
        let p = self.path(p);
        let f = File::create(&p).with_context(|| format!("creating {}", p.display()))?;
        Ok(BufWriter::new(f))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = load_config().and_then(|mut config| {
        if let Some(v) = cli.lift_tol {
            config.tolerances.lift = v;
        }
        if let Some(v) = cli.closure_tol {
            config.tolerances.closure = v;
        }
        if let Some(v) = cli.quad_tol {
            config.tolerances.quadrature = v;
        }
        config.tolerances.validate()?;
        config.sampling.validate()?;
        let exec = if cli.jobs == 1 { Exec::Sequential } else { Exec::default() };
        let ctx = Ctx { config, exec };
        par::with_jobs(cli.jobs, || run(&cli.command, &ctx))
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: &Command, ctx: &Ctx) -> Result<(), Failure> {
    match cmd {
        Command::Net(a) => cmd_net(a, ctx),
        Command::Sweep(a) => cmd_sweep(a, ctx),
        Command::Quadric(a) => cmd_quadric(a, ctx),
        Command::Selftest(a) => cmd_selftest(a, ctx),
    }
}

fn cmd_net(a: &NetArgs, ctx: &Ctx) -> Result<(), Failure> {
    let params = net::compute_params(a.epsilon).map_err(legnet::Error::from)?;
    let mode = a.mode.or(ctx.config.mode).unwrap_or_else(|| Mode::default_for(a.epsilon));
    let opts = NetOptions { mode, tolerances: ctx.config.tolerances, sampling: ctx.config.sampling, exec: ctx.exec };
    let built = net::lift_net(&params, &opts).map_err(|e| Failure::Verification(e.to_string()))?;
    let report = net::verify_net(&built);
    print!("{report}");
    if let Some(p) = &a.report {
        write!(ctx.create(p)?, "{report}")?;
    }
    if let Some(p) = &a.out {
        net::write_json(&built, ctx.create(p)?, a.all_cells)?;
    }
    if let Some(p) = &a.svg {
        net::write_svg(&params, ctx.create(p)?, a.clip)?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("net ε = {} did not verify", a.epsilon)))
    }
}

fn linspace(r: &RangeArgs) -> Result<Vec<f64>, Failure> {
    if !(r.min < r.max) || r.steps < 2 {
        return Err(Failure::Usage(format!("need --min < --max and --steps ≥ 2 (got {}, {}, {})", r.min, r.max, r.steps)));
    }
    Ok((0..r.steps).map(|i| r.min + (r.max - r.min) * i as f64 / (r.steps - 1) as f64).collect())
}

fn output(ctx: &Ctx, p: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match p {
        Some(p) => Box::new(ctx.create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_sweep(a: &RangeArgs, ctx: &Ctx) -> Result<(), Failure> {
    let eps = linspace(a)?;
    let table = net::sweep(&eps, ctx.exec)?;
    table.write_csv(output(ctx, &a.out)?)?;
    let below: Vec<f64> = table
        .rows
        .iter()
        .filter(|r| (r.card as f64) < r.lower_quadratic.max(r.lower_cubic))
        .map(|r| r.epsilon)
        .collect();
    eprintln!("slope = {:.4}", table.slope);
    if below.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("net smaller than a lower bound at ε = {below:?}")))
    }
}

fn cmd_quadric(a: &QuadricArgs, ctx: &Ctx) -> Result<(), Failure> {
    if !(a.range.min > 0.0) {
        return Err(Failure::Usage(format!("--min must be positive, got {} (a = 0 is the double line)", a.range.min)));
    }
    let values = linspace(&a.range)?;
    let results = par::map_slice(ctx.exec, &values, |&v| sections::quadric_boundary(num_complex::Complex64::new(v, 0.0), a.samples));
    let mut rows = Vec::new();
    let mut ok_sections = Vec::new();
    for (v, r) in values.iter().zip(results) {
        match r {
            Ok(s) => {
                rows.push(sections::QuadricRow {
                    a: *v,
                    total_length: s.total_length,
                    eta_integral: s.eta_total,
                    component_count: s.component_count(),
                });
                ok_sections.push(s);
            }
            Err(e) => eprintln!("a = {v}: {e}"),
        }
    }
    if rows.is_empty() {
        return Err(Failure::Verification("every row failed".into()));
    }
    sections::write_quadric_csv(&rows, output(ctx, &a.range.out)?)?;
    if let Some(p) = &a.json {
        sections::write_sections_json(&ok_sections, ctx.create(p)?, 1)?;
    }
    let best = rows.iter().min_by(|x, y| x.total_length.total_cmp(&y.total_length)).expect("non-empty");
    let four_pi = 4.0 * std::f64::consts::PI;
    eprintln!(
        "min total length {:.6} at a = {:.4}: {} 4π",
        best.total_length,
        best.a,
        if best.total_length < four_pi { "<" } else { "≥" }
    );
    let low: Vec<f64> = rows.iter().filter(|r| r.eta_integral < std::f64::consts::TAU - 1e-6).map(|r| r.a).collect();
    if low.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("∫η below 2π at a = {low:?}")))
    }
}

fn cmd_selftest(a: &SelftestArgs, ctx: &Ctx) -> Result<(), Failure> {
    let opts = SelftestOptions { seed: a.seed, filter: a.filter.clone(), exec: ctx.exec, tolerances: ctx.config.tolerances };
    let report = selftest::run(&opts);
    print!("{report}");
    if let Some(p) = &a.out {
        write!(ctx.create(p)?, "{report}")?;
    }
    if report.suites.is_empty() {
        return Err(Failure::Usage(format!("no suite matches {:?}", a.filter)));
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Verification("selftest had failures".into()))
    }
}
