//! `igeo`: runs the integral-geometry experiments and writes JSON or CSV reports.

mod report;

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use integral_geometry::bkk::{self, BkkConfig};
use integral_geometry::convex::{CenteredEllipsoid, Frame};
use integral_geometry::crofton::{
    arclength, curve_radius, euclid_crofton_length, product_crofton_check, sphere_crofton_length, Circle,
    CurveDefinition, CurveModel, CurveSpace, CurveSpec, Segment, SmallCircle, TrigCurve,
};
use integral_geometry::density::{d1, d_m, product_d1};
use integral_geometry::mixed_volume::MixedVolumeConfig;
use integral_geometry::verify::{run_criterion, Profile, CRITERIA};
use serde::Serialize;

use report::ExperimentReport;

#[derive(Parser, Debug)]
#[command(name = "igeo", version, about = "Mixed volumes, Crofton estimators and average zero counts")]
struct Cli {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mixed volume of m centered ellipsoids in R^m.
    MixedVolume(MixedVolumeArgs),
    /// d_m and the product of 1-densities on a frame.
    Density(DensityArgs),
    /// Euclidean Crofton length estimate of a curve in R^2 or R^3.
    CroftonEuclid(EuclidArgs),
    /// Great-circle Crofton length estimate of a curve on S^2.
    CroftonSphere(SphereArgs),
    /// Product Crofton check for C1 x C2 on S^2 x S^2.
    CroftonProduct(ProductArgs),
    /// Average zero count by Monte Carlo, density integral and mixed volume.
    Bkk(BkkArgs),
    /// Runs the acceptance suite; exits 1 on any failure.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MvMethod {
    Mc,
    Oracle,
}

#[derive(Args, Debug, Serialize)]
struct MethodArgs {
    #[arg(long, value_enum, default_value_t = MvMethod::Mc)]
    method: MvMethod,
    /// Monte Carlo trials for the mixed volume.
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    /// Support directions for the polarization oracle.
    #[arg(long, default_value_t = 720)]
    directions: usize,
}

impl MethodArgs {
    fn config(&self, seed: u64) -> MixedVolumeConfig {
        match self.method {
            MvMethod::Mc => MixedVolumeConfig::GaussianMc { trials: self.trials, seed },
            MvMethod::Oracle => MixedVolumeConfig::PolarizationOracle { directions: self.directions },
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct MixedVolumeArgs {
    /// JSON file `{"bodies": [matrix, ...]}` with each matrix a list of rows.
    #[arg(long)]
    bodies: PathBuf,
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct DensityArgs {
    /// JSON file `{"bodies": [matrix, ...], "frame": [vector, ...]}`.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct EuclidArgs {
    /// `segment`, `circle`, or a JSON curve file.
    #[arg(long)]
    curve: String,
    /// Circle radius.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Segment length.
    #[arg(long, default_value_t = 1.0)]
    length: f64,
    /// Ambient dimension for built-in curves.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Hyperplane offset range; defaults to 1% above the curve's radius.
    #[arg(long)]
    range: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct SphereArgs {
    /// `great`, `small`, `ellipse`, or a JSON curve file.
    #[arg(long)]
    curve: String,
    /// Colatitude of a small circle.
    #[arg(long, default_value_t = PI / 6.0)]
    colatitude: f64,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct ProductArgs {
    /// JSON file with an `S2xS2` curve; overrides --first/--second.
    #[arg(long)]
    config: Option<PathBuf>,
    /// First factor: `great`, `small`, `point`, or a JSON curve file.
    #[arg(long, default_value = "great")]
    first: String,
    /// Second factor, as --first.
    #[arg(long, default_value = "great")]
    second: String,
    /// Colatitude used by `small` factors.
    #[arg(long, default_value_t = PI / 6.0)]
    colatitude: f64,
    /// Quadrature nodes per axis for the density integral.
    #[arg(long, default_value_t = 32)]
    grid: usize,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct BkkArgs {
    /// Experiment file: domain, spaces, trials and optional settings.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the trial count of the file.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
#[group(required = true, multiple = false)]
struct ProfileArgs {
    /// Reduced trial counts, about a minute.
    #[arg(long)]
    quick: bool,
    /// Full trial counts with runtime budgets.
    #[arg(long)]
    full: bool,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    /// Run only these criteria (1-9).
    #[arg(long = "criterion")]
    criteria: Vec<usize>,
}

fn read_json(path: &Path) -> anyhow::Result<serde_json::Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn inputs<T: Serialize>(args: &T, config: Option<serde_json::Value>) -> anyhow::Result<serde_json::Value> {
    let mut v = serde_json::to_value(args)?;
    if let (Some(c), Some(map)) = (config, v.as_object_mut()) {
        map.insert("config_contents".into(), c);
    }
    Ok(v)
}

fn parse_bodies(value: &serde_json::Value) -> anyhow::Result<Vec<CenteredEllipsoid>> {
    let rows: Vec<Vec<Vec<f64>>> = serde_json::from_value(value.get("bodies").cloned().context("missing \"bodies\"")?)
        .context("\"bodies\" must be a list of matrices")?;
    Ok(rows.iter().map(|m| CenteredEllipsoid::from_rows(m)).collect::<Result<_, _>>()?)
}

fn mixed_volume(args: &MixedVolumeArgs) -> anyhow::Result<ExperimentReport> {
    let file = read_json(&args.bodies)?;
    let bodies = parse_bodies(&file)?;
    let mut report = ExperimentReport::new("mixed-volume", Some(args.seed), inputs(args, Some(file))?);
    let v = args.method.config(args.seed).compute(&bodies)?;
    report.estimate("mixed_volume", &v.as_estimate());
    Ok(report)
}

fn density(args: &DensityArgs) -> anyhow::Result<ExperimentReport> {
    let file = read_json(&args.config)?;
    let bodies = parse_bodies(&file)?;
    let vectors: Vec<Vec<f64>> =
        serde_json::from_value(file.get("frame").cloned().context("missing \"frame\"")?).context("bad \"frame\"")?;
    let frame = Frame::new(&vectors)?;
    let config = args.method.config(args.seed);
    let mut report = ExperimentReport::new("density", Some(args.seed), inputs(args, Some(file))?);
    if bodies.len() == 1 {
        report.exact("d1", d1(&bodies[0], &frame.vector(0))?.value);
    }
    report.exact("d_m", d_m(&bodies, &frame, &config)?.value);
    report.exact("product_d1", product_d1(&bodies, &frame, &config)?.value);
    Ok(report)
}

fn curve_file(path: &str) -> anyhow::Result<CurveDefinition> {
    let text = std::fs::read_to_string(path).with_context(|| format!("unknown curve {path:?}"))?;
    Ok(CurveSpec::from_json(&text)?.build()?)
}

fn single(def: CurveDefinition) -> anyhow::Result<CurveModel> {
    match def {
        CurveDefinition::Single(c) => Ok(c),
        CurveDefinition::Product(..) => bail!("expected a single curve, got a product"),
    }
}

fn crofton_euclid(args: &EuclidArgs) -> anyhow::Result<ExperimentReport> {
    if !(2..=3).contains(&args.dim) {
        bail!("--dim must be 2 or 3");
    }
    let curve: CurveModel = match args.curve.as_str() {
        "circle" => Arc::new(Circle::planar(args.dim, args.radius)),
        "segment" => {
            let mut to = vec![0.0; args.dim];
            to[0] = args.length;
            Arc::new(Segment { from: vec![0.0; args.dim], to })
        }
        path => single(curve_file(path)?)?,
    };
    if !matches!(curve.space(), CurveSpace::Euclidean(_)) {
        bail!("crofton-euclid needs a curve in R2 or R3");
    }
    let range = args.range.unwrap_or_else(|| 1.01 * curve_radius(curve.as_ref()));
    let e = euclid_crofton_length(curve.as_ref(), args.trials, range, args.seed)?;
    let mut report = ExperimentReport::new("crofton-euclid", Some(args.seed), inputs(args, None)?);
    report.estimate("length", &e.estimate);
    report.exact("range", range);
    report.count("redraws", e.redraws);
    Ok(report)
}

fn sphere_curve(name: &str, colatitude: f64) -> anyhow::Result<CurveModel> {
    Ok(match name {
        "great" => Arc::new(SmallCircle::great([0.0, 0.0, 1.0])?),
        "small" => Arc::new(SmallCircle::new(colatitude, [0.0, 0.0, 1.0])?),
        "point" => Arc::new(SmallCircle::new(0.0, [0.0, 0.0, 1.0])?),
        "ellipse" => Arc::new(TrigCurve::spherical_ellipse(1.0, 0.5, 0.5)?),
        path => single(curve_file(path)?)?,
    })
}

fn crofton_sphere(args: &SphereArgs) -> anyhow::Result<ExperimentReport> {
    let curve = sphere_curve(&args.curve, args.colatitude)?;
    let e = sphere_crofton_length(curve.as_ref(), args.trials, args.seed)?;
    let mut report = ExperimentReport::new("crofton-sphere", Some(args.seed), inputs(args, None)?);
    report.estimate("length", &e.estimate);
    report.exact("quadrature_length", arclength(curve.as_ref(), 1024)?);
    report.count("redraws", e.redraws);
    Ok(report)
}

fn crofton_product(args: &ProductArgs) -> anyhow::Result<ExperimentReport> {
    let (c1, c2, file) = match &args.config {
        Some(path) => {
            let file = read_json(path)?;
            match CurveSpec::from_json(&file.to_string())?.build()? {
                CurveDefinition::Product(a, b) => (a, b, Some(file)),
                CurveDefinition::Single(_) => bail!("{} does not describe an S2xS2 product", path.display()),
            }
        }
        None => (sphere_curve(&args.first, args.colatitude)?, sphere_curve(&args.second, args.colatitude)?, None),
    };
    let r = product_crofton_check(
        c1.as_ref(),
        c2.as_ref(),
        args.trials,
        args.seed,
        args.grid,
        &MixedVolumeConfig::default(),
    )?;
    let mut report = ExperimentReport::new("crofton-product", Some(args.seed), inputs(args, file)?);
    report.estimate("mc_estimate", &r.mc_estimate);
    report.exact("density_integral", r.density_integral);
    report.count("redraws", r.redraws);
    Ok(report)
}

fn run_bkk(args: &BkkArgs) -> anyhow::Result<ExperimentReport> {
    let file = read_json(&args.config)?;
    let mut config = BkkConfig::from_json(&file.to_string())?;
    if let Some(t) = args.trials {
        config.trials = t;
    }
    let exp = config.experiment(args.seed)?;
    let r = bkk::run(&exp)?;
    let mut report = ExperimentReport::new("bkk", Some(args.seed), inputs(args, Some(file))?);
    report.estimate("mc_average", &r.mc_average);
    report.exact("density_average", r.density_average);
    report.exact("mixed_volume_average", r.mixed_volume_average);
    report.exact("gap_mc_density", r.gaps.mc_density);
    report.exact("gap_mc_mixedvol", r.gaps.mc_mixedvol);
    report.exact("gap_density_mixedvol", r.gaps.density_mixedvol);
    for (i, range) in r.ranges.iter().enumerate() {
        report.exact(&format!("range_{}", i + 1), *range);
    }
    report.count("redraws", r.redraws);
    report.count("inconclusive_cells", r.inconclusive_cells);
    Ok(report)
}

fn verify(args: &VerifyArgs) -> anyhow::Result<(ExperimentReport, bool)> {
    let profile = if args.profile.full { Profile::Full } else { Profile::Quick };
    let ids: Vec<usize> = if args.criteria.is_empty() { (1..=CRITERIA).collect() } else { args.criteria.clone() };
    if let Some(bad) = ids.iter().find(|&&i| !(1..=CRITERIA).contains(&i)) {
        bail!("criterion {bad} does not exist (1-{CRITERIA})");
    }
    let mut report = ExperimentReport::new("verify", None, inputs(args, None)?);
    let mut all = true;
    for id in ids {
        let outcome = run_criterion(id, profile)?;
        println!("{outcome}");
        all &= outcome.passed;
        report.exact(&format!("criterion_{id}"), if outcome.passed { 1.0 } else { 0.0 });
    }
    println!("{}", if all { "all criteria passed" } else { "some criteria FAILED" });
    Ok((report, all))
}

fn emit(report: &ExperimentReport, format: Format, output: Option<&Path>) -> anyhow::Result<()> {
    let mut sink: Box<dyn Write> = match output {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        Format::Json => report.write_json(&mut sink),
        Format::Csv => report.write_csv(&mut sink),
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let start = Instant::now();
    let (mut report, passed) = match &cli.command {
        Command::MixedVolume(a) => (mixed_volume(a)?, true),
        Command::Density(a) => (density(a)?, true),
        Command::CroftonEuclid(a) => (crofton_euclid(a)?, true),
        Command::CroftonSphere(a) => (crofton_sphere(a)?, true),
        Command::CroftonProduct(a) => (crofton_product(a)?, true),
        Command::Bkk(a) => (run_bkk(a)?, true),
        Command::Verify(a) => {
            let (report, passed) = verify(a)?;
            if cli.output.is_none() {
                return Ok(passed);
            }
            (report, passed)
        }
    };
    report.runtime_s = report::round12(start.elapsed().as_secs_f64());
    emit(&report, cli.format, cli.output.as_deref())?;
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
