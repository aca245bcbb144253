//! Command-line front end.
//!
//! Every subcommand prints its resolved configuration as JSON, then its
//! results. Exit codes: 0 success, 1 check failure, 2 input or validation
//! error, 3 numerical divergence.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Deserialize;
use serde_json::json;

use crate::data::{fmt_f64, DomainChart, LabeledStyleDataset};
use crate::error::Error;
use crate::grad::{finite_diff_check, finite_diff_check_with, GradCheckReport};
use crate::interp::{linear_path, reachability, rotation_path, ManifoldFrame};
use crate::learn::{evaluate, initial_plane, learn_plane, TrainConfig};
use crate::manifold::{principal_angles, sample_dataset, GroundTruth, ManifoldConfig};
use crate::patch::{
    match_patches, matches_csv, patch_style_distance, random_patches, uniform_partition, Image,
    DEFAULT_RANDOM_PATCHES,
};
use crate::plane::{gram_schmidt, RotationPlane, StyleVector};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_STEPS: usize = 101;
pub const DEFAULT_GRAD_DIMS: [usize; 3] = [3, 8, 64];
pub const DEFAULT_GRAD_TRIALS: usize = 100;
/// `check-grads` fails when any relative error exceeds this.
pub const GRAD_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Parser)]
#[command(
    name = "styleplane",
    version,
    about = "Learn and traverse rotation planes in style space"
)]
pub struct Cli {
    /// Seed for every randomized step (overrides the config file).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON file with defaults for any subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files; created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a labeled dataset from a circular fixture.
    GenData(GenDataArgs),
    /// Fit a rotation plane to a labeled dataset.
    Learn(LearnArgs),
    /// Rotate one vector in a plane.
    Rotate(RotateArgs),
    /// Compare the rotation path and the straight line between two domains.
    Compare(CompareArgs),
    /// Match random patches of a generated image to the grid of a target.
    MatchPatches(MatchArgs),
    /// Compare analytic gradients with finite differences.
    CheckGrads(CheckGradsArgs),
    /// Alignment loss of a plane on a dataset.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Fixture description (JSON).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub chart: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub chart: Option<PathBuf>,
    /// Ground-truth file; principal angles to it are reported.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Plane file to start from instead of a random plane.
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RotateArgs {
    #[arg(long)]
    pub plane: PathBuf,
    /// Comma-separated components.
    #[arg(long, allow_hyphen_values = true)]
    pub vector: String,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "domain_pair")]
    pub theta: Option<f64>,
    /// Rotate by the chart angle from the first domain to the second.
    #[arg(long, num_args = 2, value_names = ["SRC", "TGT"])]
    pub domain_pair: Option<Vec<String>>,
    #[arg(long)]
    pub chart: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub plane: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub chart: Option<PathBuf>,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    pub src: String,
    pub tgt: String,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    #[arg(long)]
    pub generated: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long)]
    pub n_patches: Option<usize>,
    /// Use the generated image's grid cells instead of random patches.
    #[arg(long)]
    pub grid: bool,
}

#[derive(Debug, Args)]
pub struct CheckGradsArgs {
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Perturb the analytic gradient before comparing.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub plane: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub chart: Option<PathBuf>,
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

/// Contents of `--config`. Every field is optional; command-line flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub train: Option<TrainConfig>,
    pub manifold: Option<ManifoldConfig>,
    pub chart: Option<DomainChart>,
    pub steps: Option<usize>,
    pub dims: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub n_patches: Option<usize>,
}

#[derive(Debug)]
enum Failure {
    Check(String),
    Input(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Check(_) => 1,
            Failure::Input(Error::NonFinite { .. }) => 3,
            Failure::Input(_) => 2,
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

struct Context<'a> {
    seed: u64,
    out_dir: PathBuf,
    config: ConfigFile,
    out: &'a mut dyn Write,
}

impl Context<'_> {
    fn chart(&self, path: Option<&Path>) -> Result<DomainChart, Error> {
        match path {
            Some(p) => DomainChart::read(p),
            None => Ok(self
                .config
                .chart
                .clone()
                .unwrap_or_else(DomainChart::seasons)),
        }
    }

    fn output(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn echo(&mut self, config: serde_json::Value) -> CmdResult {
        let text = serde_json::to_string_pretty(&config).expect("config serializes");
        self.print(&text)
    }

    fn print(&mut self, line: &str) -> CmdResult {
        writeln!(self.out, "{line}").map_err(|e| Failure::Input(Error::io("<stdout>", e)))
    }
}

/// Parse `args` (program name first), run the subcommand, and return the
/// exit code. Results go to `out`, diagnostics to standard error.
pub fn run_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(f) => {
            match &f {
                Failure::Check(msg) => eprintln!("check failed: {msg}"),
                Failure::Input(e) => eprintln!("error: {e}"),
            }
            f.exit_code()
        }
    }
}

/// Entry point for the binary.
pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_with(std::env::args_os(), &mut lock)
}

fn execute(cli: Cli, out: &mut dyn Write) -> CmdResult {
    let config = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| Error::json(p, e))?
        }
        None => ConfigFile::default(),
    };
    let seed = cli.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    std::fs::create_dir_all(&cli.out_dir).map_err(|e| Error::io(&cli.out_dir, e))?;
    let mut ctx = Context {
        seed,
        out_dir: cli.out_dir,
        config,
        out,
    };
    match cli.command {
        Command::GenData(a) => gen_data(&mut ctx, a),
        Command::Learn(a) => learn(&mut ctx, a),
        Command::Rotate(a) => rotate(&mut ctx, a),
        Command::Compare(a) => compare(&mut ctx, a),
        Command::MatchPatches(a) => match_cmd(&mut ctx, a),
        Command::CheckGrads(a) => check_grads(&mut ctx, a),
        Command::Eval(a) => eval(&mut ctx, a),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn fmt_row(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| fmt_f64(*v))
        .collect::<Vec<_>>()
        .join(",")
}

fn gen_data(ctx: &mut Context, a: GenDataArgs) -> CmdResult {
    let mut spec_cfg: ManifoldConfig = match &a.spec {
        Some(p) => read_json(p)?,
        None => ctx.config.manifold.clone().unwrap_or_default(),
    };
    spec_cfg.seed = ctx.seed;
    let chart = ctx.chart(a.chart.as_deref())?;
    let spec = spec_cfg.resolve()?;
    let (data_path, truth_path, chart_path) = (
        ctx.output("dataset.csv"),
        ctx.output("truth.json"),
        ctx.output("chart.json"),
    );
    ctx.echo(json!({
        "command": "gen-data",
        "seed": ctx.seed,
        "out_dir": ctx.out_dir,
        "spec": spec,
        "chart": chart,
        "outputs": {"dataset": data_path, "truth": truth_path, "chart": chart_path},
    }))?;
    let data = sample_dataset(&spec, &chart)?;
    data.write_csv(&data_path)?;
    write_text(&truth_path, &(spec.ground_truth().to_json() + "\n"))?;
    chart.write(&chart_path)?;
    ctx.print(&format!("samples,{}", data.len()))
}

fn learn(ctx: &mut Context, a: LearnArgs) -> CmdResult {
    let mut train = ctx.config.train.clone().unwrap_or_default();
    train.seed = ctx.seed;
    if let Some(v) = a.max_steps {
        train.max_steps = v;
    }
    if let Some(v) = a.learning_rate {
        train.learning_rate = v;
    }
    if let Some(v) = a.batch_size {
        train.batch_size = v;
    }
    train.validate()?;
    let chart = ctx.chart(a.chart.as_deref())?;
    let data = LabeledStyleDataset::read_csv(&a.data)?;
    let truth = a.truth.as_deref().map(GroundTruth::read).transpose()?;
    let init = match &a.init {
        Some(p) => RotationPlane::read(p)?,
        None => initial_plane(data.dim(), train.seed)?,
    };
    crate::linalg::check_dim(data.dim(), init.dim())?;
    let (plane_path, trace_path) = (ctx.output("plane.json"), ctx.output("trace.csv"));
    ctx.echo(json!({
        "command": "learn",
        "seed": ctx.seed,
        "out_dir": ctx.out_dir,
        "data": a.data,
        "truth": a.truth,
        "chart": chart,
        "train": train,
        "init": {"source": a.init, "mu": init.mu(), "nu": init.nu()},
        "outputs": {"plane": plane_path, "trace": trace_path},
    }))?;

    let outcome = learn_plane(&data, &chart, &train, Some((init.mu(), init.nu())))?;
    outcome.plane.write(&plane_path)?;
    write_text(&trace_path, &outcome.trace_csv())?;

    let initial = evaluate(&init, &data, &chart)?.overall;
    let last = evaluate(&outcome.plane, &data, &chart)?.overall;
    ctx.print("metric,value")?;
    ctx.print(&format!("steps,{}", outcome.trace.len()))?;
    ctx.print(&format!("stopped_early,{}", outcome.stopped_early))?;
    ctx.print(&format!("initial_loss,{}", fmt_f64(initial)))?;
    ctx.print(&format!("final_loss,{}", fmt_f64(last)))?;
    if let Some(t) = truth {
        let (a1, a2) = principal_angles(&outcome.plane, &t.plane()?)?;
        ctx.print(&format!("principal_angle_1,{}", fmt_f64(a1)))?;
        ctx.print(&format!("principal_angle_2,{}", fmt_f64(a2)))?;
    }
    Ok(())
}

fn parse_vector(text: &str) -> Result<StyleVector, Error> {
    let values = text
        .split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|e| Error::Invalid {
                field: "vector".into(),
                reason: format!("{t:?}: {e}"),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    StyleVector::new(values).map_err(|e| match e {
        Error::Invalid { reason, .. } => Error::Invalid {
            field: "vector".into(),
            reason,
        },
        e => e,
    })
}

fn rotate(ctx: &mut Context, a: RotateArgs) -> CmdResult {
    let plane = RotationPlane::read(&a.plane)?;
    let v = parse_vector(&a.vector)?;
    let (theta, chart) = match (&a.theta, &a.domain_pair) {
        (Some(t), _) => (*t, None),
        (None, Some(pair)) => {
            let chart = ctx.chart(a.chart.as_deref())?;
            let (s, t) = (chart.index_of(&pair[0])?, chart.index_of(&pair[1])?);
            (chart.theta(s, t), Some(chart))
        }
        (None, None) => return Err(Error::invalid("theta", "give --theta or --domain-pair").into()),
    };
    ctx.echo(json!({
        "command": "rotate",
        "seed": ctx.seed,
        "out_dir": ctx.out_dir,
        "plane": a.plane,
        "vector": &*v,
        "domain_pair": a.domain_pair,
        "chart": chart,
        "theta": theta,
    }))?;
    let r = plane.rotate(&v, theta)?;
    ctx.print(&fmt_row(&r))
}

fn compare(ctx: &mut Context, a: CompareArgs) -> CmdResult {
    let steps = a.steps.or(ctx.config.steps).unwrap_or(DEFAULT_STEPS);
    let plane = RotationPlane::read(&a.plane)?;
    let chart = ctx.chart(a.chart.as_deref())?;
    let data = LabeledStyleDataset::read_csv(&a.data)?;
    let truth = a.truth.as_deref().map(GroundTruth::read).transpose()?;
    let (src, tgt) = (chart.index_of(&a.src)?, chart.index_of(&a.tgt)?);
    let theta = chart.forward_theta(src, tgt);
    let (lin_path, rot_path) = (ctx.output("linear.csv"), ctx.output("rotation.csv"));
    ctx.echo(json!({
        "command": "compare",
        "seed": ctx.seed,
        "out_dir": ctx.out_dir,
        "plane": a.plane,
        "data": a.data,
        "truth": a.truth,
        "chart": chart,
        "src": a.src,
        "tgt": a.tgt,
        "steps": steps,
        "theta": theta,
        "outputs": {"linear": lin_path, "rotation": rot_path},
    }))?;

    let summary = compare_paths(&plane, &data, &chart, truth.as_ref(), src, tgt, steps)?;
    write_text(&lin_path, &summary.linear.to_csv())?;
    write_text(&rot_path, &summary.rotation.to_csv())?;

    ctx.print("path,domain,reached")?;
    for (name, reached) in [
        ("linear", &summary.linear_reached),
        ("rotation", &summary.rotation_reached),
    ] {
        for (d, r) in reached {
            ctx.print(&format!("{name},{},{r}", chart.labels()[*d]))?;
        }
    }
    ctx.print("metric,value")?;
    ctx.print(&format!("radius,{}", fmt_f64(summary.radius)))?;
    ctx.print(&format!(
        "rotation_max_norm_deviation,{}",
        fmt_f64(summary.rotation.max_norm_deviation())
    ))?;
    ctx.print(&format!(
        "linear_midpoint_in_plane_magnitude,{}",
        fmt_f64(summary.linear_midpoint_magnitude())
    ))
}

/// Both paths between two domains, starting from the source domain mean.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub linear: crate::interp::PathReport,
    pub rotation: crate::interp::PathReport,
    pub linear_reached: Vec<(usize, bool)>,
    pub rotation_reached: Vec<(usize, bool)>,
    pub radius: f64,
}

impl Comparison {
    /// In-plane magnitude of the linear path point closest to `alpha = 0.5`.
    pub fn linear_midpoint_magnitude(&self) -> f64 {
        let mid = (self.linear.len() - 1) / 2;
        let k =
            if (self.linear.alphas[mid] - 0.5).abs() <= (self.linear.alphas[mid + 1] - 0.5).abs() {
                mid
            } else {
                mid + 1
            };
        self.linear.in_plane_magnitudes[k]
    }
}

/// The linear path runs from the source domain mean to the target domain
/// mean; the rotation path turns the source mean forward along the chart.
pub fn compare_paths(
    plane: &RotationPlane,
    data: &LabeledStyleDataset,
    chart: &DomainChart,
    truth: Option<&GroundTruth>,
    src: usize,
    tgt: usize,
    steps: usize,
) -> Result<Comparison, Error> {
    let groups = data.require_all_domains(chart)?;
    let frame = ManifoldFrame::calibrate(plane.clone(), data, chart, truth)?;
    let s1 = data.mean(&groups[src]);
    let s2 = data.mean(&groups[tgt]);
    let linear = linear_path(&s1, &s2, steps, &frame)?;
    let rotation = rotation_path(&s1, plane, chart.forward_theta(src, tgt), steps, &frame)?;
    Ok(Comparison {
        linear_reached: reachability(&linear, &frame),
        rotation_reached: reachability(&rotation, &frame),
        linear,
        rotation,
        radius: frame.radius,
    })
}

fn match_cmd(ctx: &mut Context, a: MatchArgs) -> CmdResult {
    let n = a
        .n_patches
        .or(ctx.config.n_patches)
        .unwrap_or(DEFAULT_RANDOM_PATCHES);
    let generated = Image::read_ppm(&a.generated)?;
    let target = Image::read_ppm(&a.target)?;
    let matches_path = ctx.output("matches.csv");
    ctx.echo(json!({
        "command": "match-patches",
        "seed": ctx.seed,
        "out_dir": ctx.out_dir,
        "generated": a.generated,
        "target": a.target,
        "sampling": if a.grid { "grid" } else { "random" },
        "n_patches": if a.grid { 16 } else { n },
        "outputs": {"matches": matches_path},
    }))?;
    let gen = if a.grid {
        uniform_partition(&generated)?
    } else {
        random_patches(&generated, n, ctx.seed)?
    };
    let tgt = uniform_partition(&target)?;
    let matches = match_patches(&gen, &tgt)?;
    let table = matches_csv(&matches);
    write_text(&matches_path, &table)?;
    ctx.print(table.trim_end())?;
    let d = patch_style_distance(&matches, &gen, &tgt)?;
    ctx.print(&format!("patch_style_distance,{}", fmt_f64(d)))
}

/// One random gradient-check configuration: `(s, target, mu, nu, theta)`.
/// Entries are N(0, 1/dim) so vectors have norm near 1 at every dimension.
pub fn grad_trial(dim: usize, rng: &mut impl Rng) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, f64) {
    let scale = 1.0 / (dim as f64).sqrt();
    let mut v = || -> Vec<f64> {
        (0..dim)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut *rng);
                scale * z
            })
            .collect()
    };
    let (s, t, mu, nu) = (v(), v(), v(), v());
    let theta = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    (s, t, mu, nu, theta)
}

/// Gradient reports for `trials` random configurations per dimension, in
/// order. Degenerate draws are redrawn.
pub fn grad_reports(
    dims: &[usize],
    trials: usize,
    seed: u64,
    inject_fault: bool,
) -> Result<Vec<(usize, usize, GradCheckReport)>, Error> {
    if let Some(d) = dims.iter().find(|d| **d < 2) {
        return Err(Error::invalid("dims", format!("dimension {d} is below 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(dims.len() * trials);
    for &dim in dims {
        for trial in 0..trials {
            let report = loop {
                let (s, t, mu, nu, theta) = grad_trial(dim, &mut rng);
                if gram_schmidt(&mu, &nu).is_err() {
                    continue;
                }
                break if inject_fault {
                    finite_diff_check_with(&s, &t, &mu, &nu, theta, |(d_theta, g)| {
                        *d_theta *= 1.01;
                        g.d_mu[0] += 1e-3;
                    })?
                } else {
                    finite_diff_check(&s, &t, &mu, &nu, theta)?
                };
            };
            out.push((dim, trial, report));
        }
    }
    Ok(out)
}

fn check_grads(ctx: &mut Context, a: CheckGradsArgs) -> CmdResult {
    let dims = a
        .dims
        .or_else(|| ctx.config.dims.clone())
        .unwrap_or_else(|| DEFAULT_GRAD_DIMS.to_vec());
    let trials = a
        .trials
        .or(ctx.config.trials)
        .unwrap_or(DEFAULT_GRAD_TRIALS);
    ctx.echo(json!({
        "command": "check-grads",
        "seed": ctx.seed,
        "out_dir": ctx.out_dir,
        "dims": dims,
        "trials": trials,
        "tolerance": GRAD_TOLERANCE,
        "inject_fault": a.inject_fault,
    }))?;
    let reports = grad_reports(&dims, trials, ctx.seed, a.inject_fault)?;
    ctx.print("dim,trial,parameter,analytic,numeric,rel_error")?;
    let mut worst = 0.0f64;
    for (dim, trial, r) in &reports {
        for (name, b) in r.blocks() {
            ctx.print(&format!(
                "{dim},{trial},{name},{},{},{}",
                fmt_f64(b.analytic),
                fmt_f64(b.numeric),
                fmt_f64(b.rel_error)
            ))?;
        }
        worst = worst.max(r.max_rel_error());
    }
    ctx.print(&format!("max_rel_error,{}", fmt_f64(worst)))?;
    if worst.is_nan() || worst > GRAD_TOLERANCE {
        return Err(Failure::Check(format!(
            "max relative error {worst:e} exceeds {GRAD_TOLERANCE:e}"
        )));
    }
    Ok(())
}

fn eval(ctx: &mut Context, a: EvalArgs) -> CmdResult {
    let plane = RotationPlane::read(&a.plane)?;
    let chart = ctx.chart(a.chart.as_deref())?;
    let data = LabeledStyleDataset::read_csv(&a.data)?;
    let truth = a.truth.as_deref().map(GroundTruth::read).transpose()?;
    ctx.echo(json!({
        "command": "eval",
        "seed": ctx.seed,
        "out_dir": ctx.out_dir,
        "plane": a.plane,
        "data": a.data,
        "truth": a.truth,
        "chart": chart,
    }))?;
    let metrics = evaluate(&plane, &data, &chart)?;
    ctx.print("src,tgt,theta,pairs,mean_loss")?;
    for p in &metrics.per_pair {
        ctx.print(&format!(
            "{},{},{},{},{}",
            p.src,
            p.tgt,
            fmt_f64(p.theta),
            p.pairs,
            fmt_f64(p.mean_loss)
        ))?;
    }
    ctx.print(&format!("overall,,,,{}", fmt_f64(metrics.overall)))?;
    if let Some(t) = truth {
        let (a1, a2) = principal_angles(&plane, &t.plane()?)?;
        ctx.print(&format!("principal_angles,{},{}", fmt_f64(a1), fmt_f64(a2)))?;
    }
    Ok(())
}
