//! Command line front end: `points | study | sweep | bench | plot`.
//!
//! Every command writes its outputs under `--out` together with a
//! `<name>.manifest.json` and, for studies, a `<name>.conf` that reruns the
//! same command via `--config`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{Command, ConfigFile, Settings};
use crate::error::{Error, Result};
use crate::experiments::{
    convergence_study, shape_param_sweep, timing_bench, write_convergence_csv, write_sweep_csv, write_timing_csv,
    Quantity,
};
use crate::plot::{plot_csv, PlotOptions};
use crate::points::{fibonacci_sphere, load_point_set, save_point_set, EnergyParams, PointCache, PointFormat, PointSetFile};

#[derive(Debug, Parser)]
#[command(name = "membrane", version, about = "Geometric models of immersed-boundary structures")]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Seed for minimal energy node sets.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for study rows (bench always uses one).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Generate or convert sphere point sets.
    Points(PointsArgs),
    /// Convergence study: shape, normal and force errors vs N.
    Study(RunArgs),
    /// RBF shape error over a grid of shape parameters.
    Sweep(RunArgs),
    /// Wallclock per time step.
    Bench(RunArgs),
    /// Render a study CSV as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PointsKind {
    /// Minimal Riesz energy set.
    Me,
    /// Fibonacci spiral.
    Fib,
    /// Re-save a point file, optionally in the other format.
    Convert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Angles,
    Unit,
}

impl From<FormatArg> for PointFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Angles => PointFormat::Angles,
            FormatArg::Unit => PointFormat::UnitVectors,
        }
    }
}

#[derive(Debug, Args)]
pub struct PointsArgs {
    #[arg(value_enum)]
    pub kind: PointsKind,
    /// Number of points (me, fib).
    pub n: Option<usize>,
    /// Input file (convert).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Input format (convert).
    #[arg(long, value_enum, default_value_t = FormatArg::Angles)]
    pub from: FormatArg,
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Angles)]
    pub format: FormatArg,
    /// Iteration cap for the energy descent (only when the set is not cached).
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Gradient tolerance for the energy descent (only when the set is not cached).
    #[arg(long)]
    pub tol: Option<f64>,
}

/// Flags shared by `study`, `sweep` and `bench`; each maps onto a config key.
#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// Figure preset; an unknown name lists the available ones.
    #[arg(long)]
    pub preset: Option<String>,
    /// Config file; the section named after the command is used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated objects (object1-2d, object2-2d, object1-3d, object2-3d, custom).
    #[arg(long)]
    pub objects: Option<String>,
    /// Comma-separated models (pwl, fourier, rbf).
    #[arg(long)]
    pub models: Option<String>,
    /// Node counts: a comma list or start:stop:step.
    #[arg(long)]
    pub n: Option<String>,
    /// Sample site count.
    #[arg(long)]
    pub m: Option<String>,
    /// RBF kernel family (mq, imq).
    #[arg(long)]
    pub kernel: Option<String>,
    /// RBF shape parameter; a grid (list or start:stop:step) for sweep.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// 3D data sites: me, fib or md.
    #[arg(long)]
    pub nodes: Option<String>,
    /// Directory of md_<n>.txt files for `--nodes md`.
    #[arg(long)]
    pub md_dir: Option<String>,
    /// Timed trials per row (bench).
    #[arg(long)]
    pub trials: Option<String>,
    /// Any config key, as key=value; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Convergence, sweep or timing CSV.
    pub csv: PathBuf,
    /// Output SVG; defaults to `<out>/<csv stem>.svg`.
    pub svg: Option<PathBuf>,
    /// Quantity for convergence tables (shape, normal, force).
    #[arg(long, default_value = "shape")]
    pub quantity: String,
    /// Object for convergence tables; defaults to the first in the file.
    #[arg(long)]
    pub object: Option<String>,
    #[arg(long)]
    pub title: Option<String>,
}

/// Reproducibility record written next to every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub config: BTreeMap<String, String>,
    pub seeds: Vec<u64>,
    pub jobs: usize,
    pub outputs: Vec<PathBuf>,
    pub wall_time_s: f64,
}

struct Context {
    argv: Vec<String>,
    out: PathBuf,
    seed: Option<u64>,
    jobs: usize,
    started: Instant,
}

impl Context {
    fn manifest(&self, command: &str, config: BTreeMap<String, String>, seed: u64, outputs: Vec<PathBuf>) -> RunManifest {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            argv: self.argv.clone(),
            config,
            seeds: vec![seed],
            jobs: self.jobs,
            outputs,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_manifest(dir: &Path, name: &str, manifest: &RunManifest) -> Result<PathBuf> {
    let path = dir.join(format!("{name}.manifest.json"));
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    write_file(&path, format!("{json}\n").as_bytes())?;
    Ok(path)
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

/// Layers preset, config file and flags into settings for `command`.
pub fn resolve_settings(command: Command, args: &RunArgs, seed: Option<u64>) -> Result<Settings> {
    let mut s = Settings::new(command);
    if let Some(p) = &args.preset {
        s.set("preset", p)?;
    }
    if let Some(path) = &args.config {
        let file = ConfigFile::load(path)?;
        let section = file.section(command.section()).ok_or_else(|| {
            Error::config(command.section(), format!("{} has no [{}] section", path.display(), command.section()))
        })?;
        s.apply_section(section)?;
    }
    let flags = [
        ("objects", &args.objects),
        ("models", &args.models),
        ("n", &args.n),
        ("m", &args.m),
        ("kernel", &args.kernel),
        ("epsilon", &args.epsilon),
        ("nodes", &args.nodes),
        ("md_dir", &args.md_dir),
        ("trials", &args.trials),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            s.set(key, v)?;
        }
    }
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::config("set", format!("`{kv}` is not KEY=VALUE")))?;
        s.set(k.trim(), v)?;
    }
    match seed {
        Some(seed) => s.set("seed", &seed.to_string())?,
        None if s.get("seed").is_none() => s.set("seed", "0")?,
        None => {}
    }
    Ok(s)
}

fn run_name(command: Command, args: &RunArgs) -> String {
    args.preset.clone().unwrap_or_else(|| command.section().to_string())
}

fn cmd_points(ctx: &Context, args: &PointsArgs) -> Result<Vec<PathBuf>> {
    let seed = ctx.seed.unwrap_or(0);
    let format = PointFormat::from(args.format);
    let (set, name) = match args.kind {
        PointsKind::Me | PointsKind::Fib => {
            let n = args
                .n
                .ok_or_else(|| Error::InvalidArgument("points me|fib needs a point count".into()))?;
            if args.kind == PointsKind::Me {
                let mut params = EnergyParams::default();
                if let Some(it) = args.max_iters {
                    params.max_iters = it;
                }
                if let Some(t) = args.tol {
                    params.tol = t;
                }
                let cache = PointCache::new(PointCache::default_dir()).with_params(params);
                (cache.minimal_energy(n, seed)?, format!("me_{n}_{seed}"))
            } else {
                (fibonacci_sphere(n)?, format!("fib_{n}"))
            }
        }
        PointsKind::Convert => {
            let input = args
                .input
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("points convert needs --input FILE".into()))?;
            let set = load_point_set(&PointSetFile::new(input, args.from.into()))?;
            let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("points");
            let suffix = match args.format {
                FormatArg::Angles => "angles",
                FormatArg::Unit => "unit",
            };
            (set, format!("{stem}_{suffix}"))
        }
    };
    create_dir(&ctx.out)?;
    let path = ctx.out.join(format!("{name}.txt"));
    save_point_set(&set, &path, format)?;
    log::info!("wrote {} points to {}", set.len(), path.display());
    let mut config = BTreeMap::new();
    config.insert("kind".into(), format!("{:?}", args.kind).to_lowercase());
    if let Some(n) = args.n {
        config.insert("n".into(), n.to_string());
    }
    if let Some(i) = &args.input {
        config.insert("input".into(), i.display().to_string());
    }
    config.insert("format".into(), format!("{:?}", args.format).to_lowercase());
    let manifest = write_manifest(&ctx.out, &name, &ctx.manifest("points", config, seed, vec![path.clone()]))?;
    Ok(vec![path, manifest])
}

fn cmd_run(ctx: &Context, command: Command, args: &RunArgs) -> Result<Vec<PathBuf>> {
    let settings = resolve_settings(command, args, ctx.seed)?;
    let configs = settings.study_configs()?;
    let name = run_name(command, args);
    let mut csv = Vec::new();
    let jobs = match command {
        Command::Bench => {
            if ctx.jobs > 1 {
                log::warn!("bench runs on a single worker; ignoring --jobs {}", ctx.jobs);
            }
            1
        }
        _ => ctx.jobs,
    };
    let pool = thread_pool(jobs)?;
    match command {
        Command::Study => {
            let mut rows = Vec::new();
            for cfg in &configs {
                log::info!("study {} {} N={:?} M={}", cfg.object.name, cfg.model, cfg.n_list, cfg.m);
                rows.extend(pool.install(|| convergence_study(cfg))?.rows);
            }
            write_convergence_csv(&mut csv, &rows).expect("write to memory");
        }
        Command::Sweep => {
            let eps = settings.epsilon_grid()?;
            let mut rows = Vec::new();
            for cfg in &configs {
                log::info!("sweep {} N={:?} over {} shape parameters", cfg.object.name, cfg.n_list, eps.len());
                rows.extend(pool.install(|| shape_param_sweep(cfg, &eps))?);
            }
            write_sweep_csv(&mut csv, &rows).expect("write to memory");
        }
        Command::Bench => {
            let trials = settings.trials()?;
            let first = &configs[0].object.name;
            if configs.iter().any(|c| &c.object.name != first) {
                return Err(Error::config("objects", "bench takes a single object"));
            }
            let mut rows = Vec::new();
            for cfg in &configs {
                log::info!("bench {} {} N={:?} trials={trials}", cfg.object.name, cfg.model, cfg.n_list);
                rows.extend(pool.install(|| timing_bench(cfg, trials))?.rows);
            }
            write_timing_csv(&mut csv, &rows).expect("write to memory");
        }
    }
    create_dir(&ctx.out)?;
    let csv_path = ctx.out.join(format!("{name}.csv"));
    write_file(&csv_path, &csv)?;
    let conf_path = ctx.out.join(format!("{name}.conf"));
    write_file(&conf_path, settings.to_config_text().as_bytes())?;
    let outputs = vec![csv_path.clone(), conf_path.clone()];
    let manifest = ctx.manifest(command.section(), settings.values().clone(), settings.seed()?, outputs);
    let manifest_path = write_manifest(&ctx.out, &name, &manifest)?;
    Ok(vec![csv_path, conf_path, manifest_path])
}

fn cmd_plot(ctx: &Context, args: &PlotArgs) -> Result<Vec<PathBuf>> {
    let quantity = Quantity::parse(&args.quantity)?;
    let stem = args.csv.file_stem().and_then(|s| s.to_str()).unwrap_or("plot").to_string();
    let name = if quantity == Quantity::Shape {
        stem
    } else {
        format!("{stem}-{}", quantity.name())
    };
    let svg = args.svg.clone().unwrap_or_else(|| ctx.out.join(format!("{name}.svg")));
    let opts = PlotOptions {
        quantity,
        object: args.object.clone(),
        title: args.title.clone(),
    };
    plot_csv(&args.csv, &svg, &opts)?;
    let dir = svg.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")).to_path_buf();
    let mut config = BTreeMap::new();
    config.insert("csv".into(), args.csv.display().to_string());
    config.insert("quantity".into(), quantity.name().into());
    if let Some(o) = &args.object {
        config.insert("object".into(), o.clone());
    }
    let manifest = write_manifest(&dir, &name, &ctx.manifest("plot", config, 0, vec![svg.clone()]))?;
    Ok(vec![svg, manifest])
}

/// Runs a parsed command line and returns the files written.
pub fn run(cli: &Cli, argv: Vec<String>) -> Result<Vec<PathBuf>> {
    let jobs = match cli.jobs {
        Some(0) => return Err(Error::config("jobs", "worker count must be at least 1")),
        Some(j) => j,
        None => rayon::current_num_threads(),
    };
    let ctx = Context {
        argv,
        out: cli.out.clone(),
        seed: cli.seed,
        jobs,
        started: Instant::now(),
    };
    match &cli.command {
        Cmd::Points(a) => cmd_points(&ctx, a),
        Cmd::Study(a) => cmd_run(&ctx, Command::Study, a),
        Cmd::Sweep(a) => cmd_run(&ctx, Command::Sweep, a),
        Cmd::Bench(a) => cmd_run(&ctx, Command::Bench, a),
        Cmd::Plot(a) => cmd_plot(&ctx, a),
    }
}

/// Parses `args`, runs, and returns the process exit code: 0 on success,
/// 1 on a run error, 2 on a usage error. Errors go to stderr as one line
/// `error: <kind>: <message>`.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error: usage: {first}");
            return 2;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    let argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match run(&cli, argv) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {}: {}", e.kind(), e.detail().replace('\n', " "));
            1
        }
    }
}
