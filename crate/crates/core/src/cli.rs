//! The `scgle` command line: `simulate`, `converge`, `sample-noise`, `validate`.
//!
//! Every subcommand writes its outputs plus a `manifest.json` into `--out`.
//! The manifest holds the full config document, the seed, a sha256 hash of the
//! inputs and of every output file, and the only timestamp of the run.
//! Failures print a single JSON line on stderr and exit with
//! 1 (invalid input or failed property), 2 (blowup) or 3 (I/O).

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{apply_seed_env, config_from_str, Method, RunConfig};
use crate::error::{Error, Result};
use crate::harness::{run_ladder, LadderSpec};
use crate::integrators::simulate;
use crate::noise::{IncrementKind, NoiseHierarchy};
use crate::rng::RngStream;
use crate::validate::run_property_suite;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "scgle", version, about = "Stochastic complex Ginzburg-Landau solver and convergence harness")]
pub struct Cli {
    /// Worker threads for Monte-Carlo sampling (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one trajectory and write snapshots plus diagnostics.
    Simulate(SimulateArgs),
    /// Run a coupled RMSE ladder and fit the observed order.
    Converge(ConvergeArgs),
    /// Emit refinement-coupled noise increments as CSV.
    SampleNoise(SampleNoiseArgs),
    /// Run the fast property suite against a configuration.
    Validate(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Config document (TOML with dotted keys).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set model.R=2^12`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Seed; takes precedence over the config and SCGLE_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Esm,
    Expsm,
    Tam,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Esm => Method::Esm,
            MethodArg::Expsm => Method::ExpSm,
            MethodArg::Tam => Method::Tam,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Snapshot interval in steps.
    #[arg(long)]
    pub record_every: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long, default_value_t = 64)]
    pub base_n: usize,
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    /// Monte-Carlo samples per level.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Constant `c` of the parabolic ladder `N² dt = c`.
    #[arg(long, default_value_t = 1.0)]
    pub parabolic_c: f64,
    /// Replay the run described by a previous manifest.
    #[arg(long, conflicts_with_all = ["config", "overrides", "seed", "method", "base_n", "levels", "samples", "parabolic_c"])]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum IncrementArg {
    /// Stochastic-convolution increments.
    Conv,
    /// Plain Brownian increments.
    Brownian,
}

#[derive(Debug, Args)]
pub struct SampleNoiseArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Refinement levels, each doubling N and dividing dt by 4.
    #[arg(long, default_value_t = 2)]
    pub levels: usize,
    /// Coarsest-level steps to emit (default: T/dt).
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_enum, default_value = "conv")]
    pub kind: IncrementArg,
}

/// What a manifest records about a run, beyond its outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config: String,
    pub seed: u64,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<LadderSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra: Option<serde_json::Value>,
    pub input_hash: String,
    #[serde(default)]
    pub outputs: Vec<OutputEntry>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub created_unix: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
}

impl Manifest {
    fn new(command: &str, cfg: &RunConfig, ladder: Option<LadderSpec>, extra: Option<serde_json::Value>) -> Manifest {
        let config = cfg.to_document();
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update([0]);
        h.update(config.as_bytes());
        h.update([0]);
        if let Some(l) = &ladder {
            h.update(serde_json::to_string(l).unwrap_or_default().as_bytes());
        }
        h.update([0]);
        if let Some(e) = &extra {
            h.update(e.to_string().as_bytes());
        }
        Manifest {
            command: command.to_string(),
            config,
            seed: cfg.seed,
            method: cfg.method,
            ladder,
            extra,
            input_hash: hex(&h.finalize()),
            outputs: Vec::new(),
            threads: None,
            created_unix: 0,
        }
    }

    pub fn read(path: &Path) -> Result<Manifest> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("manifest {}: {e}", path.display())))
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        config_from_str(&self.config, &[])
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn file_sha256(path: &Path) -> Result<String> {
    Ok(hex(&Sha256::digest(fs::read(path)?)))
}

/// Tracks the files written by one run.
struct OutDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    fn create(dir: &Path) -> Result<OutDir> {
        fs::create_dir_all(dir)?;
        Ok(OutDir {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write_with<F>(&mut self, name: &str, f: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<()>,
    {
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        f(&mut w)?;
        w.flush()?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn finish(self, mut manifest: Manifest, threads: Option<usize>) -> Result<()> {
        for name in &self.written {
            manifest.outputs.push(OutputEntry {
                file: name.clone(),
                sha256: file_sha256(&self.dir.join(name))?,
            });
        }
        manifest.threads = threads;
        manifest.created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Parse(e.to_string()))?;
        fs::write(self.dir.join(MANIFEST_FILE), text + "\n")?;
        Ok(())
    }
}

/// Seed precedence, lowest first: config file, SCGLE_SEED, `--set run.seed`, `--seed`.
fn resolve_config(common: &CommonArgs) -> Result<RunConfig> {
    let base = match &common.config {
        Some(path) => fs::read_to_string(path)?,
        None => String::new(),
    };
    let mut cfg = config_from_str(&base, &[])?;
    apply_seed_env(&mut cfg)?;
    let mut overrides = vec![format!("run.seed={}", cfg.seed)];
    overrides.extend(common.overrides.iter().cloned());
    if let Some(seed) = common.seed {
        overrides.push(format!("run.seed={seed}"));
    }
    let cfg = config_from_str(&base, &overrides)?;
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_simulate(args: &SimulateArgs, threads: Option<usize>) -> Result<i32> {
    let mut cfg = resolve_config(&args.common)?;
    if let Some(m) = args.method {
        cfg.method = m.into();
    }
    if let Some(r) = args.record_every {
        cfg.record_every = r;
    }
    cfg.validate()?;
    let traj = simulate(&cfg, 0)?;
    let mut out = OutDir::create(&args.common.out)?;
    for (step, field) in &traj.snapshots {
        out.write_with(&format!("snapshot_{step:08}.scgl"), |w| field.write_binary(w))?;
    }
    out.write_with("diagnostics.csv", |w| traj.write_diagnostics_csv(w))?;
    out.finish(Manifest::new("simulate", &cfg, None, None), threads)?;
    println!("simulate: {} steps, {} snapshots", cfg.steps(), traj.snapshots.len());
    Ok(0)
}

fn cmd_converge(args: &ConvergeArgs, threads: Option<usize>) -> Result<i32> {
    let (cfg, ladder) = match &args.manifest {
        Some(path) => {
            let m = Manifest::read(path)?;
            let ladder = m
                .ladder
                .clone()
                .ok_or_else(|| Error::Parse(format!("manifest {} has no ladder", path.display())))?;
            let mut cfg = m.run_config()?;
            cfg.method = m.method;
            (cfg, ladder)
        }
        None => {
            let mut cfg = resolve_config(&args.common)?;
            if let Some(m) = args.method {
                cfg.method = m.into();
            }
            let ladder = LadderSpec {
                base_n: args.base_n,
                levels: args.levels,
                samples: args.samples,
                parabolic: true,
                c: args.parabolic_c,
            };
            (cfg, ladder)
        }
    };
    if ladder.base_n < 2 || ladder.samples < 2 {
        return Err(Error::Parse("--base-n and --samples must be at least 2".into()));
    }
    let report = run_ladder(&ladder, &cfg, cfg.method, "converge")?;
    let mut out = OutDir::create(&args.common.out)?;
    out.write_with("report.csv", |w| report.write_csv(w))?;
    out.write_with("summary.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &report.summary_json()).map_err(|e| Error::Parse(e.to_string()))?;
        writeln!(w)?;
        Ok(())
    })?;
    out.write_with("report.gp", |w| Ok(w.write_all(report.gnuplot_script("report.csv").as_bytes())?))?;
    out.finish(Manifest::new("converge", &cfg, Some(ladder), None), threads)?;
    match report.slope_dt {
        Some(s) => println!("converge: {} levels, slope {:.4}", report.levels.len(), s.slope),
        None => println!("converge: {} levels, no usable slope", report.levels.len()),
    }
    Ok(0)
}

fn cmd_sample_noise(args: &SampleNoiseArgs, threads: Option<usize>) -> Result<i32> {
    let cfg = resolve_config(&args.common)?;
    let kind = match args.kind {
        IncrementArg::Conv => IncrementKind::Convolution,
        IncrementArg::Brownian => IncrementKind::Brownian,
    };
    let steps = args.steps.unwrap_or_else(|| cfg.steps());
    let hierarchy = NoiseHierarchy::new(kind, cfg.n, cfg.dt, args.levels, &cfg.noise, cfg.model.nu)?;
    let mut rng = RngStream::new(cfg.seed, 0);
    let mut out = OutDir::create(&args.common.out)?;
    out.write_with("noise.csv", |w| hierarchy.write_csv(w, &mut rng, steps))?;
    let extra = serde_json::json!({
        "levels": args.levels,
        "steps": steps,
        "kind": format!("{:?}", args.kind).to_lowercase(),
    });
    out.finish(Manifest::new("sample-noise", &cfg, None, Some(extra)), threads)?;
    println!("sample-noise: {steps} steps over {} levels", args.levels);
    Ok(0)
}

fn cmd_validate(args: &CommonArgs, threads: Option<usize>) -> Result<i32> {
    let cfg = resolve_config(args)?;
    let results = run_property_suite(&cfg);
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
    let mut out = OutDir::create(&args.out)?;
    out.write_with("validate.json", |w| {
        let doc = serde_json::json!({ "passed": failed.is_empty(), "checks": results, "failures": failed });
        serde_json::to_writer_pretty(&mut *w, &doc).map_err(|e| Error::Parse(e.to_string()))?;
        writeln!(w)?;
        Ok(())
    })?;
    out.finish(Manifest::new("validate", &cfg, None, None), threads)?;
    for r in &results {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    Ok(if failed.is_empty() { 0 } else { 1 })
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DiagnosticBlowup { .. } => 2,
        Error::Io(_) => 3,
        _ => 1,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse(_) => "parse",
        Error::Validation { .. } => "validation",
        Error::MissingMode(_) => "missing_mode",
        Error::InvalidResolution { .. } => "invalid_resolution",
        Error::ShapeMismatch(_) => "shape_mismatch",
        Error::ResolutionMismatch { .. } => "resolution_mismatch",
        Error::DiagnosticBlowup { .. } => "blowup",
        Error::InsufficientLevels(_) => "insufficient_levels",
        Error::DegeneratePoints(_) => "degenerate_points",
        Error::Io(_) => "io",
    }
}

fn report_error(kind: &str, message: &str, code: i32) -> i32 {
    let record = serde_json::json!({ "error": kind, "message": message, "exit": code });
    eprintln!("{record}");
    code
}

/// Runs a parsed invocation and returns its exit status.
pub fn run(cli: Cli) -> i32 {
    let result = (|| -> Result<i32> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = cli.threads {
            builder = builder.num_threads(t);
        }
        let pool = builder.build().map_err(|e| Error::Parse(format!("--threads: {e}")))?;
        let threads = cli.threads;
        pool.install(|| match &cli.command {
            Command::Simulate(a) => cmd_simulate(a, threads),
            Command::Converge(a) => cmd_converge(a, threads),
            Command::SampleNoise(a) => cmd_sample_noise(a, threads),
            Command::Validate(a) => cmd_validate(a, threads),
        })
    })();
    match result {
        Ok(code) => code,
        Err(e) => report_error(error_kind(&e), &e.to_string(), exit_code(&e)),
    }
}

/// Entry point for the `scgle` binary.
pub fn main() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            0
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            report_error("usage", first, 1)
        }
    }
}
