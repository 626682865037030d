use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use grslab::harness::curves::{bound_curve, BoundSpec};
use grslab::harness::spec::{parse_json, CodeRecipe, MultiplierKind, ShiftKind};
use grslab::harness::table1::{table1, Table1Spec};
use grslab::harness::{self, CompareSpec, ExperimentSpec, Manifest, SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "grslab", version, about = "GRS code experiments: simulation, bounds and iteration tables")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment description (JSON).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
    /// Output file; stdout when absent. A manifest is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// FER sweep over a channel-parameter grid.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Per-trial CSV.
        #[arg(long)]
        trials_out: Option<PathBuf>,
    },
    /// Bound curve.
    Bounds {
        #[command(flatten)]
        common: Common,
    },
    /// Mean elimination iterations, change-of-basis against the offline baseline.
    Table1 {
        #[command(flatten)]
        common: Common,
        /// Overrides the trial count per cell.
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Paired source/code comparison on a shared grid.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Code utilities.
    Code {
        #[command(subcommand)]
        cmd: CodeCmd,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ShiftArg {
    Zero,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum MultArg {
    Random,
    Ones,
}

#[derive(Subcommand)]
enum CodeCmd {
    /// Emit a pinned code description.
    Gen {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Information digits when fewer than k*m.
        #[arg(long)]
        info_digits: Option<usize>,
        /// Primitive polynomial coefficients, e.g. "1,1,0,1".
        #[arg(long)]
        f: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        extended: bool,
        #[arg(long, value_enum)]
        shift: Option<ShiftArg>,
        #[arg(long, value_enum, default_value = "random")]
        multipliers: MultArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_spec<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_json(&text, "")?)
}

fn require_spec(c: &Common) -> Result<&Path> {
    c.spec.as_deref().ok_or_else(|| grslab::Error::config("--spec", "a spec file is required").into())
}

fn base_dir(c: &Common) -> PathBuf {
    c.spec.as_deref().and_then(Path::parent).map(Path::to_path_buf).unwrap_or_default()
}

fn emit(out: Option<&Path>, text: &str, manifest: Option<&Manifest>) -> Result<()> {
    match (out, manifest) {
        (Some(p), Some(m)) => harness::write_with_manifest(p, text, m)?,
        (Some(p), None) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        (None, _) => print!("{text}"),
    }
    Ok(())
}

fn manifest(kind: &str, seed: u64, workers: usize, spec: serde_json::Value) -> Manifest {
    Manifest {
        schema_version: SCHEMA_VERSION,
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        kind: kind.into(),
        seed,
        workers,
        bits_per_use: None,
        spec,
        wall_time_s: Vec::new(),
    }
}

fn apply(spec: &mut ExperimentSpec, c: &Common) {
    if let Some(s) = c.seed {
        spec.seed = s;
    }
    if c.workers.is_some() {
        spec.workers = c.workers;
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Simulate { common, trials_out } => {
            let mut spec: ExperimentSpec = read_spec(require_spec(&common)?)?;
            apply(&mut spec, &common);
            spec.record_trials |= trials_out.is_some();
            let res = harness::run(&spec, &base_dir(&common))?;
            emit(common.out.as_deref(), &harness::points_csv(&res.points)?, Some(&res.manifest))?;
            if let Some(p) = trials_out {
                std::fs::write(&p, harness::to_csv(&res.trials)?).with_context(|| format!("writing {}", p.display()))?;
            }
        }
        Cmd::Bounds { common } => {
            let spec: BoundSpec = read_spec(require_spec(&common)?)?;
            let rows = bound_curve(&spec)?;
            let m = manifest("bounds", common.seed.unwrap_or(0), 1, serde_json::to_value(&spec)?);
            emit(common.out.as_deref(), &harness::to_csv(&rows)?, Some(&m))?;
        }
        Cmd::Table1 { common, trials } => {
            let mut spec: Table1Spec = match &common.spec {
                Some(p) => read_spec(p)?,
                None => Table1Spec::default(),
            };
            if let Some(s) = common.seed {
                spec.seed = s;
            }
            if common.workers.is_some() {
                spec.workers = common.workers;
            }
            if let Some(t) = trials {
                spec.trials = t;
            }
            let rows = table1(&spec)?;
            let workers = spec.workers.unwrap_or_else(harness::default_workers);
            let m = manifest("table1", spec.seed, workers, serde_json::to_value(&spec)?);
            emit(common.out.as_deref(), &harness::to_csv(&rows)?, Some(&m))?;
        }
        Cmd::Compare { common } => {
            let mut spec: CompareSpec = read_spec(require_spec(&common)?)?;
            apply(&mut spec.first, &common);
            apply(&mut spec.second, &common);
            let (a, b) = harness::compare_sources(&spec, &base_dir(&common))?;
            let text = harness::compare_csv(&[("first", &a.points), ("second", &b.points)])?;
            let m = manifest("compare", spec.first.seed, a.manifest.workers, serde_json::json!({"first": a.manifest, "second": b.manifest}));
            emit(common.out.as_deref(), &text, Some(&m))?;
        }
        Cmd::Code { cmd: CodeCmd::Gen { p, m, n, k, info_digits, f, seed, extended, shift, multipliers, out } } => {
            let recipe = CodeRecipe {
                p,
                m,
                f,
                n,
                k,
                info_digits,
                seed,
                extended,
                multipliers: match multipliers {
                    MultArg::Random => MultiplierKind::Random,
                    MultArg::Ones => MultiplierKind::Ones,
                },
                shift: shift.map(|s| match s {
                    ShiftArg::Zero => ShiftKind::Zero,
                    ShiftArg::Random => ShiftKind::Random,
                }),
            };
            let code = recipe.build().map_err(|e| grslab::Error::config("code", e.to_string()))?;
            let text = serde_json::to_string_pretty(&code.to_desc())? + "\n";
            emit(out.as_deref(), &text, None)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<grslab::Error>() {
                Some(g) if g.is_config() => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
