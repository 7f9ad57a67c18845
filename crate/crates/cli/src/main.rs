//! `neumann-lab` command line.
//!
//! Exit status: 0 on success, 2 when a check ran and failed, 1 on any error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use neumann_lab::lab::{self, ExperimentKind, LabError, RunConfig, RunManifest, Status};

/// Output root used when `--out` is absent; takes precedence over the config.
const OUT_ENV: &str = "NEUMANN_LAB_OUT";

#[derive(Parser)]
#[command(name = "neumann-lab", version, about = "Neumann eigenfunction laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output root; overrides the config and $NEUMANN_LAB_OUT.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Recompute meshes and eigenpairs instead of reading the cache.
    #[arg(long)]
    no_cache: bool,
    /// Finite element order.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    order: Option<u8>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate (or fetch from the cache) the mesh of a config.
    Mesh(RunArgs),
    /// Eigenvalue table for the config's window.
    Solve(RunArgs),
    /// Small-ball mass scaling at the config's points.
    Mass(RunArgs),
    /// Rellich identity sweeps over analytic modes.
    Rellich(RunArgs),
    /// Gaussian-beam or strip-concentrated mode sharpness check.
    Sharpness(RunArgs),
    /// Log-log SVG of mass reports (JSON files written by `mass` or `sharpness`).
    Plot {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize the manifest of a run directory.
    Report {
        dir: PathBuf,
    },
}

fn load(args: &RunArgs, kind: Option<ExperimentKind>) -> Result<RunConfig, LabError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(k) = kind {
        cfg.kind = k;
    }
    if let Some(o) = args.order {
        cfg.mesh.order = o;
    }
    if let Some(o) = args.out.clone().or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)) {
        cfg.out = o;
    }
    cfg.cache = !args.no_cache;
    cfg.validate()?;
    Ok(cfg)
}

fn summarize(m: &RunManifest) {
    println!("run {} ({})", &m.config_hash[..16], m.config.kind.name());
    for t in &m.timings {
        println!("  {:<14} {:>9.3} s{}", t.stage, t.seconds, if t.cached { "  (cached)" } else { "" });
    }
    for f in &m.files {
        println!("  wrote {} ({} bytes)", f.name, f.bytes);
    }
    for v in &m.verdicts {
        let s = match v.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        };
        println!("  {s:<12} {}  metric {:.4} threshold {}", v.name, v.metric, v.threshold);
    }
}

fn execute(cli: Cli) -> Result<bool, LabError> {
    let kind = |c: &Command| match c {
        Command::Solve(_) => Some(ExperimentKind::Eigens),
        Command::Mass(_) => Some(ExperimentKind::MassScaling),
        Command::Rellich(_) => Some(ExperimentKind::Rellich),
        Command::Sharpness(_) => Some(ExperimentKind::Sharpness),
        _ => None,
    };
    let k = kind(&cli.command);
    match cli.command {
        Command::Mesh(args) => {
            let cfg = load(&args, None)?;
            let (mesh, hit) = lab::build_mesh(&cfg)?;
            let dir = lab::run_dir(&cfg);
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("mesh.txt");
            std::fs::write(&path, mesh.to_text())?;
            println!(
                "{} vertices, {} triangles, max edge {:.4}, min angle {:.2}°{}",
                mesh.num_vertices(),
                mesh.num_triangles(),
                mesh.max_edge(),
                mesh.min_angle_deg(),
                if hit { " (cached)" } else { "" }
            );
            println!("hash {}", mesh.content_hash());
            println!("wrote {}", path.display());
            Ok(true)
        }
        Command::Solve(args) | Command::Mass(args) | Command::Rellich(args) | Command::Sharpness(args) => {
            let cfg = load(&args, k)?;
            let m = lab::run(&cfg)?;
            summarize(&m);
            println!("output {}", lab::run_dir(&cfg).display());
            Ok(m.passed())
        }
        Command::Plot { reports, out } => {
            let svg = lab::plot(&lab::read_reports(&reports)?)?;
            match out {
                Some(p) => std::fs::write(p, svg)?,
                None => print!("{svg}"),
            }
            Ok(true)
        }
        Command::Report { dir } => {
            let m = lab::load_manifest(&dir)?;
            if !m.complete {
                println!("run did not complete");
            }
            summarize(&m);
            Ok(m.passed())
        }
    }
}

fn main() -> ExitCode {
    // Usage errors are execution errors here; 2 is reserved for failed checks.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
