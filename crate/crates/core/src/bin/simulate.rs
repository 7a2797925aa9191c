use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use aquifer_sim::pipeline::{parse_stage_selection, run, ExportFormat, RunConfig, RunOptions};
use aquifer_sim::Error;

/// Four-stage aquifer simulation: TCE infiltration, dissolution, nZVI
/// injection and reactive remediation.
#[derive(Parser, Debug)]
#[command(name = "simulate", version)]
struct Args {
    /// Configuration file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Stage to run: 1, 2, 3, 4 or all.
    #[arg(long, default_value = "all")]
    stage: String,
    /// Output directory for checkpoints, audits, series and exports.
    #[arg(long)]
    out: PathBuf,
    /// Random-field seed (overrides the configuration).
    #[arg(long)]
    seed: Option<u64>,
    /// Directory holding the prerequisite checkpoint (defaults to --out).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Export field snapshots as csv or vtk.
    #[arg(long)]
    export: Option<String>,
    /// Worker threads; 1 is the reference mode.
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(args: &Args) -> Result<(), Error> {
    let stages = parse_stage_selection(&args.stage)?;
    let export = args.export.as_deref().map(str::parse::<ExportFormat>).transpose()?;
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(Error::input("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::input(format!("cannot set up thread pool: {e}")))?;
    }
    let opts = RunOptions { out_dir: args.out.clone(), checkpoint_dir: args.checkpoint.clone(), export, stages };
    for s in run(&cfg, &opts)? {
        println!("stage {} -> {} (closure {:.5}%)", s.stage, s.checkpoint.display(), 100.0 * s.closure);
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
