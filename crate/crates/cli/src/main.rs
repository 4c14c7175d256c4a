use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lentlab::build::{build_model, build_spec, default_probes, FUNCTIONALS, MODELS, SPEC_FAMILIES};
use lentlab::config::Target;
use lentlab::{parse_config, run_experiment, write_outputs, CliError, ExperimentConfig};
use lentlab_core::bottom_structure::validate_spec;
use lentlab_core::jump_sde::{check_model_jacobians, ModelProbe};

/// Carré du champ experiments for Poisson functionals and jump SDEs.
///
/// Config files are line-oriented: `[section]` headers followed by
/// `key = value` lines; `#` starts a comment line. Unknown or repeated keys
/// are errors. Sections and defaults:
///
///   [experiment]  kind (functional-gamma | sde-gamma | oracle-compare | density-scan),
///                 seed (required), paths = 100, horizon = 1.0
///   [spec]        family = compound-poisson (lambda = 1, low = -1, high = 1, gap = 0.01)
///                 or truncated-power (beta = 1, epsilon_cut = 0.01); axes = 1; compensated = true
///   [functional]  name, t = horizon, plus per-functional keys (see list-functionals)
///   [model]       name, plus per-model keys (see list-functionals)
///   [tolerances]  fd_step = 1e-5, oracle_rel = 1e-6, det_rel = 1e-12, step = 0.01,
///                 step_tol = 1e-9, atom_resolution = 1e-12
///   [output]      dir = out, threads = 0 (0 = all cores, 1 = serial), contributions = false
///
/// Exit codes: 2 input or parse error, 3 spec violation, 4 numeric failure, 5 io error.
#[derive(Parser)]
#[command(name = "lentlab", version, verbatim_doc_comment)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its outputs.
    Run(RunArgs),
    /// Parse a config and check the spec and model hypotheses at probe marks.
    Validate(RunArgs),
    /// List functionals and SDE models with their config keys.
    ListFunctionals,
    /// List Lévy measure families with their config keys.
    ListSpecs,
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    /// Output directory; overrides the config and LENTLAB_OUT_DIR.
    #[arg(long, env = "LENTLAB_OUT_DIR")]
    out: Option<PathBuf>,
    #[arg(long)]
    fd_step: Option<f64>,
    /// Worker threads; 1 runs serially.
    #[arg(long)]
    threads: Option<usize>,
    /// Print the canonical config with defaults filled in, then exit.
    #[arg(long)]
    print_config: bool,
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(args.config.display().to_string(), e))?;
    let mut c = parse_config(&text)?;
    if let Some(s) = args.seed {
        c.seed = s;
    }
    if let Some(p) = args.paths {
        if p == 0 {
            return Err(CliError::Parse { line: None, message: "--paths must be at least 1".into() });
        }
        c.paths = p;
    }
    if let Some(h) = args.fd_step {
        if !(h > 0.0 && h.is_finite()) {
            return Err(CliError::Parse { line: None, message: "--fd-step must be positive".into() });
        }
        c.tolerances.fd_step = h;
    }
    if let Some(t) = args.threads {
        c.output.threads = t;
    }
    if let Some(o) = &args.out {
        c.output.dir = o.clone();
    }
    Ok(c)
}

fn run(args: &RunArgs) -> Result<(), CliError> {
    let config = load(args)?;
    if args.print_config {
        print!("{}", config.to_canonical());
        return Ok(());
    }
    let output = run_experiment(&config)?;
    let dir: &Path = &config.output.dir;
    let manifest = write_outputs(dir, &config, &output)?;
    print!("{}", output.summary);
    println!("wrote {} files to {}", manifest.files.len() + 1, dir.display());
    match output.failure {
        Some(msg) => Err(CliError::Check(msg)),
        None => Ok(()),
    }
}

fn validate(args: &RunArgs) -> Result<(), CliError> {
    let config = load(args)?;
    if args.print_config {
        print!("{}", config.to_canonical());
        return Ok(());
    }
    let spec = build_spec(&config.spec)?;
    let report = validate_spec(&spec, &default_probes(spec.dim()));
    print!("{}", report.to_text());
    if !report.passed() {
        return Err(CliError::Validation("bottom structure hypotheses fail at a probe".into()));
    }
    if let Target::Model(m) = &config.target {
        let model = build_model(m)?;
        let x = model.initial();
        let probes: Vec<ModelProbe<f64>> = default_probes(spec.dim())
            .into_iter()
            .filter(|u| spec.in_domain(u))
            .map(|u| ModelProbe { t: 0.5 * config.horizon, x: x.clone(), u })
            .collect();
        check_model_jacobians(model.as_ref(), &probes, 1e-5)?;
        println!("model jacobians: PASS ({} probes)", probes.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Validate(a) => validate(a),
        Command::ListFunctionals => {
            println!("functionals:");
            for (n, d) in FUNCTIONALS {
                println!("  {n:<26} {d}");
            }
            println!("models:");
            for (n, d) in MODELS {
                println!("  {n:<26} {d}");
            }
            Ok(())
        }
        Command::ListSpecs => {
            for (n, d) in SPEC_FAMILIES {
                println!("  {n:<18} {d}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
