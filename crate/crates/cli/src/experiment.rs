//! Runs an experiment over independent paths and renders its output files.
//!
//! Path i always draws from RNG stream i of the master seed and results are
//! gathered in path order, so the files do not depend on the thread count.

use std::fmt::Write as _;

use lentlab_core::csv_util::{fmt_real, write_rows};
use lentlab_core::density_diagnostics::{
    atom_test, kde_summary, nondegeneracy_stats, BandwidthRule, DetTolerance, MIN_ATOM_SAMPLES,
};
use lentlab_core::functional_calculus::{
    compare_gammas, lent_particle_gamma_with, oracle_gamma, write_contributions_csv, write_gamma_csv, FdRule,
    Functional, GammaDiscrepancy,
};
use lentlab_core::jump_sde::{sde_gamma_oracle, solve_and_gamma, SdeModel, StepControl, ZPath};
use lentlab_core::levy_sim::sample_configuration_for_path;
use lentlab_core::{GammaMatrix64, JumpConfiguration64, LevyMeasureSpec64};
use nalgebra::DVector;
use rayon::prelude::*;

use crate::build::{build_functional, build_model, build_spec};
use crate::config::{ExperimentConfig, ExperimentKind, Target};
use crate::error::CliError;

/// What one path contributes to the outputs.
#[derive(Debug, Clone)]
pub struct PathResult {
    pub jumps: usize,
    pub value: DVector<f64>,
    pub gamma: GammaMatrix64,
    pub oracle: Option<GammaDiscrepancy>,
}

/// Rendered files in write order, plus the oracle verdict when one was run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: String,
    /// `Some(message)` when the oracle comparison exceeded its tolerance.
    pub failure: Option<String>,
}

impl RunOutput {
    pub fn file(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }
}

enum Evaluator {
    Functional(Box<dyn Functional<f64>>),
    Model(Box<dyn SdeModel<f64>>),
}

struct Context {
    spec: LevyMeasureSpec64,
    evaluator: Evaluator,
    rule: FdRule,
    control: StepControl,
    with_oracle: bool,
}

impl Context {
    fn path(&self, config: &JumpConfiguration64, fd_step: f64) -> lentlab_core::Result<PathResult> {
        let (value, gamma, oracle) = match &self.evaluator {
            Evaluator::Functional(f) => {
                let gamma = lent_particle_gamma_with(f.as_ref(), config, &self.spec, &self.rule)?;
                let oracle = match self.with_oracle {
                    true => Some(oracle_gamma(f.as_ref(), config, &self.spec, fd_step)?),
                    false => None,
                };
                (f.evaluate(config)?, gamma, oracle)
            }
            Evaluator::Model(m) => {
                let z = ZPath::zero(m.aux_dim());
                let (traj, _, gamma) = solve_and_gamma(m.as_ref(), config, &z, &self.spec, &self.control)?;
                let oracle = match self.with_oracle {
                    true => Some(sde_gamma_oracle(m.as_ref(), config, &z, &self.spec, &self.rule, &self.control)?),
                    false => None,
                };
                (traj.terminal().clone(), gamma, oracle)
            }
        };
        let oracle = oracle.map(|o| compare_gammas(&gamma, &o));
        Ok(PathResult { jumps: config.len(), value, gamma, oracle })
    }
}

/// Computes every path, in parallel unless `threads == 1`.
pub fn compute_paths(config: &ExperimentConfig) -> Result<Vec<PathResult>, CliError> {
    let spec = build_spec(&config.spec)?;
    let evaluator = match &config.target {
        Target::Functional(f) => Evaluator::Functional(build_functional(f)),
        Target::Model(m) => Evaluator::Model(build_model(m)?),
    };
    let tol = &config.tolerances;
    let ctx = Context {
        spec,
        evaluator,
        rule: FdRule::with_step(tol.fd_step),
        control: StepControl { max_step: tol.step, tol: tol.step_tol, ..StepControl::default() },
        with_oracle: config.kind == ExperimentKind::OracleCompare,
    };
    let one = |i: usize| -> Result<PathResult, CliError> {
        let cfg = sample_configuration_for_path(&ctx.spec, config.horizon, config.seed, i as u64)
            .map_err(|source| CliError::Path { path: i, source })?;
        ctx.path(&cfg, tol.fd_step).map_err(|source| CliError::Path { path: i, source })
    };
    let results: Vec<Result<PathResult, CliError>> = match config.output.threads {
        1 => (0..config.paths).map(one).collect(),
        0 => (0..config.paths).into_par_iter().map(one).collect(),
        n => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Check(format!("cannot start thread pool: {e}")))?
            .install(|| (0..config.paths).into_par_iter().map(one).collect()),
    };
    // Report the lowest failing path so the error is thread-count independent.
    results.into_iter().collect()
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let results = compute_paths(config)?;
    render(config, &results)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> lentlab_core::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn render(config: &ExperimentConfig, results: &[PathResult]) -> Result<RunOutput, CliError> {
    let dim = results[0].gamma.dim();
    let gammas: Vec<GammaMatrix64> = results.iter().map(|r| r.gamma.clone()).collect();
    let mut files = vec![("config.txt".to_string(), config.to_canonical().into_bytes())];
    files.push((
        "gamma.csv".into(),
        csv_bytes(|b| write_gamma_csv(dim, results.iter().enumerate().map(|(i, r)| (i, &r.gamma)), b))?,
    ));
    if config.output.contributions {
        files.push((
            "contributions.csv".into(),
            csv_bytes(|b| write_contributions_csv(dim, results.iter().enumerate().map(|(i, r)| (i, &r.gamma)), b))?,
        ));
    }

    let report = nondegeneracy_stats(&gammas, DetTolerance::Relative(config.tolerances.det_rel))?;
    files.push(("nondegeneracy.txt".into(), report.to_text().into_bytes()));
    files.push(("nondegeneracy.csv".into(), csv_bytes(|b| report.write_csv(b))?));

    let mut summary = String::new();
    let _ = writeln!(summary, "{}: {} paths, seed {}", config.kind.as_str(), config.paths, config.seed);
    let _ = writeln!(summary, "nondegenerate: {} of {}", report.nondegenerate, report.samples);
    let mut failure = None;

    if config.kind == ExperimentKind::OracleCompare {
        let header = ["path_id", "jumps", "max_abs", "relative", "scaled", "pass"].map(String::from);
        let tol = config.tolerances.oracle_rel;
        let rows = results.iter().enumerate().map(|(i, r)| {
            let d = r.oracle.expect("oracle run");
            vec![
                i.to_string(),
                r.jumps.to_string(),
                fmt_real(d.max_abs),
                fmt_real(d.relative),
                fmt_real(d.scaled),
                d.within(tol).to_string(),
            ]
        });
        files.push(("oracle.csv".into(), csv_bytes(|b| write_rows(b, &header, rows))?));
        let worst = results
            .iter()
            .enumerate()
            .map(|(i, r)| (i, r.oracle.expect("oracle run")))
            .max_by(|a, b| a.1.scaled.total_cmp(&b.1.scaled))
            .expect("at least one path");
        let failing = results.iter().filter(|r| !r.oracle.expect("oracle run").within(tol)).count();
        let mut text = String::new();
        let _ = writeln!(text, "paths: {}", results.len());
        let _ = writeln!(text, "tolerance: {tol:e} on |engine - oracle|_max / (1 + |engine|_max)");
        let _ = writeln!(text, "max scaled discrepancy: {:e} (path {})", worst.1.scaled, worst.0);
        let _ = writeln!(text, "max absolute discrepancy: {:e}", worst.1.max_abs);
        let _ = writeln!(text, "max relative discrepancy: {:e}", worst.1.relative);
        let _ = writeln!(text, "failing paths: {failing}");
        let _ = writeln!(text, "verdict: {}", if failing == 0 { "PASS" } else { "FAIL" });
        summary.push_str(&text);
        if failing > 0 {
            failure = Some(format!("{failing} paths exceed the oracle tolerance {tol:e}"));
        }
        files.push(("oracle_summary.txt".into(), text.into_bytes()));
    }

    if config.kind == ExperimentKind::DensityScan {
        let vdim = results[0].value.len();
        let mut header = vec!["path_id".to_string()];
        header.extend((1..=vdim).map(|k| format!("f_{k}")));
        let rows = results
            .iter()
            .enumerate()
            .map(|(i, r)| std::iter::once(i.to_string()).chain(r.value.iter().map(|x| fmt_real(*x))).collect());
        files.push(("values.csv".into(), csv_bytes(|b| write_rows(b, &header, rows))?));
        let values: Vec<DVector<f64>> = results.iter().map(|r| r.value.clone()).collect();
        let mut text = String::new();
        if values.len() < MIN_ATOM_SAMPLES {
            let _ = writeln!(text, "atom test skipped: needs at least {MIN_ATOM_SAMPLES} samples");
        } else {
            let atoms = atom_test(&values, config.tolerances.atom_resolution)?;
            let _ = writeln!(text, "samples: {}", atoms.samples);
            let _ = writeln!(text, "threshold frequency: {:e}", atoms.threshold);
            let _ = writeln!(text, "atoms: {}", atoms.atoms.len());
            for a in &atoms.atoms {
                let _ = writeln!(text, "  at {:?}: count {} frequency {:.6}", a.location, a.count, a.frequency);
            }
            if vdim <= 2 {
                let kde = kde_summary(&values, BandwidthRule::Silverman)?;
                let _ = writeln!(text, "kde mode: {:?}", kde.mode());
                for w in &kde.warnings {
                    let _ = writeln!(text, "kde warning: {w}");
                }
                files.push(("kde.csv".into(), csv_bytes(|b| kde.write_csv(b))?));
            }
        }
        summary.push_str(&text);
        files.push(("density.txt".into(), text.into_bytes()));
    }

    Ok(RunOutput { files, summary, failure })
}
