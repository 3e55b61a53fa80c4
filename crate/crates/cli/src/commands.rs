use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use phasetv::experiment::{
    self, files, read_json, read_pair, read_phase, write_json, write_problem, ExperimentConfig, Method, Problem,
};
use phasetv::io::{export_graymap, import_grayscale, write_field, ImportMapping};
use phasetv::metrics::compute_metrics;
use phasetv::phase::{decompose, pythagorean_deviation, reconstruct};
use phasetv::{Error, MetricsRecord, PhasePair, SolveConfig};
use serde::Serialize;

use crate::config;
use crate::report::{write_trace, CompareRow, Divergence, RunReport};
use crate::{CompareArgs, DenoiseArgs, GenerateArgs, ImportArgs, MetricsArgs, RunArgs};

/// Bad flag combinations not caught by the argument parser.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// 2 usage / invalid input, 3 numerical divergence, 4 I/O.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Diverged { .. } => 3,
                Error::Io { .. } | Error::Image { .. } | Error::Format { .. } => 4,
                _ => 2,
            };
        }
        if cause.is::<std::io::Error>() || cause.is::<csv::Error>() {
            return 4;
        }
    }
    1
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    Ok(())
}

fn write_problem_dir(dir: &Path, problem: &Problem) -> Result<()> {
    write_problem(dir, problem)?;
    export_graymap(&dir.join("clean_phase.pgm"), problem.clean.field())?;
    export_graymap(&dir.join("noisy_phase.pgm"), problem.noisy.field())?;
    Ok(())
}

pub fn generate(args: &GenerateArgs) -> Result<()> {
    let (scene, noise) = config::generation(args)?;
    let problem = Problem::generate(&scene, &noise)?;
    write_problem_dir(&args.out, &problem)?;
    println!("achieved_snr_db={:.4}", problem.achieved_snr_db);
    Ok(())
}

/// Noisy pair of a problem directory; falls back to the wrapped phase when
/// the channel files are absent.
fn read_noisy(dir: &Path) -> Result<PhasePair> {
    if dir.join(files::NOISY_REAL).exists() || !dir.join(files::NOISY_PHASE).exists() {
        return Ok(read_pair(dir, files::NOISY_REAL, files::NOISY_IM)?);
    }
    Ok(decompose(&read_phase(&dir.join(files::NOISY_PHASE))?))
}

/// Metrics against the clean pair of `problem_dir`, if it has one.
fn metrics_against(result: &PhasePair, problem_dir: &Path) -> Result<Option<MetricsRecord>> {
    let needed = [files::CLEAN_REAL, files::CLEAN_IM, files::NOISY_PHASE];
    if !needed.iter().all(|f| problem_dir.join(f).exists()) {
        return Ok(None);
    }
    let reference = read_pair(problem_dir, files::CLEAN_REAL, files::CLEAN_IM)?;
    let noisy = read_phase(&problem_dir.join(files::NOISY_PHASE))?;
    Ok(Some(compute_metrics(result, &reference, &noisy)?))
}

fn denoise_dir(input: &Path, out: &Path, method: Method, solve: &SolveConfig, normalize: bool) -> Result<()> {
    let mut data = read_noisy(input)?;
    if normalize {
        data = data.normalized()?;
    }
    method_checks(method, solve)?;
    create_dir(out)?;
    let mut solve = *solve;
    solve.record_energy = !matches!(method, Method::Strobel { .. });
    let mut report = RunReport::new(method, &solve, normalize);
    let started = Instant::now();
    let denoised = match experiment::denoise(&data, method, &solve) {
        Ok(d) => d,
        Err(Error::Diverged { method: m, iteration, reason, partial }) => {
            report.absorb(&partial);
            report.diverged = Some(Divergence { iteration, reason: reason.clone() });
            write_trace(&out.join(files::TRACE_CSV), &partial)?;
            write_json(&out.join(files::REPORT_JSON), &report)?;
            return Err(Error::Diverged { method: m, iteration, reason, partial }.into());
        }
        Err(e) => return Err(e.into()),
    };
    report.timing.wall_time_s = started.elapsed().as_secs_f64();
    if let Some(r) = &denoised.report {
        report.absorb(r);
        write_trace(&out.join(files::TRACE_CSV), r)?;
    }
    if let Method::GradientDescent { .. } = method {
        report.tau = denoised.tau;
    }

    let pair = &denoised.pair;
    let psi = reconstruct(pair)?;
    write_field(&out.join(files::RESULT_REAL), pair.real())?;
    write_field(&out.join(files::RESULT_IM), pair.im())?;
    write_field(&out.join(files::RESULT_PHASE), psi.field())?;
    write_field(&out.join(files::PYTH_DEVIATION), &pythagorean_deviation(pair))?;
    export_graymap(&out.join("result_phase.pgm"), psi.field())?;
    write_json(&out.join(files::REPORT_JSON), &report)?;
    if let Some(m) = metrics_against(pair, input)? {
        write_json(&out.join(files::METRICS_JSON), &m)?;
    }
    match report.converged {
        Some(false) => eprintln!(
            "warning: {} stopped after {} iterations without reaching epsilon",
            report.method,
            report.outer_iterations.unwrap_or(0)
        ),
        _ => println!("{} done: {}", report.method, out.display()),
    }
    Ok(())
}

fn method_checks(method: Method, solve: &SolveConfig) -> Result<()> {
    let as_usage = |e: Error| -> anyhow::Error {
        match e {
            Error::InvalidParameter(msg) => UsageError(msg).into(),
            other => other.into(),
        }
    };
    solve.validate().map_err(as_usage)?;
    if let Method::GradientDescent { tau: Some(t) } = method {
        if !(t.is_finite() && t > 0.0) {
            return Err(UsageError(format!("--tau must be positive, got {t}")).into());
        }
    }
    Ok(())
}

pub fn denoise(args: &DenoiseArgs) -> Result<()> {
    let (method, solve) = config::solving(args)?;
    denoise_dir(&args.input, &args.out, method, &solve, args.normalize_amplitude)
}

pub fn metrics(args: &MetricsArgs) -> Result<()> {
    let result = read_pair(&args.result, files::RESULT_REAL, files::RESULT_IM)?;
    let reference = read_pair(&args.reference, files::CLEAN_REAL, files::CLEAN_IM)?;
    let noisy = read_phase(&args.reference.join(files::NOISY_PHASE))?;
    let record = compute_metrics(&result, &reference, &noisy)?;
    write_json(&args.out, &record)?;
    println!("{}", serde_json::to_string(&record)?);
    Ok(())
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    let mut w = csv::Writer::from_path(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for dir in &args.runs {
        let report: RunReport = read_json(&dir.join(files::REPORT_JSON))?;
        let metrics: MetricsRecord = read_json(&dir.join(files::METRICS_JSON))?;
        w.serialize(CompareRow::new(&report, &metrics))?;
    }
    w.flush().with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

#[derive(Serialize)]
struct ImportReport {
    source: PathBuf,
    rows: usize,
    cols: usize,
    mapping: ImportMapping,
}

pub fn import(args: &ImportArgs) -> Result<()> {
    let (psi, mapping) = import_grayscale(&args.image)?;
    create_dir(&args.out)?;
    let pair = decompose(&psi);
    write_field(&args.out.join(files::NOISY_PHASE), psi.field())?;
    write_field(&args.out.join(files::NOISY_REAL), pair.real())?;
    write_field(&args.out.join(files::NOISY_IM), pair.im())?;
    let (rows, cols) = psi.shape();
    let info = ImportReport { source: args.image.clone(), rows, cols, mapping };
    write_json(&args.out.join("import.json"), &info)?;
    println!("imported {rows}x{cols} ({}-bit) into {}", mapping.bit_depth, args.out.display());
    Ok(())
}

/// Layout: `<output_dir>/problem` and `<output_dir>/<method>`.
pub fn run(args: &RunArgs) -> Result<()> {
    let cfg: ExperimentConfig = read_json(&args.config)?;
    cfg.validate().map_err(|e| match e {
        Error::InvalidParameter(msg) => anyhow::Error::from(UsageError(msg)),
        other => other.into(),
    })?;
    let problem = Problem::generate(&cfg.scene, &cfg.noise)?;
    let problem_dir = cfg.output_dir.join("problem");
    write_problem_dir(&problem_dir, &problem)?;
    println!("achieved_snr_db={:.4}", problem.achieved_snr_db);
    denoise_dir(&problem_dir, &cfg.output_dir.join(cfg.solver.name()), cfg.solver, &cfg.solve, false)
}
