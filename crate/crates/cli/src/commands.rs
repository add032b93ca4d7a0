//! Subcommand implementations.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use gaussian_qfi::config::ModelConfig;
use gaussian_qfi::dgamma::InverseKind;
use gaussian_qfi::homodyne::{homodyne_fisher, homodyne_plan, isothermal_frame, optimal_homodyne_fisher};
use gaussian_qfi::models::{check_isothermal, GaussianModelPoint, ModelFamily};
use gaussian_qfi::oracle::{
    identity_checks, qfi_fock, qfi_fock_point, sld_moments, sld_residual, suggested_cutoff, OracleOptions, OracleQfi,
    MAX_ORACLE_MODES,
};
use gaussian_qfi::sld::{
    photon_counting_form, qfi_general_with, qfi_isothermal_with, sld_coefficients_with, FisherReport, PhotonCounting,
};
use gaussian_qfi::symplectic::random_symplectic;
use gaussian_qfi::Error;
use nalgebra::DVector;
use rayon::prelude::*;

use crate::output::{self, emit_csv, num, Row};
use crate::{Command, EngineOpts, HomodyneArgs, InverseArg, MethodArg, OutputArg, SweepArgs};

/// Bytes one oracle evaluation may claim, used to cap oracle workers.
const ORACLE_MEMORY_BUDGET: f64 = 2.0 * 1024.0 * 1024.0 * 1024.0;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Engine(#[from] Error),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Engine(e) if e.is_numerical_rejection() => 3,
            CliError::Engine(_) | CliError::Io(_) => 2,
            CliError::Usage(_) => 64,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Qfi { config, engine } => qfi(&config, engine),
        Command::Sweep(args) => sweep(&args),
        Command::Sld { config, engine, inverse } => sld(&config, engine, inverse),
        Command::Homodyne(args) => homodyne(&args),
        Command::OracleCheck { config, engine, cutoff, h } => oracle_check(&config, engine, cutoff, h),
    }
}

fn load(path: &Path) -> Result<ModelConfig> {
    Ok(ModelConfig::load(path)?)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--tol must lie in (0, 1), got {tol}")))
    }
}

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("step must be positive, got {h}")))
    }
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Auto => "auto",
        MethodArg::General => "general",
        MethodArg::Isothermal => "isothermal",
    }
}

fn fisher(point: &GaussianModelPoint, opts: EngineOpts) -> Result<FisherReport> {
    let isothermal = match opts.method {
        MethodArg::General => false,
        MethodArg::Isothermal => true,
        MethodArg::Auto => check_isothermal(point, opts.tol)?.passes(),
    };
    Ok(if isothermal {
        qfi_isothermal_with(point, opts.tol)?
    } else {
        qfi_general_with(point, opts.tol)?
    })
}

fn warnings(family: &ModelFamily, theta: f64, report: &FisherReport) -> Vec<String> {
    let mut w: Vec<String> = family.warnings(theta).into_iter().map(String::from).collect();
    for x in &report.warnings {
        if !w.iter().any(|y| y == x) {
            w.push(x.to_string());
        }
    }
    w
}

fn describe(config: &ModelConfig) -> String {
    let params: Vec<String> = config.family.params().iter().map(|(k, v)| format!("{k}={}", num(*v))).collect();
    if params.is_empty() {
        config.family.name().to_string()
    } else {
        format!("{}({})", config.family.name(), params.join(","))
    }
}

fn qfi(path: &Path, opts: EngineOpts) -> Result<()> {
    check_tol(opts.tol)?;
    let config = load(path)?;
    let point = config.point()?;
    let report = fisher(&point, opts)?;
    println!("# gqfi qfi config={} tol={:e} method={}", path.display(), opts.tol, method_name(opts.method));
    println!("family={}", describe(&config));
    println!("theta={}", num(config.theta));
    println!("method={}", report.method);
    println!("qfi={}", num(report.qfi));
    println!("qfi_first_moment={}", num(report.first_moment_term));
    println!("qfi_second_moment={}", num(report.second_moment_term));
    println!("wigner={}", num(report.wigner_fisher));
    println!("ratio={}", num(report.ratio()));
    println!("range_residual={}", num(report.range_residual));
    println!("warnings={}", warnings(&config.family, config.theta, &report).join(";"));
    Ok(())
}

fn grid(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![from],
        _ => (0..steps)
            .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

/// Rough peak memory of one oracle evaluation: a handful of dense complex
/// window matrices plus the Hermitian eigensolver workspace.
fn oracle_job_bytes(n: usize, cutoff: usize) -> f64 {
    let w = (cutoff as f64).powi(n as i32);
    10.0 * 16.0 * w * w
}

fn oracle_value(family: &ModelFamily, theta: f64, point: &GaussianModelPoint, cutoff: usize, h: f64) -> Result<OracleQfi> {
    Ok(if family.name() == "explicit" {
        qfi_fock_point(point, cutoff, h)?
    } else {
        qfi_fock(family, theta, cutoff, h)?
    })
}

fn sweep(args: &SweepArgs) -> Result<()> {
    check_tol(args.engine.tol)?;
    check_step(args.oracle_h)?;
    if !(args.from.is_finite() && args.to.is_finite()) {
        return Err(CliError::Usage("--from and --to must be finite".into()));
    }
    let jobs = match args.jobs {
        Some(0) => return Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(j) => j,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let config = load(&args.config)?;
    let family = &config.family;
    let want = |o: OutputArg| args.outputs.contains(&o);
    let with_oracle = want(OutputArg::Oracle);
    if with_oracle && family.n() > MAX_ORACLE_MODES {
        return Err(CliError::Usage(format!(
            "the oracle supports at most {MAX_ORACLE_MODES} modes, model has {}",
            family.n()
        )));
    }
    let thetas = grid(args.from, args.to, args.steps);
    for &t in &thetas {
        family.check_domain(t)?;
    }

    let mut outputs: Vec<OutputArg> = args.outputs.clone();
    outputs.sort();
    outputs.dedup();
    let names: Vec<&str> = outputs
        .iter()
        .map(|o| match o {
            OutputArg::Qfi => "qfi",
            OutputArg::Wigner => "wigner",
            OutputArg::HomodyneOpt => "homodyne_opt",
            OutputArg::Oracle => "oracle",
        })
        .collect();
    let mut banner = format!(
        "# gqfi sweep config={} family={} tol={:e} method={} from={} to={} steps={} jobs={jobs} outputs={}",
        args.config.display(),
        describe(&config),
        args.engine.tol,
        method_name(args.engine.method),
        num(args.from),
        num(args.to),
        args.steps,
        names.join(",")
    );
    if with_oracle {
        let cutoff = args.oracle_cutoff.map(|c| c.to_string()).unwrap_or_else(|| "auto".into());
        banner.push_str(&format!(
            " oracle_cutoff={cutoff} oracle_h={:e} max_tail={:e}",
            args.oracle_h,
            OracleOptions::default().max_tail
        ));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let engine = args.engine;
    let evaluated: Vec<Result<(Row, GaussianModelPoint)>> = pool.install(|| {
        thetas
            .par_iter()
            .map(|&theta| {
                let point = family.evaluate(theta)?;
                let report = fisher(&point, engine)?;
                let mut row = Row {
                    theta,
                    method: report.method.to_string(),
                    warnings: warnings(family, theta, &report),
                    ..Default::default()
                };
                if want(OutputArg::Qfi) {
                    row.qfi = Some(report.qfi);
                    row.qfi_first_moment = Some(report.first_moment_term);
                    row.qfi_second_moment = Some(report.second_moment_term);
                }
                if want(OutputArg::Wigner) {
                    row.wigner_fisher = Some(report.wigner_fisher);
                    row.ratio = Some(report.ratio()).filter(|r| r.is_finite());
                }
                if want(OutputArg::HomodyneOpt) {
                    // only defined for isothermal models with fixed first moments
                    row.homodyne_opt = isothermal_frame(&point, engine.tol).ok().map(|f| optimal_homodyne_fisher(&f));
                }
                Ok((row, point))
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(evaluated.len());
    let mut points = Vec::with_capacity(evaluated.len());
    for r in evaluated {
        let (row, point) = r?;
        rows.push(row);
        points.push(point);
    }

    if with_oracle && !rows.is_empty() {
        let cutoffs: Vec<usize> = points
            .iter()
            .map(|p| args.oracle_cutoff.map(|c| c as usize).unwrap_or_else(|| suggested_cutoff(p)))
            .collect();
        let largest = cutoffs.iter().copied().max().unwrap_or(0);
        let cap = (ORACLE_MEMORY_BUDGET / oracle_job_bytes(family.n(), largest)).floor().max(1.0) as usize;
        let oracle_pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.min(cap))
            .build()
            .map_err(|e| CliError::Io(e.to_string()))?;
        let values: Vec<Result<f64>> = oracle_pool.install(|| {
            rows.par_iter()
                .zip(points.par_iter())
                .zip(cutoffs.par_iter())
                .map(|((row, p), &d)| Ok(oracle_value(family, row.theta, p, d, args.oracle_h)?.qfi))
                .collect()
        });
        for (row, v) in rows.iter_mut().zip(values) {
            row.oracle_qfi = Some(v?);
        }
    }

    match &args.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
            emit_csv(&rows, with_oracle, BufWriter::new(file)).map_err(|e| CliError::Io(e.to_string()))?;
            println!("{banner}");
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => {
            eprintln!("{banner}");
            emit_csv(&rows, with_oracle, io::stdout().lock()).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(())
}

fn sld(path: &Path, opts: EngineOpts, inverse: InverseArg) -> Result<()> {
    check_tol(opts.tol)?;
    let config = load(path)?;
    let point = config.point()?;
    let kind = match inverse {
        InverseArg::Frame => InverseKind::Frame,
        InverseArg::MoorePenrose => InverseKind::MoorePenrose,
    };
    let c = sld_coefficients_with(&point, opts.tol, kind)?;
    let mut out = io::stdout().lock();
    let inverse_name = if kind == InverseKind::Frame { "frame" } else { "moore-penrose" };
    let io_err = |e: io::Error| CliError::Io(e.to_string());
    writeln!(out, "# gqfi sld config={} tol={:e} inverse={inverse_name}", path.display(), opts.tol).map_err(io_err)?;
    writeln!(out, "family={}", describe(&config)).map_err(io_err)?;
    writeln!(out, "theta={}", num(config.theta)).map_err(io_err)?;
    writeln!(out, "L=\n{}", output::matrix(&c.l).trim_end()).map_err(io_err)?;
    writeln!(out, "b={}", output::list(c.b.as_slice())).map_err(io_err)?;
    writeln!(out, "c={}", num(c.c)).map_err(io_err)?;
    writeln!(out, "range_residual={}", num(c.range_residual)).map_err(io_err)?;
    writeln!(out, "kernel_overlap={}", c.kernel_overlap).map_err(io_err)?;
    match photon_counting_form(&c, &point, opts.tol)? {
        PhotonCounting::Available(f) => {
            writeln!(out, "photon_counting=available").map_err(io_err)?;
            writeln!(out, "alpha={}", output::list(&f.alpha)).map_err(io_err)?;
            writeln!(out, "mean_photon={}", output::list(&f.mean_photon)).map_err(io_err)?;
            writeln!(out, "T=\n{}", output::matrix(&f.t).trim_end()).map_err(io_err)?;
        }
        PhotonCounting::Absent { reason } => {
            writeln!(out, "photon_counting=absent ({reason})").map_err(io_err)?;
        }
    }
    Ok(())
}

/// Tolerance on `homodyne_fisher(U) ≤ I*_cl`.
const BOUND_SLACK: f64 = 1e-9;

fn homodyne(args: &HomodyneArgs) -> Result<()> {
    check_tol(args.tol)?;
    if !(args.squeeze_cap > 0.0 && args.squeeze_cap.is_finite()) {
        return Err(CliError::Usage(format!("--squeeze-cap must be positive, got {}", args.squeeze_cap)));
    }
    let config = load(&args.config)?;
    let point = config.point()?;
    let frame = isothermal_frame(&point, args.tol)?;
    let best = optimal_homodyne_fisher(&frame);
    let qfi = qfi_general_with(&point, args.tol)?.qfi;
    println!(
        "# gqfi homodyne config={} tol={:e} seed={} squeeze_cap={} bound_slack={BOUND_SLACK:e}",
        args.config.display(),
        args.tol,
        args.seed,
        num(args.squeeze_cap)
    );
    println!("family={}", describe(&config));
    println!("theta={}", num(config.theta));
    println!("nu={}", num(frame.nu));
    println!("lambda={}", output::list(&frame.lambda));
    println!("homodyne_opt={}", num(best));
    println!("qfi={}", num(qfi));
    println!("homodyne_opt_over_qfi={}", num(best / qfi));
    println!("T=\n{}", output::matrix(&frame.t).trim_end());
    if let Some(trials) = args.random_u {
        let n = frame.n();
        let mut max = f64::NEG_INFINITY;
        for t in 0..trials {
            let u = random_symplectic(n, args.seed.wrapping_add(t as u64), args.squeeze_cap)?;
            max = max.max(homodyne_fisher(&frame, &u)?);
        }
        println!("random_u_trials={trials}");
        if trials > 0 {
            println!("random_u_max={}", num(max));
            println!("bound_holds={}", max <= best + BOUND_SLACK);
        }
    }
    if let Some(alpha) = &args.estimator {
        let plan = homodyne_plan(&DVector::from_column_slice(alpha))?;
        println!("estimator={}", output::list(alpha));
        println!("gains={}", output::list(&plan.gains));
        println!("V=\n{}", output::matrix(&plan.v).trim_end());
    }
    Ok(())
}

fn oracle_check(path: &Path, opts: EngineOpts, cutoff: Option<u64>, h: f64) -> Result<()> {
    check_tol(opts.tol)?;
    check_step(h)?;
    let config = load(path)?;
    let point = config.point()?;
    if point.n() > MAX_ORACLE_MODES {
        return Err(CliError::Usage(format!(
            "the oracle supports at most {MAX_ORACLE_MODES} modes, model has {}",
            point.n()
        )));
    }
    let cutoff = cutoff.map(|c| c as usize).unwrap_or_else(|| suggested_cutoff(&point));
    let report = fisher(&point, opts)?;
    let coeffs = sld_coefficients_with(&point, opts.tol, InverseKind::Frame)?;
    let oracle = oracle_value(&config.family, config.theta, &point, cutoff, h)?;
    let residual = sld_residual(&point, &coeffs, cutoff, h)?;
    let (mean, second) = sld_moments(&point, &coeffs, cutoff)?;
    let ids = identity_checks(&point, cutoff)?;
    println!(
        "# gqfi oracle-check config={} tol={:e} method={} cutoff={cutoff} h={h:e} max_tail={:e}",
        path.display(),
        opts.tol,
        method_name(opts.method),
        OracleOptions::default().max_tail
    );
    println!("family={}", describe(&config));
    println!("theta={}", num(config.theta));
    println!("engine_qfi={}", num(report.qfi));
    println!("oracle_qfi={}", num(oracle.qfi));
    println!("relative_difference={}", num((oracle.qfi - report.qfi).abs() / report.qfi.abs().max(f64::MIN_POSITIVE)));
    println!("excluded_weight={}", num(oracle.excluded_weight));
    println!("tail_mass={}", num(oracle.tail_mass));
    println!("sld_residual={}", num(residual));
    println!("sld_mean={}", num(mean));
    println!("sld_second_moment={}", num(second));
    println!("first_moment_deviation={}", num(ids.first_moments));
    println!("second_moment_deviation={}", num(ids.second_moments));
    println!("characteristic_deviation={}", num(ids.characteristic));
    println!("fourth_moment_deviation={}", num(ids.fourth_moments));
    Ok(())
}
