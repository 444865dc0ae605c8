//! Implementations of the five subcommands.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use nematic_core::continuation::{trace_branches, TraceConfig};
use nematic_core::laplace::{
    cumulant_decay_check, laplace_expectation, laplace_partition, maier_saupe_exponent,
    partition_numeric, tilted_expectation, CumulantDiagnostics, LocalData,
};
use nematic_core::mc::estimate_order_parameter;
use nematic_core::numerics::QuadratureRule;
use nematic_core::sce::{f_scalar, solve_density, OrientationDensity};
use nematic_core::spectrum::{discretized_kernel_eigenvalues, k_eigenvalues, SpectrumReport};
use nematic_core::{AxisymmetricPotential, PotentialSpec};

use crate::config::RunConfig;
use crate::CliError;

fn build_potential(config: &RunConfig) -> Result<AxisymmetricPotential, CliError> {
    config
        .potential
        .build()
        .map_err(|e| CliError::config(format!("bad potential: {e}")))
}

fn build_rule(config: &RunConfig) -> Result<QuadratureRule, CliError> {
    if config.quad_order == 0 {
        return Err(CliError::config("--quad-order must be at least 1"));
    }
    QuadratureRule::gauss(config.quad_order).map_err(|e| CliError::config(e.to_string()))
}

/// Write text to `--out` or stdout.
fn deliver(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::other(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output serializes")
}

#[derive(Serialize)]
struct SpectrumOutput {
    #[serde(flatten)]
    report: SpectrumReport,
    /// Leading eigenvalues of the discretized kernel operator, the numerical
    /// cross-check of the closed form.
    discretized_top_eigenvalues: Vec<f64>,
}

pub fn cmd_spectrum(config: &RunConfig) -> Result<(), CliError> {
    let potential = build_potential(config)?;
    let rule = build_rule(config)?;
    let report = k_eigenvalues(&potential, &rule);
    let numeric = discretized_kernel_eigenvalues(&potential, &rule);
    let output = SpectrumOutput {
        report,
        discretized_top_eigenvalues: numeric.into_iter().take(8).collect(),
    };
    deliver(&config.out, &to_json(&output))
}

fn coupling_of(config: &RunConfig) -> Result<f64, CliError> {
    match &config.potential {
        PotentialSpec::MaierSaupe { w } => Ok(*w),
        PotentialSpec::Legendre { .. } => Err(CliError::config(
            "the phase diagram uses the scalar order-parameter reduction, which requires a maier-saupe potential",
        )),
    }
}

pub fn cmd_phase_diagram(config: &RunConfig) -> Result<(), CliError> {
    let w = coupling_of(config)?;
    let (beta_min, beta_max, beta_steps) = match (config.beta_min, config.beta_max, config.beta_steps)
    {
        (Some(a), Some(b), Some(n)) => (a, b, n),
        _ => {
            return Err(CliError::config(
                "--beta-min, --beta-max and --beta-steps are required",
            ))
        }
    };
    if !(beta_min > 0.0) || !(beta_max > beta_min) || beta_steps < 2 {
        return Err(CliError::config(format!(
            "empty or invalid beta range [{beta_min}, {beta_max}] with {beta_steps} steps"
        )));
    }
    let out = config
        .out
        .as_ref()
        .ok_or_else(|| CliError::config("--out is required for phase-diagram (used as a path prefix)"))?;

    let trace_config = TraceConfig {
        coupling: w,
        quad_order: config.quad_order,
        scan_points: 2000,
        root_tol: config.tol.min(1e-10),
        event_tol: 1e-6,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| CliError::other(format!("worker pool: {e}")))?;
    let result = pool
        .install(|| trace_branches(&trace_config, beta_min, beta_max, beta_steps))
        .map_err(|e| CliError::other(e.to_string()))?;

    // The residual invariant is a hard gate for machine-readable output.
    for branch in &result.branches {
        for p in &branch.points {
            if !(p.residual <= 1e-9) {
                return Err(CliError::invariant(format!(
                    "branch point (beta = {}, xi = {}) violates the residual bound: {}",
                    p.beta, p.xi, p.residual
                )));
            }
        }
    }

    let mut csv = String::from("beta,xi,dF_dxi,stable,residual,branch_kind\n");
    for branch in &result.branches {
        for p in &branch.points {
            writeln!(
                csv,
                "{:.16e},{:.16e},{:.16e},{},{:.16e},{}",
                p.beta,
                p.xi,
                p.d_f_d_xi,
                p.stable,
                p.residual,
                branch.kind.as_str()
            )
            .expect("string write");
        }
    }
    let csv_path = out.with_extension("branches.csv");
    let events_path = out.with_extension("events.json");
    std::fs::write(&csv_path, csv)
        .map_err(|e| CliError::other(format!("cannot write {}: {e}", csv_path.display())))?;
    std::fs::write(&events_path, to_json(&result.events))
        .map_err(|e| CliError::other(format!("cannot write {}: {e}", events_path.display())))?;
    for note in &result.diagnostics {
        eprintln!("note: {note}");
    }
    Ok(())
}

#[derive(Serialize)]
struct SolveOutput {
    beta: f64,
    seed_density: String,
    converged: bool,
    iterations: usize,
    residual: f64,
    order_parameter: f64,
    nodes: Vec<f64>,
    density: Vec<f64>,
}

pub fn cmd_solve(config: &RunConfig) -> Result<(), CliError> {
    let potential = build_potential(config)?;
    let rule = build_rule(config)?;
    let beta = config
        .beta
        .ok_or_else(|| CliError::config("--beta is required for solve"))?;
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(CliError::config(format!("beta = {beta} must be positive and finite")));
    }
    let seed_name = config.seed_density.as_deref().unwrap_or("uniform");
    let seed = match seed_name {
        "uniform" => OrientationDensity::uniform(rule.clone()),
        "prolate" => OrientationDensity::prolate_seed(rule.clone(), 5.0),
        "oblate" => OrientationDensity::prolate_seed(rule.clone(), -5.0),
        other => {
            return Err(CliError::config(format!(
                "unknown seed density {other:?} (expected uniform, prolate or oblate)"
            )))
        }
    };
    let max_iter = config.max_iter.unwrap_or(10_000);
    let result = solve_density(beta, &potential, &seed, config.damping, config.tol, max_iter)
        .map_err(|e| CliError::config(e.to_string()))?;
    let output = SolveOutput {
        beta,
        seed_density: seed_name.to_string(),
        converged: result.converged,
        iterations: result.iterations,
        residual: result.residual,
        order_parameter: result.order_parameter,
        nodes: rule.nodes().to_vec(),
        density: result.density.values().to_vec(),
    };
    deliver(&config.out, &to_json(&output))
}

#[derive(Serialize)]
struct PartitionCase {
    beta: f64,
    expansion: f64,
    numeric: f64,
    relative_error: f64,
    pass: bool,
}

#[derive(Serialize)]
struct LawCase {
    beta: f64,
    f_scalar: f64,
    law: f64,
    relative_error: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct RateTest {
    betas: Vec<f64>,
    errors: Vec<f64>,
    ratios: Vec<f64>,
    pass: bool,
}

#[derive(Serialize)]
struct LaplaceCheckOutput {
    partition_maier_saupe: PartitionCase,
    constant_observable_max_error: f64,
    order_parameter_law: Vec<LawCase>,
    expectation_rate_test: RateTest,
    cumulant_flat_pair: CumulantDiagnostics,
    cumulant_mixed_pair: CumulantDiagnostics,
    cumulant_sloped_pair: CumulantDiagnostics,
    pass: bool,
}

pub fn cmd_laplace_check(config: &RunConfig) -> Result<(), CliError> {
    let fail = |e: nematic_core::Error| CliError::other(e.to_string());

    // Partition function against dense quadrature at beta = 100.
    let ms_data = LocalData::new(0.0, 3.0, 0.0, 0.0, 0.0, 2.0).map_err(fail)?;
    let beta_p = 100.0;
    let expansion = laplace_partition(&ms_data, beta_p).map_err(fail)?;
    let numeric = partition_numeric(maier_saupe_exponent, beta_p);
    let rel = ((numeric - expansion) / numeric).abs();
    let partition_case = PartitionCase {
        beta: beta_p,
        expansion,
        numeric,
        relative_error: rel,
        pass: rel <= 0.02,
    };

    // A constant observable is reproduced exactly at every order.
    let const_data = LocalData::new(0.0, 3.0, 0.5, 1.0, 0.0, 0.0).map_err(fail)?;
    let mut const_err = 0.0_f64;
    for beta in [1.0, 25.0, 400.0] {
        const_err = const_err.max((laplace_expectation(&const_data, beta).map_err(fail)? - 1.0).abs());
    }

    // The 2/(3 beta) order-parameter law against the scalar map.
    let mut law_cases = Vec::new();
    for (beta, tolerance) in [(200.0, 0.10), (1000.0, 0.03)] {
        let rule = QuadratureRule::gauss(nematic_core::numerics::suggested_order(beta))
            .map_err(fail)?;
        let f = f_scalar(beta, 0.0, &rule);
        let law = laplace_expectation(&ms_data, beta).map_err(fail)?;
        let relative_error = ((f - law) / law).abs();
        law_cases.push(LawCase {
            beta,
            f_scalar: f,
            law,
            relative_error,
            tolerance,
            pass: relative_error <= tolerance,
        });
    }

    // Truncation error decay under beta refinement, probed with g'(0) != 0.
    let g = |t: f64| t.sin();
    let rate_data = LocalData::from_functions(maier_saupe_exponent, g).map_err(fail)?;
    let betas = vec![25.0, 100.0, 400.0];
    let errors: Vec<f64> = betas
        .iter()
        .map(|&beta| {
            Ok((tilted_expectation(maier_saupe_exponent, g, beta)
                - laplace_expectation(&rate_data, beta)?)
            .abs())
        })
        .collect::<Result<_, nematic_core::Error>>()
        .map_err(fail)?;
    let ratios: Vec<f64> = errors.windows(2).map(|p| p[0] / p[1]).collect();
    let rate_pass = ratios.iter().all(|r| (6.0..=10.0).contains(r));
    let rate_test = RateTest {
        betas,
        errors,
        ratios,
        pass: rate_pass,
    };

    // Cumulant decay rates.
    let cbetas = [50.0, 100.0, 200.0, 400.0];
    let flat = cumulant_decay_check(|t| t.cos(), |t| t.cos(), maier_saupe_exponent, &cbetas)
        .map_err(fail)?;
    let mixed = cumulant_decay_check(|t| t.sin(), |t| t.sin().powi(2), maier_saupe_exponent, &cbetas)
        .map_err(fail)?;
    let sloped = cumulant_decay_check(|t| t.sin(), |t| t.sin(), maier_saupe_exponent, &cbetas)
        .map_err(fail)?;

    let pass = partition_case.pass
        && const_err <= 1e-14
        && law_cases.iter().all(|c| c.pass)
        && rate_test.pass
        && flat.pass
        && mixed.pass
        && sloped.pass;
    let output = LaplaceCheckOutput {
        partition_maier_saupe: partition_case,
        constant_observable_max_error: const_err,
        order_parameter_law: law_cases,
        expectation_rate_test: rate_test,
        cumulant_flat_pair: flat,
        cumulant_mixed_pair: mixed,
        cumulant_sloped_pair: sloped,
        pass,
    };
    deliver(&config.out, &to_json(&output))
}

#[derive(Serialize)]
struct McOutput {
    #[serde(rename = "N")]
    n: usize,
    beta: f64,
    xi_mean: f64,
    xi_stderr: f64,
    tau_int: f64,
    acceptance: f64,
    n_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: Option<String>,
}

pub fn cmd_mc(config: &RunConfig) -> Result<(), CliError> {
    let potential = build_potential(config)?;
    let beta = config
        .beta
        .ok_or_else(|| CliError::config("--beta is required for mc"))?;
    let n = config.n_particles.unwrap_or(64);
    let sweeps = config.sweeps.unwrap_or(10_000);
    let burnin = config.burnin.unwrap_or_else(|| sweeps / 5);
    let estimate = estimate_order_parameter(n, beta, &potential, sweeps, burnin, config.seed)
        .map_err(|e| CliError::config(e.to_string()))?;
    let output = McOutput {
        n,
        beta,
        xi_mean: estimate.mean,
        xi_stderr: estimate.std_error,
        tau_int: estimate.integrated_autocorrelation_time,
        acceptance: estimate.acceptance_rate,
        n_samples: estimate.n_samples,
        warning: estimate.warning,
    };
    deliver(&config.out, &to_json(&output))
}

