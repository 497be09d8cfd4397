//! One function per subcommand. Every command echoes its effective config
//! into the output directory, writes machine-readable results, and maps
//! failures onto the documented exit codes.

use std::path::Path;

use serde::Serialize;

use ou_spectral::{
    admissible_family, dispersive_scan, find_smallness_interval, gauss_hermite_rule,
    hermite_eval, strichartz_scan, BasisSpec, EnsembleProfile, EnsembleSpec, Error,
    NlsProblemDoc, Regime, SpectralField, TimeGrid, Transform,
};

use crate::config::{BasisCheckConfig, CriticalIntervalConfig, DispersiveScanConfig, StrichartzScanConfig};
use crate::output::{fmt_float, write_json, CsvWriter};
use crate::CliError;

fn config_err(e: Error) -> CliError {
    CliError::Config(e.to_string())
}

// ---------------------------------------------------------------------------
// basis-check
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct BasisCheckSummary {
    modes: usize,
    orthonormality_max: f64,
    eigenrelation_max: f64,
    roundtrip_max: f64,
    weight_sum_defect: f64,
    pass: bool,
}

pub fn basis_check(cfg: &BasisCheckConfig, out: &Path) -> Result<(), CliError> {
    write_json(out, "effective_config.json", cfg)?;
    let spec = BasisSpec::new(cfg.dimension, cfg.max_degree, cfg.nodes_per_axis)
        .map_err(config_err)?;
    let rule = gauss_hermite_rule(cfg.nodes_per_axis).map_err(config_err)?;

    // Orthonormality residual table over the 1-D factor basis.
    let n = cfg.max_degree;
    let mut table = vec![vec![0.0f64; n + 1]; rule.len()];
    for (i, &x) in rule.nodes().iter().enumerate() {
        for (k, slot) in table[i].iter_mut().enumerate() {
            *slot = hermite_eval(k, x);
        }
    }
    let mut gram_csv = CsvWriter::new("j,k,residual");
    let mut gram_max = 0.0f64;
    let mut gram_worst = (0usize, 0usize);
    for j in 0..=n {
        for k in 0..=n {
            let mut acc = 0.0;
            for (i, &v) in rule.weights().iter().enumerate() {
                acc += v * table[i][j] * table[i][k];
            }
            let expect = if j == k { 1.0 } else { 0.0 };
            let residual = (acc - expect).abs();
            gram_csv.row(&[j.to_string(), k.to_string(), fmt_float(residual)]);
            if residual > gram_max {
                gram_max = residual;
                gram_worst = (j, k);
            }
        }
    }
    gram_csv.finish(out, "orthonormality.csv")?;

    // Eigenrelation residuals by centered finite differences,
    // L h_k = -1/2 h_k'' + x h_k' = k h_k; second order in the stencil.
    let h = 1e-3;
    let mut eig_csv = CsvWriter::new("k,x,residual,refinement_ratio");
    let mut eig_max = 0.0f64;
    let mut eig_worst = (0usize, 0.0f64);
    for k in 0..=n.min(20) {
        for i in 0..13 {
            let x = -3.0 + 0.5 * i as f64;
            let f = |y: f64| hermite_eval(k, y);
            let apply = |h: f64| {
                let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
                let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
                -0.5 * d2 + x * d1
            };
            let exact = k as f64 * f(x);
            let scale = exact.abs().max(1.0);
            let e1 = (apply(h) - exact).abs() / scale;
            let e2 = (apply(h / 2.0) - exact).abs() / scale;
            let ratio = if e2 > 0.0 { e1 / e2 } else { 0.0 };
            eig_csv.row(&[
                k.to_string(),
                fmt_float(x),
                fmt_float(e1),
                fmt_float(ratio),
            ]);
            if e1 > eig_max {
                eig_max = e1;
                eig_worst = (k, x);
            }
        }
    }
    eig_csv.finish(out, "eigenrelation.csv")?;

    // Transform round trip on a deterministic band-limited field.
    let transform = Transform::new(spec).map_err(config_err)?;
    let mut coeffs = vec![num_complex::Complex64::new(0.0, 0.0); spec.mode_count()];
    for (i, c) in coeffs.iter_mut().enumerate() {
        let t = i as f64 / spec.mode_count() as f64;
        *c = num_complex::Complex64::new((1.0 + 3.0 * t).sin(), (2.0 - t).cos())
            * (-(t * 8.0)).exp();
    }
    let field = SpectralField::new(spec, coeffs).map_err(config_err)?;
    let back = transform
        .forward(&transform.inverse(&field).map_err(config_err)?)
        .map_err(config_err)?;
    let roundtrip_max = field
        .coeffs()
        .iter()
        .zip(back.coeffs())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);

    let weight_sum_defect = (rule.weights().iter().sum::<f64>() - 1.0).abs();

    let pass = gram_max <= 1e-10
        && eig_max <= 1e-2
        && roundtrip_max <= 1e-14 * (n as f64 + 1.0)
        && weight_sum_defect <= 1e-14;
    let summary = BasisCheckSummary {
        modes: spec.mode_count(),
        orthonormality_max: gram_max,
        eigenrelation_max: eig_max,
        roundtrip_max,
        weight_sum_defect,
        pass,
    };
    write_json(out, "summary.json", &summary)?;
    println!(
        "basis-check: {} modes, orthonormality {:.2e}, eigenrelation {:.2e}, roundtrip {:.2e}",
        summary.modes, gram_max, eig_max, roundtrip_max
    );
    if !pass {
        return Err(CliError::Invariant(format!(
            "basis-check breach: worst Gram pair {:?} -> {gram_max:.3e}, worst eigenrelation (k={}, x={}) -> {eig_max:.3e}",
            gram_worst, eig_worst.0, eig_worst.1
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// dispersive-scan
// ---------------------------------------------------------------------------

fn parse_profile(cfg_profile: &str, k: usize) -> Result<EnsembleProfile, CliError> {
    match cfg_profile {
        "random-coefficient" => Ok(EnsembleProfile::RandomCoefficient),
        "gaussian-bump" => Ok(EnsembleProfile::GaussianBump),
        "hermite-mode" => Ok(EnsembleProfile::HermiteMode { k }),
        other => Err(CliError::Config(format!(
            "unknown profile '{other}' (expected random-coefficient, gaussian-bump or hermite-mode)"
        ))),
    }
}

fn write_report(
    report: &ou_spectral::EstimateReport,
    out: &Path,
    format: &str,
) -> Result<(), CliError> {
    match format {
        "csv" => {
            let mut csv = CsvWriter::new("sample_id,t_or_pair,quotient");
            for row in &report.rows {
                csv.row(&[
                    row.sample_id.to_string(),
                    row.label.clone(),
                    fmt_float(row.value),
                ]);
            }
            csv.finish(out, "rows.csv")?;
        }
        "json" => write_json(out, "rows.json", &report.rows)?,
        other => {
            return Err(CliError::Config(format!(
                "unknown format '{other}' (expected csv or json)"
            )))
        }
    }
    if let Some(deltas) = &report.label_deltas {
        let mut csv = CsvWriter::new("t_or_pair,max_quotient,refinement_delta");
        let maxima = report.label_maxima();
        for (label, max) in &maxima {
            let delta = deltas
                .iter()
                .find(|(l, _)| l == label)
                .map(|(_, d)| *d)
                .unwrap_or(f64::NAN);
            csv.row(&[label.clone(), fmt_float(*max), fmt_float(delta)]);
        }
        csv.finish(out, "label_maxima.csv")?;
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        max: f64,
        argmax_sample: usize,
        argmax_label: &'a str,
        refinement_delta: Option<f64>,
    }
    write_json(
        out,
        "summary.json",
        &Summary {
            max: report.max,
            argmax_sample: report.argmax_sample,
            argmax_label: &report.argmax_label,
            refinement_delta: report.refinement_delta,
        },
    )
}

pub fn dispersive(cfg: &DispersiveScanConfig, out: &Path, format: &str) -> Result<(), CliError> {
    write_json(out, "effective_config.json", cfg)?;
    let basis = BasisSpec::new(cfg.dimension, cfg.max_degree, cfg.nodes_per_axis)
        .map_err(config_err)?;
    let ens = EnsembleSpec {
        count: cfg.count,
        seed: cfg.seed,
        profile: parse_profile(&cfg.profile, cfg.k)?,
        basis,
    };
    let grid = TimeGrid::new(cfg.t_min, cfg.t_max, cfg.t_nodes).map_err(config_err)?;
    let report = match dispersive_scan(&ens, &grid, cfg.refine) {
        Ok(r) => r,
        // Times inside the guard are a configuration problem, not a breach.
        Err(e @ Error::SingularTime { .. }) => {
            return Err(CliError::Config(format!("singularity guard: {e}")))
        }
        Err(e) => return Err(config_err(e)),
    };
    write_report(&report, out, format)?;
    println!(
        "dispersive-scan: {} rows, max ratio {:.9} at sample {} t = {}",
        report.rows.len(),
        report.max,
        report.argmax_sample,
        report.argmax_label
    );
    if report.max > 1.0 + 1e-6 {
        return Err(CliError::Invariant(format!(
            "dispersive ratio {} exceeds the sharp bound 1 + 1e-6",
            report.max
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// strichartz-scan
// ---------------------------------------------------------------------------

pub fn strichartz(cfg: &StrichartzScanConfig, out: &Path, format: &str) -> Result<(), CliError> {
    write_json(out, "effective_config.json", cfg)?;
    let basis = BasisSpec::new(cfg.dimension, cfg.max_degree, cfg.nodes_per_axis)
        .map_err(config_err)?;
    let ens = EnsembleSpec {
        count: cfg.count,
        seed: cfg.seed,
        profile: EnsembleProfile::RandomCoefficient,
        basis,
    };
    let family = admissible_family(cfg.dimension, cfg.pairs);
    if family.is_empty() {
        return Err(CliError::Config("empty admissible family".into()));
    }
    let grid = TimeGrid::symmetric(std::f64::consts::FRAC_PI_2, cfg.time_nodes)
        .map_err(config_err)?;
    let report = strichartz_scan(&ens, &family, &grid, cfg.refine).map_err(config_err)?;
    write_report(&report, out, format)?;
    let maxima = report.label_maxima();
    for (label, value) in &maxima {
        println!("strichartz-scan: pair {label} max quotient {value:.12}");
    }
    if let Some((_, energy)) = maxima.iter().find(|(l, _)| l == "(inf,2)") {
        if (energy - 1.0).abs() > 1e-12 {
            return Err(CliError::Invariant(format!(
                "energy pair quotient {energy} differs from 1 beyond 1e-12"
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// nls-solve
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TrajectoryRecord {
    times: Vec<f64>,
    fields: Vec<serde_json::Value>,
}

fn solution_json(sol: &ou_spectral::Trajectory) -> Result<TrajectoryRecord, CliError> {
    let fields = sol
        .fields()
        .iter()
        .map(|f| {
            serde_json::from_str(&f.to_json_string())
                .map_err(|e| CliError::Config(format!("serialization: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TrajectoryRecord {
        times: sol.grid().nodes(),
        fields,
    })
}

pub fn nls_solve(doc: &NlsProblemDoc, out: &Path) -> Result<(), CliError> {
    write_json(out, "effective_config.json", doc)?;
    let prob = doc.to_problem().map_err(config_err)?;
    let regime = prob.regime().map_err(|e| CliError::Regime(e.to_string()))?;

    let (solution, report) = match regime {
        Regime::Subcritical => ou_spectral::picard_solve(&prob).map_err(config_err)?,
        Regime::Critical => {
            let eta = doc.eta.unwrap_or(0.05);
            let prob = if doc.auto_interval {
                let search = find_smallness_interval(&prob.u0, prob.p, eta, doc.time_nodes, 10_000)
                    .map_err(|e| CliError::NonConvergence(e.to_string()))?;
                write_json(out, "smallness_interval.json", &search)?;
                ou_spectral::NlsProblem {
                    interval: search.grid,
                    ..prob
                }
            } else {
                prob
            };
            match ou_spectral::critical_solve(&prob, eta) {
                Ok(pair) => pair,
                Err(e @ Error::SmallnessNotMet { .. }) => {
                    return Err(CliError::NonConvergence(format!(
                        "{e}; run critical-interval to find a small enough interval"
                    )))
                }
                Err(e) => return Err(config_err(e)),
            }
        }
    };

    write_json(out, "solution.json", &solution_json(&solution)?)?;
    write_json(out, "report.json", &report)?;
    let mut csv = CsvWriter::new("t,mass");
    for (t, m) in solution
        .grid()
        .nodes()
        .iter()
        .zip(ou_spectral::mass_trace(&solution))
    {
        csv.row(&[fmt_float(*t), fmt_float(m)]);
    }
    csv.finish(out, "mass_trace.csv")?;

    println!(
        "nls-solve: {} regime, converged = {}, iterations = {}, final residual {:.3e}",
        match regime {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
        },
        report.converged,
        report.iterations,
        report.residuals.last().copied().unwrap_or(0.0),
    );
    if !report.converged {
        return Err(CliError::NonConvergence(format!(
            "no convergence within {} iterations; report written",
            report.iterations
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// critical-interval
// ---------------------------------------------------------------------------

pub fn critical_interval(
    doc: &NlsProblemDoc,
    cfg: &CriticalIntervalConfig,
    out: &Path,
) -> Result<(), CliError> {
    write_json(out, "effective_config.json", &(doc, cfg))?;
    let prob = doc.to_problem().map_err(config_err)?;
    let result = find_smallness_interval(&prob.u0, prob.p, cfg.eta, cfg.time_nodes, cfg.n_max);
    match result {
        Ok(report) => {
            let mut csv = CsvWriter::new("half_width,norm");
            for (hw, norm) in &report.history {
                csv.row(&[fmt_float(*hw), fmt_float(*norm)]);
            }
            csv.finish(out, "history.csv")?;
            #[derive(Serialize)]
            struct Summary {
                half_width: f64,
                achieved_norm: f64,
                eta: f64,
            }
            write_json(
                out,
                "interval.json",
                &Summary {
                    half_width: report.grid.t1(),
                    achieved_norm: report.norm,
                    eta: cfg.eta,
                },
            )?;
            println!(
                "critical-interval: half-width {:.6}, achieved norm {:.6e} <= eta {}",
                report.grid.t1(),
                report.norm,
                cfg.eta
            );
            Ok(())
        }
        Err(e @ Error::SmallnessNotMet { .. }) => Err(CliError::NonConvergence(e.to_string())),
        Err(e) => Err(config_err(e)),
    }
}
