//! The `eliminate`, `compare` and `sweep` subcommands.

use std::collections::BTreeMap;
use std::path::PathBuf;

use aelim_core::elimination::{eliminate, EliminationResult, InversionMethod};
use aelim_core::liouville::{lindblad_superop, steady_state, BipartiteLindblad, BipartiteSpace, DensityVec};
use aelim_core::models::{
    dephasing_generator, rabi_closed_form, rabi_effective_generator, rabi_safe_indices, two_qubit_closed_form,
    Branch,
};
use aelim_core::numkernel::eigenvalues;
use aelim_core::simulate::{convergence_scan, run_from_elimination, ModelFamily, Observable, Target, Trajectory};
use serde::Serialize;

use crate::config::{custom_model, RunConfig, TableFormat};
use crate::output::{matrix_rows, output_dir, sorted_spectrum, write_json, write_table, ComplexEntry, Table};
use crate::{CliError, Stage};

/// Absolute tolerance for the closed-form agreement flags.
pub const ORACLE_TOL: f64 = 1e-9;

/// Model, reference state and initial states of a run.
pub struct Prepared {
    pub family: Option<ModelFamily>,
    pub model: BipartiteLindblad,
    pub rho_b: DensityVec,
    pub rho0_a: DensityVec,
    pub rho0_b: Option<DensityVec>,
    pub observables: Vec<Observable>,
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared, CliError> {
    let family = cfg.family()?;
    let rho0_b = cfg.initial_b()?;
    match (&family, &cfg.custom) {
        (Some(fam), _) => Ok(Prepared {
            family: Some(*fam),
            model: fam.build().stage("model construction")?,
            rho_b: fam.reference_state_b().stage("reference state")?,
            rho0_a: cfg.initial_a(Some(fam))?,
            rho0_b,
            observables: fam.observables(),
        }),
        (None, Some(spec)) => {
            let cm = custom_model(spec)?;
            let space = BipartiteSpace::new(spec.dim_a, spec.dim_b).map_err(|e| CliError::Config(format!("custom: {e}")))?;
            let model = BipartiteLindblad::from_models(space, &cm.model_a, &cm.model_b, &cm.coupling)
                .stage("model construction")?;
            let rho_b = match cm.rho_b {
                Some(r) => r,
                None => {
                    let lb = lindblad_superop(&cm.model_b).stage("reference state")?;
                    steady_state(&lb).stage("reference state")?.unique().ok_or_else(|| {
                        CliError::Config("custom.rho_b: L_B has no unique steady state; give rho_b explicitly".into())
                    })?
                }
            };
            Ok(Prepared { family: None, model, rho_b, rho0_a: cfg.initial_a(None)?, rho0_b, observables: cm.observables })
        }
        (None, None) => Err(CliError::Config("custom: missing [custom] section".into())),
    }
}

fn path(cfg: &RunConfig, dir: &std::path::Path, suffix: &str, ext: &str) -> PathBuf {
    dir.join(format!("{}_{suffix}.{ext}", cfg.output.stem))
}

fn table_ext(format: TableFormat) -> &'static str {
    match format {
        TableFormat::Csv => "csv",
        TableFormat::Json => "json",
    }
}

fn warn_on(res: &EliminationResult) {
    if res.inverse.rank_deficiency > 0 {
        eprintln!(
            "warning: QLQ is rank deficient by {} on the range of Q; slow dynamics leak into the fast sector",
            res.inverse.rank_deficiency
        );
    }
    if res.inverse.diverging {
        eprintln!("warning: the perturbative series is not converging");
    }
    if !res.generator.validated {
        eprintln!("warning: corrections beyond first order are computed but not validated");
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalarCheck {
    pub name: String,
    pub engine: f64,
    pub closed_form: f64,
    pub difference: f64,
    pub agrees: bool,
}

impl ScalarCheck {
    fn new(name: &str, engine: f64, closed_form: f64) -> Self {
        let difference = (engine - closed_form).abs();
        Self { name: name.into(), engine, closed_form, difference, agrees: difference <= ORACLE_TOL }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixCheck {
    pub name: String,
    pub max_abs_difference: f64,
    pub agrees: bool,
}

impl MatrixCheck {
    fn new(name: &str, max_abs_difference: f64) -> Self {
        Self { name: name.into(), max_abs_difference, agrees: max_abs_difference <= ORACLE_TOL }
    }
}

/// Closed-form oracle values next to the engine output.
#[derive(Debug, Clone, Serialize)]
pub struct OracleComparison {
    pub tolerance: f64,
    pub values: BTreeMap<String, f64>,
    pub scalars: Vec<ScalarCheck>,
    pub matrices: Vec<MatrixCheck>,
}

pub fn oracle_comparison(family: &ModelFamily, res: &EliminationResult) -> Result<Option<OracleComparison>, CliError> {
    let g = &res.generator;
    let rates = family.engine_rates(g);
    Ok(match family {
        ModelFamily::TwoQubit { branch: Branch::S1, .. } => None,
        ModelFamily::TwoQubit { params, .. } => {
            let cf = two_qubit_closed_form(params);
            let beta = -g.reduced_l1[(1, 1)];
            let values = BTreeMap::from([
                ("zeta".to_string(), cf.zeta),
                ("xi".to_string(), cf.xi),
                ("beta_re".to_string(), cf.beta.re),
                ("beta_im".to_string(), cf.beta.im),
                ("zeta_prime".to_string(), cf.zeta_prime),
                ("xi_prime".to_string(), cf.xi_prime),
            ]);
            let scalars = vec![
                ScalarCheck::new("zeta", rates["zeta"], cf.zeta),
                ScalarCheck::new("xi", rates["xi"], cf.xi),
                ScalarCheck::new("beta_re", beta.re, cf.beta.re),
                ScalarCheck::new("beta_im", beta.im, cf.beta.im),
                ScalarCheck::new("zeta_prime", rates["zeta_prime"], cf.zeta_prime),
                ScalarCheck::new("xi_prime", rates["xi_prime"], cf.xi_prime),
            ];
            let matrices = vec![MatrixCheck::new(
                "reduced_l0_vs_dephasing_form",
                g.reduced_l0.max_abs_diff(&dephasing_generator(cf.zeta, cf.xi)),
            )];
            Some(OracleComparison { tolerance: ORACLE_TOL, values, scalars, matrices })
        }
        ModelFamily::Rabi { params } => {
            let cf = rabi_closed_form(params);
            let values = BTreeMap::from([
                ("hamiltonian_shift".to_string(), cf.hamiltonian_shift),
                ("extra_dissipation".to_string(), cf.extra_dissipation),
            ]);
            let scalars = vec![
                ScalarCheck::new("hamiltonian_shift", rates["hamiltonian_shift"], cf.hamiltonian_shift),
                ScalarCheck::new("extra_dissipation", rates["extra_dissipation"], cf.extra_dissipation),
            ];
            let idx = rabi_safe_indices(params.fock_cutoff);
            let oracle = rabi_effective_generator(params).stage("closed form")?;
            let d = g.reduced_generator.select(&idx, &idx).max_abs_diff(&oracle.select(&idx, &idx));
            let matrices = vec![MatrixCheck::new("reduced_generator_vs_closed_form_on_safe_fock_states", d)];
            Some(OracleComparison { tolerance: ORACLE_TOL, values, scalars, matrices })
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Spectra {
    pub l0: Vec<ComplexEntry>,
    pub generator: Vec<ComplexEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseSummary {
    pub rank_deficiency: usize,
    pub series_increments: Vec<f64>,
    pub diverging: bool,
}

/// Contents of `<stem>_generator.json`.
#[derive(Debug, Clone, Serialize)]
pub struct GeneratorArtifact {
    pub method: InversionMethod,
    pub order: usize,
    pub dim_a: usize,
    pub vectorization: &'static str,
    pub reduced_l0: Vec<Vec<ComplexEntry>>,
    pub reduced_l1: Vec<Vec<ComplexEntry>>,
    pub reduced_generator: Vec<Vec<ComplexEntry>>,
    pub reduced_initial_map: Vec<Vec<ComplexEntry>>,
    pub spectra: Spectra,
    pub resolvent_condition: f64,
    pub validated: bool,
    pub trace_residual: f64,
    pub inverse: InverseSummary,
    pub engine_rates: BTreeMap<String, f64>,
    pub closed_form: Option<OracleComparison>,
}

pub fn generator_artifact(cfg: &RunConfig, p: &Prepared, res: &EliminationResult) -> Result<GeneratorArtifact, CliError> {
    let g = &res.generator;
    Ok(GeneratorArtifact {
        method: cfg.method,
        order: cfg.order,
        dim_a: g.space().dim_a(),
        vectorization: "column stacking, vec(rho)[j * dim_a + i] = rho[i][j]",
        reduced_l0: matrix_rows(&g.reduced_l0),
        reduced_l1: matrix_rows(&g.reduced_l1),
        reduced_generator: matrix_rows(&g.reduced_generator),
        reduced_initial_map: matrix_rows(&g.reduced_initial_map),
        spectra: Spectra {
            l0: sorted_spectrum(eigenvalues(&g.reduced_l0).stage("spectrum")?),
            generator: sorted_spectrum(eigenvalues(&g.reduced_generator).stage("spectrum")?),
        },
        resolvent_condition: g.condition,
        validated: g.validated,
        trace_residual: g.trace_residual(),
        inverse: InverseSummary {
            rank_deficiency: res.inverse.rank_deficiency,
            series_increments: res.inverse.series_increments.clone(),
            diverging: res.inverse.diverging,
        },
        engine_rates: p.family.map(|f| f.engine_rates(g)).unwrap_or_default(),
        closed_form: match &p.family {
            Some(f) => oracle_comparison(f, res)?,
            None => None,
        },
    })
}

fn run_elimination(cfg: &RunConfig, p: &Prepared) -> Result<EliminationResult, CliError> {
    let res = eliminate(&p.model, &p.rho_b, cfg.method, cfg.order).stage("elimination")?;
    warn_on(&res);
    Ok(res)
}

/// Writes `<stem>_generator.json`.
pub fn cmd_eliminate(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let p = prepare(cfg)?;
    let dir = output_dir(cfg)?;
    let res = run_elimination(cfg, &p)?;
    let artifact = generator_artifact(cfg, &p, &res)?;
    let out = path(cfg, &dir, "generator", "json");
    write_json(&out, cfg, &artifact)?;
    Ok(vec![out])
}

fn trajectory_table(traj: &Trajectory, names: &[&str], extra: Option<(&str, &[f64])>) -> Table {
    let mut columns = vec!["time".to_string()];
    columns.extend(names.iter().map(|n| n.to_string()));
    if let Some((name, _)) = extra {
        columns.push(name.to_string());
    }
    let rows = (0..traj.len())
        .map(|k| {
            let mut row = vec![traj.times[k]];
            row.extend(names.iter().map(|n| traj.observables[*n][k]));
            if let Some((_, values)) = extra {
                row.push(values[k]);
            }
            row
        })
        .collect();
    Table { columns, rows, notes: Vec::new() }
}

#[derive(Debug, Clone, Serialize)]
struct CompareReport<'a> {
    method: InversionMethod,
    order: usize,
    parameters: &'a BTreeMap<String, f64>,
    times: &'a [f64],
    sup_deviation: &'a BTreeMap<String, f64>,
    terminal_deviation: &'a BTreeMap<String, f64>,
    max_trace_distance: f64,
    exact_physicality_residual: f64,
    effective_physicality_residual: f64,
    engine_rates: BTreeMap<String, f64>,
    resolvent_condition: f64,
    rank_deficiency: usize,
}

/// Writes the exact and eliminated trajectories and `<stem>_report.json`.
pub fn cmd_compare(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let p = prepare(cfg)?;
    let dir = output_dir(cfg)?;
    let res = run_elimination(cfg, &p)?;
    let times = cfg.times.horizon().times(&res.generator).stage("time grid")?;
    let run = run_from_elimination(&p.model, res, &p.rho0_a, p.rho0_b.as_ref().unwrap_or(&p.rho_b), &times, &p.observables)
        .stage("propagation")?;

    let all: Vec<&str> = p.observables.iter().map(|o| o.name.as_str()).collect();
    let slow: Vec<&str> = p.observables.iter().filter(|o| o.target != Target::B).map(|o| o.name.as_str()).collect();
    let ext = table_ext(cfg.output.format);
    let exact_path = path(cfg, &dir, "exact", ext);
    let effective_path = path(cfg, &dir, "effective", ext);
    let report_path = path(cfg, &dir, "report", "json");

    write_table(&exact_path, cfg, &trajectory_table(&run.exact, &all, None), cfg.output.format)?;
    let td = Some(("trace_distance", run.report.trace_distance.as_slice()));
    write_table(&effective_path, cfg, &trajectory_table(&run.effective, &slow, td), cfg.output.format)?;

    let report = CompareReport {
        method: cfg.method,
        order: cfg.order,
        parameters: &cfg.parameters,
        times: &run.report.times,
        sup_deviation: &run.report.sup_deviation,
        terminal_deviation: &run.report.terminal_deviation,
        max_trace_distance: run.report.max_trace_distance,
        exact_physicality_residual: run.exact.physicality_residual(),
        effective_physicality_residual: run.effective.physicality_residual(),
        engine_rates: p.family.map(|f| f.engine_rates(&run.elimination.generator)).unwrap_or_default(),
        resolvent_condition: run.elimination.generator.condition,
        rank_deficiency: run.elimination.inverse.rank_deficiency,
    };
    write_json(&report_path, cfg, &report)?;
    Ok(vec![exact_path, effective_path, report_path])
}

/// Writes `<stem>_sweep.csv` with one row per coupling value, largest first.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep: the sweep command needs a [sweep] section".into()))?;
    let family = cfg.family()?.ok_or_else(|| CliError::Config("sweep: sweeps need a built-in model".into()))?;
    if cfg.initial_state != crate::config::StateInput::Preset(default_preset(&family).into()) || cfg.initial_state_b.is_some() {
        eprintln!("warning: sweeps always start from the default initial states");
    }
    let mut values = sweep.values.clone();
    values.sort_by(|a, b| b.total_cmp(a));
    let dir = output_dir(cfg)?;
    let scan = convergence_scan(&family, &values, cfg.method, cfg.order, cfg.times.horizon()).stage("sweep")?;

    let first = &scan.rows[0];
    let dev_names: Vec<String> = first.sup_deviation.keys().cloned().collect();
    let rate_names: Vec<String> = first.rates.keys().cloned().collect();
    let mut columns = vec![sweep.parameter.clone()];
    columns.extend(dev_names.iter().map(|n| format!("sup_{n}")));
    columns.push("max_trace_distance".into());
    columns.extend(rate_names.iter().cloned());
    columns.push("violation".into());
    let rows = scan
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![r.coupling];
            row.extend(dev_names.iter().map(|n| r.sup_deviation[n]));
            row.push(r.max_trace_distance);
            row.extend(rate_names.iter().map(|n| r.rates[n]));
            row.push(if r.violation { 1.0 } else { 0.0 });
            row
        })
        .collect();
    let notes = vec![
        ("primary_observable".to_string(), scan.primary_observable.clone()),
        ("monotone".to_string(), scan.monotone.to_string()),
    ];
    if !scan.monotone {
        eprintln!("warning: the {} deviation does not decrease monotonically", scan.primary_observable);
    }
    let out = path(cfg, &dir, "sweep", table_ext(cfg.output.format));
    write_table(&out, cfg, &Table { columns, rows, notes }, cfg.output.format)?;
    Ok(vec![out])
}

fn default_preset(f: &ModelFamily) -> &'static str {
    match f {
        ModelFamily::TwoQubit { .. } => "phi_plus",
        ModelFamily::Rabi { .. } => "superposition",
    }
}

