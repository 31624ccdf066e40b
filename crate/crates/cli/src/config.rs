//! Run configuration: TOML input, validation and the resolved form that is
//! echoed into every output file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use aelim_core::elimination::InversionMethod;
use aelim_core::liouville::{DensityVec, LindbladModel};
use aelim_core::models::{Branch, RabiParams, TwoQubitParams, DEFAULT_FOCK_CUTOFF};
use aelim_core::numkernel::{hermitian_eigenvalues, ComplexMatrix};
use aelim_core::simulate::{Horizon, ModelFamily, Observable, Target};
use aelim_core::C64;
use serde::{Deserialize, Serialize};

use crate::CliError;

const DEFAULT_SERIES_ORDER: usize = 2;
const DEFAULT_DECAY_TIMES: f64 = 3.0;
const DEFAULT_COUNT: usize = 400;
const STATE_TOL: f64 = 1e-10;

/// A complex matrix as rows of `[re, im]` pairs.
pub type MatrixInput = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    TwoQubit,
    Rabi,
    Custom,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::TwoQubit => "two_qubit",
            Self::Rabi => "rabi",
            Self::Custom => "custom",
        }
    }

    /// Parameter names and defaults of the built-in models.
    pub fn parameter_schema(self) -> &'static [(&'static str, f64)] {
        match self {
            Self::TwoQubit => &[("gamma", 1.0), ("chi", 0.1)],
            Self::Rabi => &[
                ("g", 0.5),
                ("eta", 0.1),
                ("kappa", 0.1),
                ("gamma", 1.0),
                ("fock_cutoff", DEFAULT_FOCK_CUTOFF as f64),
            ],
            Self::Custom => &[],
        }
    }

    pub fn coupling_name(self) -> Option<&'static str> {
        match self {
            Self::TwoQubit => Some("chi"),
            Self::Rabi => Some("g"),
            Self::Custom => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateInput {
    Preset(String),
    Matrix { matrix: MatrixInput },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTimes {
    start: Option<f64>,
    stop: Option<f64>,
    decay_times: Option<f64>,
    count: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    stem: Option<String>,
    format: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpInput {
    pub operator: MatrixInput,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableInput {
    pub name: String,
    /// `a` or `b`.
    pub target: String,
    pub operator: MatrixInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSpec {
    pub dim_a: usize,
    pub dim_b: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian_a: Option<MatrixInput>,
    #[serde(default)]
    pub jumps_a: Vec<JumpInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian_b: Option<MatrixInput>,
    #[serde(default)]
    pub jumps_b: Vec<JumpInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<MatrixInput>,
    /// Reference state of `B`; the unique steady state of `L_B` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_b: Option<MatrixInput>,
    #[serde(default)]
    pub observables: Vec<ObservableInput>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: String,
    #[serde(default)]
    parameters: BTreeMap<String, f64>,
    branch: Option<String>,
    method: Option<String>,
    series_order: Option<usize>,
    order: Option<usize>,
    times: Option<RawTimes>,
    initial_state: Option<StateInput>,
    initial_state_b: Option<StateInput>,
    output: Option<RawOutput>,
    sweep: Option<SweepSpec>,
    custom: Option<CustomSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimesSpec {
    pub start: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_times: Option<f64>,
    pub count: usize,
}

impl TimesSpec {
    pub fn horizon(&self) -> Horizon {
        match (self.stop, self.decay_times) {
            (Some(stop), _) => Horizon::Fixed { start: self.start, stop, count: self.count },
            (None, Some(k)) => Horizon::DecayTimes { k, count: self.count },
            (None, None) => Horizon::DecayTimes { k: DEFAULT_DECAY_TIMES, count: self.count },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSpec {
    #[serde(skip)]
    pub dir: Option<PathBuf>,
    pub stem: String,
    pub format: TableFormat,
}

/// Fully resolved configuration: defaults filled in, overrides applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelKind,
    pub parameters: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    pub method: InversionMethod,
    pub order: usize,
    pub times: TimesSpec,
    pub initial_state: StateInput,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_state_b: Option<StateInput>,
    pub output: OutputSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomSpec>,
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub method: Option<String>,
    pub order: Option<usize>,
    pub out: Option<PathBuf>,
}

fn cfg_err(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

pub fn parse_method(name: &str, series_order: usize) -> Result<InversionMethod, CliError> {
    match name {
        "exact" => Ok(InversionMethod::Exact),
        "factorized" => Ok(InversionMethod::Factorized),
        "perturbative" => Ok(InversionMethod::Perturbative(series_order)),
        other => Err(cfg_err("method", format!("unknown method `{other}`; valid: exact, factorized, perturbative"))),
    }
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text, overrides)
    }

    pub fn from_toml(text: &str, overrides: &Overrides) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        resolve(raw, overrides)
    }

    pub fn param(&self, name: &str) -> f64 {
        self.parameters[name]
    }

    /// Built-in model family, `None` for custom models.
    pub fn family(&self) -> Result<Option<ModelFamily>, CliError> {
        family_with(self, &self.parameters)
    }

    pub fn initial_a(&self, family: Option<&ModelFamily>) -> Result<DensityVec, CliError> {
        let dim = self.dim_a();
        match &self.initial_state {
            StateInput::Matrix { matrix } => density("initial_state", matrix, dim),
            StateInput::Preset(name) => preset(name, self.model, dim, family),
        }
    }

    pub fn initial_b(&self) -> Result<Option<DensityVec>, CliError> {
        match &self.initial_state_b {
            None => Ok(None),
            Some(StateInput::Preset(p)) if p == "reference" => Ok(None),
            Some(StateInput::Preset(p)) => {
                Err(cfg_err("initial_state_b", format!("unknown preset `{p}`; valid: reference, or a matrix")))
            }
            Some(StateInput::Matrix { matrix }) => density("initial_state_b", matrix, self.dim_b()).map(Some),
        }
    }

    pub fn dim_a(&self) -> usize {
        match self.model {
            ModelKind::TwoQubit => 2,
            ModelKind::Rabi => self.param("fock_cutoff") as usize,
            ModelKind::Custom => self.custom.as_ref().map_or(0, |c| c.dim_a),
        }
    }

    pub fn dim_b(&self) -> usize {
        match self.model {
            ModelKind::TwoQubit | ModelKind::Rabi => 2,
            ModelKind::Custom => self.custom.as_ref().map_or(0, |c| c.dim_b),
        }
    }
}

pub(crate) fn family_with(
    cfg: &RunConfig,
    params: &BTreeMap<String, f64>,
) -> Result<Option<ModelFamily>, CliError> {
    let p = |n: &str| params[n];
    let invalid = |e: aelim_core::Error| CliError::Config(format!("parameters: {e}"));
    Ok(match cfg.model {
        ModelKind::TwoQubit => Some(ModelFamily::TwoQubit {
            params: TwoQubitParams::new(p("gamma"), p("chi")).map_err(invalid)?,
            branch: cfg.branch.unwrap_or_default(),
        }),
        ModelKind::Rabi => Some(ModelFamily::Rabi {
            params: RabiParams::new(p("g"), p("eta"), p("kappa"), p("gamma"), p("fock_cutoff") as usize)
                .map_err(invalid)?,
        }),
        ModelKind::Custom => None,
    })
}

fn resolve(raw: RawConfig, ov: &Overrides) -> Result<RunConfig, CliError> {
    let model = match raw.model.as_str() {
        "two_qubit" => ModelKind::TwoQubit,
        "rabi" => ModelKind::Rabi,
        "custom" => ModelKind::Custom,
        other => return Err(cfg_err("model", format!("unknown model `{other}`; valid: two_qubit, rabi, custom"))),
    };

    let schema = model.parameter_schema();
    let valid: Vec<&str> = schema.iter().map(|(n, _)| *n).collect();
    for (name, value) in &raw.parameters {
        if !valid.contains(&name.as_str()) {
            let list = if valid.is_empty() { "none".to_string() } else { valid.join(", ") };
            return Err(cfg_err(
                &format!("parameters.{name}"),
                format!("unknown parameter for model {}; valid names: {list}", model.name()),
            ));
        }
        if !value.is_finite() {
            return Err(cfg_err(&format!("parameters.{name}"), "must be a finite number"));
        }
    }
    let parameters: BTreeMap<String, f64> = schema
        .iter()
        .map(|(n, d)| (n.to_string(), raw.parameters.get(*n).copied().unwrap_or(*d)))
        .collect();
    if model == ModelKind::Rabi {
        let n = parameters["fock_cutoff"];
        if n.fract() != 0.0 || n < 0.0 {
            return Err(cfg_err("parameters.fock_cutoff", format!("must be a nonnegative integer, got {n}")));
        }
    }

    let branch = match (model, raw.branch.as_deref()) {
        (ModelKind::TwoQubit, None) => Some(Branch::S0),
        (ModelKind::TwoQubit, Some("s0")) => Some(Branch::S0),
        (ModelKind::TwoQubit, Some("s1")) => Some(Branch::S1),
        (ModelKind::TwoQubit, Some(b)) => return Err(cfg_err("branch", format!("unknown branch `{b}`; valid: s0, s1"))),
        (_, None) => None,
        (_, Some(_)) => return Err(cfg_err("branch", "only the two_qubit model has branches")),
    };

    let series_order = raw.series_order.unwrap_or(DEFAULT_SERIES_ORDER);
    let method_name = ov.method.clone().or(raw.method).unwrap_or_else(|| "exact".into());
    let method = parse_method(&method_name, series_order)?;
    let order = ov.order.or(raw.order).unwrap_or(1);

    let times = resolve_times(raw.times)?;

    let out = raw.output;
    let format = match out.as_ref().and_then(|o| o.format.as_deref()) {
        None | Some("csv") => TableFormat::Csv,
        Some("json") => TableFormat::Json,
        Some(f) => return Err(cfg_err("output.format", format!("unknown format `{f}`; valid: csv, json"))),
    };
    let stem = out.as_ref().and_then(|o| o.stem.clone()).unwrap_or_else(|| model.name().to_string());
    if stem.is_empty() || stem.contains(['/', '\\']) {
        return Err(cfg_err("output.stem", "must be a non-empty file name without separators"));
    }
    let dir = ov.out.clone().or_else(|| out.and_then(|o| o.dir));

    match (model, &raw.custom) {
        (ModelKind::Custom, None) => return Err(cfg_err("custom", "model `custom` needs a [custom] section")),
        (ModelKind::TwoQubit | ModelKind::Rabi, Some(_)) => {
            return Err(cfg_err("custom", "a [custom] section is only valid with model = \"custom\""))
        }
        _ => {}
    }

    let initial_state = raw.initial_state.unwrap_or_else(|| {
        StateInput::Preset(match model {
            ModelKind::TwoQubit => "phi_plus".into(),
            ModelKind::Rabi => "superposition".into(),
            ModelKind::Custom => "maximally_mixed".into(),
        })
    });

    if let Some(sweep) = &raw.sweep {
        let Some(coupling) = model.coupling_name() else {
            return Err(cfg_err("sweep", "sweeps need a built-in model"));
        };
        if sweep.parameter != coupling {
            return Err(cfg_err(
                "sweep.parameter",
                format!("model {} sweeps its coupling `{coupling}`, got `{}`", model.name(), sweep.parameter),
            ));
        }
        if sweep.values.is_empty() {
            return Err(cfg_err("sweep.values", "needs at least one value"));
        }
    }

    let cfg = RunConfig {
        model,
        parameters,
        branch,
        method,
        order,
        times,
        initial_state,
        initial_state_b: raw.initial_state_b,
        output: OutputSpec { dir, stem, format },
        sweep: raw.sweep,
        custom: raw.custom,
    };
    // Built-in parameters are checked here, before any computation.
    cfg.family()?;
    if let Some(c) = &cfg.custom {
        if c.dim_a < 2 || c.dim_b < 2 {
            return Err(cfg_err("custom", "dim_a and dim_b must be at least 2"));
        }
    }
    Ok(cfg)
}

fn resolve_times(raw: Option<RawTimes>) -> Result<TimesSpec, CliError> {
    let Some(t) = raw else {
        return Ok(TimesSpec { start: 0.0, stop: None, decay_times: Some(DEFAULT_DECAY_TIMES), count: DEFAULT_COUNT });
    };
    let count = t.count.unwrap_or(DEFAULT_COUNT);
    if count < 2 {
        return Err(cfg_err("times.count", format!("must be at least 2, got {count}")));
    }
    let start = t.start.unwrap_or(0.0);
    if !(start.is_finite() && start >= 0.0) {
        return Err(cfg_err("times.start", format!("must be finite and >= 0, got {start}")));
    }
    match (t.stop, t.decay_times) {
        (Some(_), Some(_)) => Err(cfg_err("times", "give either stop or decay_times, not both")),
        (Some(stop), None) => {
            if !(stop.is_finite() && stop > start) {
                return Err(cfg_err("times.stop", format!("must be finite and greater than start ({start}), got {stop}")));
            }
            Ok(TimesSpec { start, stop: Some(stop), decay_times: None, count })
        }
        (None, decay) => {
            let k = decay.unwrap_or(DEFAULT_DECAY_TIMES);
            if start != 0.0 {
                return Err(cfg_err("times.start", "decay-time horizons start at 0"));
            }
            if !(k.is_finite() && k > 0.0) {
                return Err(cfg_err("times.decay_times", format!("must be positive, got {k}")));
            }
            Ok(TimesSpec { start, stop: None, decay_times: Some(k), count })
        }
    }
}

pub fn matrix(field: &str, input: &MatrixInput) -> Result<ComplexMatrix, CliError> {
    let rows = input.len();
    let cols = input.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || input.iter().any(|r| r.len() != cols) {
        return Err(cfg_err(field, "matrix must be a non-empty list of equal-length rows of [re, im] pairs"));
    }
    let data: Vec<C64> = input.iter().flatten().map(|[re, im]| C64::new(*re, *im)).collect();
    if data.iter().any(|z| !z.is_finite()) {
        return Err(cfg_err(field, "matrix entries must be finite"));
    }
    ComplexMatrix::new(rows, cols, data).map_err(|e| cfg_err(field, e))
}

fn square(field: &str, input: &MatrixInput, dim: usize) -> Result<ComplexMatrix, CliError> {
    let m = matrix(field, input)?;
    if m.shape() != (dim, dim) {
        return Err(cfg_err(field, format!("expected {dim}x{dim}, got {}x{}", m.rows(), m.cols())));
    }
    Ok(m)
}

/// Validated density matrix: Hermitian, unit trace, positive semidefinite.
pub fn density(field: &str, input: &MatrixInput, dim: usize) -> Result<DensityVec, CliError> {
    let m = square(field, input, dim)?;
    if !m.is_hermitian(STATE_TOL) {
        return Err(cfg_err(field, "state is not Hermitian"));
    }
    if (m.trace() - C64::new(1.0, 0.0)).norm() > STATE_TOL {
        return Err(cfg_err(field, format!("state has trace {} instead of 1", m.trace())));
    }
    let ev = hermitian_eigenvalues(&m).map_err(|e| cfg_err(field, e))?;
    if ev.iter().any(|&e| e < -STATE_TOL) {
        return Err(cfg_err(field, "state has a negative eigenvalue"));
    }
    DensityVec::from_matrix(&m).map_err(|e| cfg_err(field, e))
}

fn preset(name: &str, model: ModelKind, dim: usize, family: Option<&ModelFamily>) -> Result<DensityVec, CliError> {
    let ket = |k: usize| {
        let mut psi = vec![C64::new(0.0, 0.0); dim];
        psi[k] = C64::new(1.0, 0.0);
        psi
    };
    let valid = match model {
        ModelKind::TwoQubit => "phi_plus, zero, one, maximally_mixed",
        ModelKind::Rabi => "superposition, vacuum, fock1, maximally_mixed",
        ModelKind::Custom => "maximally_mixed, zero",
    };
    let state = match (model, name) {
        (_, "maximally_mixed") => DensityVec::from_matrix(&ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64)),
        (ModelKind::TwoQubit, "phi_plus") | (ModelKind::Rabi, "superposition") => match family {
            Some(f) => f.default_initial_a(),
            None => return Err(cfg_err("initial_state", "preset needs a built-in model")),
        },
        (ModelKind::TwoQubit | ModelKind::Custom, "zero") | (ModelKind::Rabi, "vacuum") => DensityVec::pure(&ket(0)),
        (ModelKind::TwoQubit, "one") | (ModelKind::Rabi, "fock1") => DensityVec::pure(&ket(1)),
        _ => {
            return Err(cfg_err(
                "initial_state",
                format!("unknown preset `{name}` for model {}; valid: {valid}, or {{ matrix = ... }}", model.name()),
            ))
        }
    };
    state.map_err(|e| cfg_err("initial_state", e))
}

/// Local models and coupling of a custom configuration.
pub struct CustomModel {
    pub model_a: LindbladModel,
    pub model_b: LindbladModel,
    pub coupling: LindbladModel,
    pub rho_b: Option<DensityVec>,
    pub observables: Vec<Observable>,
}

pub fn custom_model(c: &CustomSpec) -> Result<CustomModel, CliError> {
    let local = |side: &str, h: &Option<MatrixInput>, jumps: &[JumpInput], dim: usize| {
        let field = format!("custom.hamiltonian_{side}");
        let ham = match h {
            Some(m) => square(&field, m, dim)?,
            None => ComplexMatrix::zeros(dim, dim),
        };
        let js = jumps
            .iter()
            .enumerate()
            .map(|(k, j)| Ok((square(&format!("custom.jumps_{side}[{k}].operator"), &j.operator, dim)?, j.rate)))
            .collect::<Result<Vec<_>, CliError>>()?;
        LindbladModel::new(ham, js).map_err(|e| cfg_err(&format!("custom.{side}"), e))
    };
    let model_a = local("a", &c.hamiltonian_a, &c.jumps_a, c.dim_a)?;
    let model_b = local("b", &c.hamiltonian_b, &c.jumps_b, c.dim_b)?;
    let joint = c.dim_a * c.dim_b;
    let coupling = match &c.coupling {
        Some(m) => square("custom.coupling", m, joint)?,
        None => ComplexMatrix::zeros(joint, joint),
    };
    let coupling = LindbladModel::hamiltonian_only(coupling).map_err(|e| cfg_err("custom.coupling", e))?;
    let rho_b = c.rho_b.as_ref().map(|m| density("custom.rho_b", m, c.dim_b)).transpose()?;
    let observables = c
        .observables
        .iter()
        .enumerate()
        .map(|(k, o)| {
            let field = format!("custom.observables[{k}]");
            let (dim, target) = match o.target.as_str() {
                "a" => (c.dim_a, Target::A),
                "b" => (c.dim_b, Target::B),
                t => return Err(cfg_err(&field, format!("unknown target `{t}`; valid: a, b"))),
            };
            if o.name.is_empty() || o.name.contains([',', '\n', '"']) {
                return Err(cfg_err(&field, "name must be non-empty without commas, quotes or newlines"));
            }
            Ok(Observable::new(o.name.clone(), square(&field, &o.operator, dim)?, target))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CustomModel { model_a, model_b, coupling, rho_b, observables })
}
