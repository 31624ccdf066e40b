use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{compare, exact_propagate, linspace, observables, ComparisonReport, Observable, Target, Trajectory};
use crate::elimination::{effective_propagate, eliminate, EffectiveGenerator, EliminationResult, InversionMethod};
use crate::error::{Error, Result};
use crate::liouville::{embed_product, BipartiteLindblad, DensityVec};
use crate::models::{
    build_rabi, build_two_qubit, number_operator, phi_plus, position, rabi_ground_state_b, sigma_x, sigma_y,
    sigma_z, two_qubit_branch_state, Branch, RabiParams, TwoQubitParams,
};
use crate::numkernel::{eigenvalues, ComplexMatrix};

/// A built-in model with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelFamily {
    TwoQubit { params: TwoQubitParams, branch: Branch },
    Rabi { params: RabiParams },
}

/// Time grid of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Horizon {
    Fixed { start: f64, stop: f64, count: usize },
    /// `[0, k / r]` with `r` the slowest nonzero decay rate of the
    /// eliminated generator.
    DecayTimes { k: f64, count: usize },
}

impl Horizon {
    pub fn times(&self, eg: &EffectiveGenerator) -> Result<Vec<f64>> {
        match *self {
            Horizon::Fixed { start, stop, count } => {
                if count < 2 || !(stop > start) || start < 0.0 {
                    return Err(Error::InvalidTimes);
                }
                Ok(linspace(start, stop, count))
            }
            Horizon::DecayTimes { k, count } => {
                if count < 2 || !(k.is_finite() && k > 0.0) {
                    return Err(Error::InvalidTimes);
                }
                Ok(linspace(0.0, horizon_from_generator(&eg.reduced_generator, k)?, count))
            }
        }
    }
}

/// `k` divided by the smallest nonzero `|Re lambda|` of `generator`.
pub fn horizon_from_generator(generator: &ComplexMatrix, k: f64) -> Result<f64> {
    let ev = eigenvalues(generator)?;
    let scale = ev.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let slowest = ev
        .iter()
        .map(|z| z.re.abs())
        .filter(|&r| r > 1e-12 * scale)
        .fold(f64::INFINITY, f64::min);
    if !slowest.is_finite() {
        return Err(Error::NumericalFailure("generator has no decaying mode to set a horizon".into()));
    }
    Ok(k / slowest)
}

impl ModelFamily {
    pub fn two_qubit(gamma: f64, chi: f64) -> Result<Self> {
        Ok(Self::TwoQubit { params: TwoQubitParams::new(gamma, chi)?, branch: Branch::S0 })
    }

    pub fn rabi(params: RabiParams) -> Self {
        Self::Rabi { params }
    }

    pub fn build(&self) -> Result<BipartiteLindblad> {
        match self {
            Self::TwoQubit { params, .. } => build_two_qubit(params),
            Self::Rabi { params } => build_rabi(params),
        }
    }

    /// State of `B` the projector is built on: the selected branch for the
    /// two-qubit model, the spin ground state for the Rabi model.
    pub fn reference_state_b(&self) -> Result<DensityVec> {
        match self {
            Self::TwoQubit { params, branch } => two_qubit_branch_state(params, *branch),
            Self::Rabi { .. } => Ok(rabi_ground_state_b()),
        }
    }

    /// `|phi+><phi+|` for the qubit, `(|0> + |1>)/sqrt(2)` for the boson.
    pub fn default_initial_a(&self) -> Result<DensityVec> {
        match self {
            Self::TwoQubit { .. } => Ok(phi_plus()),
            Self::Rabi { params } => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                let mut psi = vec![num_complex::Complex64::new(0.0, 0.0); params.fock_cutoff];
                psi[0].re = h;
                psi[1].re = h;
                DensityVec::pure(&psi)
            }
        }
    }

    /// Pauli expectations of both factors; for the Rabi model `n_A`
    /// and `x_A = <a + a^†>` replace the slow-factor Paulis.
    pub fn observables(&self) -> Vec<Observable> {
        let mut out = match self {
            Self::TwoQubit { .. } => vec![
                Observable::new("sx_A", sigma_x(), Target::A),
                Observable::new("sy_A", sigma_y(), Target::A),
                Observable::new("sz_A", sigma_z(), Target::A),
            ],
            Self::Rabi { params } => vec![
                Observable::new("n_A", number_operator(params.fock_cutoff), Target::A),
                Observable::new("x_A", position(params.fock_cutoff), Target::A),
            ],
        };
        out.extend([
            Observable::new("sx_B", sigma_x(), Target::B),
            Observable::new("sy_B", sigma_y(), Target::B),
            Observable::new("sz_B", sigma_z(), Target::B),
        ]);
        out
    }

    /// Observable the convergence scan checks for monotone deviations.
    pub fn primary_observable(&self) -> &'static str {
        match self {
            Self::TwoQubit { .. } => "sx_A",
            Self::Rabi { .. } => "x_A",
        }
    }

    /// `chi` or `g`.
    pub fn coupling(&self) -> f64 {
        match self {
            Self::TwoQubit { params, .. } => params.chi,
            Self::Rabi { params } => params.g,
        }
    }

    pub fn with_coupling(&self, c: f64) -> Result<Self> {
        Ok(match *self {
            Self::TwoQubit { params, branch } => {
                Self::TwoQubit { params: TwoQubitParams::new(params.gamma, c)?, branch }
            }
            Self::Rabi { params: p } => {
                Self::Rabi { params: RabiParams::new(c, p.eta, p.kappa, p.gamma, p.fock_cutoff)? }
            }
        })
    }

    pub fn parameters(&self) -> BTreeMap<String, f64> {
        let pairs: Vec<(&str, f64)> = match self {
            Self::TwoQubit { params, branch } => vec![
                ("gamma", params.gamma),
                ("chi", params.chi),
                ("branch", if *branch == Branch::S0 { 0.0 } else { 1.0 }),
            ],
            Self::Rabi { params } => vec![
                ("g", params.g),
                ("eta", params.eta),
                ("kappa", params.kappa),
                ("gamma", params.gamma),
                ("fock_cutoff", params.fock_cutoff as f64),
            ],
        };
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// Rates read off the engine's reduced generators.
    ///
    /// Two-qubit: `zeta`, `xi` from `L0` and `zeta_prime`, `xi_prime` from
    /// the resolved generator, all on `vec(|1><0|)`. Rabi: the `(a+a^†)^2`
    /// shift and the `D[a+a^†]` rate, from the images of `|0><0|` on
    /// `|2><0|` and `|1><1|`.
    pub fn engine_rates(&self, eg: &EffectiveGenerator) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        match self {
            Self::TwoQubit { .. } => {
                let a = eg.reduced_l0[(1, 1)];
                let r = eg.reduced_generator[(1, 1)];
                out.insert("zeta".into(), -a.re);
                out.insert("xi".into(), a.im);
                out.insert("zeta_prime".into(), -r.re);
                out.insert("xi_prime".into(), r.im);
            }
            Self::Rabi { params } => {
                let n = params.fock_cutoff;
                let g = &eg.reduced_generator;
                out.insert("extra_dissipation".into(), g[(n + 1, 0)].re);
                out.insert("hamiltonian_shift".into(), g[(2, 0)].im / std::f64::consts::SQRT_2);
            }
        }
        out
    }

    /// Eliminates, propagates both pipelines on `horizon` and compares them.
    /// `rho0_a` defaults to [`Self::default_initial_a`], the exact run's
    /// `B` state to [`Self::reference_state_b`].
    pub fn run(
        &self,
        rho0_a: Option<&DensityVec>,
        rho0_b: Option<&DensityVec>,
        method: InversionMethod,
        order: usize,
        horizon: Horizon,
    ) -> Result<PipelineRun> {
        let model = self.build()?;
        let rho_b = self.reference_state_b()?;
        let rho0_a = match rho0_a {
            Some(r) => r.clone(),
            None => self.default_initial_a()?,
        };
        let elimination = eliminate(&model, &rho_b, method, order)?;
        let times = horizon.times(&elimination.generator)?;
        let mut run = run_from_elimination(&model, elimination, &rho0_a, rho0_b.unwrap_or(&rho_b), &times, &self.observables())?;
        run.report.parameters = self.parameters();
        Ok(run)
    }
}

/// Output of one exact-versus-eliminated comparison.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub elimination: EliminationResult,
    /// Full bipartite trajectory with observables of both factors.
    pub exact: Trajectory,
    /// Slow-factor trajectory of the eliminated dynamics.
    pub effective: Trajectory,
    pub report: ComparisonReport,
}

/// Exact run from `rho0_A ⊗ rho0_B` (default `rho_b`) against the
/// eliminated run from `rho0_A`. Observables targeting `B` are only
/// evaluated on the exact trajectory.
#[allow(clippy::too_many_arguments)]
pub fn run_pipeline(
    model: &BipartiteLindblad,
    rho_b: &DensityVec,
    rho0_a: &DensityVec,
    rho0_b: Option<&DensityVec>,
    method: InversionMethod,
    order: usize,
    times: &[f64],
    observables_set: &[Observable],
) -> Result<PipelineRun> {
    let elimination = eliminate(model, rho_b, method, order)?;
    run_from_elimination(model, elimination, rho0_a, rho0_b.unwrap_or(rho_b), times, observables_set)
}

/// Propagates both pipelines from an existing elimination and compares them.
pub fn run_from_elimination(
    model: &BipartiteLindblad,
    elimination: EliminationResult,
    rho0_a: &DensityVec,
    rho0_b: &DensityVec,
    times: &[f64],
    observables_set: &[Observable],
) -> Result<PipelineRun> {
    let start = embed_product(rho0_a, rho0_b)?;
    let exact = observables(&exact_propagate(&model.full(), &start, times)?, observables_set)?;
    let slow: Vec<Observable> = observables_set.iter().filter(|o| o.target != Target::B).cloned().collect();
    let effective = observables(&effective_propagate(&elimination.generator, rho0_a, times)?, &slow)?;
    let report = compare(&exact, &effective)?;
    Ok(PipelineRun { elimination, exact, effective, report })
}

/// Default two-qubit comparison: `|phi+><phi+|`, `B` in the branch state.
pub fn run_two_qubit(
    params: TwoQubitParams,
    branch: Branch,
    method: InversionMethod,
    order: usize,
    horizon: Horizon,
) -> Result<PipelineRun> {
    ModelFamily::TwoQubit { params, branch }.run(None, None, method, order, horizon)
}

pub fn run_rabi(params: RabiParams, method: InversionMethod, order: usize, horizon: Horizon) -> Result<PipelineRun> {
    ModelFamily::Rabi { params }.run(None, None, method, order, horizon)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub coupling: f64,
    pub sup_deviation: BTreeMap<String, f64>,
    pub max_trace_distance: f64,
    pub rates: BTreeMap<String, f64>,
    /// The primary deviation did not decrease against the previous row.
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanTable {
    pub primary_observable: String,
    pub rows: Vec<ScanRow>,
    pub monotone: bool,
}

/// Runs [`ModelFamily::run`] for each coupling value, which must be positive
/// and strictly descending. Non-decreasing deviations are flagged, not
/// treated as errors.
pub fn convergence_scan(
    family: &ModelFamily,
    couplings: &[f64],
    method: InversionMethod,
    order: usize,
    horizon: Horizon,
) -> Result<ScanTable> {
    if couplings.is_empty()
        || couplings.iter().any(|c| !(c.is_finite() && *c > 0.0))
        || couplings.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidInput("couplings must be positive and strictly descending".into()));
    }
    let primary = family.primary_observable();
    let mut rows: Vec<ScanRow> = Vec::with_capacity(couplings.len());
    for &c in couplings {
        let fam = family.with_coupling(c)?;
        let run = fam.run(None, None, method, order, horizon)?;
        let dev = run.report.sup_deviation.get(primary).copied().unwrap_or(f64::NAN);
        let violation = rows
            .last()
            .map(|prev| !(dev < prev.sup_deviation.get(primary).copied().unwrap_or(f64::NAN)))
            .unwrap_or(false);
        rows.push(ScanRow {
            coupling: c,
            sup_deviation: run.report.sup_deviation,
            max_trace_distance: run.report.max_trace_distance,
            rates: fam.engine_rates(&run.elimination.generator),
            violation,
        });
    }
    let monotone = rows.iter().all(|r| !r.violation);
    Ok(ScanTable { primary_observable: primary.to_string(), rows, monotone })
}
