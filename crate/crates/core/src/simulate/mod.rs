//! Exact reference propagation and comparison with eliminated dynamics.

mod pipeline;

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{shape_err, Error, Result};
use crate::liouville::{partial_trace_a, partial_trace_b, DensityVec, Space, SuperOp};
use crate::numkernel::{expm, ComplexMatrix};

pub use pipeline::{
    convergence_scan, horizon_from_generator, run_from_elimination, run_pipeline, run_rabi, run_two_qubit, Horizon,
    ModelFamily, PipelineRun, ScanRow, ScanTable,
};

/// Gaps closer than this share one cached propagator.
const GAP_TOL: f64 = 1e-12;
const IMAG_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityVec>,
    pub observables: BTreeMap<String, Vec<f64>>,
}

pub fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty()
        || times.iter().any(|t| !t.is_finite() || *t < 0.0)
        || times.windows(2).any(|w| w[1] < w[0])
    {
        return Err(Error::InvalidTimes);
    }
    Ok(())
}

/// `count` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|k| {
                if k == count - 1 {
                    stop
                } else {
                    start + (stop - start) * k as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

/// `exp(G t_k) v0` for each `t_k`, reusing one exponential per distinct gap.
pub fn propagate_vectors(generator: &ComplexMatrix, v0: &[C64], times: &[f64]) -> Result<Vec<Vec<C64>>> {
    check_times(times)?;
    if !generator.is_square() || generator.cols() != v0.len() {
        return Err(shape_err("propagate", "generator does not match the state length"));
    }
    let mut cache: Vec<(f64, ComplexMatrix)> = Vec::new();
    let mut step = |gap: f64| -> Result<ComplexMatrix> {
        if let Some((_, u)) = cache.iter().find(|(g, _)| (g - gap).abs() <= GAP_TOL * g.abs().max(1.0)) {
            return Ok(u.clone());
        }
        let u = expm(&generator.scale_real(gap))?;
        cache.push((gap, u.clone()));
        Ok(u)
    };
    let mut out = Vec::with_capacity(times.len());
    let mut current = v0.to_vec();
    let mut t_prev = 0.0;
    for &t in times {
        let gap = t - t_prev;
        if gap > 0.0 {
            current = step(gap)?.matvec(&current);
        }
        out.push(current.clone());
        t_prev = t;
    }
    Ok(out)
}

/// `exp(L t) rho0` on the time grid.
pub fn exact_propagate(l: &SuperOp, rho0: &DensityVec, times: &[f64]) -> Result<Trajectory> {
    if rho0.space() != l.space() || rho0.ordering() != l.ordering() {
        return Err(shape_err("exact_propagate", "initial state does not match the generator"));
    }
    rho0.check_normalized(1e-10)?;
    let states = propagate_vectors(l.matrix(), rho0.as_slice(), times)?
        .into_iter()
        .map(|v| DensityVec::new(v, rho0.space(), rho0.ordering()))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(times.to_vec(), states)
}

/// Which factor an observable acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Target {
    /// The space the trajectory lives on.
    Whole,
    A,
    B,
}

#[derive(Debug, Clone)]
pub struct Observable {
    pub name: String,
    pub operator: ComplexMatrix,
    pub target: Target,
}

impl Observable {
    pub fn new(name: impl Into<String>, operator: ComplexMatrix, target: Target) -> Self {
        Self { name: name.into(), operator, target }
    }
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<DensityVec>) -> Result<Self> {
        check_times(&times)?;
        if times.len() != states.len() {
            return Err(shape_err("Trajectory::new", format!("{} times, {} states", times.len(), states.len())));
        }
        Ok(Self { times, states, observables: BTreeMap::new() })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Trajectory of the slow factor; single-space trajectories are returned as is.
    pub fn reduced_to_a(&self) -> Result<Self> {
        self.map_states(|s| match s.space() {
            Space::Single(_) => Ok(s.clone()),
            Space::Bipartite(_) => partial_trace_b(s),
        })
    }

    pub fn reduced_to_b(&self) -> Result<Self> {
        self.map_states(partial_trace_a)
    }

    fn map_states(&self, f: impl Fn(&DensityVec) -> Result<DensityVec>) -> Result<Self> {
        Ok(Self {
            times: self.times.clone(),
            states: self.states.iter().map(f).collect::<Result<_>>()?,
            observables: self.observables.clone(),
        })
    }

    /// Largest deviation of any state from unit trace and Hermiticity.
    pub fn physicality_residual(&self) -> f64 {
        self.states
            .iter()
            .map(|s| {
                let m = s.to_matrix();
                let herm = m.max_abs_diff(&m.adjoint());
                (s.trace() - C64::new(1.0, 0.0)).norm().max(herm)
            })
            .fold(0.0, f64::max)
    }
}

fn target_state(s: &DensityVec, target: Target) -> Result<DensityVec> {
    match target {
        Target::Whole => Ok(s.clone()),
        Target::A => match s.space() {
            Space::Single(_) => Ok(s.clone()),
            Space::Bipartite(_) => partial_trace_b(s),
        },
        Target::B => partial_trace_a(s),
    }
}

/// Adds `<O>(t) = tr(O rho(t))` series. Hermitian observables must have
/// a real expectation up to `1e-8`.
pub fn observables(traj: &Trajectory, set: &[Observable]) -> Result<Trajectory> {
    let mut out = traj.clone();
    for obs in set {
        let hermitian = obs.operator.is_hermitian(1e-12);
        let mut series = Vec::with_capacity(traj.len());
        for s in &traj.states {
            let v = target_state(s, obs.target)?.expectation(&obs.operator)?;
            if hermitian && v.im.abs() > IMAG_TOL {
                return Err(Error::NumericalFailure(format!(
                    "observable {} has imaginary expectation {:.3e}",
                    obs.name, v.im
                )));
            }
            series.push(v.re);
        }
        out.observables.insert(obs.name.clone(), series);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub times: Vec<f64>,
    /// `max_t |exact - approx|` per shared observable.
    pub sup_deviation: BTreeMap<String, f64>,
    /// `|exact - approx|` at the last time.
    pub terminal_deviation: BTreeMap<String, f64>,
    /// Trace distance between the reduced exact and the eliminated state.
    pub trace_distance: Vec<f64>,
    pub max_trace_distance: f64,
    pub parameters: BTreeMap<String, f64>,
}

/// Compares observables with matching names and the slow-factor states.
/// The exact trajectory is reduced to `A` first when it is bipartite.
pub fn compare(exact: &Trajectory, approx: &Trajectory) -> Result<ComparisonReport> {
    if exact.times.len() != approx.times.len()
        || exact.times.iter().zip(&approx.times).any(|(a, b)| (a - b).abs() > GAP_TOL * a.abs().max(1.0))
    {
        return Err(shape_err("compare", "trajectories use different time grids"));
    }
    let exact_a = exact.reduced_to_a()?;
    let approx_a = approx.reduced_to_a()?;
    let trace_distance = exact_a
        .states
        .iter()
        .zip(&approx_a.states)
        .map(|(a, b)| a.trace_distance(b))
        .collect::<Result<Vec<_>>>()?;
    let mut sup_deviation = BTreeMap::new();
    let mut terminal_deviation = BTreeMap::new();
    for (name, e) in &exact.observables {
        let Some(a) = approx.observables.get(name) else { continue };
        let diffs: Vec<f64> = e.iter().zip(a).map(|(x, y)| (x - y).abs()).collect();
        sup_deviation.insert(name.clone(), diffs.iter().copied().fold(0.0, f64::max));
        terminal_deviation.insert(name.clone(), diffs.last().copied().unwrap_or(0.0));
    }
    Ok(ComparisonReport {
        times: exact.times.clone(),
        sup_deviation,
        terminal_deviation,
        max_trace_distance: trace_distance.iter().copied().fold(0.0, f64::max),
        trace_distance,
        parameters: BTreeMap::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{lindblad_superop, LindbladModel, VecOrdering};

    fn decay() -> SuperOp {
        let sm = ComplexMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        lindblad_superop(&LindbladModel::new(ComplexMatrix::zeros(2, 2), vec![(sm, 1.0)]).unwrap()).unwrap()
    }

    fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_real(&[&[-1.0, 0.0], &[0.0, 1.0]])
    }

    #[test]
    fn decay_from_excited_state() {
        let excited = DensityVec::from_matrix(&ComplexMatrix::from_real(&[&[0.0, 0.0], &[0.0, 1.0]])).unwrap();
        let times = linspace(0.0, 5.0, 11);
        let traj = exact_propagate(&decay(), &excited, &times).unwrap();
        let traj = observables(&traj, &[Observable::new("sz", sigma_z(), Target::Whole)]).unwrap();
        for (t, v) in times.iter().zip(&traj.observables["sz"]) {
            assert!((v - (2.0 * (-t).exp() - 1.0)).abs() < 1e-12, "t={t}");
        }
        assert!(traj.physicality_residual() < 1e-12);
    }

    #[test]
    fn zero_generator_is_constant() {
        let l = SuperOp::zeros(Space::Single(2), VecOrdering::Flat).unwrap();
        let rho = DensityVec::from_matrix(&ComplexMatrix::from_real(&[&[0.3, 0.1], &[0.1, 0.7]])).unwrap();
        let traj = exact_propagate(&l, &rho, &[0.0, 1.0, 2.5]).unwrap();
        assert!(traj.states.iter().all(|s| s == &rho));
        let traj = observables(&traj, &[Observable::new("id", ComplexMatrix::identity(2), Target::Whole)]).unwrap();
        assert!(traj.observables["id"].iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn times_are_validated() {
        let rho = DensityVec::from_matrix(&ComplexMatrix::identity(2).scale_real(0.5)).unwrap();
        assert!(matches!(exact_propagate(&decay(), &rho, &[1.0, 0.5]), Err(Error::InvalidTimes)));
        assert!(matches!(exact_propagate(&decay(), &rho, &[-1.0]), Err(Error::InvalidTimes)));
        assert!(exact_propagate(&decay(), &rho, &[0.5, 0.5, 1.0]).is_ok());
    }

    #[test]
    fn nonuniform_grid_matches_direct_exponentials() {
        let rho = DensityVec::from_matrix(&ComplexMatrix::from_real(&[&[0.5, 0.5], &[0.5, 0.5]])).unwrap();
        let times = [0.3, 0.7, 1.1, 3.0];
        let traj = exact_propagate(&decay(), &rho, &times).unwrap();
        for (t, s) in times.iter().zip(&traj.states) {
            let direct = expm(&decay().matrix().scale_real(*t)).unwrap().matvec(rho.as_slice());
            let diff = s.as_slice().iter().zip(&direct).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(diff < 1e-13);
        }
    }

    #[test]
    fn identical_trajectories_compare_to_zero() {
        let rho = DensityVec::from_matrix(&ComplexMatrix::from_real(&[&[0.5, 0.5], &[0.5, 0.5]])).unwrap();
        let traj = exact_propagate(&decay(), &rho, &linspace(0.0, 2.0, 5)).unwrap();
        let traj = observables(&traj, &[Observable::new("sz", sigma_z(), Target::Whole)]).unwrap();
        let rep = compare(&traj, &traj).unwrap();
        assert_eq!(rep.sup_deviation["sz"], 0.0);
        assert_eq!(rep.max_trace_distance, 0.0);
        let shorter = exact_propagate(&decay(), &rho, &linspace(0.0, 2.0, 4)).unwrap();
        assert!(compare(&traj, &shorter).is_err());
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(linspace(2.0, 3.0, 1), vec![2.0]);
    }
}
