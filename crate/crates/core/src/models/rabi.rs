use serde::{Deserialize, Serialize};

use super::{annihilation, number_operator, position, sigma_minus, sigma_x, sigma_z};
use crate::error::{Error, Result};
use crate::liouville::{lindblad_superop, BipartiteLindblad, BipartiteSpace, DensityVec, LindbladModel};
use crate::numkernel::{kron, ComplexMatrix};

pub const DEFAULT_FOCK_CUTOFF: usize = 12;

/// Rescaled open Rabi model: boson `A` with frequency `eta` and loss
/// `kappa`, spin `B` with splitting `1/eta` and decay `gamma`, coupling
/// `g (a + a^†) ⊗ sigma_x`. `fock_cutoff` is the boson dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiParams {
    pub g: f64,
    pub eta: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub fock_cutoff: usize,
}

impl RabiParams {
    pub fn new(g: f64, eta: f64, kappa: f64, gamma: f64, fock_cutoff: usize) -> Result<Self> {
        let bad = |name: &str, v: f64, req: &str| Error::InvalidInput(format!("{name} must be {req}, got {v}"));
        if !(g.is_finite() && (0.0..1.0).contains(&g)) {
            return Err(bad("g", g, "in [0, 1)"));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(bad("eta", eta, "positive"));
        }
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(bad("kappa", kappa, "nonnegative"));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(bad("gamma", gamma, "nonnegative"));
        }
        if fock_cutoff < 4 {
            return Err(Error::InvalidInput(format!("fock_cutoff must be at least 4, got {fock_cutoff}")));
        }
        Ok(Self { g, eta, kappa, gamma, fock_cutoff })
    }
}

pub fn build_rabi(p: &RabiParams) -> Result<BipartiteLindblad> {
    let n = p.fock_cutoff;
    let space = BipartiteSpace::new(n, 2)?;
    let model_a = LindbladModel::new(number_operator(n).scale_real(p.eta), vec![(annihilation(n), p.kappa)])?;
    let model_b = LindbladModel::new(sigma_z().scale_real(1.0 / p.eta), vec![(sigma_minus(), p.gamma)])?;
    let coupling = LindbladModel::hamiltonian_only(kron(&position(n), &sigma_x()).scale_real(p.g))?;
    BipartiteLindblad::from_models(space, &model_a, &model_b, &coupling)
}

/// `|0><0|`, the steady state of the spin alone.
pub fn rabi_ground_state_b() -> DensityVec {
    DensityVec::from_matrix(&ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, 0.0]])).expect("2x2 projector")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RabiClosedForm {
    /// Coefficient of `(a + a^†)^2` subtracted from the boson Hamiltonian.
    pub hamiltonian_shift: f64,
    /// Rate of the extra `D[a + a^†]` dissipator.
    pub extra_dissipation: f64,
}

/// `4 g^2 eta / (Gamma^2 eta^2 + 16)` and `4 g^2 eta^2 Gamma / (Gamma^2 eta^2 + 16)`.
pub fn rabi_closed_form(p: &RabiParams) -> RabiClosedForm {
    let den = p.gamma * p.gamma * p.eta * p.eta + 16.0;
    let g2 = p.g * p.g;
    RabiClosedForm {
        hamiltonian_shift: 4.0 * g2 * p.eta / den,
        extra_dissipation: 4.0 * g2 * p.eta * p.eta * p.gamma / den,
    }
}

/// `-i[eta a^†a - shift x^2, .] + kappa D[a] + rate D[x]` with `x = a + a^†`
/// on the truncated Fock space, in flat ordering.
pub fn rabi_effective_generator(p: &RabiParams) -> Result<ComplexMatrix> {
    let n = p.fock_cutoff;
    let cf = rabi_closed_form(p);
    let x = position(n);
    let h = &number_operator(n).scale_real(p.eta) - &(&x * &x).scale_real(cf.hamiltonian_shift);
    let model = LindbladModel::new(h, vec![(annihilation(n), p.kappa), (x, cf.extra_dissipation)])?;
    Ok(lindblad_superop(&model)?.into_matrix())
}

/// Flat indices `j N + i` of `|i><j|` with `i, j <= N - 2`, the entries
/// unaffected by truncating `(a + a^†)^2`.
pub fn rabi_safe_indices(fock_cutoff: usize) -> Vec<usize> {
    let keep = fock_cutoff.saturating_sub(1);
    (0..keep).flat_map(|j| (0..keep).map(move |i| j * fock_cutoff + i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{identity_vec, steady_state, Space, VecOrdering};

    #[test]
    fn reference_coefficients() {
        let cf = rabi_closed_form(&RabiParams::new(0.5, 0.1, 0.1, 1.0, 12).unwrap());
        assert!((cf.hamiltonian_shift - 0.1 / 16.01).abs() < 1e-16);
        assert!((cf.hamiltonian_shift - 6.2461e-3).abs() < 1e-7);
        assert!((cf.extra_dissipation - 0.01 / 16.01).abs() < 1e-17);
        assert!((cf.extra_dissipation - 6.2461e-4).abs() < 1e-8);
    }

    #[test]
    fn uncoupled_is_bare_cavity() {
        let p = RabiParams::new(0.0, 0.3, 0.2, 1.0, 6).unwrap();
        let bl = build_rabi(&p).unwrap();
        assert_eq!(bl.coupling().matrix().max_abs(), 0.0);
        let bare = LindbladModel::new(number_operator(6).scale_real(0.3), vec![(annihilation(6), 0.2)]).unwrap();
        let bare = lindblad_superop(&bare).unwrap().into_matrix();
        assert!(rabi_effective_generator(&p).unwrap().max_abs_diff(&bare) < 1e-15);
    }

    #[test]
    fn spin_relaxes_to_ground_state() {
        let bl = build_rabi(&RabiParams::new(0.3, 0.1, 0.1, 1.0, 4).unwrap()).unwrap();
        let rho = steady_state(bl.local_b()).unwrap().unique().unwrap();
        assert!(rho.trace_distance(&rabi_ground_state_b()).unwrap() < 1e-12);
    }

    #[test]
    fn full_generator_preserves_trace() {
        let bl = build_rabi(&RabiParams::new(0.7, 0.4, 0.1, 2.0, 8).unwrap()).unwrap();
        let space = Space::Bipartite(bl.space());
        let one = identity_vec(space, VecOrdering::Grouped);
        let row = bl.full().matrix().vecmat(&one);
        assert!(row.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn safe_indices_cover_lower_block() {
        assert_eq!(rabi_safe_indices(4), vec![0, 1, 2, 4, 5, 6, 8, 9, 10]);
        assert_eq!(rabi_safe_indices(12).len(), 121);
    }

    #[test]
    fn parameters_are_validated() {
        assert!(RabiParams::new(1.0, 0.1, 0.1, 1.0, 12).is_err());
        assert!(RabiParams::new(0.5, 0.0, 0.1, 1.0, 12).is_err());
        assert!(RabiParams::new(0.5, 0.1, -0.1, 1.0, 12).is_err());
        assert!(RabiParams::new(0.5, 0.1, 0.1, 1.0, 3).is_err());
        assert!(RabiParams::new(0.0, 0.1, 0.0, 0.0, 4).is_ok());
    }
}
