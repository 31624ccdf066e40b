use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{sigma_minus, sigma_x, sigma_y, sigma_z};
use crate::error::{Error, Result};
use crate::liouville::{
    sandwich, BipartiteLindblad, BipartiteSpace, DensityVec, LindbladModel, Space,
    VecOrdering,
};
use crate::numkernel::{kron, ComplexMatrix};

/// Rescaled parameters (time in units of `1/u`): decay `gamma` of the
/// driven qubit `B` and dispersive coupling `chi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitParams {
    pub gamma: f64,
    pub chi: f64,
}

impl TwoQubitParams {
    pub fn new(gamma: f64, chi: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidInput(format!("gamma must be positive, got {gamma}")));
        }
        if !chi.is_finite() {
            return Err(Error::InvalidInput(format!("chi must be finite, got {chi}")));
        }
        Ok(Self { gamma, chi })
    }
}

/// Stationary state branch of the fast qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    #[default]
    S0,
    S1,
}

/// `L_A = 0`, `L_B = -i[sigma_y, .] + gamma D[sigma_-]`,
/// `L_AB = -i chi [sigma_z ⊗ sigma_z, .]`.
pub fn build_two_qubit(p: &TwoQubitParams) -> Result<BipartiteLindblad> {
    let space = BipartiteSpace::new(2, 2)?;
    let model_a = LindbladModel::hamiltonian_only(ComplexMatrix::zeros(2, 2))?;
    let model_b = LindbladModel::new(sigma_y(), vec![(sigma_minus(), p.gamma)])?;
    let coupling = LindbladModel::hamiltonian_only(kron(&sigma_z(), &sigma_z()).scale_real(p.chi))?;
    BipartiteLindblad::from_models(space, &model_a, &model_b, &coupling)
}

/// Coefficients `(x, y, z)` of `rho = 1/2 + x sigma_x + y sigma_y + z sigma_z`.
pub fn two_qubit_branch_bloch(p: &TwoQubitParams, branch: Branch) -> [f64; 3] {
    let (g, c) = (p.gamma, p.chi);
    let d = 16.0 * c * c + g * g + 8.0;
    let y = 8.0 * c / d;
    [
        2.0 * g / d,
        match branch {
            Branch::S0 => -y,
            Branch::S1 => y,
        },
        -(16.0 * c * c + g * g) / (32.0 * c * c + 2.0 * g * g + 16.0),
    ]
}

pub fn two_qubit_branch_state(p: &TwoQubitParams, branch: Branch) -> Result<DensityVec> {
    let [x, y, z] = two_qubit_branch_bloch(p, branch);
    let m = &(&(&ComplexMatrix::identity(2).scale_real(0.5) + &sigma_x().scale_real(x))
        + &sigma_y().scale_real(y))
        + &sigma_z().scale_real(z);
    DensityVec::from_matrix(&m)
}

/// The slow-qubit projector paired with `branch` in the kernel of the full
/// generator: `rho_A ⊗ rho_branch` is stationary.
///
/// With `sigma_z = diag(-1, 1)` the branch `S0` pairs with `|1><1|`.
pub fn two_qubit_kernel_partner(branch: Branch) -> DensityVec {
    let m = match branch {
        Branch::S0 => ComplexMatrix::from_real(&[&[0.0, 0.0], &[0.0, 1.0]]),
        Branch::S1 => ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, 0.0]]),
    };
    DensityVec::from_matrix(&m).expect("2x2 projector")
}

/// `|phi+><phi+|` with `|phi+> = (|0> + |1>)/sqrt(2)`.
pub fn phi_plus() -> DensityVec {
    DensityVec::from_matrix(&ComplexMatrix::from_real(&[&[0.5, 0.5], &[0.5, 0.5]])).expect("2x2 state")
}

/// Closed-form rates of the eliminated two-qubit model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoQubitClosedForm {
    pub bloch_s0: [f64; 3],
    pub bloch_s1: [f64; 3],
    pub zeta: f64,
    pub xi: f64,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub beta: C64,
    pub zeta_prime: f64,
    pub xi_prime: f64,
}

impl TwoQubitClosedForm {
    /// `alpha = -zeta + i xi`.
    pub fn alpha(&self) -> C64 {
        C64::new(-self.zeta, self.xi)
    }
}

/// Transcribed rational functions of `(gamma, chi)` for the slow-qubit
/// dephasing rate and frequency, the first-order correction `beta`, and the
/// resolved rates `zeta' = -Re[alpha/(1+beta)]`, `xi' = Im[alpha/(1+beta)]`.
pub fn two_qubit_closed_form(p: &TwoQubitParams) -> TwoQubitClosedForm {
    let (g, c) = (p.gamma, p.chi);
    let (g2, c2) = (g * g, c * c);
    let s = 16.0 * c2 + g2;
    let denom = 4.0 * c2 * g2 * (s - 16.0).powi(2) + (g2 + 8.0).powi(2) * (s + 8.0).powi(2);

    let zeta = 128.0 * c2 * g * (g2 + 8.0) * (s + 2.0) / denom;
    let xi = 2.0 * c * s / (s + 8.0)
        + 256.0 * c.powi(3) * g2 * (s - 16.0) * (s + 2.0) / (denom * (s + 8.0));

    let x1 = c2
        * (49152.0 * c.powi(4) * g2 - 262144.0 * c.powi(4) + 6144.0 * c2 * g.powi(4) + 2048.0 * c2 * g2
            - 131072.0 * c2
            + 192.0 * g.powi(6)
            + 1152.0 * g.powi(4)
            - 5120.0 * g2
            - 16384.0);
    let y1 = 256.0 * c.powi(3) * g * (s + 4.0) * (s + 8.0);
    let x2 = (s + 4.0)
        * (-32.0 * c.powi(3) * g + 16.0 * c2 * g2 + 128.0 * c2 - 2.0 * c * g.powi(3) + 32.0 * c * g
            + g.powi(4)
            + 16.0 * g2
            + 64.0)
        * (32.0 * c.powi(3) * g + 16.0 * c2 * g2 + 128.0 * c2 + 2.0 * c * g.powi(3) - 32.0 * c * g
            + g.powi(4)
            + 16.0 * g2
            + 64.0);
    let y2 = 4.0 * c * g * (g2 + 8.0) * (s - 16.0) * (s + 4.0) * (s + 8.0);
    let beta = C64::new(x1, y1) / C64::new(x2, y2);

    let resolved = C64::new(-zeta, xi) / (C64::new(1.0, 0.0) + beta);
    TwoQubitClosedForm {
        bloch_s0: two_qubit_branch_bloch(p, Branch::S0),
        bloch_s1: two_qubit_branch_bloch(p, Branch::S1),
        zeta,
        xi,
        x1,
        y1,
        x2,
        y2,
        beta,
        zeta_prime: -resolved.re,
        xi_prime: resolved.im,
    }
}

/// `rho -> i (xi/2) [sigma_z, rho] + (zeta/2)(sigma_z rho sigma_z - rho)`
/// as a 4x4 flat superoperator. Its eigenvalue on `vec(|1><0|)` is
/// `-zeta + i xi`.
pub fn dephasing_generator(zeta: f64, xi: f64) -> ComplexMatrix {
    let sz = sigma_z();
    let id = ComplexMatrix::identity(2);
    let comm = &sandwich(&sz, &id).expect("2x2").into_matrix() - &sandwich(&id, &sz).expect("2x2").into_matrix();
    let deph = &sandwich(&sz, &sz).expect("2x2").into_matrix() - &ComplexMatrix::identity(4);
    &comm.scale(C64::new(0.0, xi / 2.0)) + &deph.scale_real(zeta / 2.0)
}

pub fn two_qubit_effective_generator(cf: &TwoQubitClosedForm) -> ComplexMatrix {
    dephasing_generator(cf.zeta, cf.xi)
}

/// `(1 - L1)^{-1} L0` from the closed form: `alpha/(1+beta)` on
/// `vec(|1><0|)`, its conjugate on `vec(|0><1|)`.
pub fn two_qubit_resolved_generator(cf: &TwoQubitClosedForm) -> Result<ComplexMatrix> {
    let one_plus = C64::new(1.0, 0.0) + cf.beta;
    if one_plus.norm() == 0.0 {
        return Err(Error::InvalidInput("beta = -1 makes 1 - L1 singular".into()));
    }
    let r = cf.alpha() / one_plus;
    let z = C64::new(0.0, 0.0);
    Ok(ComplexMatrix::from_diag(&[z, r, r.conj(), z]))
}

/// Scales the coherences: `vec` entry 1 (`|1><0|`) by `1/(1+beta)` and
/// entry 2 (`|0><1|`) by `1/(1+conj(beta))`.
pub fn modified_initial_state(rho0_a: &DensityVec, beta: C64) -> Result<DensityVec> {
    if rho0_a.space() != Space::Single(2) {
        return Err(Error::InvalidInput("modified initial state needs a qubit state".into()));
    }
    rho0_a.check_normalized(1e-10)?;
    let one_plus = C64::new(1.0, 0.0) + beta;
    if one_plus.norm() == 0.0 {
        return Err(Error::InvalidInput("beta = -1 makes the initial-state map singular".into()));
    }
    let mut v = rho0_a.as_slice().to_vec();
    v[1] /= one_plus;
    v[2] /= one_plus.conj();
    DensityVec::new(v, Space::Single(2), VecOrdering::Flat)
}

/// `exp(t (1 - L1)^{-1} L0)` in closed form.
pub fn two_qubit_u(t: f64, cf: &TwoQubitClosedForm) -> Result<ComplexMatrix> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidTimes);
    }
    let one = C64::new(1.0, 0.0);
    let phase = C64::new(-cf.zeta_prime * t, cf.xi_prime * t).exp();
    Ok(ComplexMatrix::from_diag(&[one, phase, phase.conj(), one]))
}
