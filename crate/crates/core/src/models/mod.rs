//! The dispersively coupled two-qubit system and the open Rabi model.
//!
//! Qubit convention: `|0>`, `|1>` are eigenvectors of `sigma_z` with
//! eigenvalues `-1`, `+1`, so `sigma_z = diag(-1, 1)`,
//! `sigma_+ = |1><0|` and `sigma_- = |0><1|`.

mod rabi;
mod two_qubit;

use num_complex::Complex64 as C64;

use crate::numkernel::ComplexMatrix;

pub use rabi::{
    build_rabi, rabi_closed_form, rabi_effective_generator, rabi_ground_state_b, rabi_safe_indices,
    RabiClosedForm, RabiParams, DEFAULT_FOCK_CUTOFF,
};
pub use two_qubit::{
    build_two_qubit, dephasing_generator, modified_initial_state, phi_plus, two_qubit_branch_bloch,
    two_qubit_branch_state, two_qubit_closed_form, two_qubit_effective_generator,
    two_qubit_kernel_partner, two_qubit_resolved_generator, two_qubit_u, Branch, TwoQubitClosedForm,
    TwoQubitParams,
};

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn sigma_y() -> ComplexMatrix {
    let z = C64::new(0.0, 0.0);
    ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => C64::new(0.0, -1.0),
        (1, 0) => C64::new(0.0, 1.0),
        _ => z,
    })
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_real(&[&[-1.0, 0.0], &[0.0, 1.0]])
}

/// `|1><0|`.
pub fn sigma_plus() -> ComplexMatrix {
    ComplexMatrix::from_real(&[&[0.0, 0.0], &[1.0, 0.0]])
}

/// `|0><1|`.
pub fn sigma_minus() -> ComplexMatrix {
    ComplexMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]])
}

/// Truncated annihilation operator, `a|n> = sqrt(n)|n-1>` for `n < dim`.
pub fn annihilation(dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn number_operator(dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_diag(&(0..dim).map(|n| C64::new(n as f64, 0.0)).collect::<Vec<_>>())
}

/// `a + a^†` on the truncated space.
pub fn position(dim: usize) -> ComplexMatrix {
    let a = annihilation(dim);
    &a + &a.adjoint()
}
