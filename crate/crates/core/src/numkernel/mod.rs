//! Dense complex linear algebra used by the rest of the crate.

mod decomp;
mod expm;
mod matrix;

pub use decomp::{
    condition_number, eigenvalues, hermitian_eigen, hermitian_eigenvalues, inverse, nullspace, pinv,
    range_basis, solve, svd, SvdFactors,
};
pub use expm::expm;
pub use matrix::{id_kron_mul, inner, kron, kron_vec, mul_id_kron, vec_norm, ComplexMatrix};
