use num_complex::Complex64 as C64;

use crate::error::{shape_err, Error, Result};
use crate::liouville::{identity_vec, BipartiteSpace, DensityVec, Space, SuperOp, VecOrdering};
use crate::numkernel::{id_kron_mul, kron, mul_id_kron, range_basis, ComplexMatrix};

const NORMALIZATION_TOL: f64 = 1e-10;
const ALGEBRA_TOL: f64 = 1e-12;

/// `P = 1_{A⊗A} ⊗ |rho_b>><<1_B|` and `Q = 1 - P`, in grouped ordering.
#[derive(Debug, Clone)]
pub struct ProjectorPair {
    space: BipartiteSpace,
    rho_b: DensityVec,
    p_b: ComplexMatrix,
    q_b: ComplexMatrix,
    range_q_b: ComplexMatrix,
    p: SuperOp,
    q: SuperOp,
}

pub fn build_projectors(rho_b: &DensityVec, space: BipartiteSpace) -> Result<ProjectorPair> {
    if rho_b.space() != Space::Single(space.dim_b()) {
        return Err(shape_err(
            "build_projectors",
            format!("reference state on {:?}, fast subsystem has dimension {}", rho_b.space(), space.dim_b()),
        ));
    }
    rho_b.check_normalized(NORMALIZATION_TOL)?;
    let rho_b = rho_b.normalized()?;

    let nb = space.dim_b() * space.dim_b();
    let na = space.dim_a() * space.dim_a();
    let one_b = identity_vec(Space::Single(space.dim_b()), VecOrdering::Flat);
    let p_b = ComplexMatrix::from_fn(nb, nb, |i, j| rho_b.as_slice()[i] * one_b[j]);
    let q_b = &ComplexMatrix::identity(nb) - &p_b;
    let range_q_b = range_basis(&q_b, 1e-10)?
        .ok_or_else(|| Error::InvalidInput("fast subsystem must have dimension >= 2".into()))?;

    let p_full = kron(&ComplexMatrix::identity(na), &p_b);
    let q_full = &ComplexMatrix::identity(na * nb) - &p_full;
    let p = SuperOp::new(p_full, VecOrdering::Grouped, space.into())?;
    let q = SuperOp::new(q_full, VecOrdering::Grouped, space.into())?;

    let pair = ProjectorPair { space, rho_b, p_b, q_b, range_q_b, p, q };
    pair.verify_algebra(ALGEBRA_TOL)?;
    Ok(pair)
}

impl ProjectorPair {
    pub fn space(&self) -> BipartiteSpace {
        self.space
    }

    pub fn rho_b(&self) -> &DensityVec {
        &self.rho_b
    }

    pub fn p(&self) -> &SuperOp {
        &self.p
    }

    pub fn q(&self) -> &SuperOp {
        &self.q
    }

    /// `|rho_b>><<1_B|` on the fast factor.
    pub fn p_b(&self) -> &ComplexMatrix {
        &self.p_b
    }

    pub fn q_b(&self) -> &ComplexMatrix {
        &self.q_b
    }

    /// Orthonormal basis of `range(Q_B)`, as columns.
    pub fn range_q_b(&self) -> &ComplexMatrix {
        &self.range_q_b
    }

    pub(crate) fn na(&self) -> usize {
        self.space.dim_a() * self.space.dim_a()
    }

    /// Largest deviation from `P^2 = P`, `Q^2 = Q`, `PQ = QP = 0`, `P + Q = 1`.
    pub fn algebra_residual(&self) -> f64 {
        let (p, q) = (self.p.matrix(), self.q.matrix());
        let n = p.rows();
        let zero = ComplexMatrix::zeros(n, n);
        [
            (p * p).max_abs_diff(p),
            (q * q).max_abs_diff(q),
            (p * q).max_abs_diff(&zero),
            (q * p).max_abs_diff(&zero),
            (p + q).max_abs_diff(&ComplexMatrix::identity(n)),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    fn verify_algebra(&self, tol: f64) -> Result<()> {
        let r = self.algebra_residual();
        if r > tol {
            return Err(Error::NumericalFailure(format!("projector algebra violated by {r:.3e}")));
        }
        Ok(())
    }

    /// `P m`.
    pub(crate) fn left_p(&self, m: &ComplexMatrix) -> ComplexMatrix {
        id_kron_mul(self.na(), &self.p_b, m)
    }

    /// `m P`.
    pub(crate) fn right_p(&self, m: &ComplexMatrix) -> ComplexMatrix {
        mul_id_kron(m, self.na(), &self.p_b)
    }

    /// `(1 ⊗ <<1_B|) m (1 ⊗ |rho_b>>)`: the slow-subsystem matrix of a
    /// P-supported superoperator.
    pub fn reduce(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let na = self.na();
        let db = self.space.dim_b();
        let nb = db * db;
        let rho = self.rho_b.as_slice();
        ComplexMatrix::from_fn(na, na, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..db {
                let row = m.row(i * nb + b * db + b);
                acc += row[j * nb..(j + 1) * nb].iter().zip(rho).map(|(x, r)| x * r).sum::<C64>();
            }
            acc
        })
    }

    /// `(1 ⊗ |rho_b>>) m_a (1 ⊗ <<1_B|)`, the inverse of [`Self::reduce`]
    /// on P-supported operators.
    pub fn lift(&self, m_a: &ComplexMatrix) -> ComplexMatrix {
        kron(m_a, &self.p_b)
    }
}
