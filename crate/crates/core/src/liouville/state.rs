use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::superop::SuperOp;
use super::{BipartiteSpace, Space, VecOrdering};
use crate::error::{shape_err, Error, Result};
use crate::numkernel::{kron_vec, nullspace, ComplexMatrix};

/// Relative rank tolerance used to extract generator kernels.
pub const KERNEL_RANK_TOL: f64 = 1e-10;

/// Column-stacking vectorization: `vec(M)[j*d + i] = M[i][j]`.
pub fn vec(m: &ComplexMatrix) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(shape_err("vec", format!("{}x{} is not square", m.rows(), m.cols())));
    }
    let d = m.rows();
    Ok((0..d * d).map(|k| m[(k % d, k / d)]).collect())
}

pub fn unvec(v: &[C64], d: usize) -> Result<ComplexMatrix> {
    if d == 0 || v.len() != d * d {
        return Err(shape_err("unvec", format!("length {} for dimension {d}", v.len())));
    }
    Ok(ComplexMatrix::from_fn(d, d, |i, j| v[j * d + i]))
}

/// `<<1|`, i.e. `vec` of the identity, in the requested ordering.
pub fn identity_vec(space: Space, ordering: VecOrdering) -> Vec<C64> {
    match (space, ordering) {
        (Space::Bipartite(b), VecOrdering::Grouped) => kron_vec(
            &identity_vec(Space::Single(b.dim_a()), VecOrdering::Flat),
            &identity_vec(Space::Single(b.dim_b()), VecOrdering::Flat),
        ),
        _ => {
            let d = space.dim();
            (0..d * d)
                .map(|k| if k % d == k / d { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
                .collect()
        }
    }
}

fn reorder_vec(v: &[C64], space: BipartiteSpace, from: VecOrdering) -> Vec<C64> {
    let perm = space.flat_to_grouped();
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    match from {
        VecOrdering::Flat => {
            for (f, &g) in perm.iter().enumerate() {
                out[g] = v[f];
            }
        }
        VecOrdering::Grouped => {
            for (f, &g) in perm.iter().enumerate() {
                out[f] = v[g];
            }
        }
    }
    out
}

/// A vectorized operator, typically a density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityVec {
    data: Vec<C64>,
    space: Space,
    ordering: VecOrdering,
}

impl DensityVec {
    pub fn new(data: Vec<C64>, space: Space, ordering: VecOrdering) -> Result<Self> {
        if data.len() != space.liouville_dim() {
            return Err(shape_err(
                "DensityVec::new",
                format!("length {} for Liouville dimension {}", data.len(), space.liouville_dim()),
            ));
        }
        if matches!(space, Space::Single(_)) && ordering == VecOrdering::Grouped {
            return Err(Error::MissingBipartite);
        }
        if data.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidInput("state has non-finite entries".into()));
        }
        Ok(Self { data, space, ordering })
    }

    pub(crate) fn from_parts(data: Vec<C64>, space: Space, ordering: VecOrdering) -> Self {
        debug_assert_eq!(data.len(), space.liouville_dim());
        Self { data, space, ordering }
    }

    /// Operator on a single space.
    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        let d = m.rows();
        Self::new(vec(m)?, Space::Single(d), VecOrdering::Flat)
    }

    /// Operator on `H_A ⊗ H_B`, stored in grouped ordering.
    pub fn from_matrix_bipartite(m: &ComplexMatrix, space: BipartiteSpace) -> Result<Self> {
        if m.shape() != (space.dim(), space.dim()) {
            return Err(shape_err("DensityVec::from_matrix_bipartite", "matrix does not match the space"));
        }
        let flat = vec(m)?;
        Self::new(reorder_vec(&flat, space, VecOrdering::Flat), space.into(), VecOrdering::Grouped)
    }

    /// Pure state `|psi><psi|`, normalized.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let n: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidInput("state vector has zero or non-finite norm".into()));
        }
        let d = psi.len();
        let m = ComplexMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / (n * n));
        Self::from_matrix(&m)
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn ordering(&self) -> VecOrdering {
        self.ordering
    }

    pub fn with_ordering(&self, ordering: VecOrdering) -> Result<Self> {
        if ordering == self.ordering {
            return Ok(self.clone());
        }
        let sp = self.space.bipartite()?;
        Ok(Self::from_parts(reorder_vec(&self.data, sp, self.ordering), self.space, ordering))
    }

    /// Matrix form on the full Hilbert space.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let flat = match self.ordering {
            VecOrdering::Flat => std::borrow::Cow::Borrowed(&self.data),
            VecOrdering::Grouped => {
                let sp = self.space.bipartite().expect("grouped states are bipartite");
                std::borrow::Cow::Owned(reorder_vec(&self.data, sp, VecOrdering::Grouped))
            }
        };
        unvec(&flat, self.space.dim()).expect("length checked at construction")
    }

    pub fn trace(&self) -> C64 {
        identity_vec(self.space, self.ordering)
            .iter()
            .zip(&self.data)
            .map(|(o, r)| o * r)
            .sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.to_matrix().is_hermitian(tol)
    }

    /// Errors unless the trace is 1 within `tol`.
    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let t = self.trace();
        if (t - C64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::NotNormalized { trace: t.re });
        }
        Ok(())
    }

    /// Divides by the trace.
    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t.norm() < 1e-300 {
            return Err(Error::NotNormalized { trace: t.re });
        }
        Ok(Self::from_parts(self.data.iter().map(|z| z / t).collect(), self.space, self.ordering))
    }

    /// `(M + M^†) / 2`.
    pub fn hermitized(&self) -> Self {
        let m = self.to_matrix();
        let h = (&m + &m.adjoint()).scale_real(0.5);
        let flat = vec(&h).expect("square");
        let data = match self.ordering {
            VecOrdering::Flat => flat,
            VecOrdering::Grouped => {
                let sp = self.space.bipartite().expect("grouped states are bipartite");
                reorder_vec(&flat, sp, VecOrdering::Flat)
            }
        };
        Self::from_parts(data, self.space, self.ordering)
    }

    /// Trace distance `||A - B||_1 / 2` between the operator forms.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if self.space.dim() != other.space.dim() {
            return Err(shape_err("trace_distance", "states live on different spaces"));
        }
        let diff = &self.to_matrix() - &other.to_matrix();
        let h = (&diff + &diff.adjoint()).scale_real(0.5);
        let ev = crate::numkernel::hermitian_eigenvalues(&h)?;
        Ok(0.5 * ev.iter().map(|x| x.abs()).sum::<f64>())
    }

    /// `tr(O rho)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<C64> {
        let m = self.to_matrix();
        if op.shape() != m.shape() {
            return Err(shape_err(
                "expectation",
                format!("{}x{} observable on a {}-dimensional state", op.rows(), op.cols(), m.rows()),
            ));
        }
        Ok((op * &m).trace())
    }
}

/// `vec(rho_A) ⊗ vec(rho_B)`, the grouped vector of `rho_A ⊗ rho_B`.
pub fn embed_product(rho_a: &DensityVec, rho_b: &DensityVec) -> Result<DensityVec> {
    let space = BipartiteSpace::new(rho_a.space.dim(), rho_b.space.dim())?;
    if rho_a.ordering != VecOrdering::Flat || rho_b.ordering != VecOrdering::Flat {
        return Err(shape_err("embed_product", "factors must be single-space states"));
    }
    Ok(DensityVec::from_parts(kron_vec(&rho_a.data, &rho_b.data), space.into(), VecOrdering::Grouped))
}

fn grouped_parts(rho: &DensityVec) -> Result<BipartiteSpace> {
    let sp = rho.space.bipartite()?;
    if rho.ordering != VecOrdering::Grouped {
        return Err(Error::OrderingMismatch {
            expected: VecOrdering::Grouped,
            found: rho.ordering,
        });
    }
    Ok(sp)
}

/// `tr_B`, contracting the `B ⊗ B` factor with `<<1_B|`.
pub fn partial_trace_b(rho: &DensityVec) -> Result<DensityVec> {
    let sp = grouped_parts(rho)?;
    let (na, nb) = (sp.dim_a() * sp.dim_a(), sp.dim_b() * sp.dim_b());
    let db = sp.dim_b();
    let out = (0..na)
        .map(|i| (0..db).map(|b| rho.data[i * nb + b * db + b]).sum())
        .collect();
    Ok(DensityVec::from_parts(out, Space::Single(sp.dim_a()), VecOrdering::Flat))
}

/// `tr_A`, contracting the `A ⊗ A` factor with `<<1_A|`.
pub fn partial_trace_a(rho: &DensityVec) -> Result<DensityVec> {
    let sp = grouped_parts(rho)?;
    let nb = sp.dim_b() * sp.dim_b();
    let da = sp.dim_a();
    let out = (0..nb)
        .map(|k| (0..da).map(|a| rho.data[(a * da + a) * nb + k]).sum())
        .collect();
    Ok(DensityVec::from_parts(out, Space::Single(sp.dim_b()), VecOrdering::Flat))
}

#[derive(Debug, Clone, PartialEq)]
pub enum SteadyState {
    /// One-dimensional kernel: the trace-normalized, Hermitized state.
    Unique(DensityVec),
    /// Orthonormal kernel basis; no state is singled out.
    Degenerate(Vec<DensityVec>),
}

impl SteadyState {
    pub fn kernel_dim(&self) -> usize {
        match self {
            Self::Unique(_) => 1,
            Self::Degenerate(b) => b.len(),
        }
    }

    pub fn unique(self) -> Option<DensityVec> {
        match self {
            Self::Unique(s) => Some(s),
            Self::Degenerate(_) => None,
        }
    }
}

pub fn steady_state(l: &SuperOp) -> Result<SteadyState> {
    steady_state_with_tol(l, KERNEL_RANK_TOL)
}

/// Kernel of a trace-preserving generator, with `rank_tol` relative to the
/// largest singular value.
pub fn steady_state_with_tol(l: &SuperOp, rank_tol: f64) -> Result<SteadyState> {
    let residual = l.trace_row_residual();
    if residual > 1e-10 * l.matrix().max_abs().max(1.0) {
        return Err(Error::NotTracePreserving { residual });
    }
    let basis = nullspace(l.matrix(), rank_tol)?.ok_or(Error::EmptyKernel)?;
    let wrap = |j: usize| DensityVec::from_parts(basis.column_vec(j), l.space(), l.ordering());
    if basis.cols() > 1 {
        return Ok(SteadyState::Degenerate((0..basis.cols()).map(wrap).collect()));
    }
    let v = wrap(0);
    if v.trace().norm() < 1e-8 {
        return Err(Error::NumericalFailure("kernel vector is traceless".into()));
    }
    Ok(SteadyState::Unique(v.normalized()?.hermitized().normalized()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{lindblad_superop, LindbladModel};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn real(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| c(x, 0.0)).collect()
    }

    #[test]
    fn vec_examples() {
        let m = ComplexMatrix::from_real(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(vec(&m).unwrap(), real(&[1.0, 3.0, 2.0, 4.0]));
        assert_eq!(vec(&ComplexMatrix::identity(2)).unwrap(), real(&[1.0, 0.0, 0.0, 1.0]));
        let ket0bra1 = ComplexMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(vec(&ket0bra1).unwrap(), real(&[0.0, 0.0, 1.0, 0.0]));
        assert_eq!(unvec(&real(&[1.0, 3.0, 2.0, 4.0]), 2).unwrap(), m);
        assert!(unvec(&real(&[1.0, 2.0, 3.0]), 2).is_err());
        assert!(vec(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
        let m = ComplexMatrix::from_fn(4, 4, |i, j| psi[i] * psi[j].conj());
        let sp = BipartiteSpace::new(2, 2).unwrap();
        let rho = DensityVec::from_matrix_bipartite(&m, sp).unwrap();
        let half = real(&[0.5, 0.0, 0.0, 0.5]);
        assert!(partial_trace_b(&rho).unwrap().as_slice().iter().zip(&half).all(|(a, b)| (a - b).norm() < 1e-15));
        assert!(partial_trace_a(&rho).unwrap().as_slice().iter().zip(&half).all(|(a, b)| (a - b).norm() < 1e-15));

        let mixed = DensityVec::from_matrix_bipartite(&ComplexMatrix::identity(4).scale_real(0.5), sp).unwrap();
        assert_eq!(partial_trace_b(&mixed).unwrap().as_slice(), &real(&[1.0, 0.0, 0.0, 1.0])[..]);
        let flat = mixed.with_ordering(VecOrdering::Flat).unwrap();
        assert!(matches!(partial_trace_b(&flat), Err(Error::OrderingMismatch { .. })));
    }

    #[test]
    fn asymmetric_partial_traces_match_direct_sums() {
        let sp = BipartiteSpace::new(2, 3).unwrap();
        let m = ComplexMatrix::from_fn(6, 6, |i, j| c((i * 6 + j) as f64, (i as f64) - (j as f64)));
        let rho = DensityVec::from_matrix_bipartite(&m, sp).unwrap();
        let ta = partial_trace_b(&rho).unwrap().to_matrix();
        let tb = partial_trace_a(&rho).unwrap().to_matrix();
        for a1 in 0..2 {
            for a2 in 0..2 {
                let direct: C64 = (0..3).map(|b| m[(a1 * 3 + b, a2 * 3 + b)]).sum();
                assert_eq!(ta[(a1, a2)], direct);
            }
        }
        for b1 in 0..3 {
            for b2 in 0..3 {
                let direct: C64 = (0..2).map(|a| m[(a * 3 + b1, a * 3 + b2)]).sum();
                assert_eq!(tb[(b1, b2)], direct);
            }
        }
    }

    #[test]
    fn decay_steady_state_is_ground() {
        let sm = ComplexMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let model = LindbladModel::new(ComplexMatrix::zeros(2, 2), vec![(sm, 1.0)]).unwrap();
        let ss = steady_state(&lindblad_superop(&model).unwrap()).unwrap().unique().unwrap();
        let expected = real(&[1.0, 0.0, 0.0, 0.0]);
        assert!(ss.as_slice().iter().zip(&expected).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn zero_generator_is_degenerate() {
        let l = SuperOp::zeros(Space::Single(2), VecOrdering::Flat).unwrap();
        assert_eq!(steady_state(&l).unwrap().kernel_dim(), 4);
    }

    #[test]
    fn non_trace_preserving_is_rejected() {
        let l = SuperOp::new(ComplexMatrix::identity(4).scale_real(-1.0), VecOrdering::Flat, Space::Single(2)).unwrap();
        assert!(matches!(steady_state(&l), Err(Error::NotTracePreserving { .. })));
    }
}
