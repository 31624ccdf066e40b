use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::state::{identity_vec, DensityVec};
use super::{BipartiteSpace, Space, VecOrdering};
use crate::error::{shape_err, Error, Result};
use crate::numkernel::{kron, ComplexMatrix};

const HERMITIAN_TOL: f64 = 1e-12;

/// A `d^2 x d^2` matrix acting on vectorized operators, tagged with the space
/// it acts on and the vector ordering it was built in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperOp {
    matrix: ComplexMatrix,
    ordering: VecOrdering,
    space: Space,
}

impl SuperOp {
    pub fn new(matrix: ComplexMatrix, ordering: VecOrdering, space: Space) -> Result<Self> {
        let n = space.liouville_dim();
        if matrix.shape() != (n, n) {
            return Err(shape_err(
                "SuperOp::new",
                format!("{}x{} matrix for Liouville dimension {n}", matrix.rows(), matrix.cols()),
            ));
        }
        if matches!(space, Space::Single(_)) && ordering == VecOrdering::Grouped {
            return Err(Error::MissingBipartite);
        }
        Ok(Self { matrix, ordering, space })
    }

    pub fn zeros(space: Space, ordering: VecOrdering) -> Result<Self> {
        let n = space.liouville_dim();
        Self::new(ComplexMatrix::zeros(n, n), ordering, space)
    }

    pub fn identity(space: Space, ordering: VecOrdering) -> Result<Self> {
        Self::new(ComplexMatrix::identity(space.liouville_dim()), ordering, space)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn ordering(&self) -> VecOrdering {
        self.ordering
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// Same space and ordering as `self`, with a new matrix.
    pub fn with_matrix(&self, matrix: ComplexMatrix) -> Result<Self> {
        Self::new(matrix, self.ordering, self.space)
    }

    fn wrap(&self, matrix: ComplexMatrix) -> Self {
        Self { matrix, ordering: self.ordering, space: self.space }
    }

    fn check_compatible(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.ordering != other.ordering {
            return Err(Error::OrderingMismatch {
                expected: self.ordering,
                found: other.ordering,
            });
        }
        if self.space != other.space {
            return Err(shape_err(op, format!("{:?} vs {:?}", self.space, other.space)));
        }
        Ok(())
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other, "SuperOp::compose")?;
        Ok(self.wrap(&self.matrix * &other.matrix))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other, "SuperOp::add")?;
        Ok(self.wrap(&self.matrix + &other.matrix))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other, "SuperOp::sub")?;
        Ok(self.wrap(&self.matrix - &other.matrix))
    }

    pub fn scale(&self, s: C64) -> Self {
        self.wrap(self.matrix.scale(s))
    }

    pub fn apply(&self, rho: &DensityVec) -> Result<DensityVec> {
        if rho.ordering() != self.ordering {
            return Err(Error::OrderingMismatch {
                expected: self.ordering,
                found: rho.ordering(),
            });
        }
        if rho.space() != self.space {
            return Err(shape_err("SuperOp::apply", "state lives on a different space"));
        }
        Ok(DensityVec::from_parts(self.matrix.matvec(rho.as_slice()), self.space, self.ordering))
    }

    /// Largest entry of the trace row `<<1| L`.
    pub fn trace_row_residual(&self) -> f64 {
        let one = identity_vec(self.space, self.ordering);
        self.matrix.vecmat(&one).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Hamiltonian plus weighted jump operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LindbladModel {
    hamiltonian: ComplexMatrix,
    jumps: Vec<(ComplexMatrix, f64)>,
}

impl LindbladModel {
    pub fn new(hamiltonian: ComplexMatrix, jumps: Vec<(ComplexMatrix, f64)>) -> Result<Self> {
        if !hamiltonian.is_square() {
            return Err(shape_err("LindbladModel::new", "Hamiltonian is not square"));
        }
        let scale = hamiltonian.max_abs().max(1.0);
        if !hamiltonian.is_hermitian(HERMITIAN_TOL * scale) {
            return Err(Error::InvalidInput("Hamiltonian is not Hermitian".into()));
        }
        let d = hamiltonian.rows();
        for (k, (op, rate)) in jumps.iter().enumerate() {
            if op.shape() != (d, d) {
                return Err(shape_err(
                    "LindbladModel::new",
                    format!("jump {k} is {}x{}, Hamiltonian is {d}x{d}", op.rows(), op.cols()),
                ));
            }
            if !(rate.is_finite() && *rate >= 0.0) {
                return Err(Error::InvalidInput(format!("jump {k} has rate {rate}, expected >= 0")));
            }
        }
        Ok(Self { hamiltonian, jumps })
    }

    /// Purely Hamiltonian model.
    pub fn hamiltonian_only(hamiltonian: ComplexMatrix) -> Result<Self> {
        Self::new(hamiltonian, Vec::new())
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[(ComplexMatrix, f64)] {
        &self.jumps
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.rows()
    }
}

/// `rho -> o1 rho o2^†` as the flat-ordered matrix `conj(o2) ⊗ o1`.
pub fn sandwich(o1: &ComplexMatrix, o2: &ComplexMatrix) -> Result<SuperOp> {
    if !o1.is_square() || o1.shape() != o2.shape() {
        return Err(shape_err(
            "sandwich",
            format!("{}x{} and {}x{}", o1.rows(), o1.cols(), o2.rows(), o2.cols()),
        ));
    }
    SuperOp::new(kron(&o2.conj(), o1), VecOrdering::Flat, Space::Single(o1.rows()))
}

/// `-i[H, .] + sum_k r_k D[X_k]` with `D[X] rho = X rho X^† - {X^†X, rho}/2`,
/// in flat ordering on a single space.
pub fn lindblad_superop(model: &LindbladModel) -> Result<SuperOp> {
    let d = model.dim();
    let id = ComplexMatrix::identity(d);
    let minus_i = C64::new(0.0, -1.0);
    let h = model.hamiltonian();
    let mut l = (&sandwich(h, &id)?.into_matrix() - &sandwich(&id, h)?.into_matrix()).scale(minus_i);
    for (x, rate) in model.jumps() {
        if *rate == 0.0 {
            continue;
        }
        let xdx = &x.adjoint() * x;
        let mut d_x = sandwich(x, x)?.into_matrix();
        d_x -= &sandwich(&xdx, &id)?.into_matrix().scale_real(0.5);
        d_x -= &sandwich(&id, &xdx)?.into_matrix().scale_real(0.5);
        l += &d_x.scale_real(*rate);
    }
    SuperOp::new(l, VecOrdering::Flat, Space::Single(d))
}

/// Converts between flat and grouped ordering; the tag flips, so applying
/// it twice is the identity.
pub fn grouped_reorder(s: &SuperOp) -> Result<SuperOp> {
    let sp = s.space().bipartite()?;
    let perm = sp.flat_to_grouped();
    let n = perm.len();
    let m = s.matrix();
    let out = match s.ordering() {
        VecOrdering::Flat => {
            let mut out = ComplexMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    out[(perm[i], perm[j])] = m[(i, j)];
                }
            }
            out
        }
        VecOrdering::Grouped => ComplexMatrix::from_fn(n, n, |i, j| m[(perm[i], perm[j])]),
    };
    SuperOp::new(out, s.ordering().flipped(), s.space())
}

/// Lifts a single-space flat superoperator on the full Hilbert space to a
/// bipartite grouped one.
pub(crate) fn to_grouped_bipartite(s: &SuperOp, space: BipartiteSpace) -> Result<SuperOp> {
    if s.space() != Space::Single(space.dim()) {
        return Err(shape_err(
            "to_grouped_bipartite",
            format!("{:?} does not match total dimension {}", s.space(), space.dim()),
        ));
    }
    let flat = SuperOp::new(s.matrix().clone(), VecOrdering::Flat, space.into())?;
    grouped_reorder(&flat)
}

/// `L = L_A ⊗ 1 + 1 ⊗ L_B + L_AB`, kept as separate pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteLindblad {
    space: BipartiteSpace,
    local_a: SuperOp,
    local_b: SuperOp,
    coupling: SuperOp,
}

impl BipartiteLindblad {
    /// `local_a`, `local_b` act on the single factors; `coupling` acts on the
    /// full space in grouped ordering.
    pub fn new(space: BipartiteSpace, local_a: SuperOp, local_b: SuperOp, coupling: SuperOp) -> Result<Self> {
        if local_a.space() != Space::Single(space.dim_a()) {
            return Err(shape_err("BipartiteLindblad::new", "L_A does not act on H_A"));
        }
        if local_b.space() != Space::Single(space.dim_b()) {
            return Err(shape_err("BipartiteLindblad::new", "L_B does not act on H_B"));
        }
        if coupling.space() != Space::Bipartite(space) {
            return Err(shape_err("BipartiteLindblad::new", "L_AB does not act on H_A ⊗ H_B"));
        }
        if coupling.ordering() != VecOrdering::Grouped {
            return Err(Error::OrderingMismatch {
                expected: VecOrdering::Grouped,
                found: coupling.ordering(),
            });
        }
        Ok(Self { space, local_a, local_b, coupling })
    }

    /// Builds all three pieces from Lindblad models; the coupling model
    /// lives on the full Hilbert space `H_A ⊗ H_B`.
    pub fn from_models(
        space: BipartiteSpace,
        model_a: &LindbladModel,
        model_b: &LindbladModel,
        coupling: &LindbladModel,
    ) -> Result<Self> {
        let coupling = to_grouped_bipartite(&lindblad_superop(coupling)?, space)?;
        Self::new(space, lindblad_superop(model_a)?, lindblad_superop(model_b)?, coupling)
    }

    pub fn space(&self) -> BipartiteSpace {
        self.space
    }

    pub fn local_a(&self) -> &SuperOp {
        &self.local_a
    }

    pub fn local_b(&self) -> &SuperOp {
        &self.local_b
    }

    pub fn coupling(&self) -> &SuperOp {
        &self.coupling
    }

    /// `L_A ⊗ 1_{dB^2}` in grouped ordering.
    pub fn lifted_a(&self) -> SuperOp {
        let idb = ComplexMatrix::identity(self.space.dim_b() * self.space.dim_b());
        self.grouped(kron(self.local_a.matrix(), &idb))
    }

    /// `1_{dA^2} ⊗ L_B` in grouped ordering.
    pub fn lifted_b(&self) -> SuperOp {
        let ida = ComplexMatrix::identity(self.space.dim_a() * self.space.dim_a());
        self.grouped(kron(&ida, self.local_b.matrix()))
    }

    /// The full generator in grouped ordering.
    pub fn full(&self) -> SuperOp {
        let mut m = self.lifted_a().into_matrix();
        m += self.lifted_b().matrix();
        m += self.coupling.matrix();
        self.grouped(m)
    }

    fn grouped(&self, m: ComplexMatrix) -> SuperOp {
        SuperOp { matrix: m, ordering: VecOrdering::Grouped, space: self.space.into() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{unvec, vec};
    use crate::numkernel::eigenvalues;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sigma_minus() -> ComplexMatrix {
        ComplexMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]])
    }

    #[test]
    fn sandwich_identity_and_decay() {
        let id = ComplexMatrix::identity(2);
        assert_eq!(sandwich(&id, &id).unwrap().into_matrix(), ComplexMatrix::identity(4));
        let sm = sigma_minus();
        let excited = ComplexMatrix::from_real(&[&[0.0, 0.0], &[0.0, 1.0]]);
        let out = sandwich(&sm, &sm).unwrap().matrix().matvec(&vec(&excited).unwrap());
        let ground = ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert_eq!(unvec(&out, 2).unwrap(), ground);
    }

    #[test]
    fn decay_spectrum() {
        let model = LindbladModel::new(ComplexMatrix::zeros(2, 2), vec![(sigma_minus(), 1.0)]).unwrap();
        let l = lindblad_superop(&model).unwrap();
        let mut ev: Vec<f64> = eigenvalues(l.matrix()).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        let expected = [-1.0, -0.5, -0.5, 0.0];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
        assert!(l.trace_row_residual() < 1e-15);
        let empty = LindbladModel::hamiltonian_only(ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(lindblad_superop(&empty).unwrap().matrix().max_abs(), 0.0);
    }

    proptest::proptest! {
        #[test]
        fn sandwich_acts_as_product(entries in proptest::collection::vec(-1.0f64..1.0, 54)) {
            let m = |k: usize| ComplexMatrix::from_fn(3, 3, |i, j| c(entries[k + 6 * (3 * i + j)], entries[k + 6 * (3 * i + j) + 1]));
            let (o1, o2, rho) = (m(0), m(2), m(4));
            let lhs = sandwich(&o1, &o2).unwrap().matrix().matvec(&vec(&rho).unwrap());
            let rhs = vec(&(&(&o1 * &rho) * &o2.adjoint())).unwrap();
            proptest::prop_assert!(lhs.iter().zip(&rhs).all(|(a, b)| (a - b).norm() < 1e-14));
        }
    }

    #[test]
    fn model_validation() {
        let h = ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(LindbladModel::hamiltonian_only(h).is_err());
        let id = ComplexMatrix::identity(2);
        assert!(LindbladModel::new(id.clone(), vec![(sigma_minus(), -1.0)]).is_err());
        assert!(LindbladModel::new(id, vec![(ComplexMatrix::identity(3), 1.0)]).is_err());
    }

    #[test]
    fn ordering_mismatch_is_an_error() {
        let sp = BipartiteSpace::new(2, 2).unwrap();
        let a = SuperOp::identity(sp.into(), VecOrdering::Flat).unwrap();
        let b = grouped_reorder(&a).unwrap();
        assert!(matches!(a.compose(&b), Err(Error::OrderingMismatch { .. })));
        assert!(matches!(a.add(&b), Err(Error::OrderingMismatch { .. })));
        let single = SuperOp::identity(Space::Single(4), VecOrdering::Flat).unwrap();
        assert!(matches!(grouped_reorder(&single), Err(Error::MissingBipartite)));
    }

    #[test]
    fn grouped_product_is_kron_of_locals() {
        // A local superoperator on the full space equals its grouped kron form.
        let sp = BipartiteSpace::new(2, 3).unwrap();
        let ha = ComplexMatrix::from_real(&[&[0.3, 1.0], &[1.0, -0.2]]);
        let hb = ComplexMatrix::from_real(&[&[0.0, 0.5, 0.0], &[0.5, 1.0, 0.1], &[0.0, 0.1, 2.0]]);
        let ma = LindbladModel::new(ha.clone(), vec![(sigma_minus(), 0.7)]).unwrap();
        let mb = LindbladModel::hamiltonian_only(hb.clone()).unwrap();
        let zero = LindbladModel::hamiltonian_only(ComplexMatrix::zeros(6, 6)).unwrap();
        let bl = BipartiteLindblad::from_models(sp, &ma, &mb, &zero).unwrap();

        let id2 = ComplexMatrix::identity(2);
        let id3 = ComplexMatrix::identity(3);
        let full_model = LindbladModel::new(
            &kron(&ha, &id3) + &kron(&id2, &hb),
            vec![(kron(&sigma_minus(), &id3), 0.7)],
        )
        .unwrap();
        let direct = to_grouped_bipartite(&lindblad_superop(&full_model).unwrap(), sp).unwrap();
        assert!(direct.matrix().max_abs_diff(bl.full().matrix()) < 1e-14);
    }
}
