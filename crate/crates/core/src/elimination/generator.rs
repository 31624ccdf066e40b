use super::blocks::{decompose, BlockDecomposition};
use super::inverse::{invert_qlq, InversionMethod, QlqInverse};
use super::projectors::{build_projectors, ProjectorPair};
use crate::error::{shape_err, Error, Result};
use crate::liouville::{
    embed_product, identity_vec, BipartiteLindblad, BipartiteSpace, DensityVec, Space, SuperOp,
    VecOrdering,
};
use crate::numkernel::{condition_number, id_kron_mul, inverse, mul_id_kron, ComplexMatrix};
use crate::simulate::{propagate_vectors, Trajectory};

/// `1 - L1` is treated as singular above this condition number.
pub const MAX_RESOLVENT_CONDITION: f64 = 1e12;

/// Slow-subsystem generator `L0`, its first correction `L1` and the
/// resolved generator `(1 - L1)^{-1} L0`.
///
/// All full-space operators are P-supported, so each one is the lift of
/// its `dA^2 x dA^2` reduced matrix; the reduced matrices are exact, not
/// approximations of the full ones.
#[derive(Debug, Clone)]
pub struct EffectiveGenerator {
    pub order: usize,
    pub l0: SuperOp,
    pub l1: SuperOp,
    /// `L_2 .. L_n` for `order >= 2`. Computed but not validated.
    pub higher: Vec<SuperOp>,
    /// `(1 - L1)^{-1} L0` for `order >= 1`, `L0` otherwise.
    pub resolved: SuperOp,
    /// `(1 - L1)^{-1}` for `order >= 1`, the identity otherwise.
    pub initial_map: SuperOp,
    pub reduced_l0: ComplexMatrix,
    pub reduced_l1: ComplexMatrix,
    pub reduced_generator: ComplexMatrix,
    pub reduced_initial_map: ComplexMatrix,
    /// Condition number of `1 - L1` restricted to the range of `P`.
    pub condition: f64,
    /// `order <= 1`, the range the construction is checked for.
    pub validated: bool,
    space: BipartiteSpace,
    rho_b: DensityVec,
}

/// Everything produced while eliminating the fast subsystem.
#[derive(Debug, Clone)]
pub struct EliminationResult {
    pub projectors: ProjectorPair,
    pub blocks: BlockDecomposition,
    pub inverse: QlqInverse,
    pub generator: EffectiveGenerator,
}

/// `L0 = PLP - PLQ X QLP`, `L_k = -PLQ X^{k+1} QLP` from a precomputed
/// inverse `X` of `QLQ`.
pub fn generator_from_parts(
    blocks: &BlockDecomposition,
    pq: &ProjectorPair,
    inv: &QlqInverse,
    order: usize,
) -> Result<EffectiveGenerator> {
    let na = pq.na();
    let db = pq.space().dim_b();
    let one_b = ComplexMatrix::new(1, db * db, identity_vec(Space::Single(db), VecOrdering::Flat))?;
    let rho_col = ComplexMatrix::column(pq.rho_b().as_slice());
    let x = inv.operator.matrix();

    // (1 ⊗ <<1_B|) PLQ and QLP (1 ⊗ |rho_b>>)
    let left = id_kron_mul(na, &one_b, blocks.plq.matrix());
    let right = mul_id_kron(blocks.qlp.matrix(), na, &rho_col);

    let mut chain = &left * x;
    let reduced_l0 = &pq.reduce(blocks.plp.matrix()) - &(&chain * &right);
    let mut reduced_corrections = Vec::with_capacity(order.max(1));
    for _ in 0..order.max(1) {
        chain = &chain * x;
        reduced_corrections.push((&chain * &right).scale_real(-1.0));
    }
    let reduced_l1 = reduced_corrections[0].clone();

    let id = ComplexMatrix::identity(na);
    let (reduced_generator, reduced_initial_map, condition) = if order == 0 {
        (reduced_l0.clone(), id.clone(), 1.0)
    } else {
        let one_minus = &id - &reduced_l1;
        let condition = condition_number(&one_minus)?;
        if !(condition <= MAX_RESOLVENT_CONDITION) {
            return Err(Error::SingularResolvent { condition });
        }
        let m = inverse(&one_minus)?;
        (&m * &reduced_l0, m, condition)
    };

    let lift = |m: &ComplexMatrix| blocks.plp.with_matrix(pq.lift(m));
    let full_id = ComplexMatrix::identity(na * db * db);
    let initial_map = &full_id + &pq.lift(&(&reduced_initial_map - &id));
    Ok(EffectiveGenerator {
        order,
        l0: lift(&reduced_l0)?,
        l1: lift(&reduced_l1)?,
        higher: reduced_corrections.iter().skip(1).map(lift).collect::<Result<_>>()?,
        resolved: lift(&reduced_generator)?,
        initial_map: blocks.plp.with_matrix(initial_map)?,
        reduced_l0,
        reduced_l1,
        reduced_generator,
        reduced_initial_map,
        condition,
        validated: order <= 1,
        space: pq.space(),
        rho_b: pq.rho_b().clone(),
    })
}

/// Projects, decomposes, inverts and builds the effective generator for a
/// grouped generator `l`. `local_b` is needed by the factorized and
/// perturbative inverses.
pub fn effective_generator(
    l: &SuperOp,
    pq: &ProjectorPair,
    local_b: Option<&SuperOp>,
    method: InversionMethod,
    order: usize,
) -> Result<EliminationResult> {
    let blocks = decompose(l, pq, local_b)?;
    let inverse = invert_qlq(&blocks, pq, method)?;
    let generator = generator_from_parts(&blocks, pq, &inverse, order)?;
    Ok(EliminationResult {
        projectors: pq.clone(),
        blocks,
        inverse,
        generator,
    })
}

/// [`effective_generator`] for a bipartite model with reference state `rho_b`.
pub fn eliminate(
    model: &BipartiteLindblad,
    rho_b: &DensityVec,
    method: InversionMethod,
    order: usize,
) -> Result<EliminationResult> {
    let pq = build_projectors(rho_b, model.space())?;
    effective_generator(&model.full(), &pq, Some(model.local_b()), method, order)
}

impl EffectiveGenerator {
    pub fn space(&self) -> BipartiteSpace {
        self.space
    }

    pub fn rho_b(&self) -> &DensityVec {
        &self.rho_b
    }

    /// Largest entry of `<<1_A| L0_reduced`.
    pub fn trace_residual(&self) -> f64 {
        let one = identity_vec(Space::Single(self.space.dim_a()), VecOrdering::Flat);
        self.reduced_l0.vecmat(&one).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn check_initial(&self, rho0_a: &DensityVec) -> Result<()> {
        if rho0_a.space() != Space::Single(self.space.dim_a()) {
            return Err(shape_err("effective_propagate", "initial state is not on the slow subsystem"));
        }
        rho0_a.check_normalized(1e-10)
    }

    /// The slow state right after the fast subsystem has relaxed:
    /// `(1 - L1)^{-1}` applied to `rho0_A`.
    pub fn modified_initial_state(&self, rho0_a: &DensityVec) -> Result<DensityVec> {
        self.check_initial(rho0_a)?;
        DensityVec::new(
            self.reduced_initial_map.matvec(rho0_a.as_slice()),
            rho0_a.space(),
            VecOrdering::Flat,
        )
    }

    /// `(1 - L1)^{-1} (rho0_A ⊗ rho_b)` on the full space.
    pub fn embedded_initial_state(&self, rho0_a: &DensityVec) -> Result<DensityVec> {
        self.check_initial(rho0_a)?;
        self.initial_map.apply(&embed_product(rho0_a, &self.rho_b)?)
    }
}

/// Slow-subsystem trajectory `exp(G t) (1 - L1)^{-1} rho0_A` with `G` the
/// resolved reduced generator.
pub fn effective_propagate(eg: &EffectiveGenerator, rho0_a: &DensityVec, times: &[f64]) -> Result<Trajectory> {
    let start = eg.modified_initial_state(rho0_a)?;
    let states = propagate_vectors(&eg.reduced_generator, start.as_slice(), times)?
        .into_iter()
        .map(|v| DensityVec::new(v, start.space(), VecOrdering::Flat))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(times.to_vec(), states)
}
