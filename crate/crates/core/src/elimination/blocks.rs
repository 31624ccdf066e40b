use super::projectors::ProjectorPair;
use crate::error::{shape_err, Error, Result};
use crate::liouville::{BipartiteLindblad, Space, SuperOp, VecOrdering};
use crate::numkernel::ComplexMatrix;

const STATIONARY_TOL: f64 = 1e-10;

/// `PLP`, `PLQ`, `QLP`, `QLQ` of a grouped generator.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub plp: SuperOp,
    pub plq: SuperOp,
    pub qlp: SuperOp,
    pub qlq: SuperOp,
    /// `L_B |rho_b>> = 0`, in which case `QLP = Q L_AB P`.
    pub simplified_qlp: bool,
    /// `Q_B L_B Q_B` on the fast factor, when `L_B` was supplied.
    pub fast_block: Option<ComplexMatrix>,
}

impl BlockDecomposition {
    /// Largest deviation of `PLP + PLQ + QLP + QLQ` from `l`.
    pub fn completeness_residual(&self, l: &SuperOp) -> f64 {
        let mut sum = self.plp.matrix().clone();
        sum += self.plq.matrix();
        sum += self.qlp.matrix();
        sum += self.qlq.matrix();
        sum.max_abs_diff(l.matrix())
    }
}

/// Splits `l` with respect to `pq`. `local_b` is the fast-subsystem
/// generator `L_B` on its own factor; it enables the factorized inverse.
pub fn decompose(l: &SuperOp, pq: &ProjectorPair, local_b: Option<&SuperOp>) -> Result<BlockDecomposition> {
    if l.ordering() != VecOrdering::Grouped {
        return Err(Error::OrderingMismatch {
            expected: VecOrdering::Grouped,
            found: l.ordering(),
        });
    }
    if l.space() != Space::Bipartite(pq.space()) {
        return Err(shape_err("decompose", "generator and projectors live on different spaces"));
    }
    let m = l.matrix();
    let lp = pq.right_p(m);
    let plp = pq.left_p(&lp);
    let qlp = &lp - &plp;
    let lq = m - &lp;
    let plq = pq.left_p(&lq);
    let qlq = &lq - &plq;

    let (simplified_qlp, fast_block) = match local_b {
        None => (false, None),
        Some(lb) => {
            if lb.space() != Space::Single(pq.space().dim_b()) {
                return Err(shape_err("decompose", "L_B does not act on the fast subsystem"));
            }
            let lbm = lb.matrix();
            let residual = lbm
                .matvec(pq.rho_b().as_slice())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            let stationary = residual <= STATIONARY_TOL * lbm.max_abs().max(1.0);
            let fast = &(pq.q_b() * lbm) * pq.q_b();
            (stationary, Some(fast))
        }
    };

    Ok(BlockDecomposition {
        plp: l.with_matrix(plp)?,
        plq: l.with_matrix(plq)?,
        qlp: l.with_matrix(qlp)?,
        qlq: l.with_matrix(qlq)?,
        simplified_qlp,
        fast_block,
    })
}

/// [`decompose`] on the full generator of a bipartite model.
pub fn decompose_model(model: &BipartiteLindblad, pq: &ProjectorPair) -> Result<BlockDecomposition> {
    decompose(&model.full(), pq, Some(model.local_b()))
}
