use serde::{Deserialize, Serialize};

use super::blocks::BlockDecomposition;
use super::projectors::ProjectorPair;
use crate::error::{Error, Result};
use crate::liouville::SuperOp;
use crate::numkernel::{id_kron_mul, kron, mul_id_kron, svd, ComplexMatrix};

/// Relative cutoff below which a singular value of the restricted `QLQ`
/// counts as zero.
pub const QLQ_RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "order")]
pub enum InversionMethod {
    /// Pseudoinverse of `QLQ` on the range of `Q`.
    Exact,
    /// `1 ⊗ (Q_B L_B Q_B)^+`, the dominant fast-subsystem part only.
    Factorized,
    /// Series `sum_{k<=n} D^+ (-V D^+)^k` with `D = 1 ⊗ Q_B L_B Q_B` and
    /// `V = QLQ - D`.
    Perturbative(usize),
}

impl InversionMethod {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Factorized => "factorized",
            Self::Perturbative(_) => "perturbative",
        }
    }
}

#[derive(Debug, Clone)]
pub struct QlqInverse {
    /// `X` with `Q X Q = X`.
    pub operator: SuperOp,
    /// Number of directions of `range(Q)` on which the restricted block
    /// vanishes numerically. Nonzero means slow dynamics leak into `Q`.
    pub rank_deficiency: usize,
    /// Norms of the successive series terms (perturbative method only).
    pub series_increments: Vec<f64>,
    /// The last series term did not shrink.
    pub diverging: bool,
}

/// Inverse of `V^† M V` on `range(V)`, returned as `V K^+ V^† Q` with
/// `V = 1 ⊗ V_B` an orthonormal basis of `range(Q)`.
fn range_inverse(m: &ComplexMatrix, na: usize, pq_v: &ComplexMatrix, p_b: &ComplexMatrix) -> Result<(ComplexMatrix, usize)> {
    let v_adj = pq_v.adjoint();
    let k = mul_id_kron(&id_kron_mul(na, &v_adj, m), na, pq_v);
    let f = svd(&k)?;
    let cutoff = QLQ_RANK_TOL * f.max_singular_value();
    let rank = f.rank(cutoff);
    let k_inv = f.pinv(cutoff);
    let x = mul_id_kron(&id_kron_mul(na, pq_v, &k_inv), na, &v_adj);
    // X Q = X - X P with P = 1 ⊗ P_B.
    let xp = mul_id_kron(&x, na, p_b);
    Ok((&x - &xp, k.rows() - rank))
}

/// `(Q_B L_B Q_B)^+` on `range(Q_B)`.
pub(crate) fn fast_inverse(fast: &ComplexMatrix, pq: &ProjectorPair) -> Result<(ComplexMatrix, usize)> {
    range_inverse(fast, 1, pq.range_q_b(), pq.p_b())
}

pub fn invert_qlq(blocks: &BlockDecomposition, pq: &ProjectorPair, method: InversionMethod) -> Result<QlqInverse> {
    let na = pq.na();
    let qlq = blocks.qlq.matrix();
    let fast = || {
        blocks
            .fast_block
            .as_ref()
            .ok_or(Error::MissingFastGenerator(method.name()))
    };
    let (x, rank_deficiency, series_increments) = match method {
        InversionMethod::Exact => {
            let (x, def) = range_inverse(qlq, na, pq.range_q_b(), pq.p_b())?;
            (x, def, Vec::new())
        }
        InversionMethod::Factorized => {
            let (db_inv, def) = fast_inverse(fast()?, pq)?;
            (kron(&ComplexMatrix::identity(na), &db_inv), def, Vec::new())
        }
        InversionMethod::Perturbative(n) => {
            let fast = fast()?;
            let (db_inv, def) = fast_inverse(fast, pq)?;
            let id_a = ComplexMatrix::identity(na);
            let v = qlq - &kron(&id_a, fast);
            let d_inv = kron(&id_a, &db_inv);
            // W = -V D^+
            let w = mul_id_kron(&v, na, &db_inv).scale_real(-1.0);
            let mut term = d_inv.clone();
            let mut sum = d_inv;
            let mut incr = vec![term.norm()];
            for _ in 0..n {
                term = &term * &w;
                incr.push(term.norm());
                sum += &term;
            }
            (sum, def, incr)
        }
    };
    let diverging = series_increments.len() >= 2 && {
        let k = series_increments.len();
        series_increments[k - 1] >= series_increments[k - 2]
    };
    if !x.is_finite() {
        return Err(Error::NumericalFailure("QLQ inverse has non-finite entries".into()));
    }
    Ok(QlqInverse {
        operator: blocks.qlq.with_matrix(x)?,
        rank_deficiency,
        series_increments,
        diverging,
    })
}
